//! Photomicrograph-to-count pipeline: ISODATA binarization, hole filling,
//! then WUSEM or the classic watershed.

use crate::error::Result;
use crate::morphology::fill_holes;
use crate::raster::{BinaryImage, GrayImage};
use crate::threshold::{binarize, isodata_threshold};
use crate::wusem::{classic_watershed_baseline, segmentation_wusem, WusemParams, WusemResult, DEFAULT_MIN_AREA};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pipeline {
    /// Tracks are darker than the background (etched pits under reflected light).
    pub roi_is_dark: bool,
    pub min_area: usize,
    pub apply_rd_border_rule: bool,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            roi_is_dark: true,
            min_area: DEFAULT_MIN_AREA,
            apply_rd_border_rule: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prepared {
    pub threshold: u8,
    pub mask: BinaryImage,
}

impl Pipeline {
    pub fn prepare(&self, gray: &GrayImage) -> Result<Prepared> {
        let threshold = isodata_threshold(gray)?;
        let mask = fill_holes(&binarize(gray, threshold, self.roi_is_dark));
        Ok(Prepared { threshold, mask })
    }

    pub fn params(&self, r0: u32, dr: u32) -> Result<WusemParams> {
        Ok(WusemParams::new(r0, dr)?
            .with_min_area(self.min_area)
            .with_border_rule(self.apply_rd_border_rule))
    }

    pub fn wusem(&self, mask: &BinaryImage, r0: u32, dr: u32) -> Result<WusemResult> {
        Ok(segmentation_wusem(mask, &self.params(r0, dr)?))
    }

    pub fn baseline(&self, mask: &BinaryImage) -> WusemResult {
        classic_watershed_baseline(mask, self.min_area, self.apply_rd_border_rule)
    }

    /// Threshold, fill and segment one photomicrograph.
    pub fn segment(&self, gray: &GrayImage, r0: u32, dr: u32) -> Result<(Prepared, WusemResult)> {
        let prepared = self.prepare(gray)?;
        let result = self.wusem(&prepared.mask, r0, dr)?;
        Ok((prepared, result))
    }
}
