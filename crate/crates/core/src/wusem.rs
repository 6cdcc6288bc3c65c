//! Watershed using successive erosions as markers (WUSEM).
//!
//! The hole-filled mask is eroded by disks of radius `r0`, `r0 + dr`,
//! `r0 + 2 dr`, ... until nothing survives. Each nonempty erosion is labelled
//! and used as the marker set of one watershed over the negated distance
//! transform of the mask. The per-round label images are then combined: a
//! pixel's combined value is the sequence of labels it received in every
//! round, and connected pixels with equal sequences form one region. Small
//! and lower/right-border regions are dropped before counting.
//!
//! Combining by label sequence rather than by the arithmetic sum of labels
//! gives the same regions whenever the sums of neighbouring regions differ,
//! and it never merges two regions merely because their label sums happen to
//! coincide, so the count does not depend on how each round numbers its
//! regions.
//!
//! Connected components that vanish under the first erosion never receive a
//! marker and are therefore absent from the result, whatever `min_area` is.

use crate::error::{Error, Result};
use crate::labeling::{label_binary, label_equal_values};
use crate::morphology::{clear_rd_border, remove_small};
use crate::raster::{BinaryImage, LabelImage, Raster};
use crate::relief::{edt_squared, negate, regional_minima, watershed, DistanceMap, Relief};

/// Default minimum region area in pixels.
pub const DEFAULT_MIN_AREA: usize = 64;

/// Named `(r0, dr)` parameter pairs.
///
/// `dataset2-stated` and `dataset2-mag1` are two different choices for the
/// same first-magnification images; both are kept.
pub const PRESETS: &[(&str, u32, u32)] = &[
    ("demo", 10, 4),
    ("dataset1-4.5min", 10, 20),
    ("dataset1-8.5min", 10, 14),
    ("dataset2-mag1", 5, 12),
    ("dataset2-mag2", 10, 14),
    ("dataset2-stated", 5, 2),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WusemParams {
    initial_radius: u32,
    delta_radius: u32,
    min_area: usize,
    apply_rd_border_rule: bool,
    keep_iterations: bool,
}

impl WusemParams {
    /// Errors if `delta_radius` is 0, which would never terminate.
    pub fn new(initial_radius: u32, delta_radius: u32) -> Result<Self> {
        if delta_radius == 0 {
            return Err(Error::InvalidParameter("delta_radius must be at least 1".into()));
        }
        Ok(Self {
            initial_radius,
            delta_radius,
            min_area: DEFAULT_MIN_AREA,
            apply_rd_border_rule: true,
            keep_iterations: false,
        })
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|&(_, r0, dr)| Self::new(r0, dr).expect("presets have dr >= 1"))
    }

    pub fn with_min_area(mut self, min_area: usize) -> Self {
        self.min_area = min_area;
        self
    }

    pub fn with_border_rule(mut self, apply: bool) -> Self {
        self.apply_rd_border_rule = apply;
        self
    }

    /// Keep every round's watershed output in [`WusemResult::per_iteration_labels`].
    pub fn keep_iterations(mut self, keep: bool) -> Self {
        self.keep_iterations = keep;
        self
    }

    pub fn initial_radius(&self) -> u32 {
        self.initial_radius
    }

    pub fn delta_radius(&self) -> u32 {
        self.delta_radius
    }

    pub fn min_area(&self) -> usize {
        self.min_area
    }

    pub fn apply_rd_border_rule(&self) -> bool {
        self.apply_rd_border_rule
    }

    /// Erosion radius of round `k`.
    pub fn radius(&self, k: u32) -> u32 {
        self.initial_radius + k * self.delta_radius
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WusemResult {
    /// Final regions, numbered `1..=count` in scan order.
    pub labels: LabelImage,
    pub count: usize,
    /// Number of nonempty erosions (watershed rounds).
    pub iterations: usize,
    pub per_iteration_labels: Option<Vec<LabelImage>>,
}

/// Erosion by `disk(r)` read off the squared distance map: a pixel survives
/// exactly when no background or out-of-image lattice point lies within `r`.
pub fn erode_disk_from_edt(sq_edt: &Raster<u64>, r: u32) -> BinaryImage {
    let r2 = r as u64 * r as u64;
    sq_edt.map(|&d| d > r2)
}

/// Running refinement of per-round label images.
///
/// After each [`Accumulator::add`], two pixels share a nonzero id exactly when
/// they are joined by an 8-connected path along which every round so far
/// assigned the same label sequence.
struct Accumulator {
    ids: LabelImage,
}

impl Accumulator {
    fn new(width: usize, height: usize) -> Self {
        Accumulator {
            ids: LabelImage::new(width, height),
        }
    }

    fn add(&mut self, seg: &LabelImage) {
        let keyed: Raster<u64> = self
            .ids
            .map_indexed(|i, &id| (u64::from(id) << 32) | u64::from(seg.data()[i]));
        self.ids = label_equal_values(&keyed);
    }
}

fn finish(combined: &LabelImage, min_area: usize, border_rule: bool) -> LabelImage {
    let mut labels = remove_small(combined, min_area);
    if border_rule {
        labels = clear_rd_border(&labels);
    }
    labels
}

/// Combines per-round watershed outputs by equal label sequence and applies
/// the area and border filters of `params`.
pub fn combine_segmentations(segmentations: &[LabelImage], params: &WusemParams) -> Result<LabelImage> {
    let first = segmentations
        .first()
        .ok_or_else(|| Error::InvalidParameter("no segmentations to combine".into()))?;
    let mut acc = Accumulator::new(first.width(), first.height());
    for seg in segmentations {
        first.check_shape(seg)?;
        acc.add(seg);
    }
    Ok(finish(&acc.ids, params.min_area, params.apply_rd_border_rule))
}

/// Runs WUSEM on a hole-filled binary photomicrograph.
pub fn segmentation_wusem(bin: &BinaryImage, params: &WusemParams) -> WusemResult {
    let sq = edt_squared(bin);
    let relief = negate(&DistanceMap::from_raster(sq.map(|&d| (d as f64).sqrt())));
    let mut acc = Accumulator::new(bin.width(), bin.height());
    let mut kept = params.keep_iterations.then(Vec::new);
    let mut iterations = 0usize;

    loop {
        let eroded = erode_disk_from_edt(&sq, params.radius(iterations as u32));
        if !eroded.any() {
            break;
        }
        let markers = label_binary(&eroded);
        let seg = watershed(&relief, &markers, bin).expect("markers lie inside the mask");
        acc.add(&seg);
        if let Some(k) = kept.as_mut() {
            k.push(seg);
        }
        iterations += 1;
    }

    let labels = finish(&acc.ids, params.min_area, params.apply_rd_border_rule);
    WusemResult {
        count: labels.count_regions(),
        labels,
        iterations,
        per_iteration_labels: kept,
    }
}

/// Single flooding watershed seeded at every regional minimum of the negated
/// distance transform, followed by the same filters as WUSEM.
pub fn classic_watershed_baseline(bin: &BinaryImage, min_area: usize, apply_rd_border_rule: bool) -> WusemResult {
    let relief: Relief = negate(&crate::relief::edt(bin));
    let minima = regional_minima(&relief, bin).expect("same shape");
    let markers = label_binary(&minima);
    let iterations = usize::from(markers.max_label() > 0);
    let seg = watershed(&relief, &markers, bin).expect("minima lie inside the mask");
    let mut labels = remove_small(&seg, min_area);
    if apply_rd_border_rule {
        labels = clear_rd_border(&labels);
    }
    WusemResult {
        count: labels.count_regions(),
        labels,
        iterations,
        per_iteration_labels: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectCentroid {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// One centroid (mean member pixel coordinate) per label, ordered by id.
pub fn enumerate_objects(labels: &LabelImage) -> Vec<ObjectCentroid> {
    let n = labels.max_label() as usize;
    let mut acc = vec![(0u64, 0u64, 0u64); n + 1];
    for (i, &l) in labels.data().iter().enumerate() {
        if l != 0 {
            let (x, y) = labels.coords(i);
            let a = &mut acc[l as usize];
            a.0 += 1;
            a.1 += x as u64;
            a.2 += y as u64;
        }
    }
    acc.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, a)| a.0 > 0)
        .map(|(id, &(n, sx, sy))| ObjectCentroid {
            id: id as u32,
            x: sx as f64 / n as f64,
            y: sy as f64 / n as f64,
        })
        .collect()
}
