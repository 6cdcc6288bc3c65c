//! Per-region shape and intensity measurements.
//!
//! Diameters are those of the ellipse with the same second central moments
//! as the region: `4 * sqrt(lambda)` for each covariance eigenvalue.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{GrayImage, LabelImage};

/// Largest `f64` below 1; eccentricity of a region with zero minor axis.
pub const ECCENTRICITY_SUP: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionFeature {
    pub id: u32,
    pub area: usize,
    pub centroid: (f64, f64),
    pub eccentricity: f64,
    pub major_diameter: f64,
    pub minor_diameter: f64,
    pub mean_gray: f64,
}

impl RegionFeature {
    pub fn diameter_product(&self) -> f64 {
        self.major_diameter * self.minor_diameter
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleAggregate {
    pub sample_id: String,
    pub mean_diameter_product: f64,
    pub mean_gray_level: f64,
    pub n_regions: usize,
}

#[derive(Default, Clone, Copy)]
struct Accum {
    n: u64,
    sx: f64,
    sy: f64,
    sg: f64,
}

/// Eigenvalues `(l1, l2)`, `l1 >= l2 >= 0`, of `[[a, b], [b, c]]`.
pub fn covariance_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = (a + c) / 2.0;
    let spread = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    ((mean + spread).max(0.0), (mean - spread).max(0.0))
}

fn ellipse(l1: f64, l2: f64) -> (f64, f64, f64) {
    if l1 <= 0.0 {
        // A single pixel: a unit square, round by convention.
        return (0.0, 1.0, 1.0);
    }
    let ecc = (1.0 - l2 / l1).max(0.0).sqrt().min(ECCENTRICITY_SUP);
    (ecc, 4.0 * l1.sqrt(), 4.0 * l2.sqrt())
}

/// Measures every label present in `labels`, in id order.
pub fn region_properties(labels: &LabelImage, gray: &GrayImage) -> Result<Vec<RegionFeature>> {
    labels.check_shape(gray)?;
    let n = labels.max_label() as usize;
    let mut acc = vec![Accum::default(); n + 1];
    for (i, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = labels.coords(i);
        let a = &mut acc[l as usize];
        a.n += 1;
        a.sx += x as f64;
        a.sy += y as f64;
        a.sg += gray.data()[i] as f64;
    }
    // Second pass: central moments about each centroid.
    let mut moments = vec![(0.0f64, 0.0f64, 0.0f64); n + 1];
    for (i, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let a = acc[l as usize];
        let (x, y) = labels.coords(i);
        let dx = x as f64 - a.sx / a.n as f64;
        let dy = y as f64 - a.sy / a.n as f64;
        let m = &mut moments[l as usize];
        m.0 += dx * dx;
        m.1 += dx * dy;
        m.2 += dy * dy;
    }
    Ok((1..=n)
        .filter(|&l| acc[l].n > 0)
        .map(|l| {
            let a = acc[l];
            let cnt = a.n as f64;
            let (m20, m11, m02) = moments[l];
            let (l1, l2) = covariance_eigenvalues(m20 / cnt, m11 / cnt, m02 / cnt);
            let (eccentricity, major_diameter, minor_diameter) = ellipse(l1, l2);
            RegionFeature {
                id: l as u32,
                area: a.n as usize,
                centroid: (a.sx / cnt, a.sy / cnt),
                eccentricity,
                major_diameter,
                minor_diameter,
                mean_gray: a.sg / cnt,
            }
        })
        .collect())
}

/// Keeps regions with eccentricity `<= eps_max`, preserving order.
///
/// Panics unless `0 <= eps_max < 1`.
pub fn filter_eccentricity(feats: &[RegionFeature], eps_max: f64) -> Vec<RegionFeature> {
    assert!((0.0..1.0).contains(&eps_max), "eps_max must lie in [0, 1)");
    feats.iter().filter(|f| f.eccentricity <= eps_max).cloned().collect()
}

/// Pools the accepted regions of every image in a sample.
pub fn sample_aggregate(feats_per_image: &[Vec<RegionFeature>], sample_id: &str) -> Result<SampleAggregate> {
    let all: Vec<&RegionFeature> = feats_per_image.iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::NoAcceptedRegions(sample_id.to_string()));
    }
    let n = all.len() as f64;
    Ok(SampleAggregate {
        sample_id: sample_id.to_string(),
        mean_diameter_product: all.iter().map(|f| f.diameter_product()).sum::<f64>() / n,
        mean_gray_level: all.iter().map(|f| f.mean_gray).sum::<f64>() / n,
        n_regions: all.len(),
    })
}

pub const FEATURE_CSV_HEADER: &str = "image,id,area,centroid_x,centroid_y,eccentricity,d_major,d_minor,mean_gray";

/// Renders `(image, feature)` rows sorted by image then id.
pub fn encode_feature_csv(rows: &[(String, RegionFeature)]) -> String {
    let mut sorted: Vec<&(String, RegionFeature)> = rows.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    let mut out = String::from(FEATURE_CSV_HEADER);
    out.push('\n');
    for (image, f) in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            image,
            f.id,
            f.area,
            f.centroid.0,
            f.centroid.1,
            f.eccentricity,
            f.major_diameter,
            f.minor_diameter,
            f.mean_gray
        )
        .unwrap();
    }
    out
}

pub fn write_feature_csv(rows: &[(String, RegionFeature)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_feature_csv(rows)).map_err(|e| Error::io(path, e))
}
