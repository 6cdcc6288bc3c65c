//! Synthetic photomicrographs with known track positions.
//!
//! Randomness comes from ChaCha8 seeded with `seed` through
//! `SeedableRng::seed_from_u64`. Draw order per track is radius, then
//! centre x, then centre y (each uniform); noise is then drawn per pixel in
//! raster order from a normal distribution. Images are byte-identical for a
//! given spec within this implementation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

pub const MAX_ATTEMPTS_PER_TRACK: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub n_tracks: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Minimum centre distance as a multiple of the two radii's sum.
    pub min_center_separation_factor: f64,
    pub track_gray: u8,
    pub background_gray: u8,
    pub noise_sd: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("image dimensions must be positive");
        }
        if !(self.radius_min > 0.0 && self.radius_min <= self.radius_max) {
            return bad("need 0 < radius_min <= radius_max");
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad("noise_sd must be finite and non-negative");
        }
        if self.min_center_separation_factor.is_nan() || self.min_center_separation_factor < 0.0 {
            return bad("min_center_separation_factor must be non-negative");
        }
        let gap = (self.track_gray as f64 - self.background_gray as f64).abs();
        if gap < 4.0 * self.noise_sd || gap == 0.0 {
            return bad("track and background gray must differ by at least 4 * noise_sd");
        }
        // Disks are kept one pixel clear of every edge.
        let span = 2.0 * (self.radius_max + 1.0);
        if self.n_tracks > 0 && (span >= self.width as f64 || span >= self.height as f64) {
            return bad("image too small for radius_max");
        }
        Ok(())
    }
}

/// Renders `spec`, returning the image and the placed tracks.
pub fn synth_generate(spec: &SyntheticSpec) -> Result<(GrayImage, Vec<Track>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut tracks: Vec<Track> = Vec::with_capacity(spec.n_tracks);
    for _ in 0..spec.n_tracks {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS_PER_TRACK {
            let r = if spec.radius_min == spec.radius_max {
                spec.radius_min
            } else {
                rng.gen_range(spec.radius_min..=spec.radius_max)
            };
            let cx = rng.gen_range(r + 1.0..=spec.width as f64 - 2.0 - r);
            let cy = rng.gen_range(r + 1.0..=spec.height as f64 - 2.0 - r);
            let ok = tracks.iter().all(|t| {
                let d2 = (t.cx - cx).powi(2) + (t.cy - cy).powi(2);
                d2 >= (spec.min_center_separation_factor * (t.r + r)).powi(2)
            });
            if ok {
                tracks.push(Track { cx, cy, r });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::PlacementInfeasible {
                placed: tracks.len(),
                requested: spec.n_tracks,
            });
        }
    }

    let mut img = GrayImage::from_fn(spec.width, spec.height, |x, y| {
        let (px, py) = (x as f64, y as f64);
        if tracks
            .iter()
            .any(|t| (px - t.cx).powi(2) + (py - t.cy).powi(2) <= t.r * t.r)
        {
            spec.track_gray
        } else {
            spec.background_gray
        }
    });
    if spec.noise_sd > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sd).expect("validated sd");
        for v in img.data_mut() {
            let noisy = *v as f64 + normal.sample(&mut rng);
            *v = noisy.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok((img, tracks))
}

pub fn read_spec_json(path: impl AsRef<Path>) -> Result<SyntheticSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        }
        .in_file(path)
    })
}

pub fn encode_ground_truth_csv(tracks: &[Track]) -> String {
    let mut out = String::from("cx,cy,r\n");
    for t in tracks {
        writeln!(out, "{},{},{}", t.cx, t.cy, t.r).unwrap();
    }
    out
}
