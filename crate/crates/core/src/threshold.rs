//! ISODATA (Ridler-Calvard) global threshold and binarization.

use crate::error::{Error, Result};
use crate::raster::{BinaryImage, GrayImage};

/// 256-bin intensity histogram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; 256],
}

impl Histogram {
    pub fn of(img: &GrayImage) -> Self {
        let mut counts = [0u64; 256];
        for &v in img.data() {
            counts[v as usize] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn occupied_range(&self) -> Option<(usize, usize)> {
        let lo = self.counts.iter().position(|&c| c > 0)?;
        let hi = self.counts.iter().rposition(|&c| c > 0)?;
        Some((lo, hi))
    }

    /// Mean intensity of the global histogram.
    pub fn mean(&self) -> f64 {
        let s: u64 = self.counts.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        s as f64 / self.total() as f64
    }

    /// Mean intensities of the classes `<= t` and `> t`, if both are occupied.
    pub fn class_means(&self, t: u8) -> Option<(f64, f64)> {
        let (n0, s0, n1, s1) = self.class_sums(t);
        (n0 > 0 && n1 > 0).then(|| (s0 as f64 / n0 as f64, s1 as f64 / n1 as f64))
    }

    fn class_sums(&self, t: u8) -> (u64, u64, u64, u64) {
        let (mut n0, mut s0, mut n1, mut s1) = (0, 0, 0, 0);
        for (v, &c) in self.counts.iter().enumerate() {
            if v <= t as usize {
                n0 += c;
                s0 += v as u64 * c;
            } else {
                n1 += c;
                s1 += v as u64 * c;
            }
        }
        (n0, s0, n1, s1)
    }
}

/// `|t - (s0/n0 + s1/n1) / 2| <= 1/2`, evaluated in exact integer arithmetic.
pub(crate) fn is_halfway(t: u64, n0: u64, s0: u64, n1: u64, s1: u64) -> bool {
    let (t, n0, s0, n1, s1) = (t as i128, n0 as i128, s0 as i128, n1 as i128, s1 as i128);
    (2 * t * n0 * n1 - (s0 * n1 + s1 * n0)).abs() <= n0 * n1
}

/// ISODATA threshold of a histogram: the smallest intensity `t` lying within
/// half a gray level of the midpoint between the mean of the pixels `<= t`
/// and the mean of the pixels `> t`.
pub fn isodata_from_histogram(hist: &Histogram) -> Result<u8> {
    let (lo, hi) = hist.occupied_range().ok_or(Error::DegenerateHistogram)?;
    if lo == hi {
        return Err(Error::DegenerateHistogram);
    }
    let total_n = hist.total();
    let total_s: u64 = hist.counts.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..hi {
        let c = hist.counts[t];
        n0 += c;
        s0 += t as u64 * c;
        if t < lo {
            continue;
        }
        if is_halfway(t as u64, n0, s0, total_n - n0, total_s - s0) {
            return Ok(t as u8);
        }
    }
    // A crossing always exists between the lowest and highest occupied bins.
    unreachable!("no ISODATA fixed point in [{lo}, {hi})")
}

/// ISODATA threshold of an image. Errors on a constant image.
pub fn isodata_threshold(img: &GrayImage) -> Result<u8> {
    isodata_from_histogram(&Histogram::of(img))
}

/// Classic Ridler-Calvard iteration started from the global mean:
/// `t <- round_down((mu_below + mu_above) / 2)` until `t` repeats.
///
/// Converges to a fixed point of the halfway rule, which need not be the
/// smallest one returned by [`isodata_threshold`].
pub fn isodata_iterative(hist: &Histogram) -> Result<u8> {
    let (lo, hi) = hist.occupied_range().ok_or(Error::DegenerateHistogram)?;
    if lo == hi {
        return Err(Error::DegenerateHistogram);
    }
    let mut t = (hist.mean().floor() as usize).clamp(lo, hi - 1) as u8;
    for _ in 0..512 {
        let (m0, m1) = hist.class_means(t).expect("t stays inside the occupied range");
        let next = (((m0 + m1) / 2.0).floor() as usize).clamp(lo, hi - 1) as u8;
        if next == t {
            break;
        }
        t = next;
    }
    Ok(t)
}

/// Foreground is `<= t` when the regions of interest are dark, `> t` otherwise.
pub fn binarize(img: &GrayImage, t: u8, roi_is_dark: bool) -> BinaryImage {
    if roi_is_dark {
        img.map(|&v| v <= t)
    } else {
        img.map(|&v| v > t)
    }
}
