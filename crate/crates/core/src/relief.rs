//! Exact Euclidean distance transform and marker-controlled watershed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::labeling::label_equal_values;
use crate::raster::{BinaryImage, LabelImage, Raster};

/// Euclidean distance from each pixel to the nearest background pixel, with
/// everything outside the image counted as background.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap(Raster<f64>);

impl DistanceMap {
    pub fn raster(&self) -> &Raster<f64> {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.data().iter().copied().fold(0.0, f64::max)
    }

    pub fn from_raster(r: Raster<f64>) -> Self {
        Self(r)
    }
}

/// Altitude field flooded by [`watershed`]. All values are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Relief(Raster<f64>);

impl Relief {
    pub fn new(r: Raster<f64>) -> Result<Self> {
        if let Some(i) = r.data().iter().position(|v| !v.is_finite()) {
            let (x, y) = r.coords(i);
            return Err(Error::InvalidParameter(format!(
                "relief value at ({x}, {y}) is not finite"
            )));
        }
        Ok(Self(r))
    }

    pub fn raster(&self) -> &Raster<f64> {
        &self.0
    }
}

/// Squared exact EDT (Meijster et al. two-pass algorithm).
///
/// The mask is padded with one ring of background; that ring is always at
/// least as close as any farther out-of-image lattice point.
pub fn edt_squared(bin: &BinaryImage) -> Raster<u64> {
    let (w, h) = (bin.width(), bin.height());
    let (pw, ph) = (w + 2, h + 2);
    let inside =
        |px: usize, py: usize| -> bool { px >= 1 && py >= 1 && px <= w && py <= h && *bin.get(px - 1, py - 1) };

    // Phase 1: vertical distance to the nearest background pixel per column.
    let mut g = vec![0i64; pw * ph];
    for px in 0..pw {
        // The padding row 0 is background.
        for py in 1..ph {
            g[py * pw + px] = if inside(px, py) { g[(py - 1) * pw + px] + 1 } else { 0 };
        }
        for py in (0..ph - 1).rev() {
            let below = g[(py + 1) * pw + px];
            if below + 1 < g[py * pw + px] {
                g[py * pw + px] = below + 1;
            }
        }
    }

    // Phase 2: lower envelope of parabolas along each row.
    let mut out = Raster::<u64>::new(w, h);
    let mut s = vec![0i64; pw];
    let mut t = vec![0i64; pw];
    let mut row_dt = vec![0i64; pw];
    for py in 1..=h {
        let gr = &g[py * pw..(py + 1) * pw];
        let f = |x: i64, i: i64| (x - i) * (x - i) + gr[i as usize] * gr[i as usize];
        let sep = |i: i64, u: i64| {
            let gi = gr[i as usize];
            let gu = gr[u as usize];
            (u * u - i * i + gu * gu - gi * gi).div_euclid(2 * (u - i))
        };
        let m = pw as i64;
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let wv = 1 + sep(s[q as usize], u);
                if wv < m {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wv;
                }
            }
        }
        for u in (0..m).rev() {
            row_dt[u as usize] = f(u, s[q as usize]);
            if u == t[q as usize] {
                q -= 1;
            }
        }
        for x in 0..w {
            out.set(x, py - 1, row_dt[x + 1] as u64);
        }
    }
    out
}

/// Exact Euclidean distance transform.
pub fn edt(bin: &BinaryImage) -> DistanceMap {
    DistanceMap(edt_squared(bin).map(|&d| (d as f64).sqrt()))
}

/// Pointwise negation: the deepest points of the relief are the pixels
/// farthest from the background.
pub fn negate(d: &DistanceMap) -> Relief {
    Relief(d.0.map(|&v| -v))
}

#[derive(Clone, Copy)]
struct Entry {
    priority: f64,
    seq: u64,
    idx: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Reversed: BinaryHeap is a max-heap and we pop the lowest (priority, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn flood(relief: &Relief, markers: &LabelImage, mask: &BinaryImage, mut on_pop: impl FnMut(f64)) -> Result<LabelImage> {
    markers.check_shape(relief.raster())?;
    markers.check_shape(mask)?;
    let rel = relief.raster().data();
    let inside = mask.data();
    let mut out = markers.clone();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, &l) in markers.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        if !inside[i] {
            let (x, y) = markers.coords(i);
            return Err(Error::MarkerOutsideMask { label: l, x, y });
        }
        heap.push(Entry {
            priority: rel[i],
            seq,
            idx: i,
        });
        seq += 1;
    }
    while let Some(Entry { priority, idx, .. }) = heap.pop() {
        on_pop(priority);
        let label = out.data()[idx];
        for j in markers.neighbors8(idx) {
            if inside[j] && out.data()[j] == 0 {
                out.data_mut()[j] = label;
                heap.push(Entry {
                    priority: priority.max(rel[j]),
                    seq,
                    idx: j,
                });
                seq += 1;
            }
        }
    }
    Ok(out)
}

/// Marker-controlled watershed by priority flooding.
///
/// Every marker pixel is queued at its own altitude in raster order. Popping
/// the lowest `(level, insertion order)` entry claims all unlabelled
/// 8-neighbours inside `mask` for the popped pixel's basin; each is queued at
/// `max(level, altitude)`, so flooding levels never decrease. Mask pixels no
/// basin reaches stay 0, as does everything outside the mask. No watershed
/// lines are drawn.
pub fn watershed(relief: &Relief, markers: &LabelImage, mask: &BinaryImage) -> Result<LabelImage> {
    flood(relief, markers, mask, |_| {})
}

/// [`watershed`], also returning the flooding level of every popped pixel in
/// pop order.
pub fn watershed_traced(relief: &Relief, markers: &LabelImage, mask: &BinaryImage) -> Result<(LabelImage, Vec<f64>)> {
    let mut trace = Vec::new();
    let out = flood(relief, markers, mask, |p| trace.push(p))?;
    Ok((out, trace))
}

/// Regional minima of `relief` within `mask`: 8-connected plateaus of equal
/// altitude none of whose pixels has a strictly lower neighbour in the mask.
pub fn regional_minima(relief: &Relief, mask: &BinaryImage) -> Result<BinaryImage> {
    relief.raster().check_shape(mask)?;
    let rel = relief.raster();
    // Plateau ids; + 0.0 folds -0.0 onto 0.0.
    let keyed = rel.map_indexed(|i, &v| mask.data()[i].then(|| (v + 0.0).to_bits()));
    let plateaus = label_equal_values(&keyed);
    let mut minimal = vec![true; plateaus.max_label() as usize + 1];
    for (i, &p) in plateaus.data().iter().enumerate() {
        if p == 0 {
            continue;
        }
        let v = rel.data()[i];
        if rel.neighbors8(i).any(|j| mask.data()[j] && rel.data()[j] < v) {
            minimal[p as usize] = false;
        }
    }
    Ok(plateaus.map(|&p| p != 0 && minimal[p as usize]))
}
