//! 8-connected component labeling.
//!
//! Both entry points share one two-pass union-find: a forward raster scan
//! links each pixel to its already-visited neighbours (W, NW, N, NE) that
//! carry the same value, and a second scan resolves roots and numbers them
//! in order of first appearance.

use crate::raster::{BinaryImage, LabelImage, Raster};

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn with_capacity(n: usize) -> Self {
        Self {
            parent: Vec::with_capacity(n),
        }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        // Smaller id wins, so a root is always the earliest provisional label.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels 8-connected regions of equal nonzero value. Values equal to
/// `T::default()` are background.
///
/// Labels are `1..=N`, assigned in raster-scan order of each region's first
/// pixel.
pub fn label_equal_values<T: Copy + PartialEq + Default>(img: &Raster<T>) -> LabelImage {
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let bg = T::default();
    const NONE: u32 = u32::MAX;
    let mut provisional = vec![NONE; w * h];
    let mut sets = DisjointSet::with_capacity(w * h / 4 + 1);

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = data[i];
            if v == bg {
                continue;
            }
            let mut current = NONE;
            let mut link = |j: usize, current: &mut u32| {
                if data[j] == v {
                    let l = provisional[j];
                    *current = if *current == NONE { l } else { sets.union(*current, l) };
                }
            };
            if x > 0 {
                link(i - 1, &mut current);
            }
            if y > 0 {
                let up = i - w;
                if x > 0 {
                    link(up - 1, &mut current);
                }
                link(up, &mut current);
                if x + 1 < w {
                    link(up + 1, &mut current);
                }
            }
            provisional[i] = if current == NONE { sets.make() } else { current };
        }
    }

    let mut final_id = vec![0u32; sets.parent.len()];
    let mut next = 0u32;
    let labels = provisional
        .iter()
        .map(|&p| {
            if p == NONE {
                return 0;
            }
            let root = sets.find(p) as usize;
            if final_id[root] == 0 {
                next += 1;
                final_id[root] = next;
            }
            final_id[root]
        })
        .collect();
    LabelImage::from_vec(w, h, labels).expect("same shape as input")
}

/// Labels 8-connected foreground components.
pub fn label_binary(bin: &BinaryImage) -> LabelImage {
    label_equal_values(bin)
}
