//! Binary morphology with digital-disk structuring elements, plus the
//! region filters applied before counting.

use std::collections::VecDeque;

use crate::raster::{BinaryImage, LabelImage};

/// A digital Euclidean disk: every integer offset `(dx, dy)` with
/// `dx² + dy² <= radius²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    radius: u32,
    /// Per row of the element: `(dy, dx_min, dx_max)`, rows ascending.
    rows: Vec<(i64, i64, i64)>,
}

/// Closed digital disk of the given radius.
pub fn disk(radius: u32) -> StructuringElement {
    let r = radius as i64;
    let rows = (-r..=r)
        .map(|dy| {
            // Largest dx with dx² <= r² - dy².
            let rem = r * r - dy * dy;
            let mut half = (rem as f64).sqrt() as i64;
            while half * half > rem {
                half -= 1;
            }
            while (half + 1) * (half + 1) <= rem {
                half += 1;
            }
            (dy, -half, half)
        })
        .collect();
    StructuringElement { radius, rows }
}

impl StructuringElement {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn offsets(&self) -> Vec<(i64, i64)> {
        self.rows
            .iter()
            .flat_map(|&(dy, a, b)| (a..=b).map(move |dx| (dx, dy)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|&(_, a, b)| (b - a + 1) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, dx: i64, dy: i64) -> bool {
        self.rows.iter().any(|&(ry, a, b)| ry == dy && (a..=b).contains(&dx))
    }
}

/// Binary erosion; pixels outside the image count as background.
///
/// Each element row is a horizontal run, so a pixel survives when, for every
/// row, the foreground run starting at the left end of the shifted element
/// row is at least as long as that row.
pub fn erode(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let (w, h) = (bin.width(), bin.height());
    // run[i]: consecutive foreground pixels starting at i and extending right.
    let mut run = vec![0u32; w * h];
    for y in 0..h {
        let mut len = 0u32;
        for x in (0..w).rev() {
            let i = y * w + x;
            len = if bin.data()[i] { len + 1 } else { 0 };
            run[i] = len;
        }
    }
    BinaryImage::from_fn(w, h, |x, y| {
        se.rows.iter().all(|&(dy, a, b)| {
            let (sy, sx) = (y as i64 + dy, x as i64 + a);
            if sy < 0 || sy >= h as i64 || sx < 0 {
                return false;
            }
            let i = sy as usize * w + sx as usize;
            sx < w as i64 && run[i] as i64 > b - a
        })
    })
}

/// Sets every background component not 4-connected to the image border to
/// foreground.
pub fn fill_holes(bin: &BinaryImage) -> BinaryImage {
    let (w, h) = (bin.width(), bin.height());
    let data = bin.data();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !data[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut queue);
        seed((h - 1) * w + x, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut queue);
        seed(y * w + w - 1, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        if x > 0 {
            seed(i - 1, &mut outside, &mut queue);
        }
        if x + 1 < w {
            seed(i + 1, &mut outside, &mut queue);
        }
        if y > 0 {
            seed(i - w, &mut outside, &mut queue);
        }
        if y + 1 < h {
            seed(i + w, &mut outside, &mut queue);
        }
    }
    bin.map_indexed(|i, _| !outside[i])
}

/// Drops regions with fewer than `min_area` pixels and renumbers the rest
/// `1..=N` in scan order.
pub fn remove_small(labels: &LabelImage, min_area: usize) -> LabelImage {
    let areas = labels.areas();
    labels
        .map(|&l| if l != 0 && areas[l as usize] >= min_area { l } else { 0 })
        .relabel_sequential()
}

/// Drops every region with a pixel in the last row or the last column
/// (the lower-right-corner counting rule) and renumbers the rest.
pub fn clear_rd_border(labels: &LabelImage) -> LabelImage {
    let (w, h) = (labels.width(), labels.height());
    let mut touches = vec![false; labels.max_label() as usize + 1];
    for x in 0..w {
        touches[*labels.get(x, h - 1) as usize] = true;
    }
    for y in 0..h {
        touches[*labels.get(w - 1, y) as usize] = true;
    }
    labels
        .map(|&l| if touches[l as usize] { 0 } else { l })
        .relabel_sequential()
}
