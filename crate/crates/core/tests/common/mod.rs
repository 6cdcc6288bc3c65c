//! Slow, definitional reference implementations used as test oracles.
//! None of these share code with the library routines they check.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wusem_core::raster::{BinaryImage, GrayImage, LabelImage, Raster};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryImage {
    Raster::from_fn(w, h, |_, _| rng.gen_bool(density))
}

/// Union of random disks; produces blob-like masks with holes and touching shapes.
pub fn random_blobs(rng: &mut impl Rng, w: usize, h: usize, n: usize, rmax: i64) -> BinaryImage {
    let disks: Vec<(i64, i64, i64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(0..w as i64),
                rng.gen_range(0..h as i64),
                rng.gen_range(1..=rmax),
            )
        })
        .collect();
    Raster::from_fn(w, h, |x, y| {
        disks.iter().any(|&(cx, cy, r)| {
            let (dx, dy) = (x as i64 - cx, y as i64 - cy);
            dx * dx + dy * dy <= r * r
        })
    })
}

pub fn disk_mask(w: usize, h: usize, disks: &[(f64, f64, f64)]) -> BinaryImage {
    Raster::from_fn(w, h, |x, y| {
        disks.iter().any(|&(cx, cy, r)| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
    })
}

fn at<T: Copy>(img: &Raster<T>, x: i64, y: i64) -> Option<T> {
    if x < 0 || y < 0 || x >= img.width() as i64 || y >= img.height() as i64 {
        None
    } else {
        Some(img.data()[y as usize * img.width() + x as usize])
    }
}

/// Lattice points of the closed disk of radius `r`.
pub fn disk_offsets(r: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                v.push((dx, dy));
            }
        }
    }
    v
}

/// Erosion as the minimum over the neighbourhood, out-of-image = background.
pub fn erode_oracle(bin: &BinaryImage, r: i64) -> BinaryImage {
    let offs = disk_offsets(r);
    Raster::from_fn(bin.width(), bin.height(), |x, y| {
        offs.iter()
            .all(|&(dx, dy)| at(bin, x as i64 + dx, y as i64 + dy) == Some(true))
    })
}

/// Flood the background from the border (4-connected); everything unreached is foreground.
pub fn fill_holes_oracle(bin: &BinaryImage) -> BinaryImage {
    let (w, h) = (bin.width() as i64, bin.height() as i64);
    let mut reached = vec![vec![false; w as usize]; h as usize];
    let mut q = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            if border && at(bin, x, y) == Some(false) {
                reached[y as usize][x as usize] = true;
                q.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = q.pop_front() {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if at(bin, nx, ny) == Some(false) && !reached[ny as usize][nx as usize] {
                reached[ny as usize][nx as usize] = true;
                q.push_back((nx, ny));
            }
        }
    }
    Raster::from_fn(bin.width(), bin.height(), |x, y| !reached[y][x])
}

/// BFS labeling of 8-connected equal-value regions; `bg` is background.
/// Regions are numbered in raster order of their first pixel.
pub fn bfs_label<T: Copy + PartialEq>(img: &Raster<T>, bg: T) -> LabelImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut out = LabelImage::new(img.width(), img.height());
    let mut next = 0;
    for y in 0..h {
        for x in 0..w {
            let v = at(img, x, y).unwrap();
            if v == bg || *out.get(x as usize, y as usize) != 0 {
                continue;
            }
            next += 1;
            out.set(x as usize, y as usize, next);
            let mut q = VecDeque::from([(x, y)]);
            while let Some((cx, cy)) = q.pop_front() {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if at(img, nx, ny) == Some(v) && *out.get(nx as usize, ny as usize) == 0 {
                            out.set(nx as usize, ny as usize, next);
                            q.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Nearest background (or out-of-image) lattice point by exhaustive scan.
pub fn edt_sq_oracle(bin: &BinaryImage) -> Raster<u64> {
    let (w, h) = (bin.width() as i64, bin.height() as i64);
    Raster::from_fn(bin.width(), bin.height(), |x, y| {
        if !*bin.get(x, y) {
            return 0;
        }
        let mut best = u64::MAX;
        for qy in -1..=h {
            for qx in -1..=w {
                if at(bin, qx, qy) != Some(true) {
                    let (dx, dy) = (qx - x as i64, qy - y as i64);
                    best = best.min((dx * dx + dy * dy) as u64);
                }
            }
        }
        best
    })
}

/// Priority flood with an unsorted list: every step scans for the lowest
/// `(level, sequence)` entry.
pub fn flood_oracle(relief: &Raster<f64>, markers: &LabelImage, mask: &BinaryImage) -> LabelImage {
    let (w, h) = (markers.width() as i64, markers.height() as i64);
    let mut out = markers.clone();
    let mut pending: Vec<(f64, u64, i64, i64)> = Vec::new();
    let mut seq = 0;
    for y in 0..h {
        for x in 0..w {
            if *markers.get(x as usize, y as usize) != 0 {
                pending.push((*relief.get(x as usize, y as usize), seq, x, y));
                seq += 1;
            }
        }
    }
    while !pending.is_empty() {
        let mut best = 0;
        for (k, e) in pending.iter().enumerate() {
            let b = &pending[best];
            if e.0 < b.0 || (e.0 == b.0 && e.1 < b.1) {
                best = k;
            }
        }
        let (level, _, x, y) = pending.swap_remove(best);
        let label = *out.get(x as usize, y as usize);
        for (dx, dy) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
            let (nx, ny) = (x + dx, y + dy);
            if at(mask, nx, ny) == Some(true) && *out.get(nx as usize, ny as usize) == 0 {
                out.set(nx as usize, ny as usize, label);
                let alt = *relief.get(nx as usize, ny as usize);
                pending.push((level.max(alt), seq, nx, ny));
                seq += 1;
            }
        }
    }
    out
}

/// Straight-line WUSEM built only from the oracles above.
pub fn wusem_oracle(bin: &BinaryImage, r0: i64, dr: i64, min_area: usize, border_rule: bool) -> LabelImage {
    let sq = edt_sq_oracle(bin);
    let relief = sq.map(|&d| -(d as f64).sqrt());
    let mut seqs: Vec<Vec<u32>> = vec![Vec::new(); bin.len()];
    let mut r = r0;
    loop {
        let eroded = erode_oracle(bin, r);
        if !eroded.data().iter().any(|&b| b) {
            break;
        }
        let markers = bfs_label(&eroded, false);
        let seg = flood_oracle(&relief, &markers, bin);
        for (s, &l) in seqs.iter_mut().zip(seg.data()) {
            s.push(l);
        }
        r += dr;
    }
    // Give every distinct label sequence its own code; the all-zero sequence
    // (never reached by any round) is background.
    let mut codes: std::collections::HashMap<Vec<u32>, u64> = std::collections::HashMap::new();
    let keyed: Vec<u64> = seqs
        .into_iter()
        .map(|s| {
            if s.iter().all(|&l| l == 0) {
                0
            } else {
                let next = codes.len() as u64 + 1;
                *codes.entry(s).or_insert(next)
            }
        })
        .collect();
    let keyed = Raster::from_vec(bin.width(), bin.height(), keyed).unwrap();
    let labels = bfs_label(&keyed, 0);
    let mut area = vec![0usize; labels.data().iter().copied().max().unwrap_or(0) as usize + 1];
    for &l in labels.data() {
        area[l as usize] += 1;
    }
    let (w, h) = (labels.width(), labels.height());
    let mut dropped = vec![false; area.len()];
    for (l, &a) in area.iter().enumerate() {
        dropped[l] = a < min_area;
    }
    if border_rule {
        for y in 0..h {
            for x in 0..w {
                if x == w - 1 || y == h - 1 {
                    dropped[*labels.get(x, y) as usize] = true;
                }
            }
        }
    }
    let kept = labels.map(|&l| if l == 0 || dropped[l as usize] { 0 } else { l });
    bfs_label(&kept, 0)
}

/// Exhaustive ISODATA: mean of each class from the raw pixel list, smallest
/// threshold within half a level of the class-mean midpoint.
pub fn isodata_oracle(img: &GrayImage) -> Option<u8> {
    let px: Vec<u64> = img.data().iter().map(|&v| v as u64).collect();
    for t in 0..=255u64 {
        let below: Vec<u64> = px.iter().copied().filter(|&v| v <= t).collect();
        let above: Vec<u64> = px.iter().copied().filter(|&v| v > t).collect();
        if below.is_empty() || above.is_empty() {
            continue;
        }
        // |t - (m0 + m1) / 2| <= 1/2 with m = s / n, cross-multiplied.
        let (n0, n1) = (below.len() as i128, above.len() as i128);
        let (s0, s1) = (below.iter().sum::<u64>() as i128, above.iter().sum::<u64>() as i128);
        if (2 * t as i128 * n0 * n1 - (s0 * n1 + s1 * n0)).abs() <= n0 * n1 {
            return Some(t as u8);
        }
    }
    None
}

/// Partition equality: same background and a bijection between labels.
pub fn same_partition(a: &LabelImage, b: &LabelImage) -> bool {
    if a.width() != b.width() || a.height() != b.height() {
        return false;
    }
    let mut fwd = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    for (&x, &y) in a.data().iter().zip(b.data()) {
        if (x == 0) != (y == 0) {
            return false;
        }
        if x == 0 {
            continue;
        }
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}
