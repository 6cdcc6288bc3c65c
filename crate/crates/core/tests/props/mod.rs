//! Randomized invariants of the building blocks and of WUSEM itself, shared
//! by the `properties` and `acceptance` test targets.

#![allow(dead_code)]

use std::fmt::Debug;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use wusem_core::features::region_properties;
use wusem_core::labeling::label_binary;
use wusem_core::morphology::{disk, erode, fill_holes};
use wusem_core::raster::{
    decode_label_csv, decode_pgm, encode_label_csv, encode_pgm, BinaryImage, GrayImage, LabelImage, Raster,
};
use wusem_core::relief::{edt_squared, watershed, watershed_traced, Relief};
use wusem_core::stats::{efficiency_report, in_tolerance, ManualCounts};
use wusem_core::wusem::{combine_segmentations, erode_disk_from_edt, segmentation_wusem, WusemParams};

pub const CASES: u32 = 1000;

type Outcome = Result<(), String>;
type Property = fn(&mut TestRunner) -> Outcome;

/// Every property by name.
pub const PROPERTIES: &[(&str, Property)] = &[
    ("erosion_is_anti_extensive", erosion_is_anti_extensive),
    ("erosion_is_monotone", erosion_is_monotone),
    ("larger_disks_erode_more", larger_disks_erode_more),
    ("distance_threshold_erosion_agrees", distance_threshold_erosion_agrees),
    (
        "hole_filling_is_extensive_and_idempotent",
        hole_filling_is_extensive_and_idempotent,
    ),
    (
        "labeling_count_survives_flips_and_rotations",
        labeling_count_survives_flips_and_rotations,
    ),
    ("watershed_keeps_markers_and_mask", watershed_keeps_markers_and_mask),
    ("wusem_only_splits", wusem_only_splits),
    ("wusem_count_ignores_label_order", wusem_count_ignores_label_order),
    ("efficiency_is_scale_invariant", efficiency_is_scale_invariant),
    (
        "widening_tolerance_keeps_candidates",
        widening_tolerance_keeps_candidates,
    ),
    ("region_features_are_pose_invariant", region_features_are_pose_invariant),
    ("pgm_round_trips", pgm_round_trips),
    ("label_csv_round_trips", label_csv_round_trips),
];

/// A runner with a fixed seed so failures reproduce across runs.
pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs the property called `name`, panicking with the shrunk counterexample.
pub fn run(name: &str) {
    let (_, property) = PROPERTIES.iter().find(|(n, _)| *n == name).expect("known property");
    if let Err(e) = property(&mut runner()) {
        panic!("{name}: {e}");
    }
}

fn check<S>(runner: &mut TestRunner, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: Debug,
{
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn raster<T: std::fmt::Debug>(
    max_side: usize,
    cell: impl Strategy<Value = T> + Clone,
) -> impl Strategy<Value = Raster<T>> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        prop::collection::vec(cell.clone(), w * h).prop_map(move |data| Raster::from_vec(w, h, data).unwrap())
    })
}

fn mask(max_side: usize) -> impl Strategy<Value = BinaryImage> {
    raster(max_side, prop::bool::weighted(0.65))
}

fn flip_x<T: Clone>(img: &Raster<T>) -> Raster<T> {
    Raster::from_fn(img.width(), img.height(), |x, y| {
        img.get(img.width() - 1 - x, y).clone()
    })
}

fn flip_y<T: Clone>(img: &Raster<T>) -> Raster<T> {
    Raster::from_fn(img.width(), img.height(), |x, y| {
        img.get(x, img.height() - 1 - y).clone()
    })
}

fn transpose<T: Clone>(img: &Raster<T>) -> Raster<T> {
    Raster::from_fn(img.height(), img.width(), |x, y| img.get(y, x).clone())
}

fn labels_are_dense(labels: &LabelImage) -> bool {
    let n = labels.max_label() as usize;
    let mut seen = vec![false; n + 1];
    for &l in labels.data() {
        seen[l as usize] = true;
    }
    seen[1..].iter().all(|&s| s)
}

/// Every label of `fine` lies within a single label of `coarse`.
fn refines(fine: &LabelImage, coarse: &LabelImage) -> bool {
    let mut owner = vec![None; fine.max_label() as usize + 1];
    fine.data().iter().zip(coarse.data()).all(|(&f, &c)| {
        if f == 0 {
            return true;
        }
        c != 0 && *owner[f as usize].get_or_insert(c) == c
    })
}

fn erosion_is_anti_extensive(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24), 0u32..5), |(bin, r)| {
        prop_assert!(erode(&bin, &disk(r)).is_subset_of(&bin));
        Ok(())
    })
}

fn erosion_is_monotone(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24), any::<u64>(), 0u32..4), |(big, keep, r)| {
        // A pseudo-random subset of `big`.
        let small = big.map_indexed(|i, &b| b && (keep.rotate_left(i as u32 % 64) & 1 == 1));
        let se = disk(r);
        prop_assert!(erode(&small, &se).is_subset_of(&erode(&big, &se)));
        Ok(())
    })
}

fn larger_disks_erode_more(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24), 0u32..4, 0u32..3), |(bin, r, extra)| {
        let inner = erode(&bin, &disk(r + extra));
        prop_assert!(inner.is_subset_of(&erode(&bin, &disk(r))));
        // disk(r) + disk(extra) fits inside disk(r + extra), so two successive
        // erosions remove no more than one erosion by the summed radius.
        let twice = erode(&erode(&bin, &disk(r)), &disk(extra));
        prop_assert!(inner.is_subset_of(&twice));
        Ok(())
    })
}

fn distance_threshold_erosion_agrees(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24), 0u32..6), |(bin, r)| {
        prop_assert_eq!(erode_disk_from_edt(&edt_squared(&bin), r), erode(&bin, &disk(r)));
        Ok(())
    })
}

fn hole_filling_is_extensive_and_idempotent(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24),), |(bin,)| {
        let filled = fill_holes(&bin);
        prop_assert!(bin.is_subset_of(&filled));
        prop_assert_eq!(fill_holes(&filled), filled);
        Ok(())
    })
}

fn labeling_count_survives_flips_and_rotations(runner: &mut TestRunner) -> Outcome {
    check(runner, (mask(24),), |(bin,)| {
        let labels = label_binary(&bin);
        let n = labels.count_regions();
        prop_assert!(labels_are_dense(&labels));
        prop_assert_eq!(labels.max_label() as usize, n);
        prop_assert_eq!(labels.mask(), bin.clone());
        prop_assert_eq!(label_binary(&flip_x(&bin)).count_regions(), n);
        prop_assert_eq!(label_binary(&flip_y(&bin)).count_regions(), n);
        prop_assert_eq!(label_binary(&transpose(&bin)).count_regions(), n);
        // Quarter turn = transpose then horizontal flip.
        prop_assert_eq!(label_binary(&flip_x(&transpose(&bin))).count_regions(), n);
        Ok(())
    })
}

fn watershed_keeps_markers_and_mask(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (raster(20, 0u8..6), any::<u64>(), any::<u64>()),
        |(relief, seeds, cut)| {
            let bin = relief.map_indexed(|i, _| cut.rotate_left((i * 7) as u32 % 64) & 3 != 0);
            let markers = label_binary(&bin.map_indexed(|i, &b| b && seeds.rotate_left((i * 13) as u32 % 64) & 7 == 0));
            let relief = Relief::new(relief.map(|&v| v as f64)).unwrap();
            let (out, trace) = watershed_traced(&relief, &markers, &bin).unwrap();
            for ((&o, &m), &b) in out.data().iter().zip(markers.data()).zip(bin.data()) {
                if m != 0 {
                    prop_assert_eq!(o, m);
                }
                if !b {
                    prop_assert_eq!(o, 0);
                }
                prop_assert!(o <= markers.max_label());
            }
            prop_assert!(trace.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(watershed(&relief, &markers, &bin).unwrap(), out.clone());
            // Every masked pixel connected to a marker gets flooded.
            let reach = label_binary(&bin);
            for (i, &o) in out.data().iter().enumerate() {
                let comp = reach.data()[i];
                let seeded = comp != 0
                    && markers
                        .data()
                        .iter()
                        .zip(reach.data())
                        .any(|(&m, &c)| m != 0 && c == comp);
                prop_assert_eq!(o != 0, seeded);
            }
            Ok(())
        },
    )
}

fn wusem_only_splits(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (mask(28), 0u32..4, 1u32..4, 0usize..8, any::<bool>()),
        |(bin, r0, dr, min_area, border)| {
            let params = WusemParams::new(r0, dr)
                .unwrap()
                .with_min_area(min_area)
                .with_border_rule(border);
            let res = segmentation_wusem(&bin, &params);
            prop_assert!(res.labels.mask().is_subset_of(&bin));
            prop_assert!(refines(&res.labels, &label_binary(&bin)));
            prop_assert!(labels_are_dense(&res.labels));
            prop_assert_eq!(res.count, res.labels.count_regions());
            prop_assert_eq!(segmentation_wusem(&bin, &params).labels, res.labels);
            Ok(())
        },
    )
}

fn wusem_count_ignores_label_order(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (mask(28), 0u32..3, 1u32..3, any::<u64>()),
        |(bin, r0, dr, salt)| {
            let params = WusemParams::new(r0, dr)
                .unwrap()
                .with_min_area(4)
                .with_border_rule(false)
                .keep_iterations(true);
            let res = segmentation_wusem(&bin, &params);
            let reversed: Vec<LabelImage> = res
                .per_iteration_labels
                .as_ref()
                .unwrap()
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let n = s.max_label();
                    // Reverse or rotate the ids depending on the round.
                    s.map(|&l| match l {
                        0 => 0,
                        _ if (salt >> (k % 64)) & 1 == 1 => n + 1 - l,
                        _ => l % n + 1,
                    })
                })
                .collect();
            if reversed.is_empty() {
                prop_assert_eq!(res.count, 0);
            } else {
                let again = combine_segmentations(&reversed, &params).unwrap();
                prop_assert_eq!(again.count_regions(), res.count);
                prop_assert_eq!(again, res.labels);
            }
            Ok(())
        },
    )
}

fn efficiency_is_scale_invariant(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (prop::collection::vec((0u32..40, 0u32..50), 1..12), 1u32..20),
        |(pairs, k)| {
            let build = |f: u32| {
                let manual = ManualCounts {
                    sample_id: "s".into(),
                    per_image: pairs
                        .iter()
                        .enumerate()
                        .map(|(i, &(m, _))| (format!("i{i}"), m * f))
                        .collect(),
                };
                let auto: Vec<(String, u32)> = pairs
                    .iter()
                    .enumerate()
                    .map(|(i, &(_, a))| (format!("i{i}"), a * f))
                    .collect();
                efficiency_report(&manual, &auto)
            };
            match (build(1), build(k)) {
                (Ok(a), Ok(b)) => {
                    // With no nonzero manual count there are no ratios and both
                    // statistics are undefined (NaN) at every scale.
                    let same = |x: f64, y: f64| (x.is_nan() && y.is_nan()) || (x - y).abs() <= 1e-9 * x.abs().max(1.0);
                    prop_assert!(same(a.eff_mean, b.eff_mean), "{} vs {}", a.eff_mean, b.eff_mean);
                    prop_assert!(same(a.eff_sd, b.eff_sd), "{} vs {}", a.eff_sd, b.eff_sd);
                    prop_assert_eq!(a.n_ratios, b.n_ratios);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "scaling changed success: {:?} vs {:?}", a, b),
            }
            Ok(())
        },
    )
}

fn widening_tolerance_keeps_candidates(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (0.0f64..100.0, 0.0f64..100.0, 0u32..20),
        |(manual, auto, tol)| {
            if in_tolerance(manual, auto, tol) {
                prop_assert!(in_tolerance(manual, auto, tol + 1));
            }
            Ok(())
        },
    )
}

fn region_features_are_pose_invariant(runner: &mut TestRunner) -> Outcome {
    check(
        runner,
        (mask(16), raster(16, any::<u8>()), 0usize..5, 0usize..5),
        |(bin, gray, dx, dy)| {
            let (w, h) = (bin.width(), bin.height());
            let gray = Raster::from_fn(w, h, |x, y| *gray.get(x % gray.width(), y % gray.height()));
            let labels = label_binary(&bin);
            let feats = region_properties(&labels, &gray).unwrap();

            let shifted_labels = Raster::from_fn(w + dx, h + dy, |x, y| {
                if x >= dx && y >= dy {
                    *labels.get(x - dx, y - dy)
                } else {
                    0
                }
            });
            let shifted_gray = Raster::from_fn(w + dx, h + dy, |x, y| {
                if x >= dx && y >= dy {
                    *gray.get(x - dx, y - dy)
                } else {
                    0
                }
            });
            let shifted = region_properties(&shifted_labels, &shifted_gray).unwrap();
            let transposed = region_properties(&transpose(&labels), &transpose(&gray)).unwrap();

            prop_assert_eq!(feats.len(), labels.count_regions());
            for f in &feats {
                let t = transposed.iter().find(|t| t.id == f.id).unwrap();
                let s = shifted.iter().find(|s| s.id == f.id).unwrap();
                for other in [s, t] {
                    prop_assert_eq!(other.area, f.area);
                    prop_assert!((other.eccentricity - f.eccentricity).abs() < 1e-9);
                    prop_assert!((other.major_diameter - f.major_diameter).abs() < 1e-9);
                    prop_assert!((other.minor_diameter - f.minor_diameter).abs() < 1e-9);
                    prop_assert!((other.mean_gray - f.mean_gray).abs() < 1e-9);
                }
                prop_assert!((s.centroid.0 - f.centroid.0 - dx as f64).abs() < 1e-9);
                prop_assert!((s.centroid.1 - f.centroid.1 - dy as f64).abs() < 1e-9);
                prop_assert!((t.centroid.0 - f.centroid.1).abs() < 1e-9);

                let values: Vec<u8> = labels
                    .data()
                    .iter()
                    .zip(gray.data())
                    .filter(|(&l, _)| l == f.id)
                    .map(|(_, &g)| g)
                    .collect();
                let lo = *values.iter().min().unwrap() as f64;
                let hi = *values.iter().max().unwrap() as f64;
                prop_assert!(f.mean_gray >= lo - 1e-9 && f.mean_gray <= hi + 1e-9);
                prop_assert!((0.0..1.0).contains(&f.eccentricity));
                prop_assert!(f.major_diameter >= f.minor_diameter && f.minor_diameter >= 0.0);
            }
            Ok(())
        },
    )
}

fn pgm_round_trips(runner: &mut TestRunner) -> Outcome {
    check(runner, (raster(32, any::<u8>()),), |(img,)| {
        let back: GrayImage = decode_pgm(&encode_pgm(&img)).unwrap();
        prop_assert_eq!(back, img);
        Ok(())
    })
}

fn label_csv_round_trips(runner: &mut TestRunner) -> Outcome {
    check(runner, (raster(24, 0u32..1000),), |(labels,)| {
        prop_assert_eq!(decode_label_csv(&encode_label_csv(&labels)).unwrap(), labels);
        Ok(())
    })
}
