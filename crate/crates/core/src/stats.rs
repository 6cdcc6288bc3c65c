//! Evaluation harness: parameter sweeps against manual counts, efficiency
//! ratios, and automatic-vs-manual regressions.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pipeline::Pipeline;
use crate::raster::{read_gray, GrayImage};

/// Per-image counts for one sample. Used for both manual (control) and
/// automatic counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManualCounts {
    pub sample_id: String,
    pub per_image: Vec<(String, u32)>,
}

impl ManualCounts {
    pub fn get(&self, image: &str) -> Option<u32> {
        self.per_image.iter().find(|(i, _)| i == image).map(|&(_, c)| c)
    }

    pub fn mean(&self) -> f64 {
        mean(&self.per_image.iter().map(|&(_, c)| c as f64).collect::<Vec<_>>())
    }
}

/// Parses `sample,image,count` CSV (with that header). Samples keep their
/// order of first appearance.
pub fn decode_counts_csv(text: &str) -> Result<Vec<ManualCounts>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["sample", "image", "count"] {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header sample,image,count, found {:?}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out: Vec<ManualCounts> = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let (sample, image) = (record[0].to_string(), record[1].to_string());
        let count = record[2].parse::<u32>().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid count {:?}", &record[2]),
        })?;
        if !seen.insert((sample.clone(), image.clone())) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate image {image:?} in sample {sample:?}"),
            });
        }
        match out.iter_mut().find(|m| m.sample_id == sample) {
            Some(m) => m.per_image.push((image, count)),
            None => out.push(ManualCounts {
                sample_id: sample,
                per_image: vec![(image, count)],
            }),
        }
    }
    Ok(out)
}

pub fn read_counts_csv(path: impl AsRef<Path>) -> Result<Vec<ManualCounts>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_counts_csv(&text).map_err(|e| e.in_file(path))
}

pub fn encode_counts_csv(counts: &[ManualCounts]) -> String {
    let mut out = String::from("sample,image,count\n");
    for m in counts {
        for (image, c) in &m.per_image {
            writeln!(out, "{},{},{}", m.sample_id, image, c).unwrap();
        }
    }
    out
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_sd(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        n => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub r0_values: Vec<u32>,
    pub dr_values: Vec<u32>,
    pub tolerance: u32,
}

impl SweepConfig {
    /// Sorts and deduplicates both grids.
    pub fn new(mut r0_values: Vec<u32>, mut dr_values: Vec<u32>, tolerance: u32) -> Result<Self> {
        r0_values.sort_unstable();
        r0_values.dedup();
        dr_values.sort_unstable();
        dr_values.dedup();
        if r0_values.is_empty() || dr_values.is_empty() {
            return Err(Error::InvalidParameter("sweep grids must be nonempty".into()));
        }
        if dr_values[0] == 0 {
            return Err(Error::InvalidParameter("delta radius values must be at least 1".into()));
        }
        if tolerance == 0 {
            return Err(Error::InvalidParameter("tolerance must be at least 1".into()));
        }
        Ok(Self {
            r0_values,
            dr_values,
            tolerance,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.r0_values
            .iter()
            .flat_map(move |&r0| self.dr_values.iter().map(move |&dr| (r0, dr)))
    }
}

/// `0 < manual_mean - auto_mean < tolerance`.
pub fn in_tolerance(manual_mean: f64, auto_mean: f64, tolerance: u32) -> bool {
    let gap = manual_mean - auto_mean;
    gap > 0.0 && gap < tolerance as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub r0: u32,
    pub dr: u32,
    pub sample: String,
    pub mu_manual: f64,
    pub mu_auto: f64,
    pub candidate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub best_params: (u32, u32),
    /// Number of samples for which the best pair is a candidate.
    pub best_candidate_samples: usize,
}

impl SweepResult {
    pub fn encode_csv(&self) -> String {
        let mut out = String::from("r0,dr,sample,mu_auto,candidate\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.r0, r.dr, r.sample, r.mu_auto, r.candidate).unwrap();
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "best_params": { "r0": self.best_params.0, "dr": self.best_params.1 },
            "best_candidate_samples": self.best_candidate_samples,
        })
    }
}

/// Sweep driver with a caller-supplied counter `count(sample, image, r0, dr)`.
///
/// For every pair and sample the mean automatic count over the sample's
/// images is compared with the manual mean. The best pair is the candidate
/// for the most samples; ties go to the smaller `r0`, then the smaller `dr`.
pub fn run_sweep_with(
    manual: &[ManualCounts],
    cfg: &SweepConfig,
    mut count: impl FnMut(&str, &str, u32, u32) -> Result<usize>,
) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut best = None::<((u32, u32), usize)>;
    for (r0, dr) in cfg.pairs() {
        let mut candidates = 0;
        for m in manual {
            let autos = m
                .per_image
                .iter()
                .map(|(image, _)| count(&m.sample_id, image, r0, dr).map(|c| c as f64))
                .collect::<Result<Vec<_>>>()?;
            let (mu_manual, mu_auto) = (m.mean(), mean(&autos));
            let candidate = in_tolerance(mu_manual, mu_auto, cfg.tolerance);
            candidates += usize::from(candidate);
            rows.push(SweepRow {
                r0,
                dr,
                sample: m.sample_id.clone(),
                mu_manual,
                mu_auto,
                candidate,
            });
        }
        // Pairs arrive in ascending (r0, dr) order, so strict > keeps the smallest.
        if best.is_none_or(|(_, n)| candidates > n) {
            best = Some(((r0, dr), candidates));
        }
    }
    let (best_params, best_candidate_samples) = best.expect("grids are nonempty");
    Ok(SweepResult {
        rows,
        best_params,
        best_candidate_samples,
    })
}

/// Photomicrographs of one sample, keyed by image id.
#[derive(Clone, Debug)]
pub struct SampleImages {
    pub sample_id: String,
    pub images: Vec<(String, GrayImage)>,
}

/// Loads a `<root>/<sample>/<image>.pgm` tree. Samples and images are sorted
/// by name; the image id is the file stem. Files with other extensions are
/// ignored.
pub fn load_sample_images(root: impl AsRef<Path>) -> Result<Vec<SampleImages>> {
    let root = root.as_ref();
    let sorted_entries = |dir: &Path| -> Result<Vec<std::path::PathBuf>> {
        let mut paths = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
            .collect::<Result<Vec<_>>>()?;
        paths.sort();
        Ok(paths)
    };
    let mut samples = Vec::new();
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let mut images = Vec::new();
        for file in sorted_entries(&dir)? {
            if file.extension().and_then(|e| e.to_str()) != Some("pgm") {
                continue;
            }
            let id = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            images.push((id, read_gray(&file)?));
        }
        samples.push(SampleImages {
            sample_id: dir.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            images,
        });
    }
    Ok(samples)
}

fn check_manual_coverage(images: &[SampleImages], manual: &[ManualCounts]) -> Result<()> {
    for s in images {
        let m = manual.iter().find(|m| m.sample_id == s.sample_id);
        for (image, _) in &s.images {
            if m.and_then(|m| m.get(image)).is_none() {
                return Err(Error::MissingManualCount {
                    sample: s.sample_id.clone(),
                    image: image.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Restricts `manual` to the images actually present.
fn manual_for(images: &[SampleImages], manual: &[ManualCounts]) -> Vec<ManualCounts> {
    images
        .iter()
        .filter_map(|s| {
            let m = manual.iter().find(|m| m.sample_id == s.sample_id)?;
            Some(ManualCounts {
                sample_id: s.sample_id.clone(),
                per_image: s
                    .images
                    .iter()
                    .map(|(i, _)| (i.clone(), m.get(i).expect("coverage checked")))
                    .collect(),
            })
        })
        .collect()
}

/// Runs binarize, fill and WUSEM for every image and pair in the grid.
pub fn run_sweep(
    images: &[SampleImages],
    manual: &[ManualCounts],
    cfg: &SweepConfig,
    pipeline: &Pipeline,
) -> Result<SweepResult> {
    check_manual_coverage(images, manual)?;
    let mut masks = BTreeMap::new();
    for s in images {
        for (image, gray) in &s.images {
            masks.insert((s.sample_id.clone(), image.clone()), pipeline.prepare(gray)?.mask);
        }
    }
    run_sweep_with(&manual_for(images, manual), cfg, |sample, image, r0, dr| {
        let mask = &masks[&(sample.to_string(), image.to_string())];
        Ok(pipeline.wusem(mask, r0, dr)?.count)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub sample_id: String,
    pub manual_mean: f64,
    pub manual_sd: f64,
    pub auto_mean: f64,
    pub auto_sd: f64,
    /// Mean of per-image `auto / manual` over images with a nonzero manual count.
    pub eff_mean: f64,
    pub eff_sd: f64,
    pub n_images: usize,
    pub n_ratios: usize,
}

pub fn efficiency_report(manual: &ManualCounts, auto: &[(String, u32)]) -> Result<EfficiencyReport> {
    if manual.per_image.len() != auto.len() {
        return Err(Error::MismatchedIds(format!(
            "sample {:?}: {} manual rows vs {} automatic rows",
            manual.sample_id,
            manual.per_image.len(),
            auto.len()
        )));
    }
    let mut m = Vec::new();
    let mut a = Vec::new();
    let mut ratios = Vec::new();
    for (image, mc) in &manual.per_image {
        let ac = auto.iter().find(|(i, _)| i == image).map(|&(_, c)| c).ok_or_else(|| {
            Error::MismatchedIds(format!(
                "image {image:?} of sample {:?} has no automatic count",
                manual.sample_id
            ))
        })?;
        m.push(*mc as f64);
        a.push(ac as f64);
        if *mc > 0 {
            ratios.push(ac as f64 / *mc as f64);
        }
    }
    Ok(EfficiencyReport {
        sample_id: manual.sample_id.clone(),
        manual_mean: mean(&m),
        manual_sd: sample_sd(&m),
        auto_mean: mean(&a),
        auto_sd: sample_sd(&a),
        eff_mean: mean(&ratios),
        eff_sd: sample_sd(&ratios),
        n_images: m.len(),
        n_ratios: ratios.len(),
    })
}

/// One report per manual sample; every sample must exist on both sides.
pub fn efficiency_reports(manual: &[ManualCounts], auto: &[ManualCounts]) -> Result<Vec<EfficiencyReport>> {
    if manual.len() != auto.len() {
        return Err(Error::MismatchedIds(format!(
            "{} manual samples vs {} automatic samples",
            manual.len(),
            auto.len()
        )));
    }
    manual
        .iter()
        .map(|m| {
            let a = auto
                .iter()
                .find(|a| a.sample_id == m.sample_id)
                .ok_or_else(|| Error::MismatchedIds(format!("sample {:?} has no automatic counts", m.sample_id)))?;
            efficiency_report(m, &a.per_image)
        })
        .collect()
}

pub fn encode_report_csv(reports: &[EfficiencyReport]) -> String {
    let mut out = String::from("sample,manual_mean,manual_sd,auto_mean,auto_sd,eff_mean,eff_sd\n");
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.sample_id, r.manual_mean, r.manual_sd, r.auto_mean, r.auto_sd, r.eff_mean, r.eff_sd
        )
        .unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope * x + intercept`; `None` when `x` has
/// no spread.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedCount {
    pub sample: String,
    pub image: String,
    pub manual: u32,
    pub wusem: u32,
    pub classic: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineComparison {
    pub rows: Vec<PairedCount>,
    pub wusem_fit: Option<LinearFit>,
    pub classic_fit: Option<LinearFit>,
}

impl BaselineComparison {
    pub fn from_rows(rows: Vec<PairedCount>) -> Self {
        let xs: Vec<f64> = rows.iter().map(|r| r.manual as f64).collect();
        let w: Vec<f64> = rows.iter().map(|r| r.wusem as f64).collect();
        let c: Vec<f64> = rows.iter().map(|r| r.classic as f64).collect();
        Self {
            wusem_fit: least_squares(&xs, &w),
            classic_fit: least_squares(&xs, &c),
            rows,
        }
    }

    pub fn encode_csv(&self) -> String {
        let mut out = String::from("sample,image,manual,wusem,classic\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.sample, r.image, r.manual, r.wusem, r.classic).unwrap();
        }
        out
    }
}

/// Manual, WUSEM and classic-watershed counts side by side, with a
/// least-squares fit of each automatic count against the manual one.
pub fn compare_baseline(
    images: &[SampleImages],
    manual: &[ManualCounts],
    r0: u32,
    dr: u32,
    pipeline: &Pipeline,
) -> Result<BaselineComparison> {
    check_manual_coverage(images, manual)?;
    let manual = manual_for(images, manual);
    let mut rows = Vec::new();
    for (s, m) in images.iter().zip(&manual) {
        for (image, gray) in &s.images {
            let mask = pipeline.prepare(gray)?.mask;
            rows.push(PairedCount {
                sample: s.sample_id.clone(),
                image: image.clone(),
                manual: m.get(image).expect("coverage checked"),
                wusem: pipeline.wusem(&mask, r0, dr)?.count as u32,
                classic: pipeline.baseline(&mask).count as u32,
            });
        }
    }
    Ok(BaselineComparison::from_rows(rows))
}
