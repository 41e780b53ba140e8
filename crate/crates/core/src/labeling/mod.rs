//! Health-status label construction: PCA fusion into a health index,
//! Savitzky-Golay smoothing, Weibull-hazard curve fitting and slope-based
//! segmentation into `c` ordered stages.
//!
//! Pool statistics (PCA direction, slope cut points) come from training
//! units only and are then applied unchanged to test units.

mod pca;
mod savgol;
mod segment;
mod weibull;

pub use pca::{end_minus_start, PcaFusion, ORIENTATION_FRACTION};
pub use savgol::sg_smooth;
pub use segment::{quantile_sorted, slopes, steepness, SlopeThresholds};
pub use weibull::{fit_weibull_curve, hazard, WeibullFit, WeibullParams};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{IngestedDataset, Split, UnitSeries};

pub const LABEL_FORMAT_VERSION: u32 = 1;
pub const SUMMARY_FILE: &str = "label_summary.json";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub classes: usize,
    pub sg_window: usize,
    pub sg_order: usize,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            classes: 4,
            sg_window: 21,
            sg_order: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthIndexCurve {
    pub unit_id: u32,
    pub split: Split,
    pub hi_raw: Vec<f64>,
    pub hi_smooth: Vec<f64>,
    pub hi_fit: Vec<f64>,
    pub weibull: Option<WeibullParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsLabeling {
    pub unit_id: u32,
    pub labels: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub class_counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitLabelSummary {
    pub unit_id: u32,
    pub split: Split,
    pub cycles: usize,
    pub weibull: Option<WeibullParams>,
    pub class_counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub format_version: u32,
    pub config: LabelConfig,
    pub pca: PcaFusion,
    pub thresholds: SlopeThresholds,
    pub train_class_counts: Vec<u64>,
    pub test_class_counts: Vec<u64>,
    pub units: Vec<UnitLabelSummary>,
}

/// Complete labelling result for one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelSet {
    pub summary: LabelSummary,
    pub curves: Vec<HealthIndexCurve>,
    /// Per-cycle labels keyed by unit id.
    pub labels: BTreeMap<u32, Vec<usize>>,
}

fn smooth_and_fit(unit: &UnitSeries, hi_raw: Vec<f64>, cfg: &LabelConfig) -> Result<HealthIndexCurve> {
    let hi_smooth = sg_smooth(&hi_raw, cfg.sg_window, cfg.sg_order)?;
    let t: Vec<f64> = (1..=hi_smooth.len()).map(|c| c as f64).collect();
    let fit = fit_weibull_curve(&hi_smooth, &t)?;
    Ok(HealthIndexCurve {
        unit_id: unit.unit_id,
        split: unit.split,
        hi_raw,
        hi_smooth,
        hi_fit: fit.fitted,
        weibull: fit.params,
    })
}

fn count_classes<'a>(labels: impl Iterator<Item = &'a usize>, classes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Runs the full label pipeline over an ingested dataset.
pub fn build_labels(ds: &IngestedDataset, cfg: &LabelConfig) -> Result<LabelSet> {
    if cfg.classes < 2 {
        return Err(Error::Config(format!(
            "need at least 2 classes, got {}",
            cfg.classes
        )));
    }
    let train: Vec<&UnitSeries> = ds.units_in(Split::Train).collect();
    let pool: Vec<_> = train.iter().map(|u| &u.values).collect();
    let pca = PcaFusion::fit(&pool)?;

    let curves: Vec<HealthIndexCurve> = ds
        .units
        .par_iter()
        .map(|u| smooth_and_fit(u, pca.score(&u.values)?, cfg))
        .collect::<Result<_>>()?;

    let slope_pool: Vec<f64> = curves
        .iter()
        .filter(|c| c.split == Split::Train)
        .flat_map(|c| steepness(&c.hi_fit))
        .collect();
    let thresholds = SlopeThresholds::from_pool(&slope_pool, cfg.classes)?;

    let mut labels = BTreeMap::new();
    let mut units = Vec::with_capacity(curves.len());
    for c in &curves {
        let l = thresholds.label(&c.hi_fit);
        units.push(UnitLabelSummary {
            unit_id: c.unit_id,
            split: c.split,
            cycles: l.len(),
            weibull: c.weibull,
            class_counts: count_classes(l.iter(), cfg.classes),
        });
        labels.insert(c.unit_id, l);
    }
    let pooled = |split: Split| {
        count_classes(
            curves
                .iter()
                .filter(|c| c.split == split)
                .flat_map(|c| labels[&c.unit_id].iter()),
            cfg.classes,
        )
    };
    let train_class_counts = pooled(Split::Train);
    let total: u64 = train_class_counts.iter().sum();
    let c = cfg.classes as f64;
    for (k, &n) in train_class_counts.iter().enumerate() {
        let freq = n as f64 / total.max(1) as f64;
        if freq < 0.5 / c || freq > 2.0 / c {
            log::warn!("class {k} covers {:.1}% of training cycles", 100.0 * freq);
        }
    }

    Ok(LabelSet {
        summary: LabelSummary {
            format_version: LABEL_FORMAT_VERSION,
            config: *cfg,
            pca,
            thresholds,
            train_class_counts,
            test_class_counts: pooled(Split::Test),
            units,
        },
        curves,
        labels,
    })
}

impl LabelSet {
    pub fn labeling(&self, unit_id: u32) -> Option<HsLabeling> {
        let labels = self.labels.get(&unit_id)?.clone();
        Some(HsLabeling {
            unit_id,
            class_counts: count_classes(labels.iter(), self.summary.config.classes),
            thresholds: self.summary.thresholds.cuts.clone(),
            labels,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join(SUMMARY_FILE),
            serde_json::to_string_pretty(&self.summary)?,
        )?;
        let mut w = csv::Writer::from_path(dir.join(LABELS_FILE))?;
        w.write_record(["unit", "split", "cycle", "hi_raw", "hi_smooth", "hi_fit", "label"])?;
        for c in &self.curves {
            let labels = &self.labels[&c.unit_id];
            for i in 0..c.hi_raw.len() {
                w.write_record([
                    c.unit_id.to_string(),
                    c.split.as_str().to_string(),
                    (i + 1).to_string(),
                    c.hi_raw[i].to_string(),
                    c.hi_smooth[i].to_string(),
                    c.hi_fit[i].to_string(),
                    labels[i].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let summary_path = dir.join(SUMMARY_FILE);
        if !summary_path.exists() {
            return Err(Error::MissingCache {
                path: summary_path,
                step: "label",
            });
        }
        let summary: LabelSummary = serde_json::from_str(&std::fs::read_to_string(&summary_path)?)?;
        if summary.format_version != LABEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "label cache version {} (expected {LABEL_FORMAT_VERSION})",
                summary.format_version
            )));
        }
        let weibull: BTreeMap<u32, Option<WeibullParams>> =
            summary.units.iter().map(|u| (u.unit_id, u.weibull)).collect();

        let mut rdr = csv::Reader::from_path(dir.join(LABELS_FILE))?;
        let mut curves: Vec<HealthIndexCurve> = Vec::new();
        let mut labels: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |what: &str| Error::Parse {
                line,
                msg: format!("bad {what}"),
            };
            if rec.len() != 7 {
                return Err(bad("column count"));
            }
            let unit: u32 = rec[0].parse().map_err(|_| bad("unit"))?;
            let split: Split = rec[1].parse()?;
            let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad("number"));
            if curves.last().map_or(true, |c| c.unit_id != unit) {
                curves.push(HealthIndexCurve {
                    unit_id: unit,
                    split,
                    hi_raw: Vec::new(),
                    hi_smooth: Vec::new(),
                    hi_fit: Vec::new(),
                    weibull: weibull.get(&unit).copied().flatten(),
                });
            }
            let c = curves.last_mut().expect("pushed above");
            c.hi_raw.push(num(3)?);
            c.hi_smooth.push(num(4)?);
            c.hi_fit.push(num(5)?);
            let l: usize = rec[6].parse().map_err(|_| bad("label"))?;
            if l >= summary.config.classes {
                return Err(bad("label (out of range)"));
            }
            labels.entry(unit).or_default().push(l);
        }
        Ok(Self {
            summary,
            curves,
            labels,
        })
    }
}
