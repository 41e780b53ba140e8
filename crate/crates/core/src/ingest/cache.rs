//! On-disk ingest cache: `series.csv` holds the standardized per-cycle
//! sensor values of every unit, `ingest.json` the manifest needed to
//! rebuild windows.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    apply_standardizer, fit_standardizer, make_windows, split_by_unit, DatasetId, RawTrajectory,
    SensorSelection, Split, StandardizationStats, TimeSeriesWindow, UnitSplit,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "ingest.json";
pub const SERIES_FILE: &str = "series.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub format_version: u32,
    pub dataset: DatasetId,
    pub window_len: usize,
    pub stride: usize,
    pub sensors: Vec<String>,
    pub test_fraction: f64,
    pub seed: u64,
    pub split: UnitSplit,
    pub stats: StandardizationStats,
    /// SHA-256 of the raw input file, when ingested from disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_sha256: Option<String>,
}

/// Standardized selected-sensor series of one unit (m × T).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSeries {
    pub unit_id: u32,
    pub split: Split,
    pub values: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestedDataset {
    pub manifest: IngestManifest,
    /// Sorted by unit id.
    pub units: Vec<UnitSeries>,
}

impl IngestedDataset {
    /// Splits units, fits the standardizer on the training side only and
    /// standardizes every unit with it.
    pub fn build(
        dataset: DatasetId,
        trajs: &[RawTrajectory],
        sensors: &SensorSelection,
        window_len: usize,
        stride: usize,
        test_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        if window_len < 2 || stride == 0 {
            return Err(Error::Config(format!(
                "invalid window {window_len} / stride {stride}"
            )));
        }
        let ids: Vec<u32> = trajs.iter().map(|t| t.unit_id).collect();
        let split = split_by_unit(&ids, test_fraction, seed)?;
        let train: Vec<RawTrajectory> = trajs
            .iter()
            .filter(|t| split.side(t.unit_id) == Some(Split::Train))
            .cloned()
            .collect();
        let stats = fit_standardizer(&train, sensors, "train")?;

        let mut units = Vec::with_capacity(trajs.len());
        for t in trajs {
            let side = split.side(t.unit_id).expect("every unit is assigned");
            units.push(UnitSeries {
                unit_id: t.unit_id,
                split: side,
                values: apply_standardizer(t, sensors, &stats)?,
            });
        }
        units.sort_by_key(|u| u.unit_id);

        Ok(Self {
            manifest: IngestManifest {
                format_version: CACHE_FORMAT_VERSION,
                dataset,
                window_len,
                stride,
                sensors: sensors.names().to_vec(),
                test_fraction,
                seed,
                split,
                stats,
                source_sha256: None,
            },
            units,
        })
    }

    pub fn units_in(&self, split: Split) -> impl Iterator<Item = &UnitSeries> {
        self.units.iter().filter(move |u| u.split == split)
    }

    pub fn channels(&self) -> usize {
        self.manifest.sensors.len()
    }

    /// Windows of one split, labelled from `labels` (unit id → per-cycle
    /// labels) when given.
    pub fn windows(
        &self,
        split: Split,
        labels: Option<&BTreeMap<u32, Vec<usize>>>,
    ) -> Result<Vec<TimeSeriesWindow>> {
        let mut out = Vec::new();
        for u in self.units_in(split) {
            let unit_labels = match labels {
                Some(map) => Some(map.get(&u.unit_id).map(Vec::as_slice).ok_or_else(|| {
                    Error::Integrity(format!("no labels for unit {}", u.unit_id))
                })?),
                None => None,
            };
            out.extend(make_windows(
                u.unit_id,
                &u.values,
                unit_labels,
                self.manifest.window_len,
                self.manifest.stride,
            )?);
        }
        Ok(out)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&self.manifest)?,
        )?;
        let mut w = csv::Writer::from_path(dir.join(SERIES_FILE))?;
        let mut header = vec!["unit".to_string(), "split".into(), "cycle".into()];
        header.extend(self.manifest.sensors.iter().cloned());
        w.write_record(&header)?;
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        for u in &self.units {
            for c in 0..u.values.cols() {
                rec.clear();
                rec.push(u.unit_id.to_string());
                rec.push(u.split.as_str().to_string());
                rec.push((c + 1).to_string());
                for ch in 0..u.values.rows() {
                    rec.push(u.values.get(ch, c).to_string());
                }
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST_FILE);
        if !manifest_path.exists() {
            return Err(Error::MissingCache {
                path: manifest_path,
                step: "ingest",
            });
        }
        let manifest: IngestManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
        if manifest.format_version != CACHE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "ingest cache version {} (expected {CACHE_FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        let m = manifest.sensors.len();

        let mut rdr = csv::Reader::from_path(dir.join(SERIES_FILE))?;
        let mut units: Vec<(u32, Split, Vec<Vec<f64>>)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != 3 + m {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} columns, found {}", 3 + m, rec.len()),
                });
            }
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad number `{}`", &rec[k]),
                })
            };
            let unit: u32 = rec[0].parse().map_err(|_| Error::Parse {
                line,
                msg: "bad unit id".into(),
            })?;
            let split: Split = rec[1].parse()?;
            if units.last().map_or(true, |u| u.0 != unit) {
                units.push((unit, split, vec![Vec::new(); m]));
            }
            let entry = units.last_mut().expect("pushed above");
            for ch in 0..m {
                entry.2[ch].push(num(3 + ch)?);
            }
        }
        let units = units
            .into_iter()
            .map(|(unit_id, split, rows)| {
                Ok(UnitSeries {
                    unit_id,
                    split,
                    values: Matrix::from_rows(&rows)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { manifest, units })
    }
}
