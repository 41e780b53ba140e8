//! Dilated multichannel convolution with PPV / MAX pooling.
//!
//! The generic path accumulates one tap at a time over contiguous output
//! ranges (no padded copies). MiniROCKET banks take a second path that
//! exploits the two-valued weights: per dilation the shifted inputs are
//! computed once, and each pattern's response is `3 * (three shifted
//! taps) - (sum of all nine)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Split, TimeSeriesWindow, WindowId};
use crate::kernels::{FeatureMeta, KernelBank, KernelSpec, Pooling, Variant, MINIROCKET_LENGTH};
use crate::matrix::Matrix;

/// Response of one kernel on one m × L window.
pub fn convolve(window: &Matrix, spec: &KernelSpec) -> Vec<f64> {
    let mut out = vec![0.0; spec.output_len(window.cols())];
    convolve_into(window, spec, &mut out);
    out
}

fn convolve_into(window: &Matrix, spec: &KernelSpec, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let len = window.cols() as isize;
    let n_out = out.len() as isize;
    let pad = spec.padding_width() as isize;
    for (slot, &ch) in spec.channels.iter().enumerate() {
        let x = window.row(ch);
        for (k, &w) in spec.taps(slot).iter().enumerate() {
            // out[j] += w * x[j + off]
            let off = (k * spec.dilation) as isize - pad;
            let j0 = (-off).max(0);
            let j1 = (len - off).min(n_out);
            if j1 <= j0 {
                continue;
            }
            let (j0, j1) = (j0 as usize, j1 as usize);
            let xs = &x[(j0 as isize + off) as usize..(j1 as isize + off) as usize];
            for (o, &xv) in out[j0..j1].iter_mut().zip(xs) {
                *o += w * xv;
            }
        }
    }
}

/// Full padded response of a MiniROCKET pattern kernel, computed the same
/// way the transform computes it.
pub fn minirocket_padded_response(window: &Matrix, spec: &KernelSpec) -> Result<Vec<f64>> {
    let pattern = spec
        .pattern
        .ok_or_else(|| Error::Config("kernel has no MiniROCKET pattern".into()))?;
    let mut cache = ShiftCache::new(window.rows(), window.cols());
    cache.fill(window, spec.dilation);
    let mut out = vec![0.0; window.cols()];
    cache.response(spec, pattern, &mut out);
    Ok(out)
}

/// Fraction of positions where `response + bias > 0`; 0 for an empty response.
pub fn pool_ppv(response: &[f64], bias: f64) -> f64 {
    if response.is_empty() {
        return 0.0;
    }
    let positive = response.iter().filter(|&&r| r + bias > 0.0).count();
    positive as f64 / response.len() as f64
}

/// Largest response value; 0 for an empty response.
pub fn pool_max(response: &[f64]) -> f64 {
    if response.is_empty() {
        return 0.0;
    }
    response.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// n_samples × n_features transform output with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub values: Matrix,
    pub feature_meta: Vec<FeatureMeta>,
    /// Hash of the bank manifest that produced the columns.
    pub bank_ref: String,
    pub sample_ids: Vec<WindowId>,
    pub labels: Option<Vec<usize>>,
    pub splits: Option<Vec<Split>>,
}

impl FeatureMatrix {
    pub fn n_samples(&self) -> usize {
        self.values.rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.cols()
    }

    /// Rows whose split tag equals `split`.
    pub fn subset(&self, split: Split) -> Result<FeatureMatrix> {
        let splits = self
            .splits
            .as_ref()
            .ok_or_else(|| Error::Integrity("feature matrix carries no split tags".into()))?;
        let idx: Vec<usize> = (0..self.n_samples()).filter(|&i| splits[i] == split).collect();
        Ok(FeatureMatrix {
            values: self.values.select_rows(&idx),
            feature_meta: self.feature_meta.clone(),
            bank_ref: self.bank_ref.clone(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i]).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            splits: Some(vec![split; idx.len()]),
        })
    }

    /// Stacks `other` below `self`. Both must come from the same bank.
    pub fn concat(mut self, other: FeatureMatrix) -> Result<FeatureMatrix> {
        if self.bank_ref != other.bank_ref || self.n_features() != other.n_features() {
            return Err(Error::Shape("feature matrices come from different banks".into()));
        }
        let (rows, cols) = (self.n_samples() + other.n_samples(), self.n_features());
        let mut data = self.values.into_vec();
        data.extend_from_slice(other.values.as_slice());
        self.values = Matrix::from_vec(rows, cols, data)?;
        self.sample_ids.extend(other.sample_ids);
        self.labels = match (self.labels, other.labels) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        self.splits = match (self.splits, other.splits) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        Ok(self)
    }
}

/// Per-dilation shifted inputs for the MiniROCKET fast path:
/// `shifted[ch][k][j] = x_padded[ch][j + k*d]` over the full padded
/// output range, and `total[ch][j] = sum_k shifted[ch][k][j]`.
struct ShiftCache {
    dilation: usize,
    len: usize,
    shifted: Vec<f64>,
    total: Vec<f64>,
}

impl ShiftCache {
    fn new(channels: usize, len: usize) -> Self {
        Self {
            dilation: 0,
            len,
            shifted: vec![0.0; channels * MINIROCKET_LENGTH * len],
            total: vec![0.0; channels * len],
        }
    }

    fn fill(&mut self, window: &Matrix, dilation: usize) {
        let len = self.len as isize;
        let pad = ((MINIROCKET_LENGTH - 1) * dilation / 2) as isize;
        self.shifted.iter_mut().for_each(|v| *v = 0.0);
        self.total.iter_mut().for_each(|v| *v = 0.0);
        for ch in 0..window.rows() {
            let x = window.row(ch);
            for k in 0..MINIROCKET_LENGTH {
                let off = (k * dilation) as isize - pad;
                let j0 = (-off).max(0);
                let j1 = (len - off).min(len);
                if j1 <= j0 {
                    continue;
                }
                let base = (ch * MINIROCKET_LENGTH + k) * self.len;
                for j in j0..j1 {
                    self.shifted[base + j as usize] = x[(j + off) as usize];
                }
            }
            let tot = &mut self.total[ch * self.len..(ch + 1) * self.len];
            for k in 0..MINIROCKET_LENGTH {
                let base = (ch * MINIROCKET_LENGTH + k) * self.len;
                for (t, s) in tot.iter_mut().zip(&self.shifted[base..base + self.len]) {
                    *t += s;
                }
            }
        }
        self.dilation = dilation;
    }

    fn row(&self, ch: usize, k: usize) -> &[f64] {
        let base = (ch * MINIROCKET_LENGTH + k) * self.len;
        &self.shifted[base..base + self.len]
    }

    /// Full padded response of a pattern over `channels`.
    fn response(&self, spec: &KernelSpec, pattern: [u8; 3], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &ch in &spec.channels {
            let (a, b, c) = (
                self.row(ch, pattern[0] as usize),
                self.row(ch, pattern[1] as usize),
                self.row(ch, pattern[2] as usize),
            );
            let tot = &self.total[ch * self.len..(ch + 1) * self.len];
            for j in 0..self.len {
                out[j] += 3.0 * (a[j] + b[j] + c[j]) - tot[j];
            }
        }
    }
}

struct Scratch {
    response: Vec<f64>,
    cache: Option<ShiftCache>,
    empty: usize,
}

fn pool_into(spec: &KernelSpec, response: &[f64], out: &mut [f64], scratch_empty: &mut usize) -> usize {
    if response.is_empty() {
        *scratch_empty += 1;
    }
    let mut col = 0;
    for f in &spec.features {
        match f {
            Pooling::Ppv => {
                for &b in &spec.biases {
                    out[col] = pool_ppv(response, b);
                    col += 1;
                }
            }
            Pooling::Max => {
                out[col] = pool_max(response);
                col += 1;
            }
        }
    }
    col
}

fn transform_window(window: &Matrix, bank: &KernelBank, out: &mut [f64], scratch: &mut Scratch) {
    let len = window.cols();
    let mut col = 0;
    let fast = bank.variant() == Variant::Minirocket;
    for spec in &bank.specs {
        match (fast, spec.pattern) {
            (true, Some(pattern)) => {
                let cache = scratch
                    .cache
                    .get_or_insert_with(|| ShiftCache::new(window.rows(), len));
                if cache.dilation != spec.dilation {
                    cache.fill(window, spec.dilation);
                }
                scratch.response.resize(len, 0.0);
                cache.response(spec, pattern, &mut scratch.response);
                let full_pad = (MINIROCKET_LENGTH - 1) * spec.dilation / 2;
                let range = if spec.padding {
                    0..len
                } else {
                    let s = full_pad.min(len);
                    s..len.saturating_sub(full_pad).max(s)
                };
                let resp = &scratch.response[range];
                col += pool_into(spec, resp, &mut out[col..], &mut scratch.empty);
            }
            _ => {
                let n = spec.output_len(len);
                scratch.response.resize(n, 0.0);
                convolve_into(window, spec, &mut scratch.response[..n]);
                let (resp, empty) = (&scratch.response[..n], &mut scratch.empty);
                col += pool_into(spec, resp, &mut out[col..], empty);
            }
        }
    }
    if let Some(c) = scratch.cache.as_mut() {
        // next window must refill
        c.dilation = 0;
    }
}

/// Applies `bank` to every window. Rows follow window order, columns
/// follow `bank.feature_meta()`. `workers == 0` uses the global pool.
pub fn transform_all(
    windows: &[TimeSeriesWindow],
    bank: &KernelBank,
    workers: usize,
) -> Result<FeatureMatrix> {
    let (m, len) = (bank.manifest.channels, bank.manifest.window_len);
    if let Some(w) = windows
        .iter()
        .find(|w| w.values.rows() != m || w.values.cols() != len)
    {
        return Err(Error::Shape(format!(
            "window unit {} cycle {} is {} x {}, bank expects {m} x {len}",
            w.id.unit_id,
            w.id.end_cycle,
            w.values.rows(),
            w.values.cols()
        )));
    }
    let p = bank.feature_count();
    let mut values = Matrix::zeros(windows.len(), p);
    let empty = AtomicUsize::new(0);

    let run = |values: &mut Matrix| {
        if p == 0 {
            return;
        }
        values
            .as_mut_slice()
            .par_chunks_mut(p)
            .zip(windows.par_iter())
            .for_each_init(
                || Scratch {
                    response: Vec::with_capacity(len),
                    cache: None,
                    empty: 0,
                },
                |scratch, (row, w)| {
                    transform_window(&w.values, bank, row, scratch);
                    if scratch.empty > 0 {
                        empty.fetch_add(scratch.empty, Ordering::Relaxed);
                        scratch.empty = 0;
                    }
                },
            );
    };
    if workers == 0 {
        run(&mut values);
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| run(&mut values));
    }
    let empty = empty.into_inner();
    if empty > 0 {
        log::warn!("{empty} kernel responses were empty; their features were set to 0");
    }

    let labels = windows
        .iter()
        .map(|w| w.label)
        .collect::<Option<Vec<usize>>>();
    Ok(FeatureMatrix {
        values,
        feature_meta: bank.feature_meta(),
        bank_ref: bank.manifest.hash(),
        sample_ids: windows.iter().map(|w| w.id).collect(),
        labels,
        splits: None,
    })
}

/// Serializable header of a feature file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureFileMeta {
    pub format_version: u32,
    pub bank_ref: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub feature_meta: Vec<FeatureMeta>,
    pub sample_ids: Vec<WindowId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<Vec<Split>>,
}

pub const FEATURE_FORMAT_VERSION: u32 = 1;
const FEATURE_MAGIC: &[u8; 4] = b"HSFM";

/// Sidecar path holding the JSON header of a feature file.
pub fn feature_meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

impl FeatureMatrix {
    /// Writes the values as `HSFM`, version, rows, cols, then row-major
    /// little-endian f64, with provenance in a `<path>.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(FEATURE_MAGIC)?;
        out.write_all(&FEATURE_FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(self.n_samples() as u64).to_le_bytes())?;
        out.write_all(&(self.n_features() as u64).to_le_bytes())?;
        for v in self.values.as_slice() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        let meta = FeatureFileMeta {
            format_version: FEATURE_FORMAT_VERSION,
            bank_ref: self.bank_ref.clone(),
            n_samples: self.n_samples(),
            n_features: self.n_features(),
            feature_meta: self.feature_meta.clone(),
            sample_ids: self.sample_ids.clone(),
            labels: self.labels.clone(),
            splits: self.splits.clone(),
        };
        std::fs::write(feature_meta_path(path), serde_json::to_string(&meta)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FeatureMatrix> {
        let meta_path = feature_meta_path(path);
        if !path.exists() || !meta_path.exists() {
            return Err(Error::MissingCache { path: path.to_path_buf(), step: "transform" });
        }
        let meta: FeatureFileMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        let mut input = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != FEATURE_MAGIC {
            return Err(Error::Format(format!("{} is not a feature file", path.display())));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != FEATURE_FORMAT_VERSION || meta.format_version != FEATURE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "feature file version {version} (expected {FEATURE_FORMAT_VERSION})"
            )));
        }
        let mut long = [0u8; 8];
        input.read_exact(&mut long)?;
        let rows = u64::from_le_bytes(long) as usize;
        input.read_exact(&mut long)?;
        let cols = u64::from_le_bytes(long) as usize;
        if rows != meta.n_samples
            || cols != meta.n_features
            || meta.sample_ids.len() != rows
            || meta.feature_meta.len() != cols
        {
            return Err(Error::Integrity(format!(
                "feature file header {rows}x{cols} disagrees with its sidecar"
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            input.read_exact(&mut long)?;
            data.push(f64::from_le_bytes(long));
        }
        if input.read(&mut long)? != 0 {
            return Err(Error::Integrity("trailing bytes after feature values".into()));
        }
        Ok(FeatureMatrix {
            values: Matrix::from_vec(rows, cols, data)?,
            feature_meta: meta.feature_meta,
            bank_ref: meta.bank_ref,
            sample_ids: meta.sample_ids,
            labels: meta.labels,
            splits: meta.splits,
        })
    }
}
