//! Kernel populations for the two transforms.
//!
//! ROCKET draws every hyperparameter at random. MiniROCKET uses the 84
//! two-valued length-9 patterns (three taps of +2, six of -1), a fixed
//! exponential dilation grid and biases taken from quantiles of the
//! convolution output on sampled training windows.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{TimeSeriesWindow, WindowId};
use crate::labeling::quantile_sorted;
use crate::rng::{stream_rng, GENERATOR_NAME};
use crate::transform::minirocket_padded_response;

pub const BANK_FORMAT_VERSION: u32 = 1;
pub const ROCKET_LENGTHS: [usize; 3] = [7, 9, 11];
pub const MINIROCKET_LENGTH: usize = 9;
pub const MINIROCKET_PATTERNS: usize = 84;
pub const MINIROCKET_MAX_DILATIONS: usize = 32;
/// Smallest window that fits a length-11 kernel at dilation 1.
pub const ROCKET_MIN_WINDOW: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Rocket,
    Minirocket,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Rocket => "rocket",
            Variant::Minirocket => "minirocket",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rocket" => Ok(Variant::Rocket),
            "minirocket" => Ok(Variant::Minirocket),
            _ => Err(Error::Config(format!(
                "unknown variant `{s}` (expected rocket|minirocket)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Ppv,
    Max,
}

/// How kernels pick input channels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Random subset of size 2^a, a uniform on 0..=floor(log2 m).
    #[default]
    Subset,
    /// Every kernel sees every channel.
    All,
}

impl std::str::FromStr for ChannelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "subset" => Ok(Self::Subset),
            "all" => Ok(Self::All),
            _ => Err(Error::Config(format!("unknown channel mode `{s}` (expected subset|all)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub length: usize,
    pub dilation: usize,
    pub padding: bool,
    /// Input channels, ascending, duplicate-free.
    pub channels: Vec<usize>,
    /// `channels.len() × length`, one row of taps per channel.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub features: Vec<Pooling>,
    /// MiniROCKET only: the three taps weighted +2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<[u8; 3]>,
}

impl KernelSpec {
    /// Zero-padding applied on each side of the input.
    pub fn padding_width(&self) -> usize {
        if self.padding {
            (self.length - 1) * self.dilation / 2
        } else {
            0
        }
    }

    /// Response length for an input of `len` timesteps (0 when the
    /// unpadded receptive field does not fit).
    pub fn output_len(&self, len: usize) -> usize {
        let span = (self.length - 1) * self.dilation;
        (len + 2 * self.padding_width()).saturating_sub(span)
    }

    pub fn taps(&self, channel_slot: usize) -> &[f64] {
        &self.weights[channel_slot * self.length..(channel_slot + 1) * self.length]
    }

    /// PPV per bias, then MAX when requested.
    pub fn feature_count(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                Pooling::Ppv => self.biases.len(),
                Pooling::Max => 1,
            })
            .sum()
    }
}

/// Everything needed to regenerate a bank bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankManifest {
    pub format_version: u32,
    pub variant: Variant,
    pub seed: u64,
    pub generator: String,
    pub channels: usize,
    pub window_len: usize,
    /// Kernel count (ROCKET) or requested feature count (MiniROCKET).
    pub count: usize,
    pub channel_mode: ChannelMode,
    /// MiniROCKET bias-sample windows, one per kernel in bank order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_windows: Option<Vec<WindowId>>,
}

impl BankManifest {
    /// SHA-256 over the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serializes");
        crate::sha256_hex(&bytes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub kernel: u32,
    pub pooling: Pooling,
    pub bias: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBank {
    pub manifest: BankManifest,
    pub specs: Vec<KernelSpec>,
}

impl KernelBank {
    pub fn variant(&self) -> Variant {
        self.manifest.variant
    }

    pub fn feature_count(&self) -> usize {
        self.specs.iter().map(KernelSpec::feature_count).sum()
    }

    /// Column provenance in transform output order.
    pub fn feature_meta(&self) -> Vec<FeatureMeta> {
        let mut out = Vec::with_capacity(self.feature_count());
        for (k, spec) in self.specs.iter().enumerate() {
            for f in &spec.features {
                match f {
                    Pooling::Ppv => out.extend((0..spec.biases.len()).map(|b| FeatureMeta {
                        kernel: k as u32,
                        pooling: Pooling::Ppv,
                        bias: b as u32,
                    })),
                    Pooling::Max => out.push(FeatureMeta {
                        kernel: k as u32,
                        pooling: Pooling::Max,
                        bias: 0,
                    }),
                }
            }
        }
        out
    }

    /// Rebuilds the bank from its manifest. MiniROCKET banks need the
    /// windows named in `bias_windows`.
    pub fn from_manifest(manifest: &BankManifest, windows: &[TimeSeriesWindow]) -> Result<Self> {
        if manifest.format_version != BANK_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "bank manifest version {} (expected {BANK_FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        if manifest.generator != GENERATOR_NAME {
            return Err(Error::Format(format!(
                "bank uses generator `{}`, this build provides `{GENERATOR_NAME}`",
                manifest.generator
            )));
        }
        match manifest.variant {
            Variant::Rocket => generate_rocket(
                manifest.count,
                manifest.channels,
                manifest.window_len,
                manifest.seed,
                manifest.channel_mode,
            ),
            Variant::Minirocket => {
                let ids = manifest.bias_windows.as_ref().ok_or_else(|| {
                    Error::Format("MiniROCKET manifest lacks bias_windows".into())
                })?;
                let lookup = |id: &WindowId| {
                    windows.iter().find(|w| w.id == *id).ok_or_else(|| {
                        Error::Integrity(format!(
                            "bias window unit {} cycle {} not available",
                            id.unit_id, id.end_cycle
                        ))
                    })
                };
                let picked: Vec<&TimeSeriesWindow> = ids.iter().map(lookup).collect::<Result<_>>()?;
                build_minirocket(
                    manifest.count,
                    manifest.channels,
                    manifest.window_len,
                    manifest.seed,
                    manifest.channel_mode,
                    BiasSource::Fixed(&picked),
                )
            }
        }
    }

    /// Full specs as JSON, for audit.
    pub fn specs_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.specs)?)
    }
}

fn channel_subset<R: Rng>(rng: &mut R, m: usize, mode: ChannelMode) -> Vec<usize> {
    match mode {
        ChannelMode::All => (0..m).collect(),
        ChannelMode::Subset => {
            let max_exp = usize::BITS - 1 - m.leading_zeros();
            let size = 1usize << rng.random_range(0..=max_exp);
            let mut ch = sample(rng, m, size).into_vec();
            ch.sort_unstable();
            ch
        }
    }
}

/// Random ROCKET kernels.
pub fn generate_rocket(
    count: usize,
    channels: usize,
    window_len: usize,
    seed: u64,
    mode: ChannelMode,
) -> Result<KernelBank> {
    if count == 0 {
        return Err(Error::Config("kernel count must be positive".into()));
    }
    if channels == 0 {
        return Err(Error::Config("input has no channels".into()));
    }
    if window_len < ROCKET_MIN_WINDOW {
        return Err(Error::Config(format!(
            "window length {window_len} too short for ROCKET (needs >= {ROCKET_MIN_WINDOW})"
        )));
    }
    let specs = (0..count)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let length = ROCKET_LENGTHS[rng.random_range(0..ROCKET_LENGTHS.len())];
            let chans = channel_subset(&mut rng, channels, mode);
            let mut weights: Vec<f64> = (0..chans.len() * length)
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let mean = weights.iter().sum::<f64>() / weights.len() as f64;
            weights.iter_mut().for_each(|w| *w -= mean);
            let bias = rng.random_range(-1.0..1.0);
            let max_exp = ((window_len - 1) as f64 / (length - 1) as f64).log2();
            let dilation = (2f64.powf(rng.random_range(0.0..=max_exp)).floor() as usize).max(1);
            let padding = rng.random_bool(0.5);
            KernelSpec {
                length,
                dilation,
                padding,
                channels: chans,
                weights,
                biases: vec![bias],
                features: vec![Pooling::Ppv, Pooling::Max],
                pattern: None,
            }
        })
        .collect();
    Ok(KernelBank {
        manifest: BankManifest {
            format_version: BANK_FORMAT_VERSION,
            variant: Variant::Rocket,
            seed,
            generator: GENERATOR_NAME.to_string(),
            channels,
            window_len,
            count,
            channel_mode: mode,
            bias_windows: None,
        },
        specs,
    })
}

/// The 84 ways to place three +2 taps among nine, lexicographic.
pub fn minirocket_patterns() -> Vec<[u8; 3]> {
    let mut out = Vec::with_capacity(MINIROCKET_PATTERNS);
    for a in 0..9u8 {
        for b in a + 1..9 {
            for c in b + 1..9 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Dilations and PPV features per dilation for each pattern, following
/// the exponential grid on `[1, (L - 1) / 8]`.
pub fn minirocket_dilations(window_len: usize, features_per_pattern: usize) -> Vec<(usize, usize)> {
    let per = features_per_pattern.clamp(1, MINIROCKET_MAX_DILATIONS);
    let multiplier = features_per_pattern as f64 / per as f64;
    let max_exp = ((window_len - 1) as f64 / (MINIROCKET_LENGTH - 1) as f64)
        .log2()
        .max(0.0);
    let mut grid: Vec<(usize, usize)> = Vec::new();
    for i in 0..per {
        let e = if per == 1 { 0.0 } else { max_exp * i as f64 / (per - 1) as f64 };
        let d = (2f64.powf(e).floor() as usize).max(1);
        match grid.last_mut() {
            Some((last, n)) if *last == d => *n += 1,
            _ => grid.push((d, 1)),
        }
    }
    let mut grid: Vec<(usize, usize)> = grid
        .into_iter()
        .map(|(d, n)| (d, (n as f64 * multiplier) as usize))
        .collect();
    let mut remainder = features_per_pattern - grid.iter().map(|g| g.1).sum::<usize>();
    let mut i = 0;
    while remainder > 0 {
        grid[i].1 += 1;
        remainder -= 1;
        i = (i + 1) % grid.len();
    }
    grid
}

enum BiasSource<'a> {
    Sample(&'a [TimeSeriesWindow]),
    Fixed(&'a [&'a TimeSeriesWindow]),
}

/// MiniROCKET kernels with biases drawn from the convolution output of
/// seeded-random windows of `bias_pool` (training windows).
pub fn generate_minirocket(
    target_features: usize,
    channels: usize,
    window_len: usize,
    seed: u64,
    mode: ChannelMode,
    bias_pool: &[TimeSeriesWindow],
) -> Result<KernelBank> {
    if bias_pool.is_empty() {
        return Err(Error::Config("MiniROCKET needs training windows for its biases".into()));
    }
    build_minirocket(
        target_features,
        channels,
        window_len,
        seed,
        mode,
        BiasSource::Sample(bias_pool),
    )
}

fn build_minirocket(
    target_features: usize,
    channels: usize,
    window_len: usize,
    seed: u64,
    mode: ChannelMode,
    source: BiasSource<'_>,
) -> Result<KernelBank> {
    if target_features < MINIROCKET_PATTERNS {
        return Err(Error::Config(format!(
            "MiniROCKET needs at least {MINIROCKET_PATTERNS} features, got {target_features}"
        )));
    }
    if channels == 0 {
        return Err(Error::Config("input has no channels".into()));
    }
    if window_len < MINIROCKET_LENGTH {
        return Err(Error::Config(format!(
            "window length {window_len} too short for MiniROCKET (needs >= {MINIROCKET_LENGTH})"
        )));
    }
    let patterns = minirocket_patterns();
    let grid = minirocket_dilations(window_len, target_features / MINIROCKET_PATTERNS);
    let kernel_count = grid.len() * patterns.len();
    if let BiasSource::Fixed(w) = &source {
        if w.len() != kernel_count {
            return Err(Error::Integrity(format!(
                "{} bias windows for {kernel_count} kernels",
                w.len()
            )));
        }
    }

    let mut specs = Vec::with_capacity(kernel_count);
    let mut bias_windows = Vec::with_capacity(kernel_count);
    for (di, &(dilation, n_biases)) in grid.iter().enumerate() {
        for (pi, pattern) in patterns.iter().enumerate() {
            let k = di * patterns.len() + pi;
            let mut rng = stream_rng(seed, k as u64);
            let chans = channel_subset(&mut rng, channels, mode);
            let mut taps = [-1.0f64; MINIROCKET_LENGTH];
            for &p in pattern {
                taps[p as usize] = 2.0;
            }
            let weights: Vec<f64> = chans.iter().flat_map(|_| taps).collect();
            let mut spec = KernelSpec {
                length: MINIROCKET_LENGTH,
                dilation,
                // alternate across (dilation, pattern)
                padding: (di + pi) % 2 == 0,
                channels: chans,
                weights,
                biases: Vec::new(),
                features: vec![Pooling::Ppv],
                pattern: Some(*pattern),
            };

            let window = match &source {
                BiasSource::Sample(pool) => &pool[rng.random_range(0..pool.len())],
                BiasSource::Fixed(picked) => picked[k],
            };
            if window.values.rows() != channels || window.values.cols() != window_len {
                return Err(Error::Shape(format!(
                    "bias window unit {} cycle {} is {} x {}, bank expects {channels} x {window_len}",
                    window.id.unit_id,
                    window.id.end_cycle,
                    window.values.rows(),
                    window.values.cols()
                )));
            }
            bias_windows.push(window.id);

            // quantiles of the full padded response
            let mut response = minirocket_padded_response(&window.values, &spec)?;
            response.sort_by(f64::total_cmp);
            spec.biases = (0..n_biases)
                .map(|j| -quantile_sorted(&response, (j + 1) as f64 / (n_biases + 1) as f64))
                .collect();
            specs.push(spec);
        }
    }

    Ok(KernelBank {
        manifest: BankManifest {
            format_version: BANK_FORMAT_VERSION,
            variant: Variant::Minirocket,
            seed,
            generator: GENERATOR_NAME.to_string(),
            channels,
            window_len,
            count: target_features,
            channel_mode: mode,
            bias_windows: Some(bias_windows),
        },
        specs,
    })
}
