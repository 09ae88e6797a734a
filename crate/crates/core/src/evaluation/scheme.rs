use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aas::{self, AasMethod, EffectiveChannel};
use crate::bbu::{bbu_precode_with, rounded_qrzf, rzf, BbuOptions, ONE_STAGE_TREE_LIMIT};
use crate::bbu::qrzf;
use crate::channel::{mmwave_from_rng, rayleigh_from_rng, rng_for, ChannelMatrix};
use crate::config::{noise_variance, ChannelModel, ExperimentConfig, MuDimension};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quantizer::{calibrate_step, distortion_factor, QuantizerSpec};

use super::metrics::{power_scale, sum_rate};

/// Stream offset separating calibration draws from sweep trials.
pub(crate) const CALIBRATION_STREAM: u64 = 1 << 40;

/// A precoding scheme evaluated by the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Unquantized RZF on the full channel.
    InfRzf,
    /// AAS subspace selection followed by the quantized BBU precoder.
    Split { aas: AasMethod, n: usize, bits: u32 },
    /// Quantized precoder on the full channel, optionally restricted to the first `antennas`.
    OneStage { bits: u32, antennas: Option<usize> },
    /// Entrywise-quantized QRZF after AAS selection.
    RoundedQrzf { aas: AasMethod, n: usize, bits: u32 },
}

impl Scheme {
    pub fn bits(&self) -> Option<u32> {
        match *self {
            Scheme::InfRzf => None,
            Scheme::Split { bits, .. } | Scheme::OneStage { bits, .. } | Scheme::RoundedQrzf { bits, .. } => {
                Some(bits)
            }
        }
    }

    fn is_one_stage(&self) -> bool {
        matches!(self, Scheme::OneStage { .. })
    }
}

/// A labelled scheme. Labels are the descriptor text, e.g. `dft_split:N=16:B=4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub label: String,
    pub scheme: Scheme,
}

impl SchemeSpec {
    /// Parses `name[:KEY=VALUE]...` against the defaults of `cfg`.
    ///
    /// Names: `inf_rzf`, `gs_mrt_split`, `mrt_split`, `dft_split`,
    /// `one_stage_sesd`, `rounded_qrzf`. Keys: `N`, `B`, `M` (one-stage
    /// antenna subset) and `aas` (for `rounded_qrzf`).
    pub fn parse(descriptor: &str, cfg: &ExperimentConfig) -> Result<Self> {
        let descriptor = descriptor.trim();
        let mut parts = descriptor.split(':');
        let name = parts.next().unwrap_or_default();
        let sys = &cfg.system;
        let (mut n, mut b, mut m, mut method) = (None, None, None, None);
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(descriptor, format!("expected KEY=VALUE, got `{part}`")))?;
            let num = || value.parse::<usize>().map_err(|_| bad(descriptor, format!("`{value}` is not an integer")));
            match key {
                "N" => n = Some(num()?),
                "B" => b = Some(num()? as u32),
                "M" => m = Some(num()?),
                "aas" => method = Some(value.parse::<AasMethod>()?),
                other => return Err(bad(descriptor, format!("unknown key `{other}`"))),
            }
        }
        let split_default = |aas| Scheme::Split { aas, n: n.unwrap_or(sys.n), bits: b.unwrap_or(sys.b_split) };
        let reject = |present: bool, key: &str| {
            if present {
                Err(bad(descriptor, format!("key `{key}` does not apply")))
            } else {
                Ok(())
            }
        };
        let scheme = match name {
            "inf_rzf" => {
                reject(n.is_some() || b.is_some() || m.is_some() || method.is_some(), "any")?;
                Scheme::InfRzf
            }
            "gs_mrt_split" | "mrt_split" | "dft_split" => {
                reject(m.is_some(), "M")?;
                reject(method.is_some(), "aas")?;
                split_default(match name {
                    "gs_mrt_split" => AasMethod::GsMrt,
                    "mrt_split" => AasMethod::Mrt,
                    _ => AasMethod::Dft,
                })
            }
            "one_stage_sesd" => {
                reject(n.is_some() || method.is_some(), "N/aas")?;
                Scheme::OneStage { bits: b.unwrap_or(sys.b_one_stage), antennas: m }
            }
            "rounded_qrzf" => {
                reject(m.is_some(), "M")?;
                Scheme::RoundedQrzf {
                    aas: method.unwrap_or(cfg.aas_method),
                    n: n.unwrap_or(sys.n),
                    bits: b.unwrap_or(sys.b_split),
                }
            }
            other => return Err(bad(descriptor, format!("unknown scheme `{other}`"))),
        };
        let spec = SchemeSpec { label: descriptor.to_string(), scheme };
        spec.check_dimensions(cfg)?;
        Ok(spec)
    }

    fn check_dimensions(&self, cfg: &ExperimentConfig) -> Result<()> {
        let (m, k) = (cfg.system.m, cfg.system.k);
        match self.scheme {
            Scheme::Split { aas, n, .. } | Scheme::RoundedQrzf { aas, n, .. } => {
                if n < k || n > m {
                    return Err(bad(&self.label, format!("need K <= N <= M, got N = {n}")));
                }
                if aas != AasMethod::Dft && n != k {
                    return Err(bad(&self.label, format!("{aas} selection needs N = K = {k}")));
                }
            }
            Scheme::OneStage { antennas: Some(a), .. } if a < k || a > m => {
                return Err(bad(&self.label, format!("need K <= M' <= M, got M' = {a}")));
            }
            _ => {}
        }
        if let Some(bits) = self.scheme.bits() {
            distortion_factor(bits)?;
        }
        Ok(())
    }

    /// Surfaces the exact one-stage search-tree guard before any work is done.
    pub fn check_budget(&self, cfg: &ExperimentConfig) -> Result<()> {
        if let Scheme::OneStage { bits, antennas } = self.scheme {
            let tree_bits = 2 * antennas.unwrap_or(cfg.system.m) * bits as usize;
            if tree_bits > ONE_STAGE_TREE_LIMIT && !cfg.allow_large {
                return Err(Error::BudgetExceeded { tree_bits, limit: ONE_STAGE_TREE_LIMIT });
            }
        }
        Ok(())
    }

    /// Distortion factor used by QRZF for this scheme, honouring config overrides.
    pub fn eta(&self, cfg: &ExperimentConfig) -> Result<Option<f64>> {
        let Some(bits) = self.scheme.bits() else { return Ok(None) };
        let overridden = if self.scheme.is_one_stage() { cfg.eta_one_stage } else { cfg.eta_split };
        Ok(Some(match overridden {
            Some(eta) => eta,
            None => distortion_factor(bits)?,
        }))
    }

    /// Channel-dependent, SNR-independent part of the scheme.
    pub fn prepare(&self, h: &ChannelMatrix) -> Result<PreparedScheme> {
        Ok(match self.scheme {
            Scheme::InfRzf => PreparedScheme { scheme: self.scheme, channel: h.clone(), aas: None, eff: None },
            Scheme::Split { aas, n, .. } | Scheme::RoundedQrzf { aas, n, .. } => {
                let pa = aas::select(aas, h, n)?;
                let eff = aas::effective_channel(h, &pa)?;
                PreparedScheme { scheme: self.scheme, channel: h.clone(), aas: Some(pa.matrix), eff: Some(eff) }
            }
            Scheme::OneStage { antennas, .. } => {
                let channel = antennas.map_or_else(|| h.clone(), |a| h.truncated(a));
                let eff = EffectiveChannel::new(channel.entries.clone())?;
                PreparedScheme { scheme: self.scheme, channel, aas: None, eff: Some(eff) }
            }
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn bad(descriptor: &str, reason: String) -> Error {
    Error::InvalidKey { key: format!("scheme `{descriptor}`"), reason }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Parses with the baseline defaults (`M=32, K=N=8, B = 4/1`).
    fn from_str(s: &str) -> Result<Self> {
        let cfg = ExperimentConfig::new(
            crate::config::SystemConfig::normalized(32, 8, 8, vec![20.0]),
            ChannelModel::Rayleigh,
        );
        Ok(SchemeSpec::parse(s, &cfg)?.scheme)
    }
}

/// Result of one scheme on one channel at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome {
    pub rate: f64,
    /// `λ*` from the bisection, for SESD-based schemes.
    pub lambda_star: Option<f64>,
    /// `‖P_B‖_F²` before the final power normalization.
    pub bbu_power: f64,
    pub nodes: u64,
    pub exact: bool,
}

/// A scheme with its AAS stage already applied to a channel.
#[derive(Debug, Clone)]
pub struct PreparedScheme {
    scheme: Scheme,
    channel: ChannelMatrix,
    aas: Option<CMatrix>,
    eff: Option<EffectiveChannel>,
}

impl PreparedScheme {
    pub fn effective(&self) -> Option<&EffectiveChannel> {
        self.eff.as_ref()
    }

    /// Runs the BBU stage, normalizes `P = P_A P_B` to `q` and evaluates the sum rate.
    pub fn evaluate(
        &self,
        quant: Option<&QuantizerSpec>,
        q: f64,
        sigma0_sq: f64,
        options: &BbuOptions,
    ) -> Result<SchemeOutcome> {
        let need_quant = || quant.ok_or_else(|| Error::Config("scheme needs a calibrated quantizer".into()));
        let eff = || self.eff.as_ref().expect("prepared with an effective channel");
        let (p_b, lambda_star, nodes, exact) = match self.scheme {
            Scheme::InfRzf => (rzf(&self.channel.entries, q, sigma0_sq)?.matrix, None, 0, true),
            Scheme::Split { .. } | Scheme::OneStage { .. } => {
                let out = bbu_precode_with(eff(), need_quant()?, q, sigma0_sq, options)?;
                (out.matrix, Some(out.lambda_star), out.nodes, out.exact)
            }
            Scheme::RoundedQrzf { .. } => (rounded_qrzf(eff(), need_quant()?, q, sigma0_sq, options.mu_dim)?, None, 0, true),
        };
        let bbu_power = crate::linalg::frobenius_sq(&p_b);
        let full = match &self.aas {
            Some(pa) => pa * &p_b,
            None => p_b,
        };
        let p = power_scale(&full, q)?;
        Ok(SchemeOutcome { rate: sum_rate(&self.channel, &p, sigma0_sq)?, lambda_star, bbu_power, nodes, exact })
    }
}

pub(crate) fn bbu_options(cfg: &ExperimentConfig) -> BbuOptions {
    BbuOptions {
        mu_dim: match cfg.mu_dim {
            MuDimension::Precoder => None,
            MuDimension::Antennas => Some(cfg.system.m),
        },
        sesd: crate::bbu::SesdOptions { max_nodes: cfg.max_nodes },
        ..BbuOptions::default()
    }
}

/// Channel realization `index` of the calibration stream (one subcarrier for mmWave).
fn calibration_channel(cfg: &ExperimentConfig, index: usize) -> Result<ChannelMatrix> {
    let stream = CALIBRATION_STREAM + index as u64;
    let sys = &cfg.system;
    match cfg.channel {
        ChannelModel::Rayleigh => {
            ChannelMatrix::new(rayleigh_from_rng(&mut rng_for(cfg.seed, stream), sys.k, sys.m, sys.gamma))
        }
        ChannelModel::Mmwave => {
            let mut subcarriers = mmwave_from_rng(&mut rng_for(cfg.seed, stream), sys.k, sys.m, sys.gamma, &cfg.mmwave);
            let f = index % subcarriers.len();
            Ok(subcarriers.swap_remove(f))
        }
    }
}

/// Offline step-size calibration: real and imaginary parts of power-normalized
/// QRZF precoders on `calibration_draws` effective channels at `calibration_snr_db`.
///
/// Returns `None` for schemes without a quantizer.
pub fn calibrate_scheme(cfg: &ExperimentConfig, spec: &SchemeSpec) -> Result<Option<QuantizerSpec>> {
    let (Some(bits), Some(eta)) = (spec.scheme.bits(), spec.eta(cfg)?) else { return Ok(None) };
    let sys = &cfg.system;
    let sigma0_sq = noise_variance(sys.q, sys.gamma, cfg.calibration_snr_db);
    let options = bbu_options(cfg);
    let mut samples = Vec::new();
    for d in 0..cfg.calibration_draws {
        let h = calibration_channel(cfg, d)?;
        let prepared = spec.prepare(&h)?;
        let eff = prepared.effective().expect("quantized schemes have an effective channel");
        let p = qrzf(&eff.matrix, sys.q, sigma0_sq, eta, options.mu_dim.unwrap_or(eff.dim()))?;
        samples.extend(p.matrix.iter().flat_map(|z| [z.re, z.im]));
    }
    let calibrated = calibrate_step(&samples, bits)?;
    Ok(Some(QuantizerSpec::with_eta(calibrated.delta, bits, eta)?))
}

/// Draws the channel matrices of one sweep trial (64 subcarriers for mmWave).
pub(crate) fn trial_channels(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<ChannelMatrix>> {
    let sys = &cfg.system;
    match cfg.channel {
        ChannelModel::Rayleigh => Ok(vec![ChannelMatrix::new(rayleigh_from_rng(
            &mut rng_for(cfg.seed, trial as u64),
            sys.k,
            sys.m,
            sys.gamma,
        ))?]),
        ChannelModel::Mmwave => {
            Ok(mmwave_from_rng(&mut rng_for(cfg.seed, trial as u64), sys.k, sys.m, sys.gamma, &cfg.mmwave))
        }
    }
}
