//! System and experiment configuration.
//!
//! Configuration files are flat `key = value` text (a TOML subset without
//! tables). Keys are named exactly as the struct fields below; the
//! dimensions use their conventional capitals `M`, `K`, `N`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::aas::AasMethod;
use crate::channel::MmWaveParams;
use crate::error::{Error, Result};

/// Dimensions, power, fading and fronthaul bit budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Antenna count.
    #[serde(rename = "M")]
    pub m: usize,
    /// UE count.
    #[serde(rename = "K")]
    pub k: usize,
    /// BBU precoding dimension.
    #[serde(rename = "N")]
    pub n: usize,
    /// Maximum average transmit power.
    pub q: f64,
    /// Large-scale fading coefficient.
    pub gamma: f64,
    /// Noise variance used when no SNR point overrides it.
    pub sigma0_sq: f64,
    pub snr_db_list: Vec<f64>,
    /// Bits per real dimension for the split architecture.
    pub b_split: u32,
    /// Bits per real dimension for the one-stage architecture.
    pub b_one_stage: u32,
}

impl SystemConfig {
    /// Normalized scenario (`q = γ = 1`) with `σ₀²` taken from the first SNR point.
    pub fn normalized(m: usize, k: usize, n: usize, snr_db_list: Vec<f64>) -> Self {
        let sigma0_sq = snr_db_list.first().map_or(1.0, |&s| noise_variance(1.0, 1.0, s));
        SystemConfig {
            m,
            k,
            n,
            q: 1.0,
            gamma: 1.0,
            sigma0_sq,
            snr_db_list,
            b_split: 4,
            b_one_stage: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.n == 0 {
            return Err(Error::Config("all dimensions must be at least 1".into()));
        }
        if !(self.k <= self.n && self.n <= self.m) {
            return Err(Error::Config(format!(
                "require K <= N <= M, got K = {}, N = {}, M = {}",
                self.k, self.n, self.m
            )));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::InvalidKey { key: "q".into(), reason: "must be positive".into() });
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidKey {
                key: "gamma".into(),
                reason: "must be non-negative".into(),
            });
        }
        if !(self.sigma0_sq.is_finite() && self.sigma0_sq > 0.0) {
            return Err(Error::InvalidKey {
                key: "sigma0_sq".into(),
                reason: "must be positive".into(),
            });
        }
        if let Some(bad) = self.snr_db_list.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidKey {
                key: "snr_db_list".into(),
                reason: format!("non-finite entry {bad}"),
            });
        }
        for (key, b) in [("b_split", self.b_split), ("b_one_stage", self.b_one_stage)] {
            if b == 0 {
                return Err(Error::InvalidKey { key: key.into(), reason: "must be >= 1".into() });
            }
        }
        Ok(())
    }

    /// `σ₀² = qγ / 10^(SNR/10)`.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        noise_variance(self.q, self.gamma, snr_db)
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.q * self.gamma / self.sigma0_sq).log10()
    }

    /// A copy with `σ₀²` set from an SNR point.
    pub fn at_snr(&self, snr_db: f64) -> Self {
        SystemConfig { sigma0_sq: self.noise_variance(snr_db), ..self.clone() }
    }
}

pub fn noise_variance(q: f64, gamma: f64, snr_db: f64) -> f64 {
    q * gamma / 10f64.powf(snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Rayleigh,
    Mmwave,
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelModel::Rayleigh => "rayleigh",
            ChannelModel::Mmwave => "mmwave",
        })
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rayleigh" => Ok(ChannelModel::Rayleigh),
            "mmwave" => Ok(ChannelModel::Mmwave),
            other => Err(Error::InvalidKey {
                key: "channel".into(),
                reason: format!("unknown channel model `{other}` (expected rayleigh or mmwave)"),
            }),
        }
    }
}

/// Which dimension enters the distortion term of the QRZF regularizer when
/// the BBU initializes on the effective channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuDimension {
    /// Number of columns of the channel the QRZF is computed on (`N` for split).
    #[default]
    Precoder,
    /// Always the physical antenna count `M`.
    Antennas,
}

impl FromStr for MuDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "N" | "precoder" => Ok(MuDimension::Precoder),
            "m" | "M" | "antennas" => Ok(MuDimension::Antennas),
            other => Err(Error::InvalidKey {
                key: "mu_dim".into(),
                reason: format!("expected `n` or `m`, got `{other}`"),
            }),
        }
    }
}

/// Everything a sweep needs besides the scheme list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub channel: ChannelModel,
    pub mmwave: MmWaveParams,
    /// AAS method used by calibration and by `custom` schemes that do not name one.
    pub aas_method: AasMethod,
    pub mu_dim: MuDimension,
    pub trials: usize,
    pub seed: u64,
    /// Node budget per sphere-decoder column solve; `None` searches to completion.
    pub max_nodes: Option<u64>,
    /// Lifts the exact one-stage search-tree guard.
    pub allow_large: bool,
    pub calibration_draws: usize,
    pub calibration_snr_db: f64,
    /// Overrides for the distortion factor table.
    pub eta_split: Option<f64>,
    pub eta_one_stage: Option<f64>,
    /// Scheme descriptors for the `custom` preset.
    pub schemes: Vec<String>,
}

pub const DEFAULT_MAX_NODES: u64 = 20_000;

impl ExperimentConfig {
    pub fn new(system: SystemConfig, channel: ChannelModel) -> Self {
        ExperimentConfig {
            system,
            channel,
            mmwave: MmWaveParams::default(),
            aas_method: AasMethod::GsMrt,
            mu_dim: MuDimension::Precoder,
            trials: match channel {
                ChannelModel::Rayleigh => 500,
                ChannelModel::Mmwave => 100,
            },
            seed: 1,
            max_nodes: Some(DEFAULT_MAX_NODES),
            allow_large: false,
            calibration_draws: 1000,
            calibration_snr_db: 20.0,
            eta_split: None,
            eta_one_stage: None,
            schemes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.channel == ChannelModel::Mmwave {
            self.mmwave.validate()?;
        }
        if self.trials == 0 {
            return Err(Error::InvalidKey { key: "trials".into(), reason: "must be >= 1".into() });
        }
        if self.calibration_draws == 0 {
            return Err(Error::InvalidKey {
                key: "calibration_draws".into(),
                reason: "must be >= 1".into(),
            });
        }
        for (key, eta) in [("eta_split", self.eta_split), ("eta_one_stage", self.eta_one_stage)] {
            if let Some(eta) = eta {
                if !(0.0..1.0).contains(&eta) {
                    return Err(Error::InvalidKey { key: key.into(), reason: "must be in [0, 1)".into() });
                }
            }
        }
        Ok(())
    }

    /// Parses the flat key-value format.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("parse error: {}", e.message())))?;
        let mut kv = Kv { table };

        let snr_db_list = kv.req_f64_list("snr_db_list")?;
        let q = kv.opt_f64("q")?.unwrap_or(1.0);
        let gamma = kv.opt_f64("gamma")?.unwrap_or(1.0);
        let sigma0_sq = match kv.opt_f64("sigma0_sq")? {
            Some(s) => s,
            None => noise_variance(q, gamma, snr_db_list.first().copied().unwrap_or(0.0)),
        };
        let system = SystemConfig {
            m: kv.req_usize("M")?,
            k: kv.req_usize("K")?,
            n: kv.req_usize("N")?,
            q,
            gamma,
            sigma0_sq,
            snr_db_list,
            b_split: kv.req_usize("b_split")? as u32,
            b_one_stage: kv.req_usize("b_one_stage")? as u32,
        };
        let channel = match kv.opt_str("channel")? {
            Some(s) => s.parse()?,
            None => ChannelModel::Rayleigh,
        };
        let mut cfg = ExperimentConfig::new(system, channel);

        let defaults = MmWaveParams::default();
        cfg.mmwave = MmWaveParams {
            num_taps: kv.opt_usize("num_taps")?.unwrap_or(defaults.num_taps),
            rician_factor_db: kv.opt_f64("rician_factor_db")?.unwrap_or(defaults.rician_factor_db),
            num_subcarriers: kv.opt_usize("num_subcarriers")?.unwrap_or(defaults.num_subcarriers),
            antenna_spacing: kv.opt_f64("antenna_spacing")?.unwrap_or(defaults.antenna_spacing),
            aoa_range: match kv.opt_f64_list("aoa_range")? {
                None => defaults.aoa_range,
                Some(v) if v.len() == 2 => (v[0], v[1]),
                Some(_) => {
                    return Err(Error::InvalidKey {
                        key: "aoa_range".into(),
                        reason: "expected two angles [low, high] in radians".into(),
                    })
                }
            },
        };
        if let Some(s) = kv.opt_str("aas_method")? {
            cfg.aas_method = s.parse()?;
        }
        if let Some(s) = kv.opt_str("mu_dim")? {
            cfg.mu_dim = s.parse()?;
        }
        if let Some(t) = kv.opt_usize("trials")? {
            cfg.trials = t;
        }
        if let Some(s) = kv.opt_usize("seed")? {
            cfg.seed = s as u64;
        }
        if let Some(n) = kv.opt_usize("max_nodes")? {
            cfg.max_nodes = if n == 0 { None } else { Some(n as u64) };
        }
        if let Some(b) = kv.opt_bool("allow_large")? {
            cfg.allow_large = b;
        }
        if let Some(d) = kv.opt_usize("calibration_draws")? {
            cfg.calibration_draws = d;
        }
        if let Some(s) = kv.opt_f64("calibration_snr_db")? {
            cfg.calibration_snr_db = s;
        }
        cfg.eta_split = kv.opt_f64("eta_split")?;
        cfg.eta_one_stage = kv.opt_f64("eta_one_stage")?;
        if let Some(list) = kv.opt_str_list("schemes")? {
            cfg.schemes = list;
        }

        if let Some(key) = kv.table.keys().next() {
            return Err(Error::InvalidKey { key: key.clone(), reason: "unknown key".into() });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_kv_file(path: &std::path::Path) -> Result<Self> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes back to the flat key-value format.
    pub fn to_kv_string(&self) -> String {
        let mut t = Table::new();
        let s = &self.system;
        t.insert("M".into(), Value::Integer(s.m as i64));
        t.insert("K".into(), Value::Integer(s.k as i64));
        t.insert("N".into(), Value::Integer(s.n as i64));
        t.insert("q".into(), Value::Float(s.q));
        t.insert("gamma".into(), Value::Float(s.gamma));
        t.insert("sigma0_sq".into(), Value::Float(s.sigma0_sq));
        t.insert(
            "snr_db_list".into(),
            Value::Array(s.snr_db_list.iter().map(|&x| Value::Float(x)).collect()),
        );
        t.insert("b_split".into(), Value::Integer(s.b_split as i64));
        t.insert("b_one_stage".into(), Value::Integer(s.b_one_stage as i64));
        t.insert("channel".into(), Value::String(self.channel.to_string()));
        let mw = &self.mmwave;
        t.insert("num_taps".into(), Value::Integer(mw.num_taps as i64));
        t.insert("rician_factor_db".into(), Value::Float(mw.rician_factor_db));
        t.insert("num_subcarriers".into(), Value::Integer(mw.num_subcarriers as i64));
        t.insert("antenna_spacing".into(), Value::Float(mw.antenna_spacing));
        t.insert(
            "aoa_range".into(),
            Value::Array(vec![Value::Float(mw.aoa_range.0), Value::Float(mw.aoa_range.1)]),
        );
        t.insert("aas_method".into(), Value::String(self.aas_method.to_string()));
        t.insert(
            "mu_dim".into(),
            Value::String(match self.mu_dim {
                MuDimension::Precoder => "n".into(),
                MuDimension::Antennas => "m".into(),
            }),
        );
        t.insert("trials".into(), Value::Integer(self.trials as i64));
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert("max_nodes".into(), Value::Integer(self.max_nodes.unwrap_or(0) as i64));
        t.insert("allow_large".into(), Value::Boolean(self.allow_large));
        t.insert("calibration_draws".into(), Value::Integer(self.calibration_draws as i64));
        t.insert("calibration_snr_db".into(), Value::Float(self.calibration_snr_db));
        if let Some(e) = self.eta_split {
            t.insert("eta_split".into(), Value::Float(e));
        }
        if let Some(e) = self.eta_one_stage {
            t.insert("eta_one_stage".into(), Value::Float(e));
        }
        if !self.schemes.is_empty() {
            t.insert(
                "schemes".into(),
                Value::Array(self.schemes.iter().cloned().map(Value::String).collect()),
            );
        }
        toml::to_string(&t).expect("flat table always serializes")
    }
}

/// Consuming accessor over the parsed table; leftover keys are reported as unknown.
struct Kv {
    table: Table,
}

impl Kv {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn invalid(key: &str, reason: &str) -> Error {
        Error::InvalidKey { key: key.into(), reason: reason.into() }
    }

    fn as_f64(key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(Self::invalid(key, "expected a number")),
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| Self::as_f64(key, &v)).transpose()
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(_) => Err(Self::invalid(key, "expected a non-negative integer")),
        }
    }

    fn req_usize(&mut self, key: &str) -> Result<usize> {
        self.opt_usize(key)?.ok_or_else(|| Error::MissingKey(key.into()))
    }

    fn opt_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(b)),
            Some(_) => Err(Self::invalid(key, "expected true or false")),
        }
    }

    fn opt_str(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Self::invalid(key, "expected a string")),
        }
    }

    fn opt_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                items.iter().map(|v| Self::as_f64(key, v)).collect::<Result<_>>().map(Some)
            }
            Some(_) => Err(Self::invalid(key, "expected an array of numbers")),
        }
    }

    fn req_f64_list(&mut self, key: &str) -> Result<Vec<f64>> {
        self.opt_f64_list(key)?.ok_or_else(|| Error::MissingKey(key.into()))
    }

    fn opt_str_list(&mut self, key: &str) -> Result<Option<Vec<String>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s),
                    _ => Err(Self::invalid(key, "expected an array of strings")),
                })
                .collect::<Result<_>>()
                .map(Some),
            Some(_) => Err(Self::invalid(key, "expected an array of strings")),
        }
    }
}
