use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{noise_variance, ChannelModel, ExperimentConfig};
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::quantizer::QuantizerSpec;

use super::scheme::{bbu_options, calibrate_scheme, trial_channels, SchemeOutcome, SchemeSpec};

/// One `(scheme, snr_db)` average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub channel: ChannelModel,
    pub snr_db: f64,
    pub trials: usize,
    pub avg_sum_rate: f64,
    /// Standard error of the mean over trials.
    pub std_err: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Solver diagnostics averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub scheme: String,
    pub snr_db: f64,
    pub mean_lambda_star: Option<f64>,
    pub mean_bbu_power: f64,
    pub mean_nodes: f64,
    /// Fraction of column solves that finished within the node budget.
    pub exact_fraction: f64,
}

/// Per-trial rates, for paired comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRates {
    pub scheme: String,
    pub snr_db: f64,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub stats: Vec<SchemeStats>,
    pub trial_rates: Vec<TrialRates>,
    /// Calibrated quantizer per scheme label.
    pub calibration: BTreeMap<String, QuantizerSpec>,
}

impl SweepResult {
    pub fn row(&self, scheme: &str, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.snr_db == snr_db)
    }

    pub fn rates(&self, scheme: &str, snr_db: f64) -> Option<&[f64]> {
        self.trial_rates
            .iter()
            .find(|r| r.scheme == scheme && r.snr_db == snr_db)
            .map(|r| r.rates.as_slice())
    }
}

/// SHA-256 of the canonical key-value rendering of `cfg`, hex encoded.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_kv_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Calibrates every scheme and runs the sweep with `trials` and `seed` overriding `config`.
pub fn run_sweep(config: &ExperimentConfig, schemes: &[SchemeSpec], trials: usize, seed: u64) -> Result<SweepResult> {
    let mut cfg = config.clone();
    cfg.trials = trials;
    cfg.seed = seed;
    let calibration = calibrate_all(&cfg, schemes)?;
    run_sweep_with(&cfg, schemes, &calibration)
}

pub fn calibrate_all(cfg: &ExperimentConfig, schemes: &[SchemeSpec]) -> Result<BTreeMap<String, QuantizerSpec>> {
    let mut out = BTreeMap::new();
    for spec in schemes {
        spec.check_budget(cfg)?;
        if let Some(q) = calibrate_scheme(cfg, spec)? {
            out.insert(spec.label.clone(), q);
        }
    }
    Ok(out)
}

/// Runs the sweep with fixed quantizers. Deterministic for a given config,
/// independent of the thread count.
pub fn run_sweep_with(
    cfg: &ExperimentConfig,
    schemes: &[SchemeSpec],
    calibration: &BTreeMap<String, QuantizerSpec>,
) -> Result<SweepResult> {
    cfg.validate()?;
    let mut seen = HashSet::new();
    for spec in schemes {
        if !seen.insert(spec.label.as_str()) {
            return Err(Error::Config(format!("duplicate scheme `{}`", spec.label)));
        }
        spec.check_budget(cfg)?;
        if spec.scheme.bits().is_some() && !calibration.contains_key(&spec.label) {
            return Err(Error::Config(format!("no calibrated quantizer for `{}`", spec.label)));
        }
    }
    let sys = &cfg.system;
    let snrs = &sys.snr_db_list;
    let sigmas: Vec<f64> = snrs.iter().map(|&s| noise_variance(sys.q, sys.gamma, s)).collect();
    let options = bbu_options(cfg);

    // outcomes[trial][snr][scheme], each averaged over the trial's channel matrices.
    let outcomes: Vec<Vec<Vec<SchemeOutcome>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<Vec<SchemeOutcome>>> {
            let channels = trial_channels(cfg, trial)?;
            let mut acc: Vec<Vec<Vec<SchemeOutcome>>> = vec![vec![Vec::new(); schemes.len()]; snrs.len()];
            for h in &channels {
                for (j, spec) in schemes.iter().enumerate() {
                    let prepared = spec.prepare(h)?;
                    let quant = calibration.get(&spec.label);
                    for (i, &sigma) in sigmas.iter().enumerate() {
                        acc[i][j].push(prepared.evaluate(quant, sys.q, sigma, &options)?);
                    }
                }
            }
            Ok(acc.into_iter().map(|per_snr| per_snr.iter().map(|o| average(o)).collect()).collect())
        })
        .collect::<Result<_>>()?;

    let hash = config_hash(cfg);
    let trials = cfg.trials;
    let mut result = SweepResult { rows: Vec::new(), stats: Vec::new(), trial_rates: Vec::new(), calibration: calibration.clone() };
    for (i, &snr_db) in snrs.iter().enumerate() {
        for (j, spec) in schemes.iter().enumerate() {
            let per_trial: Vec<&SchemeOutcome> = outcomes.iter().map(|t| &t[i][j]).collect();
            let rates: Vec<f64> = per_trial.iter().map(|o| o.rate).collect();
            let (mean, std_err) = mean_and_std_err(&rates);
            result.rows.push(SweepRow {
                scheme: spec.label.clone(),
                channel: cfg.channel,
                snr_db,
                trials,
                avg_sum_rate: mean,
                std_err,
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
            let n = trials as f64;
            let lambdas: Vec<f64> = per_trial.iter().filter_map(|o| o.lambda_star).collect();
            result.stats.push(SchemeStats {
                scheme: spec.label.clone(),
                snr_db,
                mean_lambda_star: (!lambdas.is_empty()).then(|| compensated_sum(lambdas.iter().copied()) / lambdas.len() as f64),
                mean_bbu_power: compensated_sum(per_trial.iter().map(|o| o.bbu_power)) / n,
                mean_nodes: compensated_sum(per_trial.iter().map(|o| o.nodes as f64)) / n,
                exact_fraction: per_trial.iter().filter(|o| o.exact).count() as f64 / n,
            });
            result.trial_rates.push(TrialRates { scheme: spec.label.clone(), snr_db, rates });
        }
    }
    Ok(result)
}

/// Averages outcomes over subcarriers; `exact` only if every solve was.
fn average(outcomes: &[SchemeOutcome]) -> SchemeOutcome {
    let n = outcomes.len() as f64;
    let lambdas: Vec<f64> = outcomes.iter().filter_map(|o| o.lambda_star).collect();
    SchemeOutcome {
        rate: compensated_sum(outcomes.iter().map(|o| o.rate)) / n,
        lambda_star: (!lambdas.is_empty()).then(|| compensated_sum(lambdas.iter().copied()) / lambdas.len() as f64),
        bbu_power: compensated_sum(outcomes.iter().map(|o| o.bbu_power)) / n,
        nodes: outcomes.iter().map(|o| o.nodes).sum::<u64>() / outcomes.len() as u64,
        exact: outcomes.iter().all(|o| o.exact),
    }
}

pub(crate) fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}
