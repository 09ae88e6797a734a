//! Figure-reproduction presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ChannelModel, ExperimentConfig, SystemConfig};
use crate::error::{Error, Result};

use super::scheme::SchemeSpec;

/// Antenna count of the exact one-stage variant in the mmWave preset.
pub const FIG2B_ONE_STAGE_ANTENNAS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig3,
    Custom,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3 => "fig3",
            Preset::Custom => "custom",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "fig3" => Ok(Preset::Fig3),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidKey {
                key: "preset".into(),
                reason: format!("`{other}` is not one of fig2a, fig2b, fig3, custom"),
            }),
        }
    }
}

/// Everything needed to launch a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub preset: Preset,
    pub config: ExperimentConfig,
    pub schemes: Vec<SchemeSpec>,
    /// Deviations worth recording next to the results.
    pub notes: Vec<String>,
}

const SNR_GRID: [f64; 6] = [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0];

impl Preset {
    /// The preset's own scenario.
    pub fn default_config(self) -> ExperimentConfig {
        let system = |m| SystemConfig::normalized(m, 8, 8, SNR_GRID.to_vec());
        match self {
            Preset::Fig2a | Preset::Fig3 | Preset::Custom => {
                let mut cfg = ExperimentConfig::new(system(32), ChannelModel::Rayleigh);
                if self == Preset::Fig2a {
                    cfg.allow_large = true;
                }
                cfg
            }
            Preset::Fig2b => ExperimentConfig::new(system(128), ChannelModel::Mmwave),
        }
    }

    /// Scheme set for `base` (or the default scenario when absent).
    pub fn build(self, base: Option<ExperimentConfig>) -> Result<PresetRun> {
        let config = base.unwrap_or_else(|| self.default_config());
        config.validate()?;
        let (m, k) = (config.system.m, config.system.k);
        let mut notes = Vec::new();
        let descriptors: Vec<String> = match self {
            Preset::Fig2a => {
                if config.allow_large && config.max_nodes.is_some() {
                    notes.push(format!(
                        "one_stage_sesd at M = {m} exceeds the exact search-tree guard; \
                         the sphere decoder runs with a node budget of {} per column",
                        config.max_nodes.unwrap_or_default()
                    ));
                }
                split_set().into_iter().chain(["one_stage_sesd".to_string()]).collect()
            }
            Preset::Fig2b => {
                let reduced = FIG2B_ONE_STAGE_ANTENNAS.min(m).max(k);
                notes.push(format!(
                    "one-stage curve uses exact sphere decoding on the first {reduced} antennas \
                     instead of expectation propagation on all {m}"
                ));
                split_set().into_iter().chain([format!("one_stage_sesd:M={reduced}")]).collect()
            }
            Preset::Fig3 => {
                let mut pairs = vec![(k, 1), (k, 4), (2 * k, 1), (2 * k, 4), (m, 1)];
                pairs.retain(|&(n, _)| n <= m);
                pairs.dedup();
                pairs.into_iter().map(|(n, b)| format!("dft_split:N={n}:B={b}")).collect()
            }
            Preset::Custom => {
                if config.schemes.is_empty() {
                    return Err(Error::MissingKey("schemes".into()));
                }
                config.schemes.clone()
            }
        };
        let schemes = descriptors.iter().map(|d| SchemeSpec::parse(d, &config)).collect::<Result<_>>()?;
        Ok(PresetRun { preset: self, config, schemes, notes })
    }
}

fn split_set() -> Vec<String> {
    ["inf_rzf", "gs_mrt_split", "mrt_split", "dft_split"].map(String::from).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::Scheme;

    #[test]
    fn scheme_sets() {
        let run = Preset::Fig2a.build(None).unwrap();
        let labels: Vec<_> = run.schemes.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["inf_rzf", "gs_mrt_split", "mrt_split", "dft_split", "one_stage_sesd"]);

        let run = Preset::Fig2b.build(None).unwrap();
        assert_eq!(run.config.channel, ChannelModel::Mmwave);
        assert_eq!(run.schemes[4].scheme, Scheme::OneStage { bits: 1, antennas: Some(16) });
        assert_eq!(run.notes.len(), 1);

        let run = Preset::Fig3.build(None).unwrap();
        let got: Vec<_> = run
            .schemes
            .iter()
            .map(|s| match s.scheme {
                Scheme::Split { n, bits, .. } => (n, bits),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(got, [(8, 1), (8, 4), (16, 1), (16, 4), (32, 1)]);
    }

    #[test]
    fn custom_needs_schemes() {
        assert!(matches!(Preset::Custom.build(None), Err(Error::MissingKey(_))));
        let mut cfg = Preset::Custom.default_config();
        cfg.schemes = vec!["dft_split:N=32:B=1".into(), "rounded_qrzf".into()];
        assert_eq!(Preset::Custom.build(Some(cfg)).unwrap().schemes.len(), 2);
    }

    #[test]
    fn names_round_trip() {
        for p in [Preset::Fig2a, Preset::Fig2b, Preset::Fig3, Preset::Custom] {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("fig4".parse::<Preset>().is_err());
    }
}
