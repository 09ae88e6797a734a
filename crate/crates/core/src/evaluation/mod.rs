//! Rate and MSE metrics, fronthaul accounting and Monte-Carlo sweeps.

mod fronthaul;
mod metrics;
pub mod presets;
pub mod report;
mod scheme;
mod sweep;

pub use fronthaul::{equal_budget_split_bits, fronthaul_bits, FronthaulBudget, FronthaulReport};
pub use metrics::{power_scale, sum_mse, sum_rate, sum_rate_upper_bound};
pub use scheme::{calibrate_scheme, PreparedScheme, Scheme, SchemeOutcome, SchemeSpec};
pub use sweep::{config_hash, run_sweep, run_sweep_with, SchemeStats, SweepResult, SweepRow, TrialRates};
