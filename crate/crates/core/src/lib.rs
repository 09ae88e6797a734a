//! Splitting precoding for fronthaul-limited massive MIMO downlink.
//!
//! The antenna side (AAS) picks an `N`-dimensional subspace of the `M`-antenna
//! channel ([`aas`]); the baseband unit (BBU) designs a quantized `N x K`
//! refinement precoder over the finite fronthaul alphabet ([`bbu`]) by solving
//! per-column integer least-squares problems exactly with a Schnorr-Euchner
//! sphere decoder, bisecting the power-constraint multiplier.
//!
//! [`evaluation`] turns precoders into sum rates and runs Monte-Carlo sweeps.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aas;
pub mod bbu;
pub mod channel;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod quantizer;

pub use aas::{AasMethod, AasPrecoder, EffectiveChannel};
pub use bbu::{
    BbuOptions, BbuPrecoder, ContinuousPrecoder, IlsProblem, ReceiverGains, SesdOptions,
    SesdSolution,
};
pub use channel::{ChannelMatrix, MmWaveParams};
pub use config::{ChannelModel, ExperimentConfig, MuDimension, SystemConfig};
pub use error::{Error, Result};
pub use evaluation::{FronthaulBudget, Scheme, SchemeSpec, SweepResult, SweepRow};
pub use linalg::{CMatrix, C64};
pub use quantizer::QuantizerSpec;
