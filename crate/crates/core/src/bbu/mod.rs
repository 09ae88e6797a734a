//! BBU-side quantized refinement precoding.
//!
//! With receiver gains `β` fixed from a QRZF initialization, the sum-MSE
//! problem over `P_B ∈ 𝒫^{N x K}` with multiplier `λ` separates into `K`
//! column problems `min a^H V a − 2 Re(h_iᵀ a)`, `V = H_eff^H B^H B H_eff + λI`.
//! Each is rewritten as the real integer least-squares problem
//! `min ‖e_i − R x‖²` over `x ∈ ℒ^{2N}` and solved exactly by
//! Schnorr-Euchner sphere decoding; `λ` is bisected until the power
//! constraint is met with near equality.

mod gains;
mod ils;
mod precode;
mod qrzf;
mod sesd;

pub use gains::{receiver_gains, ReceiverGains};
pub use ils::{build_ils, column_objective, surrogate_objective, IlsProblem};
pub use precode::{
    bbu_precode, bbu_precode_with, one_stage_precode, one_stage_precode_with, rounded_qrzf,
    solve_at_lambda, BbuOptions, BbuPrecoder, LambdaSolution, ONE_STAGE_TREE_LIMIT,
};
pub use qrzf::{quantized_mu, qrzf, regularized_inverse, rzf, ContinuousPrecoder};
pub use sesd::{sesd_solve, solve_column, SesdOptions, SesdSolution};
