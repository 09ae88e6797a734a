use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fronthaul load per coherence interval for both architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FronthaulBudget {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub b_split: u32,
    pub b_one_stage: u32,
    /// When set, both loads are asserted to equal this total.
    pub total_bits: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FronthaulReport {
    /// `2·B_split·N·K`.
    pub split_bits: u64,
    /// `2·B_one·M·K`.
    pub one_stage_bits: u64,
    /// `M/N = B_split/B_one`, checked as `M·B_one = N·B_split`.
    pub ratio_holds: bool,
}

pub fn fronthaul_bits(budget: &FronthaulBudget) -> Result<FronthaulReport> {
    let FronthaulBudget { m, n, k, b_split, b_one_stage, total_bits } = *budget;
    if m == 0 || n == 0 || k == 0 || b_split == 0 || b_one_stage == 0 {
        return Err(Error::Config("fronthaul dimensions and bit widths must be positive".into()));
    }
    let split_bits = 2 * b_split as u64 * n as u64 * k as u64;
    let one_stage_bits = 2 * b_one_stage as u64 * m as u64 * k as u64;
    let ratio_holds = m as u64 * b_one_stage as u64 == n as u64 * b_split as u64;
    if let Some(total) = total_bits {
        if split_bits != total || one_stage_bits != total || !ratio_holds {
            return Err(Error::InconsistentBudget { split: split_bits, one_stage: one_stage_bits });
        }
    }
    Ok(FronthaulReport { split_bits, one_stage_bits, ratio_holds })
}

/// Split resolution giving the same load as the one-stage design, if integral.
pub fn equal_budget_split_bits(m: usize, n: usize, b_one_stage: u32) -> Option<u32> {
    let num = m as u64 * b_one_stage as u64;
    (n > 0 && num.is_multiple_of(n as u64)).then(|| (num / n as u64) as u32)
}
