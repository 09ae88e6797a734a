use super::gains::{receiver_gains, ReceiverGains};
use super::ils::build_ils;
use super::qrzf::qrzf;
use super::sesd::{solve_column, SesdOptions};
use crate::aas::EffectiveChannel;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{embed_vector, frobenius_sq, unembed_vector, CMatrix};
use crate::quantizer::QuantizerSpec;

/// Guard on `2·M·log2(L)` for the exact one-stage search.
pub const ONE_STAGE_TREE_LIMIT: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct BbuOptions {
    /// Dimension in the QRZF regularizer; `None` uses the effective channel width.
    pub mu_dim: Option<usize>,
    pub sesd: SesdOptions,
    /// Bisection stops once the power reaches `(1 − tol)·q`.
    pub power_tolerance: f64,
    pub max_bisections: usize,
    /// Used in place of `λ = 0` when `V` is singular.
    pub lambda_floor: f64,
}

impl Default for BbuOptions {
    fn default() -> Self {
        BbuOptions {
            mu_dim: None,
            sesd: SesdOptions::exact(),
            power_tolerance: 1e-2,
            max_bisections: 50,
            lambda_floor: 1e-12,
        }
    }
}

/// Quantized refinement precoder; every entry lies in the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct BbuPrecoder {
    pub matrix: CMatrix,
    pub achieved_power: f64,
    pub lambda_star: f64,
    /// Sum-MSE surrogate at `λ*`.
    pub objective: f64,
    pub column_objectives: Vec<f64>,
    pub gains: ReceiverGains,
    /// Sphere-decoder nodes over every solve, bisection included.
    pub nodes: u64,
    /// Whether every column solve at `λ*` ran to completion.
    pub exact: bool,
    /// Number of `λ` values evaluated.
    pub solves: usize,
}

/// Solution of all column problems at one multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    pub matrix: CMatrix,
    pub power: f64,
    pub objective: f64,
    pub column_objectives: Vec<f64>,
    pub nodes: u64,
    pub exact: bool,
}

/// Solves the `K` column problems at fixed `λ` and `β`.
///
/// `reference`, when given, is an `N x K` matrix whose entrywise quantization
/// seeds each column's incumbent.
pub fn solve_at_lambda(
    h_eff: &EffectiveChannel,
    gains: &ReceiverGains,
    spec: &QuantizerSpec,
    lambda: f64,
    sesd: SesdOptions,
    reference: Option<&CMatrix>,
) -> Result<LambdaSolution> {
    let prob = build_ils(h_eff, gains, lambda)?;
    let levels = spec.level_set();
    let (n, k) = (h_eff.dim(), h_eff.ues());
    let mut matrix = CMatrix::zeros(n, k);
    let mut column_objectives = Vec::with_capacity(k);
    let mut nodes = 0;
    let mut exact = true;
    for i in 0..k {
        let mut candidates = Vec::with_capacity(2);
        let unconstrained = prob.unconstrained_solution(i);
        candidates.push(
            unconstrained.iter().map(|&v| spec.quantize(v)).collect::<Result<Vec<f64>>>()?,
        );
        if let Some(p) = reference {
            let col: Vec<_> = p.column(i).iter().copied().collect();
            let x = embed_vector(&col);
            candidates.push(x.iter().map(|&v| spec.quantize(v)).collect::<Result<Vec<f64>>>()?);
        }
        let sol = solve_column(&prob.r, &prob.targets[i], &levels, sesd, &candidates)?;
        nodes += sol.nodes;
        exact &= sol.exact;
        column_objectives.push(sol.objective - prob.targets[i].norm_squared());
        for (row, z) in unembed_vector(&sol.point).into_iter().enumerate() {
            matrix[(row, i)] = z;
        }
    }
    Ok(LambdaSolution {
        lambda,
        power: frobenius_sq(&matrix),
        objective: column_objectives.iter().sum(),
        matrix,
        column_objectives,
        nodes,
        exact,
    })
}

/// Entrywise quantization of the power-normalized QRZF precoder.
pub fn rounded_qrzf(
    h_eff: &EffectiveChannel,
    spec: &QuantizerSpec,
    q: f64,
    sigma0_sq: f64,
    mu_dim: Option<usize>,
) -> Result<CMatrix> {
    let p = qrzf(&h_eff.matrix, q, sigma0_sq, spec.eta, mu_dim.unwrap_or(h_eff.dim()))?;
    let mut out = p.matrix.clone();
    for z in out.iter_mut() {
        *z = spec.quantize_complex(*z)?;
    }
    Ok(out)
}

pub fn bbu_precode(h_eff: &EffectiveChannel, spec: &QuantizerSpec, q: f64, sigma0_sq: f64) -> Result<BbuPrecoder> {
    bbu_precode_with(h_eff, spec, q, sigma0_sq, &BbuOptions::default())
}

/// Quantized BBU precoder with `β` from the QRZF solution and `λ` bisected so
/// that `(1 − tol)·q ≤ ‖P_B‖_F² ≤ q` when the constraint binds.
pub fn bbu_precode_with(
    h_eff: &EffectiveChannel,
    spec: &QuantizerSpec,
    q: f64,
    sigma0_sq: f64,
    options: &BbuOptions,
) -> Result<BbuPrecoder> {
    let (k, n) = h_eff.matrix.shape();
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Config(format!("power budget must be positive, got {q}")));
    }
    let min_power = 2.0 * (n * k) as f64 * spec.min_magnitude().powi(2);
    if min_power > q {
        return Err(Error::InfeasiblePower { min_power, q });
    }

    let init = qrzf(&h_eff.matrix, q, sigma0_sq, spec.eta, options.mu_dim.unwrap_or(n))?;
    let gains = receiver_gains(h_eff, &init.matrix, sigma0_sq)?;
    let mut total_nodes = 0u64;
    let mut solves = 0usize;
    let mut solve = |lambda: f64| -> Result<LambdaSolution> {
        let s = solve_at_lambda(h_eff, &gains, spec, lambda, options.sesd, Some(&init.matrix))?;
        total_nodes += s.nodes;
        solves += 1;
        Ok(s)
    };

    if spec.levels() == 2 {
        // Every 1-bit matrix has the same power, so the argmin does not depend
        // on λ; a shift near the mean eigenvalue of V only improves conditioning.
        let trace: f64 = (0..k)
            .map(|i| gains.beta[i].norm_sqr() * h_eff.matrix.row(i).norm_squared())
            .sum();
        let shift = (trace / n as f64).max(options.lambda_floor);
        let s = solve(shift)?;
        return Ok(BbuPrecoder {
            achieved_power: s.power,
            lambda_star: s.lambda,
            objective: s.objective,
            column_objectives: s.column_objectives,
            matrix: s.matrix,
            exact: s.exact,
            gains,
            nodes: total_nodes,
            solves,
        });
    }

    let (lambda_low, first) = match solve(0.0) {
        Ok(s) => (0.0, s),
        Err(Error::NotPositiveDefinite) => (options.lambda_floor, solve(options.lambda_floor)?),
        Err(e) => return Err(e),
    };
    let best = if first.power <= q {
        first
    } else {
        let mut lambda_high = 1.0f64;
        let mut high = solve(lambda_high)?;
        let mut doublings = 0;
        while high.power > q {
            doublings += 1;
            if doublings > 200 {
                return Err(Error::InfeasiblePower { min_power: high.power, q });
            }
            lambda_high *= 2.0;
            high = solve(lambda_high)?;
        }
        let mut lo = lambda_low;
        let mut hi = lambda_high;
        let mut best = high;
        let target = (1.0 - options.power_tolerance) * q;
        for _ in 0..options.max_bisections {
            if best.power >= target {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let s = solve(mid)?;
            if s.power <= q {
                hi = mid;
                if s.power >= best.power {
                    best = s;
                }
            } else {
                lo = mid;
            }
        }
        best
    };

    Ok(BbuPrecoder {
        achieved_power: best.power,
        lambda_star: best.lambda,
        objective: best.objective,
        column_objectives: best.column_objectives,
        matrix: best.matrix,
        exact: best.exact,
        gains,
        nodes: total_nodes,
        solves,
    })
}

pub fn one_stage_precode(h: &ChannelMatrix, spec: &QuantizerSpec, q: f64, sigma0_sq: f64) -> Result<BbuPrecoder> {
    one_stage_precode_with(h, spec, q, sigma0_sq, &BbuOptions::default(), false)
}

/// The same machinery on the full channel (`H_eff = H`, `N = M`).
pub fn one_stage_precode_with(
    h: &ChannelMatrix,
    spec: &QuantizerSpec,
    q: f64,
    sigma0_sq: f64,
    options: &BbuOptions,
    allow_large: bool,
) -> Result<BbuPrecoder> {
    let tree_bits = 2 * h.antennas() * spec.bits as usize;
    if tree_bits > ONE_STAGE_TREE_LIMIT && !allow_large {
        return Err(Error::BudgetExceeded { tree_bits, limit: ONE_STAGE_TREE_LIMIT });
    }
    let full = EffectiveChannel::new(h.entries.clone())?;
    bbu_precode_with(&full, spec, q, sigma0_sq, options)
}
