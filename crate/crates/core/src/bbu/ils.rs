use nalgebra::{DMatrix, DVector};

use super::gains::ReceiverGains;
use crate::aas::EffectiveChannel;
use crate::error::{Error, Result};
use crate::linalg::{embed_hermitian, embed_vector, CMatrix, C64};

/// Real-embedded per-column integer least-squares problems sharing one `R`.
///
/// Variables are `x = [Re a; Im a] ∈ ℒ^{2N}`. For every column `i`,
/// `‖e_i − R x‖² − ‖e_i‖² = a^H V a − 2 Re(h_iᵀ a)` where `h_i` is row `i`
/// of `B H_eff`.
#[derive(Debug, Clone)]
pub struct IlsProblem {
    pub dim: usize,
    pub v_real: DMatrix<f64>,
    /// Upper-triangular, `Rᵀ R = V_real`.
    pub r: DMatrix<f64>,
    /// `e_i = R^{-ᵀ} b_i`.
    pub targets: Vec<DVector<f64>>,
    /// `b_i = [Re h_i; −Im h_i]`, so that `Re(h_iᵀ a) = b_iᵀ x`.
    pub linear: Vec<DVector<f64>>,
    pub lambda: f64,
    /// Complex `V`, kept for evaluating the original objective.
    pub v: CMatrix,
    /// `B H_eff`.
    pub weighted_channel: CMatrix,
}

impl IlsProblem {
    pub fn columns(&self) -> usize {
        self.targets.len()
    }

    /// `‖e_i − R x‖²`.
    pub fn residual(&self, column: usize, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        (&self.targets[column] - &self.r * xv).norm_squared()
    }

    /// `‖e_i − R x‖² − ‖e_i‖²`.
    pub fn embedded_objective(&self, column: usize, x: &[f64]) -> f64 {
        self.residual(column, x) - self.targets[column].norm_squared()
    }

    /// Continuous minimizer `R^{-1} e_i`.
    pub fn unconstrained_solution(&self, column: usize) -> DVector<f64> {
        self.r
            .solve_upper_triangular(&self.targets[column])
            .expect("Cholesky factor has a positive diagonal")
    }
}

/// Forms `V = H_eff^H B^H B H_eff + λI`, its real embedding and Cholesky factor,
/// and the per-column targets.
pub fn build_ils(h_eff: &EffectiveChannel, gains: &ReceiverGains, lambda: f64) -> Result<IlsProblem> {
    let (k, n) = h_eff.matrix.shape();
    if gains.beta.len() != k {
        return Err(Error::Dimension(format!("{} gains for {k} UEs", gains.beta.len())));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!("multiplier must be finite and non-negative, got {lambda}")));
    }
    let weighted = gains.diag() * &h_eff.matrix;
    let v = weighted.adjoint() * &weighted + CMatrix::identity(n, n) * C64::new(lambda, 0.0);
    // Hermitian up to rounding; symmetrize so the embedding is exactly symmetric
    let v = (&v + v.adjoint()) * C64::new(0.5, 0.0);
    let v_real = embed_hermitian(&v);
    let chol = v_real.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    if l.diagonal().iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let r = l.transpose();
    let mut targets = Vec::with_capacity(k);
    let mut linear = Vec::with_capacity(k);
    for i in 0..k {
        let row: Vec<C64> = weighted.row(i).iter().map(|z| z.conj()).collect();
        // embedding of conj(h_i) is [Re h_i; −Im h_i]
        let b = embed_vector(&row);
        let e = l.solve_lower_triangular(&b).ok_or(Error::NotPositiveDefinite)?;
        targets.push(e);
        linear.push(b);
    }
    Ok(IlsProblem { dim: 2 * n, v_real, r, targets, linear, lambda, v, weighted_channel: weighted })
}

/// `a^H V a − 2 Re(h_iᵀ a)` with `h_i` the `i`-th row of `B H_eff`.
pub fn column_objective(v: &CMatrix, target_row: &[C64], a: &[C64]) -> f64 {
    let n = a.len();
    let mut quad = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += v[(i, j)] * a[j];
        }
        quad += a[i].conj() * row;
    }
    let lin: C64 = target_row.iter().zip(a).map(|(h, x)| h * x).sum();
    quad.re - 2.0 * lin.re
}

/// Sum over columns of [`column_objective`] for `P = [a_1, …, a_K]` at multiplier `λ`.
pub fn surrogate_objective(h_eff: &EffectiveChannel, gains: &ReceiverGains, lambda: f64, p: &CMatrix) -> f64 {
    let n = h_eff.dim();
    let weighted = gains.diag() * &h_eff.matrix;
    let v = weighted.adjoint() * &weighted + CMatrix::identity(n, n) * C64::new(lambda, 0.0);
    (0..p.ncols())
        .map(|i| {
            let row: Vec<C64> = weighted.row(i).iter().copied().collect();
            let a: Vec<C64> = p.column(i).iter().copied().collect();
            column_objective(&v, &row, &a)
        })
        .sum()
}
