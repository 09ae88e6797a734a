use crate::error::{Error, Result};
use crate::evaluation::power_scale;
use crate::linalg::{hpd_solve, CMatrix, C64};

/// Power-normalized continuous precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPrecoder {
    pub matrix: CMatrix,
    pub mu: f64,
}

/// `μ = K/(1−η)² · (σ₀²/q + η(1−η)·dim)`.
pub fn quantized_mu(k: usize, q: f64, sigma0_sq: f64, eta: f64, dim: usize) -> f64 {
    let one_minus = 1.0 - eta;
    k as f64 / (one_minus * one_minus) * (sigma0_sq / q + eta * one_minus * dim as f64)
}

/// Unnormalized `H^H (H H^H + μ I_K)^{-1}` for a `K x D` channel.
pub fn regularized_inverse(h: &CMatrix, mu: f64) -> Result<CMatrix> {
    let k = h.nrows();
    let gram = h * h.adjoint() + CMatrix::identity(k, k) * C64::new(mu, 0.0);
    let inv = hpd_solve(gram, &CMatrix::identity(k, k))?;
    Ok(h.adjoint() * inv)
}

/// Quantization-aware regularized zero forcing, scaled to `‖P‖_F² = q`.
pub fn qrzf(h: &CMatrix, q: f64, sigma0_sq: f64, eta: f64, dim_for_mu: usize) -> Result<ContinuousPrecoder> {
    let (k, d) = h.shape();
    if d < k {
        return Err(Error::Dimension(format!("QRZF needs D >= K, got K = {k}, D = {d}")));
    }
    let mu = quantized_mu(k, q, sigma0_sq, eta, dim_for_mu);
    let raw = regularized_inverse(h, mu)?;
    let matrix = power_scale(&raw, q)
        .map_err(|_| Error::DegenerateChannel("QRZF precoder vanishes (zero channel)".into()))?;
    Ok(ContinuousPrecoder { matrix, mu })
}

/// Classical RZF: QRZF with `η = 0`.
pub fn rzf(h: &CMatrix, q: f64, sigma0_sq: f64) -> Result<ContinuousPrecoder> {
    qrzf(h, q, sigma0_sq, 0.0, h.ncols())
}
