use crate::bbu::ReceiverGains;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, C64};

/// Scales `P` to `‖P‖_F² = q`.
pub fn power_scale(p: &CMatrix, q: f64) -> Result<CMatrix> {
    let power = frobenius_sq(p);
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::DegenerateInput("cannot scale a zero or non-finite precoder".into()));
    }
    Ok(p * C64::new((q / power).sqrt(), 0.0))
}

fn check(h: &ChannelMatrix, p: &CMatrix) -> Result<()> {
    if h.antennas() != p.nrows() || h.ues() != p.ncols() {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, precoder is {}x{}",
            h.ues(),
            h.antennas(),
            p.nrows(),
            p.ncols()
        )));
    }
    Ok(())
}

/// `Σ_k log2(1 + |[HP]_kk|² / (Σ_{i≠k} |[HP]_ki|² + σ₀²))`.
pub fn sum_rate(h: &ChannelMatrix, p: &CMatrix, sigma0_sq: f64) -> Result<f64> {
    check(h, p)?;
    let g = &h.entries * p;
    let mut rate = 0.0;
    for k in 0..g.nrows() {
        let signal = g[(k, k)].norm_sqr();
        let interference: f64 =
            g.row(k).iter().enumerate().filter(|&(i, _)| i != k).map(|(_, z)| z.norm_sqr()).sum();
        let denom = interference + sigma0_sq;
        if !(denom > 0.0) {
            if signal == 0.0 && sigma0_sq == 0.0 {
                continue;
            }
            return Err(Error::InfiniteRate(k));
        }
        rate += (1.0 + signal / denom).log2();
    }
    Ok(rate)
}

/// Interference-free bound `Σ_k log2(1 + |[HP]_kk|²/σ₀²)`.
pub fn sum_rate_upper_bound(h: &ChannelMatrix, p: &CMatrix, sigma0_sq: f64) -> Result<f64> {
    check(h, p)?;
    let g = &h.entries * p;
    Ok((0..g.nrows()).map(|k| (1.0 + g[(k, k)].norm_sqr() / sigma0_sq).log2()).sum())
}

/// Analytic sum MSE
/// `tr(I − BHP − P^H H^H B^H + BHPP^H H^H B^H) + σ₀² Σ|β_k|²`.
pub fn sum_mse(h: &ChannelMatrix, p: &CMatrix, gains: &ReceiverGains, sigma0_sq: f64) -> Result<f64> {
    check(h, p)?;
    let k = h.ues();
    if gains.beta.len() != k {
        return Err(Error::Dimension(format!("{} gains for {k} UEs", gains.beta.len())));
    }
    let bhp = gains.diag() * &h.entries * p;
    let inner = CMatrix::identity(k, k) - &bhp - bhp.adjoint() + &bhp * bhp.adjoint();
    let noise: f64 = gains.beta.iter().map(|b| b.norm_sqr()).sum::<f64>() * sigma0_sq;
    Ok(inner.trace().re + noise)
}
