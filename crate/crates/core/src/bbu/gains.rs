use crate::aas::EffectiveChannel;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Per-UE linear receiver gains `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverGains {
    pub beta: Vec<C64>,
}

impl ReceiverGains {
    pub fn diag(&self) -> CMatrix {
        let k = self.beta.len();
        CMatrix::from_fn(k, k, |i, j| if i == j { self.beta[i] } else { C64::new(0.0, 0.0) })
    }
}

/// MMSE receiver gains for a fixed precoder:
/// `β_k = conj([H P]_kk) / ([H P P^H H^H]_kk + σ₀²)`.
///
/// The denominator is the total received power at UE `k` (row `k` of `H P`),
/// which is the stationary point of `E|s_k − β_k y_k|²`.
pub fn receiver_gains(h_eff: &EffectiveChannel, p: &CMatrix, sigma0_sq: f64) -> Result<ReceiverGains> {
    if h_eff.dim() != p.nrows() || h_eff.ues() != p.ncols() {
        return Err(Error::Dimension(format!(
            "effective channel is {}x{}, precoder is {}x{}",
            h_eff.ues(),
            h_eff.dim(),
            p.nrows(),
            p.ncols()
        )));
    }
    let g = &h_eff.matrix * p;
    let k = g.nrows();
    let mut beta = Vec::with_capacity(k);
    for ue in 0..k {
        let received: f64 = g.row(ue).iter().map(|z| z.norm_sqr()).sum();
        let denom = received + sigma0_sq;
        if denom <= 0.0 {
            return Err(Error::DegenerateInput(format!(
                "UE {ue} receives no power and the noise variance is zero"
            )));
        }
        beta.push(g[(ue, ue)].conj() / denom);
    }
    Ok(ReceiverGains { beta })
}
