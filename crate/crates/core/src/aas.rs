//! AAS-side subspace selection.
//!
//! All three methods produce an `M x N` matrix `P_A` aimed at maximizing the
//! signal gain `‖H P_A‖_F²`. GS-MRT and DFT selection are semi-unitary; plain
//! normalized MRT only has unit-norm columns.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, frobenius_sq, CMatrix, CVector, C64};

/// Relative norm below which a Gram-Schmidt pivot counts as rank deficiency.
pub const GS_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AasMethod {
    GsMrt,
    Mrt,
    Dft,
}

impl AasMethod {
    pub fn is_semi_unitary(self) -> bool {
        matches!(self, AasMethod::GsMrt | AasMethod::Dft)
    }
}

impl fmt::Display for AasMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AasMethod::GsMrt => "gs_mrt",
            AasMethod::Mrt => "mrt",
            AasMethod::Dft => "dft",
        })
    }
}

impl FromStr for AasMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gs_mrt" => Ok(AasMethod::GsMrt),
            "mrt" => Ok(AasMethod::Mrt),
            "dft" => Ok(AasMethod::Dft),
            other => Err(Error::InvalidKey {
                key: "aas_method".into(),
                reason: format!("unknown method `{other}` (expected gs_mrt, mrt or dft)"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AasPrecoder {
    pub matrix: CMatrix,
    pub method: AasMethod,
    /// `‖H P_A‖_F²`.
    pub objective_value: f64,
    /// DFT column indices, ascending; `None` for the MRT-based methods.
    pub selected: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    /// `K x N`, `H P_A`.
    pub matrix: CMatrix,
}

impl EffectiveChannel {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !all_finite(&matrix) {
            return Err(Error::DegenerateChannel("effective channel has non-finite entries".into()));
        }
        Ok(EffectiveChannel { matrix })
    }

    pub fn ues(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

fn check_dims(h: &ChannelMatrix, n: usize, mrt_based: bool) -> Result<()> {
    let (k, m) = h.entries.shape();
    if n == 0 || n > m {
        return Err(Error::Dimension(format!("need 1 <= N <= M = {m}, got N = {n}")));
    }
    if mrt_based && n > k {
        return Err(Error::Dimension(format!(
            "MRT-based selection needs N <= K = {k}, got N = {n}"
        )));
    }
    Ok(())
}

fn finish(h: &ChannelMatrix, matrix: CMatrix, method: AasMethod, selected: Option<Vec<usize>>) -> AasPrecoder {
    let objective_value = frobenius_sq(&(&h.entries * &matrix));
    AasPrecoder { matrix, method, objective_value, selected }
}

/// Gram-Schmidt orthonormalization of `h_1*, …, h_N*`, in order.
///
/// Modified Gram-Schmidt with a second re-orthogonalization pass.
pub fn gs_mrt(h: &ChannelMatrix, n: usize) -> Result<AasPrecoder> {
    check_dims(h, n, true)?;
    let m = h.antennas();
    let mut basis: Vec<CVector> = Vec::with_capacity(n);
    for i in 0..n {
        let mut w: CVector = h.entries.row(i).transpose().map(|z| z.conj());
        let original = w.norm();
        for _pass in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w.axpy(-proj, b, C64::new(1.0, 0.0));
            }
        }
        let norm = w.norm();
        if !(norm > GS_PIVOT_TOL * original.max(1.0)) {
            return Err(Error::DegenerateChannel(format!(
                "MRT direction {i} is linearly dependent on the previous ones (residual norm {norm:e})"
            )));
        }
        w.unscale_mut(norm);
        basis.push(w);
    }
    let matrix = CMatrix::from_columns(&basis);
    debug_assert_eq!(matrix.shape(), (m, n));
    Ok(finish(h, matrix, AasMethod::GsMrt, None))
}

/// Normalized MRT columns `h_i*/‖h_i‖`.
pub fn mrt(h: &ChannelMatrix, n: usize) -> Result<AasPrecoder> {
    check_dims(h, n, true)?;
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let v: CVector = h.entries.row(i).transpose().map(|z| z.conj());
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateChannel(format!("channel row {i} is zero")));
        }
        cols.push(v.unscale(norm));
    }
    Ok(finish(h, CMatrix::from_columns(&cols), AasMethod::Mrt, None))
}

/// Unitary DFT matrix, `F[a, b] = exp(−j2π ab/M)/√M`.
pub fn dft_matrix(m: usize) -> CMatrix {
    let scale = 1.0 / (m as f64).sqrt();
    CMatrix::from_fn(m, m, |a, b| {
        C64::from_polar(scale, -2.0 * PI * ((a * b) % m) as f64 / m as f64)
    })
}

/// Column norms of the beamspace channel `H F`.
pub fn beamspace_norms(h: &ChannelMatrix) -> Vec<f64> {
    let beam = &h.entries * dft_matrix(h.antennas());
    beam.column_iter().map(|c| c.norm()).collect()
}

/// Keeps the `N` DFT columns with the strongest beamspace columns; ties go to
/// the lower index.
pub fn dft_select(h: &ChannelMatrix, n: usize) -> Result<AasPrecoder> {
    check_dims(h, n, false)?;
    let m = h.antennas();
    let norms = beamspace_norms(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let mut selected: Vec<usize> = order[..n].to_vec();
    selected.sort_unstable();
    let f = dft_matrix(m);
    let cols: Vec<CVector> = selected.iter().map(|&j| f.column(j).into_owned()).collect();
    Ok(finish(h, CMatrix::from_columns(&cols), AasMethod::Dft, Some(selected)))
}

pub fn select(method: AasMethod, h: &ChannelMatrix, n: usize) -> Result<AasPrecoder> {
    match method {
        AasMethod::GsMrt => gs_mrt(h, n),
        AasMethod::Mrt => mrt(h, n),
        AasMethod::Dft => dft_select(h, n),
    }
}

pub fn effective_channel(h: &ChannelMatrix, a: &AasPrecoder) -> Result<EffectiveChannel> {
    if h.antennas() != a.matrix.nrows() {
        return Err(Error::Dimension(format!(
            "channel has {} antennas, AAS precoder has {} rows",
            h.antennas(),
            a.matrix.nrows()
        )));
    }
    EffectiveChannel::new(&h.entries * &a.matrix)
}
