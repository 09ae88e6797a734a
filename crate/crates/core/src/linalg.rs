//! Small complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖A^H A − I‖_F`, the distance of a tall matrix from semi-unitarity.
pub fn semi_unitarity_error(a: &CMatrix) -> f64 {
    let gram = a.adjoint() * a;
    let n = gram.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            acc += (gram[(i, j)] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "system is {}x{}, right-hand side has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let scale = a.diagonal().iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let chol = a.cholesky().ok_or(Error::Singular)?;
    let pivot_floor = scale * 1e-14;
    if !(scale > 0.0) || chol.l_dirty().diagonal().iter().any(|d| !(d.re * d.re > pivot_floor)) {
        return Err(Error::Singular);
    }
    let x = chol.solve(b);
    if !all_finite(&x) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Real embedding of a Hermitian matrix: `[[Re V, −Im V], [Im V, Re V]]`.
///
/// For `x = [Re a; Im a]` this satisfies `xᵀ V_r x = a^H V a`.
pub fn embed_hermitian(v: &CMatrix) -> DMatrix<f64> {
    let n = v.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = v[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
            out[(i + n, j + n)] = z.re;
        }
    }
    out
}

/// `[Re a; Im a]`.
pub fn embed_vector(a: &[C64]) -> DVector<f64> {
    let n = a.len();
    DVector::from_fn(2 * n, |i, _| if i < n { a[i].re } else { a[i - n].im })
}

pub fn unembed_vector(x: &[f64]) -> Vec<C64> {
    let n = x.len() / 2;
    (0..n).map(|i| C64::new(x[i], x[i + n])).collect()
}

/// Neumaier-compensated sum; the result does not depend on partial-sum grouping
/// to within a few ulps.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
