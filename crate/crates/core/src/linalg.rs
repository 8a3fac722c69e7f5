use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::subcarrier_number;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Rows of the `fft_size`-point DFT at the given active positions, first `taps` columns.
pub fn dft_slice(active_rows: &[usize], taps: usize, fft_size: usize) -> CMatrix {
    DMatrix::from_fn(active_rows.len(), taps, |r, n| {
        let k = f64::from(subcarrier_number(active_rows[r]));
        Complex64::from_polar(1.0, -2.0 * PI * k * n as f64 / fft_size as f64)
    })
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Left pseudo-inverse `(AᴴA)⁻¹Aᴴ` of a full-column-rank matrix.
pub fn left_pseudo_inverse(a: &CMatrix) -> Result<CMatrix> {
    let ah = a.adjoint();
    let gram = &ah * a;
    let chol = gram.cholesky().ok_or_else(|| {
        Error::IllConditioned(format!("{}x{} matrix is column-rank deficient", a.nrows(), a.ncols()))
    })?;
    Ok(chol.solve(&ah))
}

/// `tr(W Wᴴ)`, the Frobenius norm squared.
pub fn trace_wwh(w: &CMatrix) -> f64 {
    w.iter().map(|v| v.norm_sqr()).sum()
}
