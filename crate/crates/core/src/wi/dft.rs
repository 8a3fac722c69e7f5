//! Truncated-DFT interpolation matrices used by the ALS and LP pilot estimators.

use crate::error::{Error, Result};
use crate::frame::lp_positions;
use crate::linalg::{condition_number, dft_slice, left_pseudo_inverse, trace_wwh, CMatrix};

/// Largest accepted condition number for the LP pilot DFT slice.
pub const MAX_PILOT_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct DftMatrices {
    pub taps: usize,
    /// `K_on x L`.
    pub f_on: CMatrix,
    pub f_on_pinv: CMatrix,
    /// `F_on F_on†`, an orthogonal projector of rank `L`.
    pub w_als: CMatrix,
    pub lp_positions: Vec<usize>,
    /// `K_p x L` rows of the DFT at the LP pilot positions.
    pub f_p: CMatrix,
    pub f_p_pinv: CMatrix,
    /// `F_on F_p†`.
    pub w_dft: CMatrix,
}

impl DftMatrices {
    /// Matrices for `taps` taps with pilots at the default LP positions.
    pub fn new(active: usize, fft_size: usize, taps: usize) -> Result<Self> {
        Self::with_pilots(active, fft_size, taps, lp_positions(active, taps))
    }

    pub fn with_pilots(
        active: usize,
        fft_size: usize,
        taps: usize,
        pilots: Vec<usize>,
    ) -> Result<Self> {
        if taps == 0 || taps > active {
            return Err(Error::FrameSpec(format!("tap count {taps} outside 1..={active}")));
        }
        if pilots.len() < taps {
            return Err(Error::FrameSpec(format!(
                "{} pilots cannot resolve {taps} taps",
                pilots.len()
            )));
        }
        let rows: Vec<usize> = (0..active).collect();
        let f_on = dft_slice(&rows, taps, fft_size);
        let f_on_pinv = left_pseudo_inverse(&f_on)?;
        let w_als = &f_on * &f_on_pinv;
        let f_p = dft_slice(&pilots, taps, fft_size);
        let cond = condition_number(&f_p);
        if !(cond <= MAX_PILOT_CONDITION) {
            return Err(Error::IllConditioned(format!(
                "pilot DFT slice has condition number {cond:.3e}"
            )));
        }
        let f_p_pinv = left_pseudo_inverse(&f_p)?;
        let w_dft = &f_on * &f_p_pinv;
        Ok(Self {
            taps,
            f_on,
            f_on_pinv,
            w_als,
            lp_positions: pilots,
            f_p,
            f_p_pinv,
            w_dft,
        })
    }

    pub fn active(&self) -> usize {
        self.f_on.nrows()
    }

    pub fn als_trace(&self) -> f64 {
        trace_wwh(&self.w_als)
    }

    pub fn dft_trace(&self) -> f64 {
        trace_wwh(&self.w_dft)
    }
}
