use num_complex::Complex64;

use crate::channel::ReceivedFrame;
use crate::error::{Error, Result};
use crate::estimate::EstimateGrid;
use crate::frame::{pilot_value, FrameSpec};
use crate::linalg::{CMatrix, CVector};
use crate::wi::DftMatrices;

use super::ls::ls_preamble;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddTtParams {
    /// Weight on the new symbol's estimate, in `(0, 1]`.
    pub alpha: f64,
    /// Frequency-averaging half-width in subcarriers.
    pub beta: usize,
    /// Taps kept by the time-domain truncation.
    pub taps: usize,
}

impl Default for AddTtParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 2,
            taps: 12,
        }
    }
}

/// Least-squares fit onto the first `L` taps and back: `F_on F_on† ĥ`.
pub fn time_truncate(h_dd: &CVector, dft: &DftMatrices) -> CVector {
    &dft.f_on * (&dft.f_on_pinv * h_dd)
}

/// Uniform `2β+1` window, clipped at the band edges and renormalized.
pub fn frequency_average(h: &CVector, beta: usize) -> CVector {
    let n = h.len();
    CVector::from_fn(n, |k, _| {
        let lo = k.saturating_sub(beta);
        let hi = (k + beta).min(n - 1);
        let sum: Complex64 = (lo..=hi).map(|j| h[j]).sum();
        sum / (hi - lo + 1) as f64
    })
}

/// Decision-directed tracking with time truncation, frequency averaging and
/// time averaging, started from the preamble LS estimate.
#[derive(Debug, Clone)]
pub struct AddTtEstimator {
    pub spec: FrameSpec,
    pub params: AddTtParams,
    dft: DftMatrices,
    layout: Vec<Vec<usize>>,
}

impl AddTtEstimator {
    pub fn new(spec: &FrameSpec, params: AddTtParams) -> Result<Self> {
        spec.validate()?;
        if !(params.alpha > 0.0 && params.alpha <= 1.0) {
            return Err(Error::FrameSpec(format!("alpha {} outside (0, 1]", params.alpha)));
        }
        let dft = DftMatrices::new(spec.active, spec.fft_size, params.taps)?;
        Ok(Self {
            spec: spec.clone(),
            params,
            dft,
            layout: spec.pilot_layout(),
        })
    }

    /// Runs the tracker from an explicit initial estimate.
    pub fn track(&self, rx: &ReceivedFrame, initial: CVector) -> Result<EstimateGrid> {
        let (k_on, n_sym) = (self.spec.active, self.spec.symbols);
        if rx.symbols.shape() != (k_on, n_sym) || initial.len() != k_on {
            return Err(Error::Dimension(format!(
                "received {:?} with a {}-entry initial estimate",
                rx.symbols.shape(),
                initial.len()
            )));
        }
        let m = self.spec.modulation;
        let mut prev = initial;
        let mut h = CMatrix::zeros(k_on, n_sym);
        let mut is_pilot = vec![false; k_on];
        for i in 0..n_sym {
            is_pilot.iter_mut().for_each(|p| *p = false);
            for &k in &self.layout[i] {
                is_pilot[k] = true;
            }
            let y = rx.symbols.column(i);
            let h_dd = CVector::from_fn(k_on, |k, _| {
                let d = if is_pilot[k] {
                    Complex64::new(pilot_value(k), 0.0)
                } else {
                    m.slice(y[k] / prev[k])
                };
                y[k] / d
            });
            let tt = time_truncate(&h_dd, &self.dft);
            let ftt = frequency_average(&tt, self.params.beta);
            let a = self.params.alpha;
            let next = prev * Complex64::from(1.0 - a) + ftt * Complex64::from(a);
            h.set_column(i, &next);
            prev = next;
        }
        Ok(EstimateGrid::new(h, "addtt"))
    }

    pub fn estimate(&self, rx: &ReceivedFrame) -> Result<EstimateGrid> {
        let init = ls_preamble(&rx.preamble[0], &rx.preamble[1])?;
        self.track(rx, init)
    }
}
