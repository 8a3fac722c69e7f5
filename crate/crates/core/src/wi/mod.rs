//! Weighted-interpolation (WI) channel estimation.
//!
//! The receiver estimates the channel at each inserted pilot symbol (simple LS,
//! DFT-projected LS, or DFT interpolation from `L` pilots), pairs consecutive
//! anchors with the preamble LS estimate as anchor 0, and fills every data
//! symbol of a subframe with an MMSE-weighted sum of its two anchors.

mod dft;
mod weights;

pub use dft::{DftMatrices, MAX_PILOT_CONDITION};
pub use weights::{
    wi_weights, WeightKey, WeightMatrix, WiWeightTable, SINGULAR_DET, TIKHONOV_JITTER,
};

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::baseline::ls_preamble;
use crate::channel::ReceivedFrame;
use crate::error::{Error, Result};
use crate::estimate::EstimateGrid;
use crate::frame::{pilot_value, FrameSpec, PilotScheme};
use crate::linalg::{CMatrix, CVector};
use crate::metrics::OpCount;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WiScheme {
    /// Full pilot symbols, per-subcarrier LS.
    FpSls,
    /// Full pilot symbols, LS projected onto the `L`-tap DFT subspace.
    FpAls,
    /// `L` pilots per pilot symbol, DFT interpolation.
    Lp,
}

impl WiScheme {
    pub fn pilot_scheme(self) -> PilotScheme {
        match self {
            Self::FpSls | Self::FpAls => PilotScheme::Full,
            Self::Lp => PilotScheme::Lp,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FpSls => "fp-sls",
            Self::FpAls => "fp-als",
            Self::Lp => "lp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fp-sls" => Some(Self::FpSls),
            "fp-als" => Some(Self::FpAls),
            "lp" => Some(Self::Lp),
            _ => None,
        }
    }
}

/// `ĥ[k] = y[k] / p[k]` over all active subcarriers.
pub fn sls_pilot(received: &[Complex64]) -> CVector {
    CVector::from_iterator(
        received.len(),
        received.iter().enumerate().map(|(k, y)| y / pilot_value(k)),
    )
}

/// `W_ALS ĥ_SLS`.
pub fn als_pilot(sls: &CVector, dft: &DftMatrices) -> Result<CVector> {
    if sls.len() != dft.active() {
        return Err(Error::Dimension(format!(
            "ALS input has {} entries, expected {}",
            sls.len(),
            dft.active()
        )));
    }
    Ok(&dft.w_als * sls)
}

/// `F_on F_p† (y_p / p_p)` from the received values at the LP pilot positions.
pub fn lp_pilot(received_at_pilots: &[Complex64], dft: &DftMatrices) -> Result<CVector> {
    if received_at_pilots.len() != dft.lp_positions.len() {
        return Err(Error::Dimension(format!(
            "{} pilot values for {} pilot positions",
            received_at_pilots.len(),
            dft.lp_positions.len()
        )));
    }
    let ls = CVector::from_iterator(
        received_at_pilots.len(),
        received_at_pilots
            .iter()
            .zip(&dft.lp_positions)
            .map(|(y, &k)| y / pilot_value(k)),
    );
    Ok(&dft.w_dft * ls)
}

/// Pairs `[ĥ_{q-1}, ĥ_q]` for `q = 1..=P`; `anchors[0]` is the preamble estimate.
pub fn group_pilots(anchors: &[CVector]) -> Result<Vec<CMatrix>> {
    if anchors.len() < 2 {
        return Err(Error::FrameSpec(
            "grouping needs the preamble anchor and at least one pilot symbol".into(),
        ));
    }
    Ok(anchors
        .windows(2)
        .map(|w| CMatrix::from_columns(&[w[0].clone(), w[1].clone()]))
        .collect())
}

/// `Ĥ_f C_f`: one column per data symbol of the subframe.
pub fn wi_estimate(anchors: &CMatrix, weights: &DMatrix<f64>) -> Result<CMatrix> {
    if anchors.ncols() != 2 || weights.nrows() != 2 {
        return Err(Error::Dimension(format!(
            "anchors {:?} and weights {:?} must be Kx2 and 2xI_f",
            anchors.shape(),
            weights.shape()
        )));
    }
    let k = anchors.nrows();
    Ok(CMatrix::from_fn(k, weights.ncols(), |r, c| {
        anchors[(r, 0)] * weights[(0, c)] + anchors[(r, 1)] * weights[(1, c)]
    }))
}

/// Estimation-noise power of a pilot-symbol anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTerm {
    /// `tr(W Wᴴ)` of the anchor's linear map (`K_on` for SLS).
    pub trace: f64,
    /// Per-subcarrier noise `σ² tr(W Wᴴ) / K_on`.
    pub e: f64,
}

pub fn noise_term(scheme: WiScheme, sigma2: f64, dft: &DftMatrices) -> NoiseTerm {
    let active = dft.active() as f64;
    let trace = match scheme {
        WiScheme::FpSls => active,
        WiScheme::FpAls => dft.als_trace(),
        WiScheme::Lp => dft.dft_trace(),
    };
    NoiseTerm {
        trace,
        e: sigma2 * trace / active,
    }
}

/// Noise term of the preamble anchor: two averaged LS observations.
pub fn preamble_noise(sigma2: f64) -> f64 {
    sigma2 / 2.0
}

/// A WI estimator bound to one frame structure and Doppler assumption.
#[derive(Debug, Clone)]
pub struct WiEstimator {
    pub scheme: WiScheme,
    pub spec: FrameSpec,
    pub doppler_hz: f64,
    pub dft: DftMatrices,
}

impl WiEstimator {
    pub fn new(scheme: WiScheme, spec: &FrameSpec, doppler_hz: f64) -> Result<Self> {
        spec.validate()?;
        if spec.pilot_symbols == 0 {
            return Err(Error::FrameSpec("WI estimation needs P >= 1".into()));
        }
        if spec.scheme != scheme.pilot_scheme() {
            return Err(Error::FrameSpec(format!(
                "{} needs {:?} pilot symbols, frame has {:?}",
                scheme.name(),
                scheme.pilot_scheme(),
                spec.scheme
            )));
        }
        let dft = DftMatrices::new(spec.active, spec.fft_size, spec.lp_pilots)?;
        Ok(Self {
            scheme,
            spec: spec.clone(),
            doppler_hz,
            dft,
        })
    }

    /// Weight-table keys needed at noise variance `sigma2`, one per subframe.
    pub fn weight_keys(&self, sigma2: f64) -> Vec<WeightKey> {
        let e = noise_term(self.scheme, sigma2, &self.dft).e;
        self.spec
            .subframe_lengths()
            .iter()
            .enumerate()
            .map(|(f, len)| {
                let lead = if f == 0 { preamble_noise(sigma2) } else { e };
                WeightKey::new(self.doppler_hz, self.spec.symbol_duration, len - 1, lead, e)
            })
            .collect()
    }

    fn pilot_anchor(&self, column: &[Complex64], ops: &mut OpCount) -> Result<CVector> {
        let k_on = self.spec.active as u64;
        let l = self.dft.taps as u64;
        match self.scheme {
            WiScheme::FpSls => {
                ops.mul_div += 2 * k_on;
                Ok(sls_pilot(column))
            }
            WiScheme::FpAls => {
                ops.mul_div += 2 * k_on + 4 * k_on * k_on;
                ops.sum_sub += 5 * k_on * k_on;
                als_pilot(&sls_pilot(column), &self.dft)
            }
            WiScheme::Lp => {
                ops.mul_div += 2 * l + 4 * k_on * l;
                ops.sum_sub += 5 * k_on * l;
                let at: Vec<Complex64> = self.dft.lp_positions.iter().map(|&k| column[k]).collect();
                lp_pilot(&at, &self.dft)
            }
        }
    }

    /// Estimates one received frame. Data symbols get interpolated estimates
    /// and each pilot symbol keeps its own anchor. Weights come from `table`
    /// when it holds the key, otherwise they are computed on the spot.
    pub fn estimate(
        &self,
        rx: &ReceivedFrame,
        table: Option<&WiWeightTable>,
    ) -> Result<EstimateGrid> {
        let spec = &self.spec;
        if rx.symbols.shape() != (spec.active, spec.symbols) {
            return Err(Error::Dimension(format!(
                "received {:?}, spec expects {}x{}",
                rx.symbols.shape(),
                spec.active,
                spec.symbols
            )));
        }
        let k_on = spec.active as u64;
        let mut ops = OpCount {
            mul_div: 2 * k_on,
            sum_sub: 2 * k_on,
        };
        let mut anchors = vec![ls_preamble(&rx.preamble[0], &rx.preamble[1])?];
        for &q in &spec.pilot_symbol_indices() {
            let col: Vec<Complex64> = rx.symbols.column(q).iter().copied().collect();
            anchors.push(self.pilot_anchor(&col, &mut ops)?);
        }
        let pairs = group_pilots(&anchors)?;
        let keys = self.weight_keys(rx.sigma2);
        let mut h = CMatrix::zeros(spec.active, spec.symbols);
        let mut start = 0;
        for (f, len) in spec.subframe_lengths().into_iter().enumerate() {
            let w = match table.and_then(|t| t.get(&keys[f])) {
                Some(w) => w,
                None => Arc::new(keys[f].compute()?),
            };
            let est = wi_estimate(&pairs[f], &w.c)?;
            h.columns_mut(start, len - 1).copy_from(&est);
            h.set_column(start + len - 1, &anchors[f + 1]);
            start += len;
        }
        let data = spec.data_symbols() as u64;
        ops.mul_div += 4 * k_on * data;
        ops.sum_sub += 2 * k_on * data;
        Ok(EstimateGrid {
            h,
            method: format!("wi-{}", self.scheme.name()),
            ops: Some(ops),
        })
    }
}
