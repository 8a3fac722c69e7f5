use nalgebra::{DVector, SymmetricEigen};

use crate::channel::{jakes_correlation, ReceivedFrame, TdlProfile};
use crate::error::{Error, Result};
use crate::estimate::EstimateGrid;
use crate::frame::FrameSpec;
use crate::linalg::{CMatrix, CVector};

use super::ls::pilot_ls;

/// Diagonal loading used when `R_pp + σ² I` is numerically singular.
pub const LMMSE_JITTER: f64 = 1e-12;

/// `R_hp (R_pp + σ² I)⁻¹` for one pilot/target cell set, kept in eigen form
/// so that each noise level costs only a diagonal rescale.
#[derive(Debug, Clone)]
pub struct LmmseKernel {
    pub pilots: Vec<(usize, usize)>,
    pub targets: Vec<(usize, usize)>,
    eigenvalues: DVector<f64>,
    u_adj: CMatrix,
    /// `R_hp U`.
    a: CMatrix,
}

impl LmmseKernel {
    /// Separable model: `E[H[k,i] H*[k',i']] = freq_corr[k,k'] · time_corr(i - i')`.
    pub fn new(
        freq_corr: &CMatrix,
        time_corr: impl Fn(i64) -> f64,
        pilots: Vec<(usize, usize)>,
        targets: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if pilots.is_empty() {
            return Err(Error::FrameSpec("LMMSE window holds no pilots".into()));
        }
        let corr = |a: (usize, usize), b: (usize, usize)| {
            freq_corr[(a.0, b.0)] * time_corr(a.1 as i64 - b.1 as i64)
        };
        let r_pp = CMatrix::from_fn(pilots.len(), pilots.len(), |r, c| corr(pilots[r], pilots[c]));
        let r_hp = CMatrix::from_fn(targets.len(), pilots.len(), |r, c| corr(targets[r], pilots[c]));
        let eig = SymmetricEigen::new(r_pp);
        let eigenvalues = eig.eigenvalues.map(|l| l.max(0.0));
        let a = &r_hp * &eig.eigenvectors;
        Ok(Self {
            pilots,
            targets,
            eigenvalues,
            u_adj: eig.eigenvectors.adjoint(),
            a,
        })
    }

    /// Whether `σ²` needs diagonal loading.
    pub fn needs_jitter(&self, sigma2: f64) -> bool {
        self.eigenvalues.min() + sigma2 < LMMSE_JITTER
    }

    pub fn apply(&self, h_ls: &CVector, sigma2: f64) -> Result<CVector> {
        if h_ls.len() != self.pilots.len() {
            return Err(Error::Dimension(format!(
                "{} LS values for {} pilots",
                h_ls.len(),
                self.pilots.len()
            )));
        }
        let load = if self.needs_jitter(sigma2) { LMMSE_JITTER } else { 0.0 };
        let mut v = &self.u_adj * h_ls;
        for (x, l) in v.iter_mut().zip(self.eigenvalues.iter()) {
            *x /= l + sigma2 + load;
        }
        Ok(&self.a * v)
    }
}

/// 2D-LMMSE over windows of `window` symbols of a standard-layout frame,
/// with genie knowledge of the power-delay profile and Doppler.
#[derive(Debug, Clone)]
pub struct LmmseEstimator {
    pub spec: FrameSpec,
    pub window: usize,
    kernels: Vec<(usize, usize, LmmseKernel)>,
}

impl LmmseEstimator {
    pub fn new(spec: &FrameSpec, profile: &TdlProfile, window: usize) -> Result<Self> {
        spec.validate()?;
        if !spec.is_standard() {
            return Err(Error::FrameSpec("2D-LMMSE runs on the standard layout".into()));
        }
        if window == 0 {
            return Err(Error::FrameSpec("LMMSE window must be at least one symbol".into()));
        }
        let rf = profile.frequency_correlation(spec);
        let (fd, ts) = (profile.doppler_hz, spec.symbol_duration);
        let layout = spec.pilot_layout();
        let mut kernels = Vec::new();
        let mut start = 0;
        while start < spec.symbols {
            let len = window.min(spec.symbols - start);
            let pilots: Vec<(usize, usize)> = (0..len)
                .flat_map(|i| layout[start + i].iter().map(move |&k| (k, i)))
                .collect();
            let targets: Vec<(usize, usize)> = (0..len)
                .flat_map(|i| (0..spec.active).map(move |k| (k, i)))
                .collect();
            let kernel = LmmseKernel::new(
                &rf,
                |d| jakes_correlation(fd, d as f64 * ts),
                pilots,
                targets,
            )?;
            kernels.push((start, len, kernel));
            start += len;
        }
        Ok(Self {
            spec: spec.clone(),
            window,
            kernels,
        })
    }

    pub fn estimate(&self, rx: &ReceivedFrame) -> Result<EstimateGrid> {
        let k_on = self.spec.active;
        if rx.symbols.shape() != (k_on, self.spec.symbols) {
            return Err(Error::Dimension(format!(
                "received {:?} for a {}-symbol frame",
                rx.symbols.shape(),
                self.spec.symbols
            )));
        }
        let mut h = CMatrix::zeros(k_on, self.spec.symbols);
        for (start, len, kernel) in &self.kernels {
            let cells: Vec<(usize, usize)> =
                kernel.pilots.iter().map(|&(k, i)| (k, i + start)).collect();
            let est = kernel.apply(&pilot_ls(&rx.symbols, &cells), rx.sigma2)?;
            let block = CMatrix::from_iterator(k_on, *len, est.iter().copied());
            h.columns_mut(*start, *len).copy_from(&block);
        }
        Ok(EstimateGrid::new(h, format!("lmmse-{}", self.window)))
    }
}
