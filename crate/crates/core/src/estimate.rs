use crate::linalg::CMatrix;
use crate::metrics::OpCount;

/// An estimator's channel over the data region of one frame.
#[derive(Debug, Clone)]
pub struct EstimateGrid {
    /// `K_on x I`, one column per data-region symbol (pilot symbols included).
    pub h: CMatrix,
    pub method: String,
    /// Operations actually performed, when the estimator counts them.
    pub ops: Option<OpCount>,
}

impl EstimateGrid {
    pub fn new(h: CMatrix, method: impl Into<String>) -> Self {
        Self {
            h,
            method: method.into(),
            ops: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
