//! Comparison estimators: preamble LS, 2D-LMMSE, 2D-RBF and ADD-TT.

mod addtt;
mod lmmse;
mod ls;
mod rbf;

pub use addtt::{frequency_average, time_truncate, AddTtEstimator, AddTtParams};
pub use lmmse::{LmmseEstimator, LmmseKernel, LMMSE_JITTER};
pub use ls::{ls_preamble, ls_preamble_with, pilot_ls};
pub use rbf::{rbf_kernel, RbfEstimator, DEFAULT_R0};

use crate::channel::ChannelRealization;
use crate::estimate::EstimateGrid;

/// Perfect channel knowledge over the data region.
pub fn ideal(chan: &ChannelRealization) -> EstimateGrid {
    EstimateGrid::new(chan.data_region(), "ideal")
}
