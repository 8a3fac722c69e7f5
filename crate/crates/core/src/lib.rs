//! Weighted-interpolation channel estimation for IEEE 802.11p vehicular links,
//! with the comparison estimators, a doubly-selective channel simulator and the
//! rate, latency and complexity accounting used to compare them.

pub mod baseline;
pub mod channel;
pub mod config;
pub mod dataset;
pub mod error;
pub mod estimate;
pub mod frame;
pub mod linalg;
pub mod metrics;
pub mod modulation;
pub mod sim;
pub mod wi;

pub use error::{Error, Result};
