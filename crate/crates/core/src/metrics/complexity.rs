//! Closed-form real-valued operation counts.
//!
//! Conventions: a complex multiply-accumulate costs 4 multiplications and 5
//! additions (the 5 includes the accumulation), and dividing a complex value by
//! a real pilot costs 2 divisions.

use crate::error::{Error, Result};
use crate::wi::WiScheme;

use super::OpCount;

/// Parameters the counts depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityParams {
    pub k_on: u64,
    pub k_p: u64,
    pub k_d: u64,
    /// Symbols per frame, `I`.
    pub symbols: u64,
    /// Data symbols, `I_d = I - P`.
    pub data_symbols: u64,
    pub taps: u64,
    pub pilot_symbols: u64,
}

impl ComplexityParams {
    /// `K_on = 52, K_p = 4, K_d = 48, I = 100, L = 12`, `I_d = I - P`.
    pub fn paper(pilot_symbols: u64) -> Self {
        Self {
            k_on: 52,
            k_p: 4,
            k_d: 48,
            symbols: 100,
            data_symbols: 100 - pilot_symbols,
            taps: 12,
            pilot_symbols,
        }
    }
}

/// `(kernel size v, filters f)` per layer.
pub const OPTIMIZED_SRCNN_LAYERS: [(u64, u64); 3] = [(9, 32), (1, 16), (5, 1)];
pub const CHANNELNET_SRCNN_LAYERS: [(u64, u64); 3] = [(9, 64), (1, 32), (5, 1)];

/// Same-padded single-channel-input CNN on an `h x w` image:
/// `h w Σ d_j f_j v_j²` multiplications and `h w Σ d_j f_j` additions,
/// with `d_j` the input depth of layer `j`.
pub fn srcnn_ops(layers: &[(u64, u64)], h: u64, w: u64) -> OpCount {
    let mut depth = 1;
    let mut ops = OpCount::default();
    for &(v, f) in layers {
        ops.mul_div += h * w * depth * f * v * v;
        ops.sum_sub += h * w * depth * f;
        depth = f;
    }
    ops
}

// Per-(K_on·I) or per-(K_on·I_d) CNN-stage coefficients.
const CHANNELNET_CNN: (u64, u64) = (350_144, 42_432);
const TS_CHANNELNET_CNN: (u64, u64) = (226_880, 81_472);
const WI_SRCNN: (u64, u64) = (7_008, 1_120);
const WI_DNCNN: (u64, u64) = (84_096, 9_856);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    LmmseOnline,
    LmmseOffline,
    ChannelNet,
    TsChannelNet,
    /// ChannelNet's 2D-RBF interpolation alone.
    Rbf,
    /// TS-ChannelNet's ADD-TT interpolation alone.
    AddTt,
    /// WI estimator without post-processing.
    Wi(WiScheme),
    WiSrCnn(WiScheme),
    WiDnCnn(WiScheme),
}

impl Scheme {
    pub const ALL: [Scheme; 15] = [
        Scheme::LmmseOnline,
        Scheme::LmmseOffline,
        Scheme::ChannelNet,
        Scheme::TsChannelNet,
        Scheme::Rbf,
        Scheme::AddTt,
        Scheme::Wi(WiScheme::FpSls),
        Scheme::Wi(WiScheme::FpAls),
        Scheme::Wi(WiScheme::Lp),
        Scheme::WiSrCnn(WiScheme::FpSls),
        Scheme::WiSrCnn(WiScheme::FpAls),
        Scheme::WiSrCnn(WiScheme::Lp),
        Scheme::WiDnCnn(WiScheme::FpSls),
        Scheme::WiDnCnn(WiScheme::FpAls),
        Scheme::WiDnCnn(WiScheme::Lp),
    ];

    pub fn id(&self) -> String {
        match self {
            Self::LmmseOnline => "lmmse-online".into(),
            Self::LmmseOffline => "lmmse-offline".into(),
            Self::ChannelNet => "channelnet".into(),
            Self::TsChannelNet => "ts-channelnet".into(),
            Self::Rbf => "rbf".into(),
            Self::AddTt => "addtt".into(),
            Self::Wi(s) => s.name().into(),
            Self::WiSrCnn(s) => format!("{}-srcnn", s.name()),
            Self::WiDnCnn(s) => format!("{}-dncnn", s.name()),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::UnknownScheme(id.to_string()))
    }
}

fn wi_linear(s: WiScheme, p: &ComplexityParams) -> OpCount {
    let ComplexityParams {
        k_on,
        data_symbols: i_d,
        taps: l,
        pilot_symbols: pp,
        ..
    } = *p;
    match s {
        WiScheme::FpSls => OpCount::new(
            2 * k_on * pp + 2 * k_on + 4 * k_on * i_d,
            2 * k_on + 2 * k_on * i_d,
        ),
        WiScheme::FpAls => OpCount::new(
            4 * k_on * k_on * pp + 2 * k_on * pp + 2 * k_on + 4 * k_on * i_d,
            5 * k_on * k_on * pp + 2 * k_on * i_d,
        ),
        WiScheme::Lp => OpCount::new(
            2 * l * pp + 4 * k_on * l * pp + 2 * k_on + 4 * k_on * i_d,
            5 * k_on * l * pp + 2 * k_on * i_d,
        ),
    }
}

fn per_cell(coeff: (u64, u64), cells: u64) -> OpCount {
    OpCount::new(coeff.0 * cells, coeff.1 * cells)
}

pub fn complexity(scheme: Scheme, p: &ComplexityParams) -> OpCount {
    let ComplexityParams {
        k_on,
        k_p,
        k_d,
        symbols: i,
        data_symbols: i_d,
        taps: l,
        ..
    } = *p;
    match scheme {
        Scheme::LmmseOnline => OpCount::new(
            4 * k_p.pow(3) * i.pow(3) + k_p * k_p * i * i + k_d * k_d * k_p * k_p * i.pow(4) + 2 * k_p * i,
            3 * k_p.pow(3) * i.pow(3) + 2 * k_p * i,
        ),
        Scheme::LmmseOffline => OpCount::new(
            4 * k_d * k_p * k_p * i * i + 2 * k_p * i,
            3 * k_d * k_p * k_p * i * i + 2 * k_d * k_p * i * i - 2 * k_d * i,
        ),
        Scheme::Rbf => OpCount::new(
            k_p * k_p * i * i * (4 + k_d * i) + k_p * i * (2 + 3 * k_d * i),
            k_p * i * (5 * k_p * i + 5 * k_d * i - 2),
        ),
        Scheme::AddTt => OpCount::new(24 * k_on * i + 4 * l * k_on * i, 18 * k_on * i + 5 * k_on * i * l),
        Scheme::ChannelNet => complexity(Scheme::Rbf, p) + per_cell(CHANNELNET_CNN, k_on * i),
        Scheme::TsChannelNet => complexity(Scheme::AddTt, p) + per_cell(TS_CHANNELNET_CNN, k_on * i),
        Scheme::Wi(s) => wi_linear(s, p),
        Scheme::WiSrCnn(s) => wi_linear(s, p) + per_cell(WI_SRCNN, k_on * i_d),
        Scheme::WiDnCnn(s) => wi_linear(s, p) + per_cell(WI_DNCNN, k_on * i_d),
    }
}

/// `total(a) / total(b)`.
pub fn complexity_ratio(a: Scheme, b: Scheme, p: &ComplexityParams) -> f64 {
    complexity(a, p).total() as f64 / complexity(b, p).total() as f64
}

/// Every `(a, b, total(a)/total(b))` with `a` an LMMSE mode and `b` a WI
/// variant, each at its own structure's `P` (`P` only affects WI counts).
pub fn ratio_table(p: &ComplexityParams) -> Vec<(Scheme, Scheme, f64)> {
    let mut out = Vec::new();
    for a in [Scheme::LmmseOnline, Scheme::LmmseOffline] {
        for b in Scheme::ALL
            .into_iter()
            .filter(|s| matches!(s, Scheme::Wi(_) | Scheme::WiSrCnn(_) | Scheme::WiDnCnn(_)))
        {
            out.push((a, b, complexity_ratio(a, b, p)));
        }
    }
    out
}
