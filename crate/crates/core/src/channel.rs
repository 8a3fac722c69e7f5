//! Time-variant tapped-delay-line Rayleigh channels with a Jakes Doppler
//! spectrum, sampled once per OFDM symbol.
//!
//! Each tap is a sum of `SINUSOIDS` unit-power complex exponentials whose
//! arrival angles and phases are drawn uniformly per realization. Averaged
//! over realizations this gives exactly the `J0(2π f_d τ)` autocorrelation.
//! Fractional delays are applied directly in the frequency domain.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frame::{subcarrier_number, FrameGrid, FrameSpec, GUARD_INTERVAL_S};

pub const SINUSOIDS: usize = 32;

/// Zeroth-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// Time autocorrelation of a Jakes-faded tap at lag `tau` seconds.
pub fn jakes_correlation(doppler_hz: f64, tau_s: f64) -> f64 {
    bessel_j0(2.0 * PI * doppler_hz * tau_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    pub name: String,
    pub delays_ns: Vec<f64>,
    pub gains_db: Vec<f64>,
    pub doppler_hz: f64,
    pub velocity_kmh: f64,
}

const UC_GAINS: [f64; 12] = [
    0.0, 0.0, -10.0, -10.0, -10.0, -17.8, -17.8, -17.8, -21.1, -21.1, -26.3, -26.3,
];
const UC_DELAYS: [f64; 12] = [
    0.0, 1.0, 100.0, 101.0, 102.0, 200.0, 201.0, 202.0, 300.0, 301.0, 400.0, 401.0,
];
const SDWW_GAINS: [f64; 12] = [
    0.0, 0.0, -11.2, -11.2, -19.0, -21.9, -25.3, -25.3, -24.4, -28.0, -26.1, -26.1,
];
const SDWW_DELAYS: [f64; 12] = [
    0.0, 1.0, 100.0, 101.0, 200.0, 300.0, 400.0, 401.0, 500.0, 600.0, 700.0, 701.0,
];

impl TdlProfile {
    /// Urban canyon, 45 km/h.
    pub fn vtv_uc() -> Self {
        Self {
            name: "VTV-UC".into(),
            delays_ns: UC_DELAYS.to_vec(),
            gains_db: UC_GAINS.to_vec(),
            doppler_hz: 250.0,
            velocity_kmh: 45.0,
        }
    }

    /// Expressway same direction with wall; `doppler_hz` 500 (100 km/h) or 1000 (200 km/h).
    pub fn vtv_sdww(doppler_hz: f64) -> Self {
        Self {
            name: format!("VTV-SDWW-{doppler_hz}"),
            delays_ns: SDWW_DELAYS.to_vec(),
            gains_db: SDWW_GAINS.to_vec(),
            doppler_hz,
            velocity_kmh: doppler_hz / 5.0,
        }
    }

    /// Built-in profiles: `VTV-UC`, `VTV-SDWW-500`, `VTV-SDWW-1000`.
    pub fn named(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "VTV-UC" => Some(Self::vtv_uc()),
            "VTV-SDWW-500" | "VTV-SDWW" => Some(Self::vtv_sdww(500.0)),
            "VTV-SDWW-1000" => Some(Self::vtv_sdww(1000.0)),
            _ => None,
        }
    }

    pub fn with_doppler(mut self, doppler_hz: f64) -> Self {
        self.doppler_hz = doppler_hz;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Profile(format!("{}: {m}", self.name)));
        if self.delays_ns.is_empty() || self.delays_ns.len() != self.gains_db.len() {
            return bad("delay and gain lists must be nonempty and equally long");
        }
        if self.delays_ns.iter().any(|d| !d.is_finite() || *d < 0.0)
            || self.delays_ns.windows(2).any(|w| w[1] < w[0])
        {
            return bad("delays must be nonnegative and nondecreasing");
        }
        if *self.delays_ns.last().unwrap() * 1e-9 >= GUARD_INTERVAL_S {
            return bad("maximum delay exceeds the guard interval");
        }
        if !(self.doppler_hz.is_finite() && self.doppler_hz >= 0.0) {
            return bad("Doppler must be finite and nonnegative");
        }
        Ok(())
    }

    /// Linear tap powers normalized to unit sum.
    pub fn tap_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.gains_db.iter().map(|g| 10f64.powf(g / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    /// `K_on x taps` matrix of `exp(-j2π f_k τ_l)`.
    pub fn steering(&self, spec: &FrameSpec) -> DMatrix<Complex64> {
        DMatrix::from_fn(spec.active, self.delays_ns.len(), |k, l| {
            let f = f64::from(subcarrier_number(k)) * spec.subcarrier_spacing;
            Complex64::from_polar(1.0, -2.0 * PI * f * self.delays_ns[l] * 1e-9)
        })
    }

    /// Frequency correlation `E[H[k] H*[k']]` across active subcarriers.
    pub fn frequency_correlation(&self, spec: &FrameSpec) -> DMatrix<Complex64> {
        let s = self.steering(spec);
        let p = self.tap_powers();
        DMatrix::from_fn(spec.active, spec.active, |a, b| {
            (0..p.len())
                .map(|l| s[(a, l)] * s[(b, l)].conj() * p[l])
                .sum()
        })
    }
}

/// One channel draw for one frame.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `K_on x (I+1)` frequency response; column 0 is the preamble epoch.
    pub h: DMatrix<Complex64>,
    /// `(I+1) x taps` complex tap gains per symbol epoch.
    pub taps: DMatrix<Complex64>,
    /// `K_on x (I+2)` unit-variance complex Gaussian draws: two preamble
    /// symbols, then one column per data-region symbol. Scaled by `σ` when applied.
    pub noise: DMatrix<Complex64>,
}

impl ChannelRealization {
    /// Frequency response seen by data-region symbol `i` (0-based).
    pub fn symbol_response(&self, i: usize) -> nalgebra::DVectorView<'_, Complex64> {
        self.h.column(i + 1)
    }

    /// `K_on x I` response over the data region.
    pub fn data_region(&self) -> DMatrix<Complex64> {
        self.h.columns(1, self.h.ncols() - 1).into_owned()
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-realization sum-of-sinusoids Jakes process, evaluated at `t = n * step_s`.
pub fn jakes_process<R: Rng + ?Sized>(
    rng: &mut R,
    doppler_hz: f64,
    step_s: f64,
    samples: usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); samples];
    let scale = 1.0 / (SINUSOIDS as f64).sqrt();
    for _ in 0..SINUSOIDS {
        let angle = rng.gen_range(0.0..2.0 * PI);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let w = 2.0 * PI * doppler_hz * angle.cos() * step_s;
        for (n, v) in out.iter_mut().enumerate() {
            *v += Complex64::from_polar(scale, w * n as f64 + phase);
        }
    }
    out
}

pub fn sample_channel<R: Rng + ?Sized>(
    profile: &TdlProfile,
    spec: &FrameSpec,
    rng: &mut R,
) -> Result<ChannelRealization> {
    profile.validate()?;
    let epochs = spec.symbols + 1;
    let powers = profile.tap_powers();
    let mut taps = DMatrix::from_element(epochs, powers.len(), Complex64::default());
    for (l, p) in powers.iter().enumerate() {
        let g = jakes_process(rng, profile.doppler_hz, spec.symbol_duration, epochs);
        let amp = p.sqrt();
        for (i, v) in g.into_iter().enumerate() {
            taps[(i, l)] = v * amp;
        }
    }
    let h = profile.steering(spec) * taps.transpose();
    let noise = DMatrix::from_fn(spec.active, spec.symbols + 2, |_, _| complex_gaussian(rng));
    Ok(ChannelRealization { h, taps, noise })
}

/// Noise variance per complex sample for unit signal and channel power.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Frequency-domain received frame.
#[derive(Debug, Clone)]
pub struct ReceivedFrame {
    pub preamble: [Vec<Complex64>; 2],
    /// `K_on x I`.
    pub symbols: DMatrix<Complex64>,
    pub sigma2: f64,
}

/// `y = h x + v` per cell; both LTS copies see the preamble-epoch channel.
/// `snr_db = +inf` disables noise.
pub fn apply_channel(
    frame: &FrameGrid,
    chan: &ChannelRealization,
    snr_db: f64,
) -> Result<ReceivedFrame> {
    let (k_on, n_sym) = frame.symbols.shape();
    if chan.h.shape() != (k_on, n_sym + 1) || chan.noise.shape() != (k_on, n_sym + 2) {
        return Err(Error::Dimension(format!(
            "frame is {k_on}x{n_sym}, channel is {:?} with noise {:?}",
            chan.h.shape(),
            chan.noise.shape()
        )));
    }
    let sigma2 = noise_variance(snr_db);
    let sigma = sigma2.sqrt();
    let preamble = [0, 1].map(|c| {
        (0..k_on)
            .map(|k| chan.h[(k, 0)] * frame.preamble[k] + chan.noise[(k, c)] * sigma)
            .collect()
    });
    let symbols = DMatrix::from_fn(k_on, n_sym, |k, i| {
        chan.h[(k, i + 1)] * frame.symbols[(k, i)] + chan.noise[(k, i + 2)] * sigma
    });
    Ok(ReceivedFrame {
        preamble,
        symbols,
        sigma2,
    })
}

/// Pilot spacing and the Doppler-scaled coherence interval between pilot symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceInterval {
    /// Symbols between successive pilot symbols, `Δ_p`.
    pub pilot_spacing: usize,
    /// `Δ_p f_d`, the interval expressed in multiples of `T_s`.
    pub in_symbol_durations: f64,
    /// `Δ_p f_d T_s`, dimensionless.
    pub normalized: f64,
}

pub fn coherence_interval(spec: &FrameSpec, doppler_hz: f64) -> Result<CoherenceInterval> {
    if spec.pilot_symbols == 0 {
        return Err(Error::FrameSpec(
            "coherence interval needs at least one pilot symbol".into(),
        ));
    }
    let spacing = spec.symbols / spec.pilot_symbols;
    let in_ts = spacing as f64 * doppler_hz;
    Ok(CoherenceInterval {
        pilot_spacing: spacing,
        in_symbol_durations: in_ts,
        normalized: in_ts * spec.symbol_duration,
    })
}
