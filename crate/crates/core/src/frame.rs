//! Frequency-domain IEEE 802.11p frame layouts.
//!
//! A frame is two identical LTS preamble symbols followed by `I` symbols on the
//! 52 active subcarriers. The standard layout carries 4 pilots per symbol. The
//! weighted-interpolation layouts instead replace `P` whole symbols by pilot
//! symbols, one at the end of each of `P` contiguous subframes, and leave every
//! other symbol fully loaded with data. Pilot symbols are either fully
//! allocated (FP) or carry `L` equally spaced pilots with data in between (LP).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::modulation::Modulation;

pub const FFT_SIZE: usize = 64;
pub const ACTIVE_SUBCARRIERS: usize = 52;
pub const STANDARD_DATA_SUBCARRIERS: usize = 48;
pub const STANDARD_PILOT_SUBCARRIERS: usize = 4;
pub const SYMBOL_DURATION_S: f64 = 8e-6;
pub const SUBCARRIER_SPACING_HZ: f64 = 156_250.0;
pub const GUARD_INTERVAL_S: f64 = 1.6e-6;

/// 802.11 long training sequence on subcarriers -26..=26, DC excluded.
const LTS: [i8; ACTIVE_SUBCARRIERS] = [
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, //
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1,
];

/// Active-band positions of subcarriers -21, -7, +7, +21.
pub const STANDARD_PILOT_POSITIONS: [usize; 4] = [5, 19, 32, 46];

/// Signed subcarrier number of an active-band position.
pub fn subcarrier_number(active_index: usize) -> i32 {
    let half = (ACTIVE_SUBCARRIERS / 2) as i32;
    let a = active_index as i32;
    if a < half {
        a - half
    } else {
        a - half + 1
    }
}

/// Known pilot/preamble value on an active subcarrier (BPSK, |p| = 1).
pub fn pilot_value(active_index: usize) -> f64 {
    f64::from(LTS[active_index])
}

pub fn lts_sequence() -> Vec<Complex64> {
    LTS.iter().map(|&v| Complex64::new(f64::from(v), 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotScheme {
    /// Pilot symbols carry pilots on all active subcarriers.
    Full,
    /// Pilot symbols carry `L` equally spaced pilots; the rest carry data.
    Lp,
}

/// Pilot placement inside data symbols of the standard (`P = 0`) layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StandardPilots {
    /// Subcarriers -21, -7, 7, 21 in every symbol.
    Fixed,
    /// The fixed set cyclically shifted by `step` active positions per symbol.
    Scattered { step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub fft_size: usize,
    pub active: usize,
    pub data_per_symbol: usize,
    pub pilots_per_symbol: usize,
    /// Symbols after the preamble, pilot symbols included.
    pub symbols: usize,
    pub pilot_symbols: usize,
    pub scheme: PilotScheme,
    /// Pilot count per LP pilot symbol; also the DFT tap count.
    pub lp_pilots: usize,
    pub modulation: Modulation,
    pub code_rate: f64,
    pub symbol_duration: f64,
    pub subcarrier_spacing: f64,
    pub standard_pilots: StandardPilots,
}

impl FrameSpec {
    pub fn standard(symbols: usize) -> Self {
        Self {
            fft_size: FFT_SIZE,
            active: ACTIVE_SUBCARRIERS,
            data_per_symbol: STANDARD_DATA_SUBCARRIERS,
            pilots_per_symbol: STANDARD_PILOT_SUBCARRIERS,
            symbols,
            pilot_symbols: 0,
            scheme: PilotScheme::Full,
            lp_pilots: 12,
            modulation: Modulation::Qpsk,
            code_rate: 1.0,
            symbol_duration: SYMBOL_DURATION_S,
            subcarrier_spacing: SUBCARRIER_SPACING_HZ,
            standard_pilots: StandardPilots::Scattered { step: 1 },
        }
    }

    pub fn weighted(symbols: usize, pilot_symbols: usize, scheme: PilotScheme) -> Self {
        Self {
            pilot_symbols,
            scheme,
            ..Self::standard(symbols)
        }
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn with_lp_pilots(mut self, l: usize) -> Self {
        self.lp_pilots = l;
        self
    }

    pub fn is_standard(&self) -> bool {
        self.pilot_symbols == 0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::FrameSpec(m));
        if self.active > self.fft_size || self.active != ACTIVE_SUBCARRIERS {
            return bad(format!("active subcarriers must be {ACTIVE_SUBCARRIERS}"));
        }
        if self.data_per_symbol + self.pilots_per_symbol != self.active {
            return bad("K_d + K_p must equal K_on".into());
        }
        if self.symbols == 0 {
            return bad("frame needs at least one symbol".into());
        }
        if self.pilot_symbols > 0 && self.symbols / self.pilot_symbols < 2 {
            return bad(format!(
                "{} pilot symbols leave no data in a subframe of a {}-symbol frame",
                self.pilot_symbols, self.symbols
            ));
        }
        if self.scheme == PilotScheme::Lp && (self.lp_pilots == 0 || self.lp_pilots > self.active)
        {
            return bad(format!("L = {} outside 1..={}", self.lp_pilots, self.active));
        }
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return bad(format!("code rate {} outside (0, 1]", self.code_rate));
        }
        Ok(())
    }

    /// Data-symbol count `I_d = I - P`.
    pub fn data_symbols(&self) -> usize {
        self.symbols - self.pilot_symbols
    }

    /// Subframe lengths (pilot symbol included); the first `I mod P` are one longer.
    pub fn subframe_lengths(&self) -> Vec<usize> {
        if self.pilot_symbols == 0 {
            return vec![self.symbols];
        }
        let p = self.pilot_symbols;
        let base = self.symbols / p;
        let extra = self.symbols % p;
        (0..p).map(|f| base + usize::from(f < extra)).collect()
    }

    /// 0-based positions of the pilot symbols within the `I` data-region symbols.
    pub fn pilot_symbol_indices(&self) -> Vec<usize> {
        if self.pilot_symbols == 0 {
            return Vec::new();
        }
        self.subframe_lengths()
            .iter()
            .scan(0usize, |end, &len| {
                *end += len;
                Some(*end - 1)
            })
            .collect()
    }

    /// Active-band positions of the `L` LP pilots: `floor(n * K_on / L)`.
    pub fn lp_pilot_positions(&self) -> Vec<usize> {
        lp_positions(self.active, self.lp_pilots)
    }

    /// Pilot positions in standard-layout symbol `i`.
    pub fn standard_pilot_positions(&self, symbol: usize) -> Vec<usize> {
        match self.standard_pilots {
            StandardPilots::Fixed => STANDARD_PILOT_POSITIONS.to_vec(),
            StandardPilots::Scattered { step } => STANDARD_PILOT_POSITIONS
                .iter()
                .map(|&p| (p + symbol * step) % self.active)
                .collect(),
        }
    }

    /// Pilot positions of every data-region symbol.
    pub fn pilot_layout(&self) -> Vec<Vec<usize>> {
        if self.is_standard() {
            return (0..self.symbols)
                .map(|i| self.standard_pilot_positions(i))
                .collect();
        }
        let pilots = match self.scheme {
            PilotScheme::Full => (0..self.active).collect(),
            PilotScheme::Lp => self.lp_pilot_positions(),
        };
        let marks = self.pilot_symbol_indices();
        (0..self.symbols)
            .map(|i| {
                if marks.contains(&i) {
                    pilots.clone()
                } else {
                    Vec::new()
                }
            })
            .collect()
    }

    /// Total data subcarriers per frame, `K_DF`.
    pub fn data_subcarriers(&self) -> usize {
        if self.is_standard() {
            return self.data_per_symbol * self.symbols;
        }
        let full = self.active * self.data_symbols();
        match self.scheme {
            PilotScheme::Full => full,
            PilotScheme::Lp => full + (self.active - self.lp_pilots) * self.pilot_symbols,
        }
    }

    pub fn payload_bits(&self) -> usize {
        self.data_subcarriers() * self.modulation.bits_per_symbol()
    }
}

pub(crate) fn lp_positions(active: usize, l: usize) -> Vec<usize> {
    (0..l).map(|n| n * active / l).collect()
}

/// Transmission data rate and its gain over the standard layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tdr {
    pub bits_per_second: f64,
    /// `TDR / TDR_standard - 1`, as a fraction.
    pub gain: f64,
}

impl Tdr {
    pub fn gain_pct(&self) -> f64 {
        100.0 * self.gain
    }

    /// Gain in percent truncated to two decimals, the way rate tables list it.
    pub fn gain_pct_2dp(&self) -> f64 {
        (self.gain_pct() * 100.0 + 1e-9).floor() / 100.0
    }
}

pub fn tdr(spec: &FrameSpec) -> Tdr {
    let rate = |kdf: usize| {
        kdf as f64 * spec.modulation.bits_per_symbol() as f64 * spec.code_rate
            / (spec.symbol_duration * spec.symbols as f64)
    };
    let bits_per_second = rate(spec.data_subcarriers());
    let standard = rate(spec.data_per_symbol * spec.symbols);
    Tdr {
        bits_per_second,
        gain: bits_per_second / standard - 1.0,
    }
}

/// Receiver buffering time before estimation can start, in microseconds.
pub fn buffering_time_us(spec: &FrameSpec) -> f64 {
    let symbols = match spec.pilot_symbols {
        0 | 1 => spec.symbols,
        p => spec.symbols.div_ceil(p),
    };
    // whole picoseconds, so 100 x 8 µs prints as 800
    (symbols as f64 * spec.symbol_duration * 1e12).round() / 1e6
}

/// A populated transmit frame.
#[derive(Debug, Clone)]
pub struct FrameGrid {
    pub spec: FrameSpec,
    /// The LTS symbol; it is sent twice.
    pub preamble: Vec<Complex64>,
    /// `K_on x I` transmitted cells.
    pub symbols: DMatrix<Complex64>,
    pub pilot_symbol_indices: Vec<usize>,
    /// Pilot positions per data-region symbol (empty for pure data symbols).
    pub pilot_subcarriers: Vec<Vec<usize>>,
    pub payload_bits: Vec<u8>,
}

impl FrameGrid {
    pub fn build(spec: &FrameSpec, bits: &[u8]) -> Result<Self> {
        spec.validate()?;
        let expected = spec.payload_bits();
        if bits.len() != expected {
            return Err(Error::BitLength {
                expected,
                got: bits.len(),
            });
        }
        let layout = spec.pilot_layout();
        let m = spec.modulation;
        let n = m.bits_per_symbol();
        let mut symbols = DMatrix::from_element(spec.active, spec.symbols, Complex64::default());
        let mut chunks = bits.chunks_exact(n);
        for (i, pilots) in layout.iter().enumerate() {
            let mut is_pilot = vec![false; spec.active];
            for &k in pilots {
                is_pilot[k] = true;
            }
            for (k, &pilot) in is_pilot.iter().enumerate() {
                symbols[(k, i)] = if pilot {
                    Complex64::new(pilot_value(k), 0.0)
                } else {
                    // length was checked against the layout above
                    m.map_symbol(chunks.next().expect("payload sized to layout"))
                };
            }
        }
        debug_assert!(chunks.next().is_none());
        Ok(Self {
            spec: spec.clone(),
            preamble: lts_sequence(),
            symbols,
            pilot_symbol_indices: spec.pilot_symbol_indices(),
            pilot_subcarriers: layout,
            payload_bits: bits.to_vec(),
        })
    }

    pub fn random<R: Rng + ?Sized>(spec: &FrameSpec, rng: &mut R) -> Result<Self> {
        let bits: Vec<u8> = (0..spec.payload_bits()).map(|_| rng.gen_range(0..2)).collect();
        Self::build(spec, &bits)
    }

    /// `(subcarrier, symbol)` of every data cell, in payload order.
    pub fn data_cells(&self) -> Vec<(usize, usize)> {
        data_cells(&self.pilot_subcarriers, self.spec.active)
    }
}

pub(crate) fn data_cells(layout: &[Vec<usize>], active: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for (i, pilots) in layout.iter().enumerate() {
        for k in 0..active {
            if !pilots.contains(&k) {
                cells.push((k, i));
            }
        }
    }
    cells
}
