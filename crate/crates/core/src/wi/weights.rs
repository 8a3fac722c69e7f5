//! MMSE two-anchor time-interpolation weights.
//!
//! For data symbol `f` of a subframe with `I_f` data symbols, the weights on the
//! leading and trailing anchors are
//!
//! ```text
//! [J0(2π f_d (f-1) T_s), J0(2π f_d (I_f+1-f) T_s)] · [[1+E_q, ρ], [ρ, 1+E_{q+1}]]⁻¹
//! ```
//!
//! with `ρ = J0(2π f_d I_f T_s)` and `E` the per-subcarrier estimation noise of
//! each anchor. Weights depend only on statistics, so they can be tabulated.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::channel::jakes_correlation;
use crate::error::{Error, Result};

/// Determinant below which the 2x2 anchor covariance is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Diagonal loading applied to a singular anchor covariance.
pub const TIKHONOV_JITTER: f64 = 1e-9;

/// `2 x I_f` weights; column `f-1` holds the weights for data symbol `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub c: DMatrix<f64>,
    /// Set when the anchor covariance needed Tikhonov loading.
    pub regularized: bool,
}

impl WeightMatrix {
    pub fn len(&self) -> usize {
        self.c.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.c.ncols() == 0
    }
}

pub fn wi_weights(
    doppler_hz: f64,
    symbol_duration: f64,
    data_symbols: usize,
    e_lead: f64,
    e_trail: f64,
) -> Result<WeightMatrix> {
    if !(e_lead >= 0.0 && e_trail >= 0.0) {
        return Err(Error::Dimension(format!(
            "anchor noise terms must be nonnegative, got {e_lead} and {e_trail}"
        )));
    }
    let corr = |lag: usize| jakes_correlation(doppler_hz, lag as f64 * symbol_duration);
    let rho = corr(data_symbols);
    let (mut a, mut d) = (1.0 + e_lead, 1.0 + e_trail);
    let mut det = a * d - rho * rho;
    let regularized = det.abs() < SINGULAR_DET;
    if regularized {
        a += TIKHONOV_JITTER;
        d += TIKHONOV_JITTER;
        det = a * d - rho * rho;
    }
    // inverse of the symmetric 2x2 [[a, rho], [rho, d]]
    let (i00, i01, i11) = (d / det, -rho / det, a / det);
    let mut c = DMatrix::zeros(2, data_symbols);
    for f in 1..=data_symbols {
        let lead = corr(f - 1);
        let trail = corr(data_symbols + 1 - f);
        c[(0, f - 1)] = lead * i00 + trail * i01;
        c[(1, f - 1)] = lead * i01 + trail * i11;
    }
    Ok(WeightMatrix { c, regularized })
}

/// Exact lookup key; floating-point fields are compared bitwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightKey {
    doppler_bits: u64,
    duration_bits: u64,
    pub data_symbols: usize,
    e_lead_bits: u64,
    e_trail_bits: u64,
}

impl WeightKey {
    pub fn new(
        doppler_hz: f64,
        symbol_duration: f64,
        data_symbols: usize,
        e_lead: f64,
        e_trail: f64,
    ) -> Self {
        Self {
            doppler_bits: doppler_hz.to_bits(),
            duration_bits: symbol_duration.to_bits(),
            data_symbols,
            e_lead_bits: e_lead.to_bits(),
            e_trail_bits: e_trail.to_bits(),
        }
    }

    pub fn doppler_hz(&self) -> f64 {
        f64::from_bits(self.doppler_bits)
    }

    pub fn symbol_duration(&self) -> f64 {
        f64::from_bits(self.duration_bits)
    }

    pub fn e_lead(&self) -> f64 {
        f64::from_bits(self.e_lead_bits)
    }

    pub fn e_trail(&self) -> f64 {
        f64::from_bits(self.e_trail_bits)
    }

    pub fn compute(&self) -> Result<WeightMatrix> {
        wi_weights(
            self.doppler_hz(),
            self.symbol_duration(),
            self.data_symbols,
            self.e_lead(),
            self.e_trail(),
        )
    }
}

/// Precomputed weights, immutable once built and cheap to share.
#[derive(Debug, Clone, Default)]
pub struct WiWeightTable {
    entries: HashMap<WeightKey, Arc<WeightMatrix>>,
}

const TABLE_MAGIC: &[u8; 4] = b"WIWT";
const TABLE_VERSION: u16 = 1;

impl WiWeightTable {
    pub fn build<I: IntoIterator<Item = WeightKey>>(keys: I) -> Result<Self> {
        let mut entries = HashMap::new();
        for key in keys {
            if let std::collections::hash_map::Entry::Vacant(slot) = entries.entry(key) {
                slot.insert(Arc::new(key.compute()?));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &WeightKey) -> Option<Arc<WeightMatrix>> {
        self.entries.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the table: `WIWT | version u16 | count u32 | entries`, little-endian.
    /// Each entry is `f_d f64 | T_s f64 | I_f u16 | E_q f64 | E_q+1 f64 |
    /// regularized u8 | 2·I_f f64` (row-major weights).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut keys: Vec<&WeightKey> = self.entries.keys().collect();
        keys.sort_by_key(|k| {
            (k.doppler_bits, k.duration_bits, k.data_symbols, k.e_lead_bits, k.e_trail_bits)
        });
        let mut buf = Vec::new();
        buf.extend_from_slice(TABLE_MAGIC);
        buf.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(keys.len() as u32).to_le_bytes());
        for key in keys {
            let w = &self.entries[key];
            let n = u16::try_from(key.data_symbols)
                .map_err(|_| Error::Format("subframe longer than 65535 symbols".into()))?;
            buf.extend_from_slice(&key.doppler_bits.to_le_bytes());
            buf.extend_from_slice(&key.duration_bits.to_le_bytes());
            buf.extend_from_slice(&n.to_le_bytes());
            buf.extend_from_slice(&key.e_lead_bits.to_le_bytes());
            buf.extend_from_slice(&key.e_trail_bits.to_le_bytes());
            buf.push(u8::from(w.regularized));
            for r in 0..2 {
                for c in 0..key.data_symbols {
                    buf.extend_from_slice(&w.c[(r, c)].to_le_bytes());
                }
            }
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut data = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut data)?;
        let mut r = crate::dataset::ByteReader::new(&data);
        if r.take(4)? != TABLE_MAGIC {
            return Err(Error::Format("not a weight table (bad magic)".into()));
        }
        let version = r.u16()?;
        if version != TABLE_VERSION {
            return Err(Error::Format(format!("unsupported weight table version {version}")));
        }
        let count = r.u32()? as usize;
        let mut entries = HashMap::with_capacity(count);
        for _ in 0..count {
            let doppler_bits = r.u64()?;
            let duration_bits = r.u64()?;
            let data_symbols = r.u16()? as usize;
            let e_lead_bits = r.u64()?;
            let e_trail_bits = r.u64()?;
            let regularized = r.take(1)?[0] != 0;
            let mut c = DMatrix::zeros(2, data_symbols);
            for row in 0..2 {
                for col in 0..data_symbols {
                    c[(row, col)] = f64::from_bits(r.u64()?);
                }
            }
            let key = WeightKey {
                doppler_bits,
                duration_bits,
                data_symbols,
                e_lead_bits,
                e_trail_bits,
            };
            entries.insert(key, Arc::new(WeightMatrix { c, regularized }));
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after weight table".into()));
        }
        Ok(Self { entries })
    }
}
