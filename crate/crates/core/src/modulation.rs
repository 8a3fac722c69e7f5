//! Gray-mapped QPSK and 16QAM with unit average symbol energy.
//!
//! Bits are consumed MSB-first per symbol: the first half of a symbol's bits
//! selects the in-phase level, the second half the quadrature level. A zero
//! sign bit maps to the positive half-plane, so QPSK `00` is `(1+j)/√2`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

const QAM16_SCALE: f64 = 0.316_227_766_016_837_94; // 1/sqrt(10)

impl Modulation {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            4 => Ok(Self::Qpsk),
            16 => Ok(Self::Qam16),
            m => Err(Error::Modulation(m)),
        }
    }

    pub fn order(self) -> usize {
        match self {
            Self::Qpsk => 4,
            Self::Qam16 => 16,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Self::Qpsk => 2,
            Self::Qam16 => 4,
        }
    }

    fn bits_per_axis(self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Amplitude of one axis for the given Gray code (MSB-first).
    fn axis_level(self, code: u8) -> f64 {
        match self {
            Self::Qpsk => {
                if code == 0 {
                    std::f64::consts::FRAC_1_SQRT_2
                } else {
                    -std::f64::consts::FRAC_1_SQRT_2
                }
            }
            // 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3
            Self::Qam16 => {
                let level = match code {
                    0b00 => 3.0,
                    0b01 => 1.0,
                    0b11 => -1.0,
                    _ => -3.0,
                };
                level * QAM16_SCALE
            }
        }
    }

    /// Nearest axis code; boundary values resolve to the numerically lower code.
    fn axis_decide(self, x: f64) -> u8 {
        match self {
            Self::Qpsk => u8::from(x < 0.0),
            Self::Qam16 => {
                let x = x / QAM16_SCALE;
                if x >= 2.0 {
                    0b00
                } else if x >= 0.0 {
                    0b01
                } else if x > -2.0 {
                    0b11
                } else {
                    0b10
                }
            }
        }
    }

    pub fn map_symbol(self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        let half = self.bits_per_axis();
        let code = |b: &[u8]| b.iter().fold(0u8, |acc, &x| (acc << 1) | (x & 1));
        Complex64::new(
            self.axis_level(code(&bits[..half])),
            self.axis_level(code(&bits[half..])),
        )
    }

    /// Hard decision: nearest constellation point and its bits.
    pub fn demap_hard(self, y: Complex64) -> (Complex64, Vec<u8>) {
        let mut bits = Vec::with_capacity(self.bits_per_symbol());
        self.demap_into(y, &mut bits);
        let point = self.map_symbol(&bits);
        (point, bits)
    }

    /// Appends the decided bits of `y` to `out`.
    pub fn demap_into(self, y: Complex64, out: &mut Vec<u8>) {
        let half = self.bits_per_axis();
        for value in [y.re, y.im] {
            let code = self.axis_decide(value);
            for shift in (0..half).rev() {
                out.push((code >> shift) & 1);
            }
        }
    }

    /// Nearest constellation point only.
    pub fn slice(self, y: Complex64) -> Complex64 {
        Complex64::new(
            self.axis_level(self.axis_decide(y.re)),
            self.axis_level(self.axis_decide(y.im)),
        )
    }

    pub fn constellation(self) -> Vec<Complex64> {
        let n = self.bits_per_symbol();
        (0..self.order())
            .map(|idx| {
                let bits: Vec<u8> = (0..n).rev().map(|s| ((idx >> s) & 1) as u8).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }
}

/// Maps a bit stream to constellation symbols.
pub fn map_bits(bits: &[u8], order: usize) -> Result<Vec<Complex64>> {
    let m = Modulation::from_order(order)?;
    let n = m.bits_per_symbol();
    if !bits.len().is_multiple_of(n) {
        return Err(Error::BitLength {
            expected: bits.len().div_ceil(n) * n,
            got: bits.len(),
        });
    }
    Ok(bits.chunks_exact(n).map(|c| m.map_symbol(c)).collect())
}

pub fn demap_hard(symbol: Complex64, order: usize) -> Result<(Complex64, Vec<u8>)> {
    Ok(Modulation::from_order(order)?.demap_hard(symbol))
}
