//! Error measures, report assembly and the analytic complexity model.

mod complexity;

pub use complexity::{
    complexity, complexity_ratio, ratio_table, srcnn_ops, ComplexityParams, Scheme,
    CHANNELNET_SRCNN_LAYERS, OPTIMIZED_SRCNN_LAYERS,
};

use std::io::Write;
use std::ops::{Add, AddAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::modulation::Modulation;

/// Real-valued operation tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OpCount {
    pub mul_div: u64,
    pub sum_sub: u64,
}

impl OpCount {
    pub fn new(mul_div: u64, sum_sub: u64) -> Self {
        Self { mul_div, sum_sub }
    }

    pub fn total(&self) -> u64 {
        self.mul_div + self.sum_sub
    }
}

impl Add for OpCount {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.mul_div + o.mul_div, self.sum_sub + o.sum_sub)
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// `‖Ĥ - H‖² / ‖H‖²`.
pub fn nmse(estimate: &CMatrix, truth: &CMatrix) -> Result<f64> {
    let (num, den) = squared_error(estimate, truth)?;
    if den == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(num / den)
}

/// `(‖Ĥ - H‖², ‖H‖²)`, for averaging across frames.
pub fn squared_error(estimate: &CMatrix, truth: &CMatrix) -> Result<(f64, f64)> {
    if estimate.shape() != truth.shape() {
        return Err(Error::Dimension(format!(
            "estimate {:?} vs truth {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let num = estimate.iter().zip(truth.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((num, truth.norm_squared()))
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Zero-forcing equalization by `Ĥ` and hard demapping of the given cells.
pub fn equalize_demap(
    received: &CMatrix,
    estimate: &CMatrix,
    cells: &[(usize, usize)],
    modulation: Modulation,
) -> Vec<u8> {
    let mut bits = Vec::with_capacity(cells.len() * modulation.bits_per_symbol());
    for &(k, i) in cells {
        let h = estimate[(k, i)];
        let x = if h == Complex64::default() {
            received[(k, i)]
        } else {
            received[(k, i)] / h
        };
        modulation.demap_into(x, &mut bits);
    }
    bits
}

pub fn bit_errors(decoded: &[u8], sent: &[u8]) -> Result<u64> {
    if decoded.len() != sent.len() {
        return Err(Error::BitLength {
            expected: sent.len(),
            got: decoded.len(),
        });
    }
    Ok(decoded.iter().zip(sent).filter(|(a, b)| a != b).count() as u64)
}

pub fn ber(decoded: &[u8], sent: &[u8]) -> Result<f64> {
    if sent.is_empty() {
        return Err(Error::BitLength {
            expected: 1,
            got: 0,
        });
    }
    Ok(bit_errors(decoded, sent)? as f64 / sent.len() as f64)
}

/// Running totals for one (estimator, scenario, SNR) point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointStats {
    pub frames: u64,
    pub error_energy: f64,
    pub channel_energy: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

impl PointStats {
    pub fn record(&mut self, error_energy: f64, channel_energy: f64, bit_errors: u64, bits: u64) {
        self.frames += 1;
        self.error_energy += error_energy;
        self.channel_energy += channel_energy;
        self.bit_errors += bit_errors;
        self.bits += bits;
    }

    pub fn merge(&mut self, o: &Self) {
        self.frames += o.frames;
        self.error_energy += o.error_energy;
        self.channel_energy += o.channel_energy;
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
    }

    /// Total error energy over total channel energy.
    pub fn nmse(&self) -> f64 {
        self.error_energy / self.channel_energy
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    /// Normal-approximation 95% half-width of the BER.
    pub fn ber_ci95(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        let p = self.ber();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub estimator: String,
    pub scenario: String,
    pub snr_db: f64,
    pub stats: PointStats,
    pub ops: Option<OpCount>,
    pub tdr_gain_pct: f64,
    pub phi_us: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: [&str; 11] = [
    "estimator",
    "scenario",
    "snr_db",
    "nmse_db",
    "ber",
    "frames",
    "ci95",
    "ops_muldiv",
    "ops_sumsub",
    "tdr_gain_pct",
    "phi_us",
];

impl MetricsReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            let (m, s) = match r.ops {
                Some(o) => (o.mul_div.to_string(), o.sum_sub.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([
                r.estimator.clone(),
                r.scenario.clone(),
                format!("{}", r.snr_db),
                format!("{:.4}", to_db(r.stats.nmse())),
                format!("{:.6e}", r.stats.ber()),
                r.stats.frames.to_string(),
                format!("{:.6e}", r.stats.ber_ci95()),
                m,
                s,
                format!("{:.2}", r.tdr_gain_pct),
                format!("{}", r.phi_us),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn find(&self, estimator: &str, snr_db: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.snr_db == snr_db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nmse_edges() {
        let h = CMatrix::from_element(2, 3, Complex64::new(0.6, 0.8));
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&CMatrix::zeros(2, 3), &h).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(nmse(&h, &CMatrix::zeros(2, 3)), Err(Error::ZeroEnergy)));
        assert!(nmse(&h, &CMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn sls_style_error_at_20db() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = 0.1;
        let h = CMatrix::from_fn(52, 400, |_, _| complex_gaussian(&mut rng));
        let est = CMatrix::from_fn(52, 400, |k, i| h[(k, i)] + complex_gaussian(&mut rng) * sigma);
        let v = nmse(&est, &h).unwrap();
        assert!((v / 0.01 - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn random_guessing_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<u8> = (0..1_000_000).map(|_| rng.gen_range(0..2)).collect();
        let b: Vec<u8> = (0..1_000_000).map(|_| rng.gen_range(0..2)).collect();
        assert!((ber(&a, &b).unwrap() - 0.5).abs() < 0.01);
        assert_eq!(ber(&a, &a).unwrap(), 0.0);
        assert!(ber(&a[..3], &b[..4]).is_err());
    }

    #[test]
    fn qpsk_awgn_matches_q_function() {
        // Eb/N0 = 7 dB, QPSK carries 2 bits so Es/N0 = Eb/N0 + 3 dB
        let ebn0 = 10f64.powf(0.7);
        let sigma2 = 1.0 / (2.0 * ebn0);
        let theory = 0.5 * libm::erfc(ebn0.sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Modulation::Qpsk;
        let n = 200_000;
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.gen_range(0..2)).collect();
        let tx = CMatrix::from_fn(1, n, |_, i| m.map_symbol(&bits[2 * i..2 * i + 2]));
        let rx = CMatrix::from_fn(1, n, |_, i| tx[(0, i)] + complex_gaussian(&mut rng) * sigma2.sqrt());
        let cells: Vec<(usize, usize)> = (0..n).map(|i| (0, i)).collect();
        let got = ber(&equalize_demap(&rx, &CMatrix::from_element(1, n, Complex64::new(1.0, 0.0)), &cells, m), &bits)
            .unwrap();
        assert!((got / theory - 1.0).abs() < 0.1, "{got} vs {theory}");
    }

    #[test]
    fn stats_merge_is_order_free_for_counts() {
        let mut a = PointStats::default();
        a.record(1.0, 10.0, 3, 100);
        let mut b = PointStats::default();
        b.record(2.0, 10.0, 5, 100);
        let mut ab = a;
        ab.merge(&b);
        let mut ba = b;
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.frames, 2);
        assert!((ab.nmse() - 0.15).abs() < 1e-12);
        assert!((ab.ber() - 0.04).abs() < 1e-12);
        assert!(ab.ber_ci95() > 0.0);
    }

    #[test]
    fn csv_has_schema_header() {
        let mut s = PointStats::default();
        s.record(0.1, 1.0, 0, 10);
        let report = MetricsReport {
            rows: vec![ReportRow {
                estimator: "wi-fp-als".into(),
                scenario: "VTV-UC".into(),
                snr_db: 10.0,
                stats: s,
                ops: Some(OpCount::new(1, 2)),
                tdr_gain_pct: 7.25,
                phi_us: 800.0,
            }],
        };
        let text = report.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "wi-fp-als,VTV-UC,10,-10.0000,0.000000e0,1,0.000000e0,1,2,7.25,800"
        );
    }
}
