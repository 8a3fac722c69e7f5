use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::pilot_value;
use crate::linalg::CVector;

/// `(y1[k] + y2[k]) / (2 p[k])` with the LTS as `p`.
pub fn ls_preamble(y1: &[Complex64], y2: &[Complex64]) -> Result<CVector> {
    let p: Vec<f64> = (0..y1.len()).map(pilot_value).collect();
    ls_preamble_with(y1, y2, &p)
}

pub fn ls_preamble_with(y1: &[Complex64], y2: &[Complex64], pilots: &[f64]) -> Result<CVector> {
    if y1.len() != y2.len() || y1.len() != pilots.len() {
        return Err(Error::Dimension(format!(
            "preamble lengths {}, {} and {} pilots",
            y1.len(),
            y2.len(),
            pilots.len()
        )));
    }
    assert!(pilots.iter().all(|p| *p != 0.0), "zero preamble pilot");
    Ok(CVector::from_iterator(
        y1.len(),
        y1.iter()
            .zip(y2)
            .zip(pilots)
            .map(|((a, b), p)| (a + b) / (2.0 * p)),
    ))
}

/// LS values `y / p` at the given `(subcarrier, symbol)` pilot cells.
pub fn pilot_ls(symbols: &nalgebra::DMatrix<Complex64>, cells: &[(usize, usize)]) -> CVector {
    CVector::from_iterator(
        cells.len(),
        cells.iter().map(|&(k, i)| symbols[(k, i)] / pilot_value(k)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_preamble_gives_channel() {
        let h: Vec<Complex64> = (0..52).map(|k| Complex64::new(0.1 * k as f64, -0.5)).collect();
        let y: Vec<Complex64> = h.iter().enumerate().map(|(k, v)| v * pilot_value(k)).collect();
        let est = ls_preamble(&y, &y).unwrap();
        for k in 0..52 {
            assert!((est[k] - h[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn all_ones_pilots_average_observations() {
        let c = Complex64::new(0.3, 0.7);
        let est = ls_preamble_with(&[c; 4], &[c; 4], &[1.0; 4]).unwrap();
        assert!(est.iter().all(|v| *v == c));
        assert!(ls_preamble_with(&[c; 4], &[c; 3], &[1.0; 4]).is_err());
    }

    #[test]
    fn averaging_halves_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sigma2 = 0.2_f64;
        let (mut two, mut one) = (0.0, 0.0);
        let trials = 10_000;
        for _ in 0..trials {
            let n1: Vec<Complex64> = (0..52).map(|_| complex_gaussian(&mut rng) * sigma2.sqrt()).collect();
            let n2: Vec<Complex64> = (0..52).map(|_| complex_gaussian(&mut rng) * sigma2.sqrt()).collect();
            two += ls_preamble(&n1, &n2).unwrap().norm_squared() / 52.0;
            one += ls_preamble(&n1, &n1).unwrap().norm_squared() / 52.0;
        }
        let two = two / trials as f64;
        let one = one / trials as f64;
        assert!((two / (sigma2 / 2.0) - 1.0).abs() < 0.05, "{two}");
        assert!((one / two / 2.0 - 1.0).abs() < 0.1);
    }
}
