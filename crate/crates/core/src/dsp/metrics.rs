use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reported EVM for a perfect match, in place of −∞.
pub const EVM_FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvmReport {
    pub evm_db: f64,
    pub mer_db: f64,
    /// `|c·rx − ref|²` per symbol, after the scalar fit.
    pub per_symbol_errors: Option<Vec<f64>>,
    /// Total error energy after the fit.
    pub error_energy: f64,
    pub reference_energy: f64,
    /// The fitted complex gain `c`.
    pub gain: Complex64,
}

pub(crate) fn energy_ratio_db(error: f64, reference: f64) -> f64 {
    if error <= 0.0 {
        return EVM_FLOOR_DB;
    }
    (10.0 * (error / reference).log10()).max(EVM_FLOOR_DB)
}

/// RMS EVM of `rx` against `reference` after a single least-squares complex
/// gain `c = ⟨rx, ref⟩ / ⟨rx, rx⟩`. Bulk gain and rotation are removed; any
/// per-symbol variation remains as error.
pub fn measure_evm(rx: &[Complex64], reference: &[Complex64], keep_errors: bool) -> Result<EvmReport> {
    if rx.len() != reference.len() {
        return Err(Error::LengthMismatch(rx.len(), reference.len()));
    }
    let reference_energy: f64 = reference.iter().map(|s| s.norm_sqr()).sum();
    if rx.is_empty() || reference_energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let rx_energy: f64 = rx.iter().map(|s| s.norm_sqr()).sum();
    let cross: Complex64 = rx.iter().zip(reference).map(|(r, s)| r.conj() * s).sum();
    let gain = if rx_energy > 0.0 {
        cross / rx_energy
    } else {
        Complex64::new(0.0, 0.0)
    };
    let errors: Vec<f64> = rx
        .iter()
        .zip(reference)
        .map(|(r, s)| (gain * r - s).norm_sqr())
        .collect();
    let error_energy: f64 = errors.iter().sum();
    let evm_db = energy_ratio_db(error_energy, reference_energy);
    Ok(EvmReport {
        evm_db,
        mer_db: -evm_db,
        per_symbol_errors: keep_errors.then_some(errors),
        error_energy,
        reference_energy,
        gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{add_complex_noise, qam_map};
    use crate::seed;
    use rand::Rng;

    fn symbols(n: usize) -> Vec<Complex64> {
        let mut rng = seed::rng(3);
        let idx: Vec<u32> = (0..n).map(|_| rng.gen_range(0..16)).collect();
        qam_map(&idx, 16).unwrap()
    }

    #[test]
    fn identical_and_scaled_hit_floor() {
        let s = symbols(500);
        let r = measure_evm(&s, &s, false).unwrap();
        assert_eq!(r.evm_db, EVM_FLOOR_DB);
        assert_eq!(r.mer_db, -r.evm_db);
        let scaled: Vec<_> = s.iter().map(|x| x * 2.0).collect();
        assert_eq!(measure_evm(&scaled, &s, false).unwrap().evm_db, EVM_FLOOR_DB);
    }

    #[test]
    fn additive_error_at_minus_20_db() {
        let s = symbols(200_000);
        let mut rx = s.clone();
        add_complex_noise(&mut rx, 0.01, &mut seed::rng(11));
        let r = measure_evm(&rx, &s, true).unwrap();
        assert!((r.evm_db + 20.0).abs() < 0.1, "{}", r.evm_db);
        assert_eq!(r.per_symbol_errors.unwrap().len(), s.len());
    }

    #[test]
    fn errors() {
        let s = symbols(4);
        assert_eq!(measure_evm(&s[..3], &s, false), Err(Error::LengthMismatch(3, 4)));
        let z = vec![Complex64::new(0.0, 0.0); 4];
        assert_eq!(measure_evm(&s, &z, false), Err(Error::ZeroReference));
    }

    #[test]
    fn invariant_under_complex_scaling() {
        let s = symbols(1000);
        let mut rng = seed::rng(5);
        let rx: Vec<_> = s
            .iter()
            .map(|x| x + Complex64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)))
            .collect();
        let base = measure_evm(&rx, &s, false).unwrap().evm_db;
        let c = Complex64::from_polar(0.37, 2.1);
        let scaled: Vec<_> = rx.iter().map(|x| x * c).collect();
        assert!((measure_evm(&scaled, &s, false).unwrap().evm_db - base).abs() < 1e-9);
    }
}
