use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ComplexSignal;
use crate::seed;
use crate::{Error, Result};

/// `10^(db/10)`.
pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Adds circular complex Gaussian noise of total variance `variance` per
/// sample (half in each of I and Q).
pub fn add_complex_noise<R: Rng>(samples: &mut [Complex64], variance: f64, rng: &mut R) {
    let sigma = (variance / 2.0).sqrt();
    for s in samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(re * sigma, im * sigma);
    }
}

/// AWGN at `snr_db` relative to the measured mean power of `signal`.
/// `snr_db = +∞` returns the input unchanged.
pub fn awgn(signal: &ComplexSignal, snr_db: f64, seed: u64) -> Result<ComplexSignal> {
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    let power = signal.power();
    if power == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut out = signal.clone();
    let mut rng = seed::rng(seed);
    add_complex_noise(&mut out.samples, power / db_to_power(snr_db), &mut rng);
    Ok(out)
}
