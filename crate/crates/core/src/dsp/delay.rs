use num_complex::Complex64;
use std::f64::consts::PI;

use super::{ComplexSignal, Transform};
use crate::{Error, Result};

/// Frequency (cycles per sample) assigned to DFT bin `k` of an `len`-point
/// transform when applying a delay ramp. Bins at or above `len/2` are
/// negative frequencies, so the Nyquist bin of an even length maps to −1/2.
pub fn delay_ramp_frequency(k: usize, len: usize) -> f64 {
    if 2 * k < len {
        k as f64 / len as f64
    } else {
        (k as f64 - len as f64) / len as f64
    }
}

/// Circular delay by `delay` samples (may be fractional or negative) through
/// a linear phase ramp on the spectrum. Integer delays reduce to circular
/// shifts. Callers pad the signal so the wrap never reaches the payload.
pub fn fractional_delay(signal: &ComplexSignal, delay: f64) -> Result<ComplexSignal> {
    let len = signal.len();
    if !(delay.abs() < len as f64 / 4.0) {
        return Err(Error::DelayTooLarge { delay, len });
    }
    let t = Transform::new(len);
    let mut buf = signal.samples.clone();
    t.forward(&mut buf);
    apply_ramp(&mut buf, delay);
    t.inverse(&mut buf);
    Ok(ComplexSignal::new(buf, signal.oversample))
}

pub(crate) fn apply_ramp(spectrum: &mut [Complex64], delay: f64) {
    let len = spectrum.len();
    for (k, x) in spectrum.iter_mut().enumerate() {
        let f = delay_ramp_frequency(k, len);
        *x *= Complex64::from_polar(1.0, -2.0 * PI * f * delay);
    }
}
