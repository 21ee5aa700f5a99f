use num_complex::Complex64;
use std::f64::consts::PI;

use super::ComplexSignal;

/// Root-raised-cosine taps over `span` symbols at `oversample` samples per
/// symbol, normalized to unit energy. Length is `span·oversample + 1`.
pub fn rrc_taps(rolloff: f64, span: usize, oversample: usize) -> Vec<f64> {
    let beta = rolloff;
    let half = (span * oversample / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|k| {
            let t = k as f64 / oversample as f64;
            if t == 0.0 {
                1.0 - beta + 4.0 * beta / PI
            } else if ((4.0 * beta * t).abs() - 1.0).abs() < 1e-9 {
                let a = PI / (4.0 * beta);
                beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
            } else {
                let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
                let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
                num / den
            }
        })
        .collect();
    let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    for h in &mut taps {
        *h /= norm;
    }
    taps
}

/// Real symmetric FIR filter applied with the output aligned to the input
/// (centered, "same"-length convolution).
#[derive(Debug, Clone)]
pub struct FirFilter {
    taps: Vec<f64>,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>) -> Self {
        FirFilter { taps }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let len = input.len();
        let half = (self.taps.len() / 2) as isize;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, y) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, h) in self.taps.iter().enumerate() {
                let j = i as isize + half - k as isize;
                if j >= 0 && (j as usize) < len {
                    acc += input[j as usize] * *h;
                }
            }
            *y = acc;
        }
        out
    }
}

/// Upsamples `symbols` by `oversample`, pads `guard` zero samples at both
/// ends and filters with `taps`. Symbol `k` peaks at index
/// `guard + k·oversample`.
pub fn pulse_shape(symbols: &[Complex64], taps: &[f64], oversample: usize, guard: usize) -> ComplexSignal {
    let len = 2 * guard + symbols.len() * oversample;
    let mut up = vec![Complex64::new(0.0, 0.0); len];
    for (k, s) in symbols.iter().enumerate() {
        up[guard + k * oversample] = *s;
    }
    ComplexSignal::new(FirFilter::new(taps.to_vec()).apply(&up), oversample)
}
