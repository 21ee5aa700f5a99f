use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Planned forward/inverse transform of a fixed length. The forward
/// transform is unnormalized; the inverse carries the `1/L` factor so that
/// `inverse(forward(x)) = x`.
#[derive(Clone)]
pub struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transform {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
        let k = 1.0 / self.len as f64;
        for x in buf.iter_mut() {
            *x *= k;
        }
    }
}

/// `X[k] = Σ x[n] e^{−j2πkn/L}`.
pub fn dft(signal: &[Complex64]) -> Vec<Complex64> {
    let mut buf = signal.to_vec();
    if !buf.is_empty() {
        Transform::new(buf.len()).forward(&mut buf);
    }
    buf
}

/// `x[n] = (1/L) Σ X[k] e^{+j2πkn/L}`.
pub fn idft(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    if !buf.is_empty() {
        Transform::new(buf.len()).inverse(&mut buf);
    }
    buf
}
