use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sampled complex baseband stream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    /// Samples per symbol period (1 for critically sampled OFDM).
    pub oversample: usize,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, oversample: usize) -> Self {
        ComplexSignal {
            samples,
            oversample,
        }
    }

    pub fn zeros(len: usize, oversample: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], oversample)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Mean power per sample.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    pub fn scale(&mut self, k: f64) {
        for s in &mut self.samples {
            *s *= k;
        }
    }

    /// Elementwise accumulate; lengths must match.
    pub fn add_assign(&mut self, other: &ComplexSignal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b;
        }
        Ok(())
    }
}

/// Modulation and pulse-shaping parameters of the transmitted signal.
///
/// `fractional_bandwidth` is `BW_sig = 1/(f_o T_symbol)`: one symbol lasts
/// `1/BW_sig` carrier cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub fractional_bandwidth: f64,
    pub modulation_order: u32,
    pub n_symbols: usize,
    pub rrc_rolloff: f64,
    pub rrc_span: usize,
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec {
            fractional_bandwidth: 0.2,
            modulation_order: 16,
            n_symbols: 10_000,
            rrc_rolloff: 0.25,
            rrc_span: 16,
            oversample: 8,
            seed: 1,
        }
    }
}

impl SignalSpec {
    pub fn with_bandwidth(fractional_bandwidth: f64) -> Self {
        SignalSpec {
            fractional_bandwidth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.fractional_bandwidth > 0.0 && self.fractional_bandwidth.is_finite()) {
            return bad(format!(
                "fractional_bandwidth must be positive, got {}",
                self.fractional_bandwidth
            ));
        }
        if ![4, 16, 64].contains(&self.modulation_order) {
            return Err(Error::InvalidOrder(self.modulation_order));
        }
        if self.n_symbols == 0 {
            return bad("n_symbols must be positive".into());
        }
        if !(self.rrc_rolloff > 0.0 && self.rrc_rolloff <= 1.0) {
            return bad(format!("rrc_rolloff must be in (0, 1], got {}", self.rrc_rolloff));
        }
        if self.rrc_span == 0 || self.rrc_span % 2 != 0 {
            return bad(format!("rrc_span must be even and positive, got {}", self.rrc_span));
        }
        if self.oversample < 4 {
            return bad(format!("oversample must be at least 4, got {}", self.oversample));
        }
        Ok(())
    }

    /// Symbol period in carrier cycles.
    pub fn symbol_period(&self) -> f64 {
        1.0 / self.fractional_bandwidth
    }
}
