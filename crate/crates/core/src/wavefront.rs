//! Array propagation in the baseband-equivalent model.
//!
//! A plane wave from the steer direction reaches element `n` (0-indexed)
//! `n·s` carrier cycles after element 0, with `s = (d/λ₀)·sin θ₀`. At
//! baseband that is a group delay of `n·s·BW_sig` symbols plus a carrier
//! rotation `e^{−j2π n s}`. Element index grows in the direction of later
//! arrival.

use num_complex::Complex64;
use std::ops::Range;

use crate::analytic::ArrayConfig;
use crate::dsp::{self, ComplexSignal, SignalSpec, Transform};
use crate::seed::{self, STREAM_NOISE};
use crate::{Error, Exec, Result};

/// Received per-element streams `x_n(t)` for a contiguous run of elements.
///
/// A chain may hold only a slice of the array at a time; `first_element`
/// keeps delays, phases and noise seeds tied to the global element index.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStreams {
    pub streams: Vec<ComplexSignal>,
    pub first_element: usize,
    pub cfg: ArrayConfig,
    pub spec: SignalSpec,
    /// Group delay between neighbouring elements, in samples.
    pub delay_step_samples: f64,
    /// Per-sample noise variance that corresponds to 0 dB per-channel SNR,
    /// i.e. the signal energy per symbol interval.
    pub noise_reference: f64,
}

impl ElementStreams {
    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn element_indices(&self) -> Range<usize> {
        self.first_element..self.first_element + self.streams.len()
    }

    pub fn stream_len(&self) -> usize {
        self.streams.first().map_or(0, ComplexSignal::len)
    }
}

/// Delay step in samples for a stream sampled `samples_per_symbol` times per
/// symbol.
pub fn delay_step_samples(cfg: &ArrayConfig, bw_sig: f64, samples_per_symbol: f64) -> f64 {
    cfg.delay_step() * bw_sig * samples_per_symbol
}

/// Carrier rotation `e^{−j2π n s}` seen by element `n`.
pub fn carrier_rotation(cfg: &ArrayConfig, element: usize) -> Complex64 {
    Complex64::from_polar(1.0, -cfg.phase_step() * element as f64)
}

/// Transmit signal prepared for repeated per-element delays.
pub struct Wavefront {
    tx: ComplexSignal,
    spectrum: Vec<Complex64>,
    transform: Transform,
    cfg: ArrayConfig,
    delay_step: f64,
}

impl Wavefront {
    /// `delay_step` is in samples of `tx`.
    pub fn new(tx: &ComplexSignal, cfg: &ArrayConfig, delay_step: f64) -> Result<Self> {
        let len = tx.len();
        let needed = ((cfg.n_elements.saturating_sub(1)) as f64 * delay_step.abs()).ceil() as usize + 1;
        let found = guard_samples(&tx.samples);
        if found < needed {
            return Err(Error::InsufficientGuard { needed, found });
        }
        let max_delay = (cfg.n_elements.saturating_sub(1)) as f64 * delay_step.abs();
        if max_delay >= len as f64 / 4.0 {
            return Err(Error::DelayTooLarge {
                delay: max_delay,
                len,
            });
        }
        Ok(Self::periodic(tx, cfg, delay_step))
    }

    /// For a `tx` that is periodic over its length (e.g. a bin-centered
    /// exponential), where the circular delay is the true delay and no guard
    /// is needed.
    pub fn periodic(tx: &ComplexSignal, cfg: &ArrayConfig, delay_step: f64) -> Self {
        let transform = Transform::new(tx.len());
        let mut spectrum = tx.samples.clone();
        transform.forward(&mut spectrum);
        Wavefront {
            tx: tx.clone(),
            spectrum,
            transform,
            cfg: *cfg,
            delay_step,
        }
    }

    /// Stream received by element `n`.
    pub fn element(&self, n: usize) -> ComplexSignal {
        let delay = self.delay_step * n as f64;
        if delay == 0.0 {
            return self.tx.clone();
        }
        let mut buf = self.spectrum.clone();
        dsp::apply_ramp(&mut buf, delay);
        self.transform.inverse(&mut buf);
        let rot = carrier_rotation(&self.cfg, n);
        for x in &mut buf {
            *x *= rot;
        }
        ComplexSignal::new(buf, self.tx.oversample)
    }

    /// Streams for a contiguous run of elements.
    pub fn streams(&self, elements: Range<usize>, spec: &SignalSpec, exec: Exec) -> ElementStreams {
        let idx: Vec<usize> = elements.clone().collect();
        ElementStreams {
            streams: exec.map(&idx, |&n| self.element(n)),
            first_element: elements.start,
            cfg: self.cfg,
            spec: *spec,
            delay_step_samples: self.delay_step,
            noise_reference: 1.0,
        }
    }
}

/// Shortest run of (numerically) zero samples at either end.
fn guard_samples(samples: &[Complex64]) -> usize {
    let peak = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let tol = peak * 1e-12;
    let lead = samples.iter().take_while(|s| s.norm() <= tol).count();
    let trail = samples.iter().rev().take_while(|s| s.norm() <= tol).count();
    lead.min(trail)
}

/// Splits `tx` into the per-element received streams for `elements`.
///
/// `tx` must carry at least `(N−1)·Δτ` samples of zero guard at both ends,
/// since the delay is applied circularly.
pub fn propagate_elements(
    tx: &ComplexSignal,
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    elements: Range<usize>,
    exec: Exec,
) -> Result<ElementStreams> {
    let step = delay_step_samples(cfg, spec.fractional_bandwidth, tx.oversample as f64);
    Ok(Wavefront::new(tx, cfg, step)?.streams(elements, spec, exec))
}

/// All `N` element streams for an oversampled single-carrier `tx` whose
/// symbols have unit energy.
pub fn propagate(tx: &ComplexSignal, cfg: &ArrayConfig, spec: &SignalSpec) -> Result<ElementStreams> {
    propagate_elements(tx, cfg, spec, 0..cfg.n_elements, Exec::default())
}

/// Phase-shifter correction `e^{+j2π n s}`; group delay is left untouched.
pub fn phase_align(mut streams: ElementStreams) -> ElementStreams {
    if streams.cfg.phase_step() == 0.0 {
        return streams;
    }
    let cfg = streams.cfg;
    let first = streams.first_element;
    for (i, s) in streams.streams.iter_mut().enumerate() {
        let w = carrier_rotation(&cfg, first + i).conj();
        for x in &mut s.samples {
            *x *= w;
        }
    }
    streams
}

/// Independent AWGN per element at `snr_db` per channel, referenced to the
/// signal bandwidth (noise variance per sample is `noise_reference / SNR`).
/// Element `n` draws from the stream `derive_seed(seed, [noise, n])`.
pub fn add_noise(mut streams: ElementStreams, snr_db: f64, seed: u64, exec: Exec) -> ElementStreams {
    if snr_db == f64::INFINITY {
        return streams;
    }
    let variance = streams.noise_reference / dsp::db_to_power(snr_db);
    let first = streams.first_element;
    let taken = std::mem::take(&mut streams.streams);
    let indexed: Vec<(usize, ComplexSignal)> = taken.into_iter().enumerate().collect();
    streams.streams = exec.map(&indexed, |(i, s)| {
        let mut s = s.clone();
        let mut rng = seed::rng(seed::derive_seed(seed, &[STREAM_NOISE, (first + i) as u64]));
        dsp::add_complex_noise(&mut s.samples, variance, &mut rng);
        s
    });
    streams
}
