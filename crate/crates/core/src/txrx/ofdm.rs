//! CP-OFDM at critical sampling: one sample per `1/BW_sig`, `M` tones spaced
//! `BW_sig/M` apart, tone `m` at baseband offset `(m − m₀)·BW_sig/M` (in
//! units of `f_o`).
//!
//! Element streams are synthesized from the tone grid with the exact delayed
//! waveform: each OFDM symbol (CP included) is a finite sum of complex
//! exponentials, so shifting it by a fractional number of samples only
//! rotates its tones. A delay covered by the CP therefore leaves every tone
//! orthogonal; a longer one leaks the previous symbol into the FFT window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

use crate::analytic::ArrayConfig;
use crate::combine::{CombinerSpec, ToneCombiner};
use crate::dsp::{self, ComplexSignal, SignalSpec, Transform};
use crate::seed::{self, STREAM_NOISE};
use crate::wavefront::{self, ElementStreams};
use crate::{Error, Exec, Result};

use super::{analytic_echo, constellation_points, random_symbols, ChainKind, RunConfig, SimReport, ToneMetrics};

/// OFDM symbols handled per work item.
const BATCH_SYMBOLS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfdmSpec {
    pub m_carriers: usize,
    /// CP length in samples, `T_cp/T_symbol = k/M`.
    pub cp_ratio_num: usize,
    pub n_ofdm_symbols: usize,
    /// Tone at the carrier frequency, `m₀`.
    pub center_tone: usize,
}

impl OfdmSpec {
    /// `M` tones, CP of 2 samples, `m₀ = M/2`.
    pub fn new(m_carriers: usize, n_ofdm_symbols: usize) -> Self {
        OfdmSpec {
            m_carriers,
            cp_ratio_num: 2,
            n_ofdm_symbols,
            center_tone: m_carriers / 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m_carriers < 2 {
            return bad(format!("m_carriers must be at least 2, got {}", self.m_carriers));
        }
        if self.cp_ratio_num == 0 || self.cp_ratio_num >= self.m_carriers {
            return bad(format!(
                "cp_ratio_num must be in [1, M), got {} with M = {}",
                self.cp_ratio_num, self.m_carriers
            ));
        }
        if self.center_tone >= self.m_carriers {
            return bad(format!("center_tone {} outside [0, M)", self.center_tone));
        }
        if self.n_ofdm_symbols == 0 {
            return bad("n_ofdm_symbols must be positive".into());
        }
        Ok(())
    }

    pub fn cp_len(&self) -> usize {
        self.cp_ratio_num
    }

    /// Samples per OFDM symbol including the CP.
    pub fn symbol_len(&self) -> usize {
        self.m_carriers + self.cp_ratio_num
    }

    pub fn frame_len(&self) -> usize {
        self.n_ofdm_symbols * self.symbol_len()
    }

    /// FFT bin carrying tone `m`.
    fn bin(&self, m: usize) -> usize {
        (m + self.m_carriers - self.center_tone) % self.m_carriers
    }

    /// Tone offset `m − m₀`.
    fn offset(&self, m: usize) -> f64 {
        m as f64 - self.center_tone as f64
    }
}

/// Symbols per OFDM symbol and tone, row-major (`symbol`, `tone`).
#[derive(Debug, Clone, PartialEq)]
pub struct ToneGrid {
    pub n_symbols: usize,
    pub m_carriers: usize,
    pub data: Vec<Complex64>,
}

impl ToneGrid {
    pub fn zeros(n_symbols: usize, m_carriers: usize) -> Self {
        ToneGrid {
            n_symbols,
            m_carriers,
            data: vec![Complex64::new(0.0, 0.0); n_symbols * m_carriers],
        }
    }

    pub fn from_data(n_symbols: usize, m_carriers: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_symbols * m_carriers {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n_symbols}×{m_carriers} grid",
                data.len()
            )));
        }
        Ok(ToneGrid {
            n_symbols,
            m_carriers,
            data,
        })
    }

    /// Random QAM grid for `ofdm`, drawn from the data stream of `seed`.
    pub fn random(order: u32, ofdm: &OfdmSpec, seed: u64) -> Result<Self> {
        let data = random_symbols(order, ofdm.n_ofdm_symbols * ofdm.m_carriers, seed)?;
        Self::from_data(ofdm.n_ofdm_symbols, ofdm.m_carriers, data)
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.m_carriers..(k + 1) * self.m_carriers]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.data[k * self.m_carriers..(k + 1) * self.m_carriers]
    }

    /// All symbols carried by tone `m`.
    pub fn tone(&self, m: usize) -> Vec<Complex64> {
        self.data.iter().skip(m).step_by(self.m_carriers).copied().collect()
    }

    fn check(&self, ofdm: &OfdmSpec) -> Result<()> {
        if self.m_carriers != ofdm.m_carriers || self.n_symbols != ofdm.n_ofdm_symbols {
            return Err(Error::DimensionMismatch(format!(
                "grid is {}×{}, spec wants {}×{}",
                self.n_symbols, self.m_carriers, ofdm.n_ofdm_symbols, ofdm.m_carriers
            )));
        }
        Ok(())
    }
}

/// Inverse transform of each symbol row plus cyclic prefix. Output has unit
/// average power for unit-power tones.
pub fn ofdm_modulate(grid: &ToneGrid, ofdm: &OfdmSpec) -> Result<ComplexSignal> {
    ofdm.validate()?;
    grid.check(ofdm)?;
    let m = ofdm.m_carriers;
    let cp = ofdm.cp_len();
    let transform = Transform::new(m);
    let scale = (m as f64).sqrt();
    let mut out = Vec::with_capacity(ofdm.frame_len());
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..grid.n_symbols {
        for (tone, x) in grid.row(k).iter().enumerate() {
            buf[ofdm.bin(tone)] = *x;
        }
        transform.inverse(&mut buf);
        out.extend(buf[m - cp..].iter().map(|x| x * scale));
        out.extend(buf.iter().map(|x| x * scale));
    }
    Ok(ComplexSignal::new(out, 1))
}

/// Strips the CP of each symbol and returns the per-tone values.
pub fn ofdm_demodulate(signal: &ComplexSignal, ofdm: &OfdmSpec) -> Result<ToneGrid> {
    ofdm.validate()?;
    let p = ofdm.symbol_len();
    if signal.len() % p != 0 {
        return Err(Error::DimensionMismatch(format!(
            "signal length {} is not a multiple of the symbol length {p}",
            signal.len()
        )));
    }
    let demod = Demodulator::new(ofdm);
    let k = signal.len() / p;
    let mut grid = ToneGrid::zeros(k, ofdm.m_carriers);
    for i in 0..k {
        demod.symbol(&signal.samples[i * p..(i + 1) * p], grid.row_mut(i));
    }
    Ok(grid)
}

struct Demodulator {
    ofdm: OfdmSpec,
    transform: Transform,
    scale: f64,
}

impl Demodulator {
    fn new(ofdm: &OfdmSpec) -> Self {
        Demodulator {
            ofdm: *ofdm,
            transform: Transform::new(ofdm.m_carriers),
            scale: (ofdm.m_carriers as f64).sqrt().recip(),
        }
    }

    /// `samples` holds one CP-extended symbol.
    fn symbol(&self, samples: &[Complex64], tones: &mut [Complex64]) {
        let cp = self.ofdm.cp_len();
        let mut buf = samples[cp..cp + self.ofdm.m_carriers].to_vec();
        self.transform.forward(&mut buf);
        for (m, t) in tones.iter_mut().enumerate() {
            *t = buf[self.ofdm.bin(m)] * self.scale;
        }
    }

    fn symbols(&self, signal: &ComplexSignal) -> ToneGrid {
        let p = self.ofdm.symbol_len();
        let k = signal.len() / p;
        let mut grid = ToneGrid::zeros(k, self.ofdm.m_carriers);
        for i in 0..k {
            self.symbol(&signal.samples[i * p..(i + 1) * p], grid.row_mut(i));
        }
        grid
    }
}

/// Exact delayed OFDM waveform, evaluated at integer sample instants.
struct Synthesizer<'a> {
    grid: &'a ToneGrid,
    ofdm: OfdmSpec,
    transform: Transform,
}

impl<'a> Synthesizer<'a> {
    fn new(grid: &'a ToneGrid, ofdm: &OfdmSpec) -> Self {
        Synthesizer {
            grid,
            ofdm: *ofdm,
            transform: Transform::new(ofdm.m_carriers),
        }
    }

    /// Samples `window` of the frame delayed by `delay` samples (either sign).
    fn delayed(&self, delay: f64, window: Range<usize>) -> Vec<Complex64> {
        let m = self.ofdm.m_carriers;
        let cp = self.ofdm.cp_len() as i64;
        let p = self.ofdm.symbol_len() as i64;
        let whole = delay.floor();
        let frac = delay - whole;
        let whole = whole as i64;
        let scale = (m as f64).sqrt();
        let (start, end) = (window.start as i64, window.end as i64);
        let mut out = vec![Complex64::new(0.0, 0.0); window.len()];
        if window.is_empty() {
            return out;
        }
        // Symbol k covers delayed instants [kP + whole + frac, (k+1)P + whole + frac).
        let first = ((start - whole - 1).div_euclid(p)).max(0);
        let last = ((end - 1 - whole).div_euclid(p)).min(self.grid.n_symbols as i64 - 1);
        let ramp: Vec<Complex64> = (0..m)
            .map(|tone| Complex64::from_polar(1.0, -2.0 * PI * self.ofdm.offset(tone) * frac / m as f64))
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let shift = i64::from(frac > 0.0);
        for k in first..=last {
            for (tone, x) in self.grid.row(k as usize).iter().enumerate() {
                buf[self.ofdm.bin(tone)] = x * ramp[tone];
            }
            self.transform.inverse(&mut buf);
            // Sample t = kP + cp + whole + j carries phase index j − frac.
            let base = k * p + cp + whole;
            for j in (-cp + shift)..(m as i64 + shift) {
                let t = base + j;
                if t >= start && t < end {
                    out[(t - start) as usize] = buf[j.rem_euclid(m as i64) as usize] * scale;
                }
            }
        }
        out
    }
}

/// Element streams for OFDM symbols `symbols` of `grid`, each element seeing
/// its exact group delay `n·s·BW_sig` samples and carrier rotation.
///
/// Timing follows the delay centroid, as in the single-carrier chain: the
/// FFT window is placed so the centroid sits in the middle of the range of
/// delays that stay free of inter-symbol interference. Sampling at integer
/// instants, a delay `D` (relative to timing) is free of leakage for
/// `−1 < D ≤ cp`, so a total spread below `cp + 1` samples costs nothing.
pub fn propagate_frame(
    grid: &ToneGrid,
    ofdm: &OfdmSpec,
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    symbols: Range<usize>,
    elements: Range<usize>,
    exec: Exec,
) -> Result<ElementStreams> {
    ofdm.validate()?;
    grid.check(ofdm)?;
    let step = wavefront::delay_step_samples(cfg, spec.fractional_bandwidth, 1.0);
    let offset = timing_offset(cfg, spec, ofdm);
    let p = ofdm.symbol_len();
    let window = symbols.start * p..symbols.end * p;
    let synth = Synthesizer::new(grid, ofdm);
    let idx: Vec<usize> = elements.clone().collect();
    let streams = exec.map(&idx, |&n| {
        let delay = step * n as f64 - offset;
        let rot = wavefront::carrier_rotation(cfg, n);
        let mut samples = synth.delayed(delay, window.clone());
        if n > 0 {
            for x in &mut samples {
                *x *= rot;
            }
        }
        ComplexSignal::new(samples, 1)
    });
    Ok(ElementStreams {
        streams,
        first_element: elements.start,
        cfg: *cfg,
        spec: *spec,
        delay_step_samples: step,
        noise_reference: 1.0,
    })
}

/// Common delay (samples) removed from every element by receiver timing.
fn timing_offset(cfg: &ArrayConfig, spec: &SignalSpec, ofdm: &OfdmSpec) -> f64 {
    let step = wavefront::delay_step_samples(cfg, spec.fractional_bandwidth, 1.0);
    let centroid = step * cfg.n_elements.saturating_sub(1) as f64 / 2.0;
    centroid - (ofdm.cp_len() as f64 - 1.0) / 2.0
}

pub fn run_ofdm(
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    ofdm: &OfdmSpec,
    snr_db: f64,
    combiner: &CombinerSpec,
) -> Result<SimReport> {
    run_ofdm_with(cfg, spec, ofdm, snr_db, combiner, Exec::default())
}

/// [`run_ofdm`] with an explicit execution policy. Symbol batches are the
/// unit of parallel work; results do not depend on the policy.
///
/// Combining runs in the tone domain: sub-arrays are summed in time, each
/// sub-array stream is demodulated once, and tone `m` of output `r` is the
/// weighted sum of the sub-array tones. This is the time-domain combiner
/// followed by demodulation, reordered (both steps are linear).
pub fn run_ofdm_with(
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    ofdm: &OfdmSpec,
    snr_db: f64,
    combiner: &CombinerSpec,
    exec: Exec,
) -> Result<SimReport> {
    cfg.validate()?;
    spec.validate()?;
    ofdm.validate()?;
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    let tc = ToneCombiner::new(combiner, cfg, ofdm, spec.fractional_bandwidth)?;
    let grid = ToneGrid::random(spec.modulation_order, ofdm, spec.seed)?;
    let demod = Demodulator::new(ofdm);
    let k_total = ofdm.n_ofdm_symbols;
    let batches = k_total.div_ceil(BATCH_SYMBOLS);
    let noisy = snr_db != f64::INFINITY;

    let results = exec.map_range(batches, |b| -> Result<(ToneGrid, Option<ToneGrid>)> {
        let symbols = b * BATCH_SYMBOLS..((b + 1) * BATCH_SYMBOLS).min(k_total);
        let streams = propagate_frame(&grid, ofdm, cfg, spec, symbols, 0..cfg.n_elements, Exec::Sequential)?;
        let receive = |s: ElementStreams| {
            let subs = tc.precombine(&wavefront::phase_align(s));
            let tones: Vec<ToneGrid> = subs.iter().map(|z| demod.symbols(z)).collect();
            tc.combine_tones(&tones)
        };
        let noisy_tones = noisy.then(|| {
            let seed = seed::derive_seed(spec.seed, &[STREAM_NOISE, b as u64]);
            receive(wavefront::add_noise(streams.clone(), snr_db, seed, Exec::Sequential))
        });
        Ok((receive(streams)?, noisy_tones.transpose()?))
    });

    let mut clean = Vec::with_capacity(grid.data.len());
    let mut rx = Vec::with_capacity(if noisy { grid.data.len() } else { 0 });
    for r in results {
        let (c, n) = r?;
        clean.extend(c.data);
        if let Some(n) = n {
            rx.extend(n.data);
        }
    }
    let clean = ToneGrid::from_data(k_total, ofdm.m_carriers, clean)?;
    let rx = if noisy {
        ToneGrid::from_data(k_total, ofdm.m_carriers, rx)?
    } else {
        clean.clone()
    };

    let mut per_tone = Vec::with_capacity(ofdm.m_carriers);
    let (mut err_clean, mut err_rx, mut ref_energy) = (0.0, 0.0, 0.0);
    let mut center_gain = Complex64::new(1.0, 0.0);
    for m in 0..ofdm.m_carriers {
        let reference = grid.tone(m);
        let c = dsp::measure_evm(&clean.tone(m), &reference, false)?;
        let n = if noisy {
            dsp::measure_evm(&rx.tone(m), &reference, false)?
        } else {
            c.clone()
        };
        err_clean += c.error_energy;
        err_rx += n.error_energy;
        ref_energy += n.reference_energy;
        if m == ofdm.center_tone {
            center_gain = n.gain;
        }
        per_tone.push(ToneMetrics {
            tone_index: m,
            evm_db: n.evm_db,
            ssir_db: c.mer_db,
        });
    }
    let overall_evm_db = dsp::energy_ratio_db(err_rx, ref_energy);
    let overall_ssir_db = -dsp::energy_ratio_db(err_clean, ref_energy);
    let center = ofdm.center_tone;
    let constellation = constellation_points(&rx.tone(center), &grid.tone(center), center_gain);

    Ok(SimReport {
        chain: ChainKind::Ofdm,
        overall_evm_db,
        overall_ssir_db,
        overall_mer_db: -overall_evm_db,
        center_tone_evm_db: Some(per_tone[center].evm_db),
        per_tone: Some(per_tone),
        constellation,
        analytic: analytic_echo(cfg, spec.fractional_bandwidth, Some(ofdm.m_carriers)),
        config: RunConfig {
            array: *cfg,
            signal: *spec,
            ofdm: Some(*ofdm),
            snr_db,
            combiner: combiner.clone(),
        },
    })
}
