//! Single-carrier chain: QAM → RRC → array → per-element noise → phase
//! shifters → sum/N → timing → matched filter → symbol-rate samples.

use num_complex::Complex64;

use crate::analytic::ArrayConfig;
use crate::combine::CombinerSpec;
use crate::dsp::{self, ComplexSignal, FirFilter, SignalSpec};
use crate::seed::{self, STREAM_NOISE};
use crate::wavefront::{self, Wavefront};
use crate::{Error, Exec, Result};

use super::{analytic_echo, constellation_points, random_symbols, ChainKind, RunConfig, SimReport};

/// Elements processed per work item; partial sums are added in chunk order.
const ELEMENT_CHUNK: usize = 8;

pub fn run_single_carrier(
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    snr_db: f64,
    combiner: &CombinerSpec,
) -> Result<SimReport> {
    run_single_carrier_with(cfg, spec, snr_db, combiner, Exec::default())
}

/// [`run_single_carrier`] with an explicit execution policy. Element chunks
/// are the unit of parallel work; results do not depend on the policy.
///
/// The receiver samples at the centroid of the element delays, i.e. the
/// combined pulse is advanced by `(N−1)/2` delay steps before matched
/// filtering (ideal timing recovery).
pub fn run_single_carrier_with(
    cfg: &ArrayConfig,
    spec: &SignalSpec,
    snr_db: f64,
    combiner: &CombinerSpec,
    exec: Exec,
) -> Result<SimReport> {
    if *combiner != CombinerSpec::PhaseShifterSum {
        return Err(Error::CombinerRequiresOfdm);
    }
    cfg.validate()?;
    spec.validate()?;
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    let os = spec.oversample;
    let symbols = random_symbols(spec.modulation_order, spec.n_symbols, spec.seed)?;
    let taps = dsp::rrc_taps(spec.rrc_rolloff, spec.rrc_span, os);
    let step = wavefront::delay_step_samples(cfg, spec.fractional_bandwidth, os as f64);
    let spread = (cfg.n_elements - 1) as f64 * step.abs();
    let tail = spec.rrc_span * os / 2;
    // Zero guard must cover the spread; the frame must be over four times the
    // spread for the circular delay.
    let guard = (tail + spread.ceil() as usize + 2 * os).max((spread * 2.0).ceil() as usize);
    let tx = dsp::pulse_shape(&symbols, &taps, os, guard);
    let wave = Wavefront::new(&tx, cfg, step)?;

    let noise_seed = seed::derive_seed(spec.seed, &[STREAM_NOISE]);
    let noisy = snr_db != f64::INFINITY;
    let chunks = cfg.n_elements.div_ceil(ELEMENT_CHUNK);
    let partial = exec.map_range(chunks, |c| {
        let range = c * ELEMENT_CHUNK..((c + 1) * ELEMENT_CHUNK).min(cfg.n_elements);
        let streams = wave.streams(range, spec, Exec::Sequential);
        let noisy_sum = noisy.then(|| {
            let s = wavefront::add_noise(streams.clone(), snr_db, noise_seed, Exec::Sequential);
            sum_streams(&wavefront::phase_align(s).streams, tx.len(), os)
        });
        (sum_streams(&wavefront::phase_align(streams).streams, tx.len(), os), noisy_sum)
    });
    let mut clean = ComplexSignal::zeros(tx.len(), os);
    let mut rx = ComplexSignal::zeros(tx.len(), os);
    for (c, n) in &partial {
        clean.add_assign(c)?;
        if let Some(n) = n {
            rx.add_assign(n)?;
        }
    }

    let detect = |mut combined: ComplexSignal| -> Result<Vec<Complex64>> {
        combined.scale(1.0 / cfg.n_elements as f64);
        let centroid = (cfg.n_elements - 1) as f64 / 2.0 * step;
        let aligned = if centroid == 0.0 {
            combined
        } else {
            dsp::fractional_delay(&combined, -centroid)?
        };
        let filtered = FirFilter::new(taps.clone()).apply(&aligned.samples);
        Ok((0..symbols.len()).map(|k| filtered[guard + k * os]).collect())
    };
    let clean_syms = detect(clean)?;
    let clean_report = dsp::measure_evm(&clean_syms, &symbols, false)?;
    let (rx_report, rx_syms) = if noisy {
        let rx_syms = detect(rx)?;
        (dsp::measure_evm(&rx_syms, &symbols, false)?, rx_syms)
    } else {
        (clean_report.clone(), clean_syms)
    };

    Ok(SimReport {
        chain: ChainKind::SingleCarrier,
        overall_evm_db: rx_report.evm_db,
        overall_ssir_db: clean_report.mer_db,
        overall_mer_db: rx_report.mer_db,
        center_tone_evm_db: None,
        per_tone: None,
        constellation: constellation_points(&rx_syms, &symbols, rx_report.gain),
        analytic: analytic_echo(cfg, spec.fractional_bandwidth, None),
        config: RunConfig {
            array: *cfg,
            signal: *spec,
            ofdm: None,
            snr_db,
            combiner: combiner.clone(),
        },
    })
}

fn sum_streams(streams: &[ComplexSignal], len: usize, os: usize) -> ComplexSignal {
    let mut out = ComplexSignal::zeros(len, os);
    for s in streams {
        for (a, b) in out.samples.iter_mut().zip(&s.samples) {
            *a += b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(bw: f64, n_symbols: usize) -> SignalSpec {
        SignalSpec {
            n_symbols,
            ..SignalSpec::with_bandwidth(bw)
        }
    }

    #[test]
    fn idft_combiners_need_ofdm() {
        let cfg = ArrayConfig::half_wave(8, 30.0).unwrap();
        for c in [CombinerSpec::FullIdft, CombinerSpec::auto_reduced()] {
            assert_eq!(
                run_single_carrier(&cfg, &spec(0.2, 100), 20.0, &c),
                Err(Error::CombinerRequiresOfdm)
            );
        }
    }

    #[test]
    fn single_element_shows_input_snr() {
        let cfg = ArrayConfig::half_wave(1, 45.0).unwrap();
        let r = run_single_carrier(&cfg, &spec(0.2, 4000), 20.0, &CombinerSpec::PhaseShifterSum).unwrap();
        assert!((r.overall_evm_db + 20.0).abs() < 0.3, "{}", r.overall_evm_db);
        assert!(r.overall_ssir_db > 40.0, "{}", r.overall_ssir_db);
    }

    #[test]
    fn policy_and_chunking_do_not_change_results() {
        let cfg = ArrayConfig::half_wave(19, 30.0).unwrap();
        let s = spec(0.2, 500);
        let a = run_single_carrier_with(&cfg, &s, 10.0, &CombinerSpec::PhaseShifterSum, Exec::Sequential).unwrap();
        let b = run_single_carrier_with(&cfg, &s, 10.0, &CombinerSpec::PhaseShifterSum, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_steer_mirrors_positive() {
        let s = spec(0.2, 1000);
        let pos = run_single_carrier(&ArrayConfig::half_wave(16, 30.0).unwrap(), &s, f64::INFINITY, &CombinerSpec::PhaseShifterSum)
            .unwrap();
        let neg = run_single_carrier(&ArrayConfig::half_wave(16, -30.0).unwrap(), &s, f64::INFINITY, &CombinerSpec::PhaseShifterSum)
            .unwrap();
        assert!((pos.overall_ssir_db - neg.overall_ssir_db).abs() < 0.01);
    }
}
