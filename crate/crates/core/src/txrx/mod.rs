//! End-to-end receive chains: single-carrier QAM with RRC matched filtering,
//! and CP-OFDM with any of the spatial combiners.
//!
//! Every run is paired: the same symbols go through a noiseless chain, whose
//! MER is the SSIR, and through the noisy chain, whose EVM is reported.

mod ofdm;
mod single_carrier;

pub use ofdm::{
    ofdm_demodulate, ofdm_modulate, propagate_frame, run_ofdm, run_ofdm_with, OfdmSpec, ToneGrid,
};
pub use single_carrier::{run_single_carrier, run_single_carrier_with};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticReport, ArrayConfig};
use crate::combine::CombinerSpec;
use crate::dsp::{Constellation, SignalSpec};
use crate::seed::{self, STREAM_DATA};
use crate::Result;

/// Constellation points kept in a report.
pub const CONSTELLATION_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    SingleCarrier,
    Ofdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneMetrics {
    pub tone_index: usize,
    pub evm_db: f64,
    pub ssir_db: f64,
}

/// Received symbol after the scalar fit, next to what was sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub re: f64,
    pub im: f64,
    pub ref_re: f64,
    pub ref_im: f64,
}

/// Inputs of a run, echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub array: ArrayConfig,
    pub signal: SignalSpec,
    pub ofdm: Option<OfdmSpec>,
    #[serde(with = "snr_format")]
    pub snr_db: f64,
    pub combiner: CombinerSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub chain: ChainKind,
    pub overall_evm_db: f64,
    pub overall_ssir_db: f64,
    pub overall_mer_db: f64,
    /// OFDM only: EVM of tone `m₀`.
    pub center_tone_evm_db: Option<f64>,
    pub per_tone: Option<Vec<ToneMetrics>>,
    pub constellation: Vec<ConstellationPoint>,
    pub analytic: Option<AnalyticReport>,
    pub config: RunConfig,
}

impl SimReport {
    /// Max − min of per-tone EVM, dB.
    pub fn tone_evm_spread(&self) -> Option<f64> {
        let tones = self.per_tone.as_ref()?;
        let (lo, hi) = tones.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t.evm_db), hi.max(t.evm_db))
        });
        Some(hi - lo)
    }
}

/// Serializes an SNR in dB, writing `+∞` (noiseless) as the string `"inf"`.
pub mod snr_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) if !v.is_nan() => Ok(v),
            Raw::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            _ => Err(de::Error::custom("snr_db must be a number or \"inf\"")),
        }
    }

    /// Parses the same spellings from a command-line string.
    pub fn parse(text: &str) -> Option<f64> {
        if text.eq_ignore_ascii_case("inf") {
            return Some(f64::INFINITY);
        }
        text.parse::<f64>().ok().filter(|v| !v.is_nan())
    }
}

/// Random unit-power QAM symbols drawn from the data stream of `seed`.
pub(crate) fn random_symbols(order: u32, count: usize, seed: u64) -> Result<Vec<Complex64>> {
    let constellation = Constellation::new(order)?;
    let mut rng = seed::rng(seed::derive_seed(seed, &[STREAM_DATA]));
    (0..count)
        .map(|_| constellation.map(rng.gen_range(0..order)))
        .collect()
}

/// Closed-form predictions for the echo; `None` where they do not exist
/// (broadside), and without the OFDM part when its sizing is infeasible.
pub(crate) fn analytic_echo(cfg: &ArrayConfig, bw: f64, m: Option<usize>) -> Option<AnalyticReport> {
    AnalyticReport::compute(cfg, bw, m)
        .or_else(|_| AnalyticReport::compute(cfg, bw, None))
        .ok()
}

pub(crate) fn constellation_points(rx: &[Complex64], reference: &[Complex64], gain: Complex64) -> Vec<ConstellationPoint> {
    rx.iter()
        .zip(reference)
        .take(CONSTELLATION_POINTS)
        .map(|(r, s)| {
            let r = gain * r;
            ConstellationPoint {
                re: r.re,
                im: r.im,
                ref_re: s.re,
                ref_im: s.im,
            }
        })
        .collect()
}
