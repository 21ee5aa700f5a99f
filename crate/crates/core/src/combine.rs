//! Spatial combiners for phase-aligned element streams.
//!
//! After phase alignment, element `n` still lags element 0 by `n·s·BW_sig`
//! samples, which for OFDM tone `m` is a residual phase
//! `−2π·n·s·(BW_sig/M)·(m − m₀)`. The phase-shifter sum ignores it; the
//! spatial IDFT undoes it with one output per tone,
//!
//! ```text
//! y_m(t) = (1/N) Σ_n x_n(t) · exp(+j2π · n·s·(BW_sig/M) · (m − m₀))
//! ```
//!
//! and the reduced IDFT first sums contiguous sub-arrays of `N_o` elements,
//! then weights the `N_r` sub-array streams with one output per group of
//! `M_o` contiguous tones, using the group's center tone.
//!
//! All three are the same two-stage structure with different `(N_o, M_o)`:
//! `(N, M)` is the plain sum, `(1, 1)` the full IDFT.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;

use crate::analytic::{self, ArrayConfig, ReducedSizing};
use crate::dsp::ComplexSignal;
use crate::txrx::{OfdmSpec, ToneGrid};
use crate::wavefront::ElementStreams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CombinerSpec {
    PhaseShifterSum,
    FullIdft,
    /// Sub-array size `n_sub` (N_o) and tone-group size `m_group` (M_o);
    /// both absent means the analytic sizing.
    ReducedIdft {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_sub: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_group: Option<usize>,
    },
}

impl CombinerSpec {
    pub fn auto_reduced() -> Self {
        CombinerSpec::ReducedIdft {
            n_sub: None,
            m_group: None,
        }
    }

    /// `(N_o, M_o)` for this combiner on an `N`-element array with `M` tones.
    pub fn sizing(&self, cfg: &ArrayConfig, m_carriers: usize, bw_sig: f64) -> Result<ReducedSizing> {
        let n = cfg.n_elements;
        match *self {
            CombinerSpec::PhaseShifterSum => ReducedSizing::new(n, m_carriers, n, m_carriers),
            CombinerSpec::FullIdft => ReducedSizing::new(n, m_carriers, 1, 1),
            CombinerSpec::ReducedIdft {
                n_sub: Some(n_sub),
                m_group: Some(m_group),
            } => ReducedSizing::new(n, m_carriers, n_sub, m_group),
            CombinerSpec::ReducedIdft {
                n_sub: None,
                m_group: None,
            } => {
                if cfg.is_broadside() {
                    return ReducedSizing::new(n, m_carriers, n, m_carriers);
                }
                analytic::reduced_sizing(cfg, m_carriers, bw_sig)
            }
            CombinerSpec::ReducedIdft { .. } => Err(Error::InvalidConfig(
                "reduced IDFT needs both n_sub and m_group, or neither".into(),
            )),
        }
    }
}

/// Unit-modulus weights of the second combining stage, stored as phases.
///
/// Row `r` is output stream `r` (tone group `r`), column `q` is sub-array
/// `q` (element `q` for the full IDFT).
#[derive(Debug, Clone, PartialEq)]
pub struct IdftWeights {
    pub sizing: ReducedSizing,
    pub center_tone: usize,
    phases: Vec<f64>,
}

impl IdftWeights {
    /// Phase of row `r`, column `q` is `2π · q·N_o·s · (BW_sig/M) · c_r` with
    /// `c_r = r·M_o + (M_o − 1)/2 − m₀`.
    pub fn new(cfg: &ArrayConfig, ofdm: &OfdmSpec, bw_sig: f64, sizing: ReducedSizing) -> Self {
        let tone_step = bw_sig / ofdm.m_carriers as f64;
        let stride = sizing.n_sub as f64 * cfg.delay_step();
        let mut phases = Vec::with_capacity(sizing.m_groups * sizing.n_groups);
        for r in 0..sizing.m_groups {
            let center = (r * sizing.m_group) as f64 + (sizing.m_group as f64 - 1.0) / 2.0
                - ofdm.center_tone as f64;
            for q in 0..sizing.n_groups {
                phases.push(2.0 * PI * q as f64 * stride * tone_step * center);
            }
        }
        IdftWeights {
            sizing,
            center_tone: ofdm.center_tone,
            phases,
        }
    }

    pub fn rows(&self) -> usize {
        self.sizing.m_groups
    }

    pub fn cols(&self) -> usize {
        self.sizing.n_groups
    }

    pub fn phase(&self, row: usize, col: usize) -> f64 {
        self.phases[row * self.cols() + col]
    }

    pub fn weight(&self, row: usize, col: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(row, col))
    }

    /// Tones demodulated from output `row`.
    pub fn tone_group(&self, row: usize) -> Range<usize> {
        row * self.sizing.m_group..(row + 1) * self.sizing.m_group
    }

    /// Phases wrapped to `(−π, π]`, one row per output, one column per
    /// element or sub-array.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("output");
        for q in 0..self.cols() {
            let _ = write!(out, ",{q}");
        }
        out.push('\n');
        for r in 0..self.rows() {
            let _ = write!(out, "{r}");
            for q in 0..self.cols() {
                let _ = write!(out, ",{}", wrap_phase(self.phase(r, q)));
            }
            out.push('\n');
        }
        out
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Elementwise sum divided by `N`, so a coherent narrowband input comes out
/// at unit gain. Elements are added in index order.
pub fn phase_sum(streams: &ElementStreams) -> ComplexSignal {
    let mut out = ComplexSignal::zeros(streams.stream_len(), oversample_of(streams));
    for s in &streams.streams {
        for (a, b) in out.samples.iter_mut().zip(&s.samples) {
            *a += b;
        }
    }
    out.scale(1.0 / streams.cfg.n_elements as f64);
    out
}

fn oversample_of(streams: &ElementStreams) -> usize {
    streams.streams.first().map_or(1, |s| s.oversample)
}

fn require_full_array(streams: &ElementStreams) -> Result<()> {
    if streams.first_element != 0 || streams.len() != streams.cfg.n_elements {
        return Err(Error::DimensionMismatch(format!(
            "combiner needs all {} elements, got {:?}",
            streams.cfg.n_elements,
            streams.element_indices()
        )));
    }
    Ok(())
}

/// Output of a reduced combiner: `streams[r]` demodulates `tone_groups[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedStreams {
    pub streams: Vec<ComplexSignal>,
    pub tone_groups: Vec<Range<usize>>,
}

/// Full spatial IDFT: `M` output streams, stream `m` used for tone `m`.
pub fn full_idft_combine(streams: &ElementStreams, ofdm: &OfdmSpec) -> Result<Vec<ComplexSignal>> {
    Ok(reduced_idft_combine(streams, ofdm, 1, 1)?.streams)
}

/// Reduced IDFT with sub-arrays of `n_sub` elements and tone groups of
/// `m_group` tones.
pub fn reduced_idft_combine(
    streams: &ElementStreams,
    ofdm: &OfdmSpec,
    n_sub: usize,
    m_group: usize,
) -> Result<CombinedStreams> {
    ofdm.validate()?;
    require_full_array(streams)?;
    let sizing = ReducedSizing::new(streams.cfg.n_elements, ofdm.m_carriers, n_sub, m_group)?;
    let tc = ToneCombiner::from_sizing(&streams.cfg, ofdm, streams.spec.fractional_bandwidth, sizing);
    let subs = tc.precombine(streams);
    let len = streams.stream_len();
    let os = oversample_of(streams);
    let norm = 1.0 / streams.cfg.n_elements as f64;
    let out = (0..tc.weights.rows())
        .map(|r| {
            let mut y = ComplexSignal::zeros(len, os);
            for (q, z) in subs.iter().enumerate() {
                let w = tc.weights.weight(r, q) * norm;
                for (a, b) in y.samples.iter_mut().zip(&z.samples) {
                    *a += w * b;
                }
            }
            y
        })
        .collect();
    Ok(CombinedStreams {
        streams: out,
        tone_groups: (0..tc.weights.rows()).map(|r| tc.weights.tone_group(r)).collect(),
    })
}

/// The two-stage combiner applied per tone after demodulation, as used by
/// the OFDM chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneCombiner {
    pub weights: IdftWeights,
    n_elements: usize,
}

impl ToneCombiner {
    pub fn new(spec: &CombinerSpec, cfg: &ArrayConfig, ofdm: &OfdmSpec, bw_sig: f64) -> Result<Self> {
        ofdm.validate()?;
        let sizing = spec.sizing(cfg, ofdm.m_carriers, bw_sig)?;
        Ok(Self::from_sizing(cfg, ofdm, bw_sig, sizing))
    }

    fn from_sizing(cfg: &ArrayConfig, ofdm: &OfdmSpec, bw_sig: f64, sizing: ReducedSizing) -> Self {
        ToneCombiner {
            weights: IdftWeights::new(cfg, ofdm, bw_sig, sizing),
            n_elements: cfg.n_elements,
        }
    }

    pub fn sizing(&self) -> ReducedSizing {
        self.weights.sizing
    }

    /// First stage: plain sums of contiguous `N_o`-element sub-arrays, in
    /// element order. `streams` must hold the whole array.
    pub fn precombine(&self, streams: &ElementStreams) -> Vec<ComplexSignal> {
        let n_sub = self.weights.sizing.n_sub;
        let os = oversample_of(streams);
        streams
            .streams
            .chunks(n_sub)
            .map(|group| {
                let mut z = ComplexSignal::zeros(streams.stream_len(), os);
                for s in group {
                    for (a, b) in z.samples.iter_mut().zip(&s.samples) {
                        *a += b;
                    }
                }
                z
            })
            .collect()
    }

    /// Second stage on demodulated sub-array tones: tone `m` of the output is
    /// `(1/N) Σ_q w[r(m)][q] · Z_q[m]`.
    pub fn combine_tones(&self, sub_tones: &[ToneGrid]) -> Result<ToneGrid> {
        let w = &self.weights;
        if sub_tones.len() != w.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} sub-array grids for {} weight columns",
                sub_tones.len(),
                w.cols()
            )));
        }
        let (k, m) = (sub_tones[0].n_symbols, sub_tones[0].m_carriers);
        let norm = 1.0 / self.n_elements as f64;
        let scaled: Vec<Vec<Complex64>> = (0..w.rows())
            .map(|r| (0..w.cols()).map(|q| w.weight(r, q) * norm).collect())
            .collect();
        let mut out = ToneGrid::zeros(k, m);
        for i in 0..k {
            let row = out.row_mut(i);
            for (tone, y) in row.iter_mut().enumerate() {
                let ws = &scaled[tone / w.sizing.m_group];
                *y = sub_tones
                    .iter()
                    .zip(ws)
                    .map(|(z, wq)| z.row(i)[tone] * wq)
                    .sum();
            }
        }
        Ok(out)
    }
}
