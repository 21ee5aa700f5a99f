//! Parameter sweeps over array size, steering angle and signal bandwidth.
//!
//! Each point's seed is derived from the base seed and the point's own
//! coordinates, so a cell and a standalone run of the same point produce
//! identical numbers, whatever the grid around it. Cells run through
//! [`Exec`] and are collected in row-major order (bandwidth, then `N`, then
//! angle).

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::analytic::ArrayConfig;
use crate::combine::CombinerSpec;
use crate::dsp::SignalSpec;
use crate::seed::derive_seed;
use crate::txrx::{self, OfdmSpec, SimReport};
use crate::{Error, Exec, Result};

/// Which receive chain a point runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "chain", rename_all = "snake_case")]
pub enum Chain {
    SingleCarrier,
    Ofdm(OfdmSpec),
}

/// One simulation point in interface units.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub n_elements: usize,
    pub spacing_ratio: f64,
    pub theta_deg: f64,
    pub bw_frac: f64,
}

/// Seed for a point: `derive_seed(base, [N, θ bits, BW bits])`.
pub fn point_seed(base: u64, n_elements: usize, theta_deg: f64, bw_frac: f64) -> u64 {
    derive_seed(base, &[n_elements as u64, theta_deg.to_bits(), bw_frac.to_bits()])
}

/// Runs one point. `signal.seed` is the base seed; the run uses the derived
/// point seed, and `signal.fractional_bandwidth` is replaced by the point's.
pub fn run_point(
    point: &Point,
    signal: &SignalSpec,
    chain: &Chain,
    snr_db: f64,
    combiner: &CombinerSpec,
    exec: Exec,
) -> Result<SimReport> {
    let cfg = ArrayConfig::new(point.n_elements, point.spacing_ratio, point.theta_deg.to_radians())?;
    let spec = SignalSpec {
        fractional_bandwidth: point.bw_frac,
        seed: point_seed(signal.seed, point.n_elements, point.theta_deg, point.bw_frac),
        ..*signal
    };
    match chain {
        Chain::SingleCarrier => txrx::run_single_carrier_with(&cfg, &spec, snr_db, combiner, exec),
        Chain::Ofdm(ofdm) => txrx::run_ofdm_with(&cfg, &spec, ofdm, snr_db, combiner, exec),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    pub theta_list_deg: Vec<f64>,
    pub bw_list: Vec<f64>,
    pub spacing_ratio: f64,
    pub signal: SignalSpec,
    pub chain: Chain,
    #[serde(with = "crate::txrx::snr_format")]
    pub snr_db: f64,
    pub combiner: CombinerSpec,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.theta_list_deg.is_empty() || self.bw_list.is_empty() {
            return Err(Error::InvalidConfig("sweep axes must be non-empty".into()));
        }
        Ok(())
    }

    fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &bw in &self.bw_list {
            for &n in &self.n_list {
                for &theta in &self.theta_list_deg {
                    out.push(Point {
                        n_elements: n,
                        spacing_ratio: self.spacing_ratio,
                        theta_deg: theta,
                        bw_frac: bw,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n_elements: usize,
    pub theta_deg: f64,
    pub bw_frac: f64,
    pub ssir_db: Option<f64>,
    pub evm_db: Option<f64>,
    /// Failure tag when the point could not be simulated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub theta_values_deg: Vec<f64>,
    pub bw_values: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, bw_idx: usize, n_idx: usize, theta_idx: usize) -> &SweepCell {
        let nt = self.theta_values_deg.len();
        &self.cells[(bw_idx * self.n_values.len() + n_idx) * nt + theta_idx]
    }

    /// Sweep CSV: `n_elements,theta_deg,bw_frac,ssir_db,evm_db`. Failed
    /// cells carry `error:<tag>` in both metric columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_elements,theta_deg,bw_frac,ssir_db,evm_db\n");
        for c in &self.cells {
            let _ = write!(out, "{},{},{},", c.n_elements, c.theta_deg, c.bw_frac);
            match (&c.error, c.ssir_db, c.evm_db) {
                (Some(tag), _, _) => {
                    let _ = writeln!(out, "error:{tag},error:{tag}");
                }
                (None, Some(s), Some(e)) => {
                    let _ = writeln!(out, "{s},{e}");
                }
                _ => {
                    let _ = writeln!(out, ",");
                }
            }
        }
        out
    }
}

/// Short tag naming an error variant, for sweep cells.
pub fn error_tag(e: &Error) -> String {
    let full = format!("{e:?}");
    full.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Runs every cell; failures are recorded with a tag and the sweep continues.
/// Each cell runs sequentially inside; cells are the parallel unit.
pub fn run_sweep(spec: &SweepSpec, exec: Exec) -> Result<SweepGrid> {
    spec.validate()?;
    let points = spec.points();
    let cells = exec.map(&points, |p| {
        let r = run_point(p, &spec.signal, &spec.chain, spec.snr_db, &spec.combiner, Exec::Sequential);
        let (ssir_db, evm_db, error) = match r {
            Ok(rep) => (Some(rep.overall_ssir_db), Some(rep.overall_evm_db), None),
            Err(e) => (None, None, Some(error_tag(&e))),
        };
        SweepCell {
            n_elements: p.n_elements,
            theta_deg: p.theta_deg,
            bw_frac: p.bw_frac,
            ssir_db,
            evm_db,
            error,
        }
    });
    Ok(SweepGrid {
        n_values: spec.n_list.clone(),
        theta_values_deg: spec.theta_list_deg.clone(),
        bw_values: spec.bw_list.clone(),
        cells,
    })
}
