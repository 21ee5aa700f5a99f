//! Experiment configuration: TOML file, command-line overrides, defaults.
//!
//! Precedence is flag > file > built-in default. Unknown keys anywhere in the
//! file are rejected.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use squintfree::combine::CombinerSpec;
use squintfree::dsp::SignalSpec;
use squintfree::txrx::{snr_format, OfdmSpec};

/// Default sweep axes.
pub const DEFAULT_N_LIST: [usize; 5] = [4, 8, 16, 32, 64];
pub const DEFAULT_THETA_LIST: [f64; 6] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
pub const DEFAULT_BW_LIST: [f64; 4] = [0.05, 0.10, 0.15, 0.20];

const DEFAULT_N: usize = 8;
const DEFAULT_THETA: f64 = 30.0;
const DEFAULT_SNR: f64 = 20.0;
const DEFAULT_OFDM_SYMBOLS: usize = 1000;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub array: Option<ArraySection>,
    pub signal: Option<SignalSection>,
    pub ofdm: Option<OfdmSection>,
    pub combiner: Option<CombinerSection>,
    #[serde(default, deserialize_with = "opt_snr")]
    pub snr_db: Option<f64>,
    pub sweep: Option<SweepSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub n_elements: Option<usize>,
    pub spacing_ratio: Option<f64>,
    pub theta_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub bw_frac: Option<f64>,
    pub modulation_order: Option<u32>,
    pub n_symbols: Option<usize>,
    pub rrc_rolloff: Option<f64>,
    pub rrc_span: Option<usize>,
    pub oversample: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    pub m_carriers: Option<usize>,
    pub cp_ratio_num: Option<usize>,
    pub n_ofdm_symbols: Option<usize>,
    pub center_tone: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CombinerKind {
    Ps,
    Idft,
    Reduced,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinerSection {
    pub kind: Option<CombinerKind>,
    pub n_sub: Option<usize>,
    pub m_group: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Option<Vec<usize>>,
    pub theta_list_deg: Option<Vec<f64>>,
    pub bw_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

fn opt_snr<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    snr_format::deserialize(d).map(Some)
}

/// Values given on the command line. List-valued axes take comma lists.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<Vec<usize>>,
    pub theta_deg: Option<Vec<f64>>,
    pub bw: Option<Vec<f64>>,
    pub snr_db: Option<f64>,
    pub carriers: Option<usize>,
    pub cp_num: Option<usize>,
    pub combiner: Option<CombinerKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Fully resolved experiment. `signal.seed` is the base seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub n_list: Vec<usize>,
    pub theta_list_deg: Vec<f64>,
    pub bw_list: Vec<f64>,
    pub spacing_ratio: f64,
    pub signal: SignalSpec,
    pub ofdm: Option<OfdmSpec>,
    pub combiner: CombinerSpec,
    #[serde(with = "snr_format")]
    pub snr_db: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse(text: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))
}

/// Which axes a command needs: `Single` takes one point, `Grid` a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Single,
    Grid,
}

pub fn resolve(file: FileConfig, o: Overrides, shape: Shape) -> Result<Experiment, ConfigError> {
    let array = file.array.unwrap_or_default();
    let sig = file.signal.unwrap_or_default();
    let sweep = file.sweep.unwrap_or_default();
    let output = file.output.unwrap_or_default();
    let defaults = SignalSpec::default();

    let base_bw = sig.bw_frac.unwrap_or(defaults.fractional_bandwidth);
    let (n_list, theta_list_deg, bw_list) = match shape {
        Shape::Single => (
            o.n.or(array.n_elements.map(|n| vec![n])).unwrap_or(vec![DEFAULT_N]),
            o.theta_deg.or(array.theta_deg.map(|t| vec![t])).unwrap_or(vec![DEFAULT_THETA]),
            o.bw.unwrap_or(vec![base_bw]),
        ),
        Shape::Grid => (
            o.n.or(sweep.n_list).unwrap_or(DEFAULT_N_LIST.to_vec()),
            o.theta_deg.or(sweep.theta_list_deg).unwrap_or(DEFAULT_THETA_LIST.to_vec()),
            o.bw.or(sweep.bw_list).unwrap_or(DEFAULT_BW_LIST.to_vec()),
        ),
    };
    if shape == Shape::Single {
        for (name, len) in [("--n", n_list.len()), ("--theta-deg", theta_list_deg.len()), ("--bw", bw_list.len())] {
            if len != 1 {
                return Err(ConfigError(format!("{name} takes a single value here, got {len}")));
            }
        }
    }
    for (name, empty) in [
        ("sweep.n_list", n_list.is_empty()),
        ("sweep.theta_list_deg", theta_list_deg.is_empty()),
        ("sweep.bw_list", bw_list.is_empty()),
    ] {
        if empty {
            return Err(ConfigError(format!("{name} must not be empty")));
        }
    }

    let signal = SignalSpec {
        fractional_bandwidth: bw_list[0],
        modulation_order: sig.modulation_order.unwrap_or(defaults.modulation_order),
        n_symbols: sig.n_symbols.unwrap_or(defaults.n_symbols),
        rrc_rolloff: sig.rrc_rolloff.unwrap_or(defaults.rrc_rolloff),
        rrc_span: sig.rrc_span.unwrap_or(defaults.rrc_span),
        oversample: sig.oversample.unwrap_or(defaults.oversample),
        seed: o.seed.or(sig.seed).unwrap_or(defaults.seed),
    };

    let ofdm = match (file.ofdm, o.carriers) {
        (None, None) => {
            if o.cp_num.is_some() {
                return Err(ConfigError("--cp-num needs an OFDM signal (--carriers)".into()));
            }
            None
        }
        (sec, carriers) => {
            let sec = sec.unwrap_or_default();
            let m = carriers
                .or(sec.m_carriers)
                .ok_or_else(|| ConfigError("ofdm.m_carriers is required".into()))?;
            Some(OfdmSpec {
                m_carriers: m,
                cp_ratio_num: o.cp_num.or(sec.cp_ratio_num).unwrap_or(2),
                n_ofdm_symbols: sec.n_ofdm_symbols.unwrap_or(DEFAULT_OFDM_SYMBOLS),
                center_tone: sec.center_tone.unwrap_or(m / 2),
            })
        }
    };

    let comb = file.combiner.unwrap_or_default();
    let kind = o.combiner.or(comb.kind).unwrap_or(CombinerKind::Ps);
    if kind != CombinerKind::Reduced && (comb.n_sub.is_some() || comb.m_group.is_some()) {
        return Err(ConfigError("combiner.n_sub and combiner.m_group apply to the reduced combiner only".into()));
    }
    let combiner = match kind {
        CombinerKind::Ps => CombinerSpec::PhaseShifterSum,
        CombinerKind::Idft => CombinerSpec::FullIdft,
        CombinerKind::Reduced => CombinerSpec::ReducedIdft {
            n_sub: comb.n_sub,
            m_group: comb.m_group,
        },
    };

    Ok(Experiment {
        n_list,
        theta_list_deg,
        bw_list,
        spacing_ratio: array.spacing_ratio.unwrap_or(0.5),
        signal,
        ofdm,
        combiner,
        snr_db: o.snr_db.or(file.snr_db).unwrap_or(DEFAULT_SNR),
        out: o.out.or(output.path),
        format: o.format.or(output.format),
    })
}
