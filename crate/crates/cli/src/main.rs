mod config;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use squintfree::analytic::{space_factor_at_steer, AnalyticReport, ArrayConfig};
use squintfree::sweep::{self, Chain, Point, SweepSpec};
use squintfree::txrx::{snr_format, SimReport};
use squintfree::{Error, Exec};

use config::{CombinerKind, ConfigError, Experiment, FileConfig, Format, Overrides, Shape};

const VERSION: &str = concat!("squintfree ", env!("CARGO_PKG_VERSION"));
const WORKERS_ENV: &str = "SQUINTFREE_WORKERS";

#[derive(Parser)]
#[command(name = "squintfree", version, about = "Beam-squint analysis and squint-free combining for wideband phased arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form predictions for one array and signal.
    Analyze(Common),
    /// Run one point through the receive chain.
    Simulate(Common),
    /// Run a grid of points; one CSV row per (BW, N, θ) cell.
    Sweep(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Element count (comma list for sweeps).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Steering angle in degrees (comma list for sweeps).
    #[arg(long = "theta-deg", value_delimiter = ',', allow_negative_numbers = true)]
    theta_deg: Option<Vec<f64>>,
    /// Fractional signal bandwidth (comma list for sweeps).
    #[arg(long, value_delimiter = ',')]
    bw: Option<Vec<f64>>,
    /// Per-channel SNR in dB, or "inf".
    #[arg(long = "snr-db", value_parser = parse_snr, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// OFDM subcarrier count; selects the OFDM chain.
    #[arg(long)]
    carriers: Option<usize>,
    /// Cyclic prefix length in samples.
    #[arg(long = "cp-num")]
    cp_num: Option<usize>,
    #[arg(long, value_enum)]
    combiner: Option<CombinerKind>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (analyze, sweep) or directory (simulate).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record wall time (makes outputs non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn parse_snr(s: &str) -> Result<f64, String> {
    snr_format::parse(s).ok_or_else(|| format!("expected a number or \"inf\", got {s:?}"))
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::DegenerateSteer
            | Error::SpacingAssumption(_)
            | Error::Infeasible(_)
            | Error::InvalidOrder(_)
            | Error::CombinerRequiresOfdm
            | Error::IndivisibleSizing(_)
            | Error::InsufficientGuard { .. }
            | Error::DelayTooLarge { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_workers().and_then(|_| match cli.command {
        Command::Analyze(c) => analyze(&c),
        Command::Simulate(c) => simulate(&c),
        Command::Sweep(c) => run_sweep(&c),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn init_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn experiment(c: &Common, shape: Shape) -> Result<Experiment, Failure> {
    let file = match &c.config {
        Some(p) => config::load(p)?,
        None => FileConfig::default(),
    };
    let o = Overrides {
        n: c.n.clone(),
        theta_deg: c.theta_deg.clone(),
        bw: c.bw.clone(),
        snr_db: c.snr_db,
        carriers: c.carriers,
        cp_num: c.cp_num,
        combiner: c.combiner,
        seed: c.seed,
        out: c.out.clone(),
        format: c.format,
    };
    Ok(config::resolve(file, o, shape)?)
}

fn chain(e: &Experiment) -> Chain {
    match e.ofdm {
        Some(o) => Chain::Ofdm(o),
        None => Chain::SingleCarrier,
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Runtime(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

// analyze

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    version: &'static str,
    n_elements: usize,
    spacing_ratio: f64,
    theta_deg: f64,
    bw_frac: f64,
    m_carriers: Option<usize>,
    report: &'a AnalyticReport,
}

fn analyze(c: &Common) -> Result<(), Failure> {
    let e = experiment(c, Shape::Single)?;
    let (n, theta, bw) = (e.n_list[0], e.theta_list_deg[0], e.bw_list[0]);
    let cfg = ArrayConfig::new(n, e.spacing_ratio, theta.to_radians())?;
    let m = e.ofdm.map(|o| o.m_carriers);
    let report = AnalyticReport::compute(&cfg, bw, m)?;
    let out = AnalyzeOutput {
        version: VERSION,
        n_elements: n,
        spacing_ratio: e.spacing_ratio,
        theta_deg: theta,
        bw_frac: bw,
        m_carriers: m,
        report: &report,
    };
    match e.format {
        Some(Format::Json) => write_or_print(e.out.as_deref(), &to_json(&out)),
        Some(Format::Csv) => {
            let m = m.ok_or_else(|| Failure::Config("analyze --format csv needs --carriers".into()))?;
            write_or_print(e.out.as_deref(), &tone_table(&cfg, m, bw)?)
        }
        None => {
            write_or_print(None, &summary(&out))?;
            match e.out.as_deref() {
                Some(p) => write_or_print(Some(p), &to_json(&out)),
                None => Ok(()),
            }
        }
    }
}

/// Predicted per-tone array gain: `tone,f_ratio,space_factor,space_factor_db`.
fn tone_table(cfg: &ArrayConfig, m: usize, bw: f64) -> Result<String, Failure> {
    let mut s = String::from("tone,f_ratio,space_factor,space_factor_db\n");
    for k in 0..m {
        let f = 1.0 + (k as f64 - (m / 2) as f64) * bw / m as f64;
        let sf = space_factor_at_steer(cfg, f)?;
        let _ = writeln!(s, "{k},{f},{sf},{}", 20.0 * sf.log10());
    }
    Ok(s)
}

fn summary(o: &AnalyzeOutput) -> String {
    let r = o.report;
    let mut s = String::new();
    let _ = writeln!(s, "array            N={}  d/λ₀={}  θ₀={}°", o.n_elements, o.spacing_ratio, o.theta_deg);
    let _ = writeln!(s, "signal BW        {:.2}%", 100.0 * o.bw_frac);
    let _ = writeln!(s, "coherent BW      {:.3} ({:.1}%)", r.coherent_bw, 100.0 * r.coherent_bw);
    let _ = writeln!(s, "ISI BW limit     {:.3}", r.isi_bw_limit);
    let _ = writeln!(s, "nulls f/f₀       {:.4}, {:.4}", r.null_fractions.0, r.null_fractions.1);
    let _ = writeln!(s, "max spread       {:.3} carrier cycles", r.max_delay_spread);
    let _ = writeln!(s, "EIRP gain        {:.2} dB", r.eirp_gain_db);
    let _ = writeln!(s, "RX SNR gain      {:.2} dB", r.rx_snr_gain_db);
    if o.bw_frac > r.coherent_bw {
        let _ = writeln!(s, "note             signal wider than the coherent bandwidth");
    }
    if let Some(b) = &r.tone_bounds {
        let tone = |t: Option<usize>| t.map_or("outside band".to_string(), |t| t.to_string());
        let _ = writeln!(s, "faded tones      {} / {}", tone(b.null_low_tone), tone(b.null_high_tone));
        let _ = writeln!(s, "3 dB tone span   {:.1}", b.tones_3db);
    }
    if let Some(z) = &r.reduced_sizing {
        let _ = writeln!(
            s,
            "reduced sizing   {}x{} (sub-array {} elements, {} tones per group)",
            z.n_groups, z.m_groups, z.n_sub, z.m_group
        );
    }
    s
}

// simulate

#[derive(Serialize)]
struct PointEcho {
    n_elements: usize,
    spacing_ratio: f64,
    theta_deg: f64,
    bw_frac: f64,
    base_seed: u64,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    version: &'static str,
    point: PointEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
    report: &'a SimReport,
}

fn simulate(c: &Common) -> Result<(), Failure> {
    let e = experiment(c, Shape::Single)?;
    let point = Point {
        n_elements: e.n_list[0],
        spacing_ratio: e.spacing_ratio,
        theta_deg: e.theta_list_deg[0],
        bw_frac: e.bw_list[0],
    };
    let start = Instant::now();
    let report = sweep::run_point(&point, &e.signal, &chain(&e), e.snr_db, &e.combiner, Exec::default())?;
    let wall = start.elapsed().as_secs_f64();
    let out = SimulateOutput {
        version: VERSION,
        point: PointEcho {
            n_elements: point.n_elements,
            spacing_ratio: point.spacing_ratio,
            theta_deg: point.theta_deg,
            bw_frac: point.bw_frac,
            base_seed: e.signal.seed,
        },
        wall_time_s: c.timing.then_some(wall),
        report: &report,
    };
    let json = to_json(&out);
    match e.out.as_deref() {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|err| io_err(dir, err))?;
            write_or_print(Some(&dir.join("report.json")), &json)?;
            write_or_print(Some(&dir.join("constellation.csv")), &constellation_csv(&report))?;
            if let Some(t) = tones_csv(&report) {
                write_or_print(Some(&dir.join("tones.csv")), &t)?;
            }
            let line = format!(
                "overall EVM {:.2} dB, SSIR {:.2} dB -> {}\n",
                report.overall_evm_db,
                report.overall_ssir_db,
                dir.display()
            );
            write_or_print(None, &line)
        }
        None => match e.format.unwrap_or(Format::Json) {
            Format::Json => write_or_print(None, &json),
            Format::Csv => write_or_print(None, &tones_csv(&report).unwrap_or_else(|| constellation_csv(&report))),
        },
    }
}

fn tones_csv(r: &SimReport) -> Option<String> {
    let tones = r.per_tone.as_ref()?;
    let mut s = String::from("tone,evm_db,ssir_db\n");
    for t in tones {
        let _ = writeln!(s, "{},{},{}", t.tone_index, t.evm_db, t.ssir_db);
    }
    Some(s)
}

fn constellation_csv(r: &SimReport) -> String {
    let mut s = String::from("re,im,ref_re,ref_im\n");
    for p in &r.constellation {
        let _ = writeln!(s, "{},{},{},{}", p.re, p.im, p.ref_re, p.ref_im);
    }
    s
}

// sweep

#[derive(Serialize)]
struct SweepOutput<'a> {
    version: &'static str,
    experiment: &'a Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
    grid: &'a sweep::SweepGrid,
}

fn run_sweep(c: &Common) -> Result<(), Failure> {
    let e = experiment(c, Shape::Grid)?;
    let spec = SweepSpec {
        n_list: e.n_list.clone(),
        theta_list_deg: e.theta_list_deg.clone(),
        bw_list: e.bw_list.clone(),
        spacing_ratio: e.spacing_ratio,
        signal: e.signal,
        chain: chain(&e),
        snr_db: e.snr_db,
        combiner: e.combiner.clone(),
    };
    let start = Instant::now();
    let grid = sweep::run_sweep(&spec, Exec::default())?;
    let wall = start.elapsed().as_secs_f64();
    let text = match e.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            if c.timing {
                eprintln!("wall time {wall:.3} s");
            }
            grid.to_csv()
        }
        Format::Json => to_json(&SweepOutput {
            version: VERSION,
            experiment: &e,
            wall_time_s: c.timing.then_some(wall),
            grid: &grid,
        }),
    };
    write_or_print(e.out.as_deref(), &text)
}
