// Acceptance gate. Runs every criterion at its stated tolerance, prints one
// PASS/FAIL line each, and exits nonzero if any failed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use squintfree::analytic::{
    combine_evm, coherent_bandwidth, ofdm_tone_bounds, space_factor, AnalyticReport, ArrayConfig, BandwidthMode,
};
use squintfree::combine::{phase_sum, CombinerSpec};
use squintfree::dsp::{self, ComplexSignal, SignalSpec};
use squintfree::sweep::{run_sweep, Chain, SweepSpec};
use squintfree::txrx::{self, OfdmSpec, SimReport, ToneGrid};
use squintfree::wavefront::{delay_step_samples, phase_align, Wavefront};
use squintfree::Exec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_time(o: Outcome, took: Duration, limit: Option<Duration>) -> Outcome {
    match limit {
        Some(l) if took > l => outcome(false, format!("{}; took {:.1} s, limit {:.0} s", o.detail, took.as_secs_f64(), l.as_secs_f64())),
        _ => o,
    }
}

// Direct N-term phasor sum, independent of the closed form.
fn direct_sf(n: usize, spacing: f64, steer: f64, theta: f64, f: f64) -> f64 {
    let arg = 2.0 * PI * spacing * (f * theta.sin() - steer.sin());
    let s: Complex64 = (0..n).map(|k| Complex64::from_polar(1.0, k as f64 * arg)).sum();
    s.norm() / n as f64
}

fn closed_form_matches_direct_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=128);
        let steer = rng.gen_range(-1.5..1.5);
        let theta = rng.gen_range(-1.5..1.5);
        let f = rng.gen_range(0.5..=1.5);
        let cfg = ArrayConfig::new(n, 0.5, steer).unwrap();
        worst = worst.max((space_factor(&cfg, theta, f) - direct_sf(n, 0.5, steer, theta, f)).abs());
    }
    outcome(worst <= 1e-10, format!("max |closed form − direct sum| = {worst:.2e} over 200 cases"))
}

fn coherent_bandwidth_grid() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [8, 16, 32, 64, 128] {
        // 90° itself is outside the open steering range; the limit is taken
        // a micro-degree short of it.
        for deg in [10.0, 30.0, 45.0, 60.0, 90.0 - 1e-6] {
            let cfg = ArrayConfig::half_wave(n, deg).unwrap();
            let a = coherent_bandwidth(&cfg, BandwidthMode::Approx).unwrap();
            let m = coherent_bandwidth(&cfg, BandwidthMode::Numeric).unwrap();
            worst = worst.max(((a - m) / m).abs());
        }
    }
    let c16 = coherent_bandwidth(&ArrayConfig::half_wave(16, 30.0).unwrap(), BandwidthMode::Approx).unwrap();
    outcome(
        worst < 0.05 && (c16 - 0.22).abs() <= 0.005,
        format!("max relative gap {:.2}%, (16, 30°) = {:.2}%", 100.0 * worst, 100.0 * c16),
    )
}

fn keystone_tone_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let len = 1024;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=128);
        let spacing = rng.gen_range(0.25..=0.5);
        let steer = rng.gen_range(-80f64..80.0).to_radians();
        let bw = rng.gen_range(0.01..0.5);
        let os = [2usize, 4, 8][rng.gen_range(0..3)];
        let bin: i64 = rng.gen_range(-(len as i64) / 2..len as i64 / 2);
        let cps = bin as f64 / len as f64;
        let cfg = ArrayConfig::new(n, spacing, steer).unwrap();
        let spec = SignalSpec {
            fractional_bandwidth: bw,
            oversample: os,
            ..SignalSpec::default()
        };
        let tx = ComplexSignal::new(
            (0..len).map(|t| Complex64::from_polar(1.0, 2.0 * PI * cps * t as f64)).collect(),
            os,
        );
        let step = delay_step_samples(&cfg, bw, os as f64);
        let streams = Wavefront::periodic(&tx, &cfg, step).streams(0..n, &spec, Exec::Sequential);
        let sum = phase_sum(&phase_align(streams));
        let predicted = space_factor(&cfg, steer, 1.0 + cps * bw * os as f64);
        for v in &sum.samples {
            worst = worst.max((v.norm() - predicted).abs());
        }
    }
    outcome(worst <= 1e-6, format!("max |simulated − |SF|| = {worst:.2e} over 50 configurations"))
}

fn sc(n: usize, bw: f64, snr: f64) -> SimReport {
    let cfg = ArrayConfig::half_wave(n, 30.0).unwrap();
    txrx::run_single_carrier(&cfg, &SignalSpec::with_bandwidth(bw), snr, &CombinerSpec::PhaseShifterSum).unwrap()
}

fn single_carrier_points() -> Outcome {
    let narrow = sc(8, 0.01, 20.0);
    let wide = sc(8, 0.2, 20.0);
    let degradation = wide.overall_evm_db - narrow.overall_evm_db;
    outcome(
        (narrow.overall_evm_db + 29.0).abs() <= 1.5 && (degradation - 3.7).abs() <= 1.5,
        format!(
            "BW 1%: EVM {:.2} dB (target −29 ± 1.5); BW 20%: EVM {:.2} dB, SSIR {:.2} dB, degradation {:.2} dB (target 3.7 ± 1.5)",
            narrow.overall_evm_db, wide.overall_evm_db, wide.overall_ssir_db, degradation
        ),
    )
}

fn ofdm_run(n: usize, m: usize, k: usize, snr: f64, comb: &CombinerSpec) -> SimReport {
    let cfg = ArrayConfig::half_wave(n, 30.0).unwrap();
    txrx::run_ofdm(&cfg, &SignalSpec::with_bandwidth(0.2), &OfdmSpec::new(m, k), snr, comb).unwrap()
}

fn ofdm_point() -> Outcome {
    let r = ofdm_run(32, 64, 1000, f64::INFINITY, &CombinerSpec::PhaseShifterSum);
    let center = r.center_tone_evm_db.unwrap();
    outcome(
        (center + 29.8).abs() <= 1.5 && (r.overall_evm_db + 25.4).abs() <= 1.5,
        format!(
            "center tone {:.2} dB (target −29.8 ± 1.5), overall {:.2} dB (target −25.4 ± 1.5)",
            center, r.overall_evm_db
        ),
    )
}

fn deep_fades() -> Outcome {
    let r = ofdm_run(64, 128, 256, f64::INFINITY, &CombinerSpec::PhaseShifterSum);
    let tones = r.per_tone.unwrap();
    let argmin = |range: std::ops::Range<usize>| {
        range
            .min_by(|&a, &b| tones[a].ssir_db.total_cmp(&tones[b].ssir_db))
            .unwrap()
    };
    let (lo, hi) = (argmin(0..64), argmin(64..128));
    let bounds = ofdm_tone_bounds(&ArrayConfig::half_wave(64, 30.0).unwrap(), 128, 0.2).unwrap();
    let near = |t: usize, target: usize| (t as i64 - target as i64).abs() <= 1;
    let predicted_ok = bounds.null_low_tone == Some(24) && bounds.null_high_tone == Some(104);
    outcome(
        predicted_ok && near(lo, 24) && near(hi, 104),
        format!(
            "SSIR minima at tones {lo} and {hi} ({:.1} / {:.1} dB); predicted {:?} / {:?}",
            tones[lo].ssir_db, tones[hi].ssir_db, bounds.null_low_tone, bounds.null_high_tone
        ),
    )
}

fn ofdm_improvement_grid() -> Outcome {
    let spec = |chain| SweepSpec {
        n_list: vec![4, 8, 16, 32, 64],
        theta_list_deg: vec![10.0, 20.0, 30.0, 45.0, 60.0],
        bw_list: vec![0.2],
        spacing_ratio: 0.5,
        signal: SignalSpec::with_bandwidth(0.2),
        chain,
        snr_db: f64::INFINITY,
        combiner: CombinerSpec::PhaseShifterSum,
    };
    let sc = run_sweep(&spec(Chain::SingleCarrier), Exec::default()).unwrap();
    let of = run_sweep(&spec(Chain::Ofdm(OfdmSpec::new(64, 1000))), Exec::default()).unwrap();
    let mut gaps: Vec<f64> = sc
        .cells
        .iter()
        .zip(&of.cells)
        .map(|(a, b)| b.ssir_db.unwrap() - a.ssir_db.unwrap())
        .collect();
    gaps.sort_by(f64::total_cmp);
    let median = gaps[gaps.len() / 2];
    let isi_free = of.cells.iter().filter(|c| c.ssir_db.unwrap() >= 100.0).count();
    outcome(
        (median - 15.0).abs() <= 4.0,
        format!(
            "median OFDM − SC SSIR {median:.1} dB (target 15 ± 4); {isi_free}/25 OFDM cells free of interference"
        ),
    )
}

fn full_idft_flatness() -> Outcome {
    let full = ofdm_run(64, 128, 4096, 20.0, &CombinerSpec::FullIdft);
    let ps = ofdm_run(64, 128, 4096, 20.0, &CombinerSpec::PhaseShifterSum);
    let spread = full.tone_evm_spread().unwrap();
    let center = ps.center_tone_evm_db.unwrap();
    outcome(
        spread <= 0.5 && (full.overall_evm_db - center).abs() <= 0.5,
        format!(
            "tone EVM spread {spread:.2} dB; overall {:.2} dB vs phase-sum center tone {center:.2} dB",
            full.overall_evm_db
        ),
    )
}

fn reduced_idft() -> Outcome {
    let cfg = ArrayConfig::half_wave(64, 30.0).unwrap();
    let sizing = AnalyticReport::compute(&cfg, 0.2, Some(128)).unwrap().reduced_sizing.unwrap();
    let r = ofdm_run(64, 128, 4096, 20.0, &CombinerSpec::auto_reduced());
    let ripple = r.tone_evm_spread().unwrap();
    let four = (sizing.n_groups, sizing.m_groups) == (4, 4);
    outcome(
        four && (2.0..=4.0).contains(&ripple),
        format!(
            "sizing {}x{}; per-tone EVM ripple {ripple:.2} dB (target 2 to 4)",
            sizing.n_groups, sizing.m_groups
        ),
    )
}

fn evm_combination_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(1..=64);
        let deg = rng.gen_range(5.0..60.0);
        let bw = rng.gen_range(0.01..0.25);
        let snr = rng.gen_range(0.0..30.0);
        let cfg = ArrayConfig::half_wave(n, deg).unwrap();
        let spec = SignalSpec {
            n_symbols: 4000,
            seed: rng.gen(),
            ..SignalSpec::with_bandwidth(bw)
        };
        let r = txrx::run_single_carrier(&cfg, &spec, snr, &CombinerSpec::PhaseShifterSum).unwrap();
        let predicted = combine_evm(snr + 10.0 * (n as f64).log10(), r.overall_ssir_db);
        worst = worst.max((predicted - r.overall_evm_db).abs());
    }
    outcome(worst <= 1.0, format!("max |predicted − measured EVM| = {worst:.2} dB over 10 configurations"))
}

fn cli(args: &[&str], workers: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_squintfree"));
    cmd.args(args);
    cmd.env_remove("SQUINTFREE_WORKERS");
    if let Some(w) = workers {
        cmd.env("SQUINTFREE_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_default()
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // OFDM round trip.
    let o = OfdmSpec::new(64, 50);
    let grid = ToneGrid::random(16, &o, 1).unwrap();
    let back = txrx::ofdm_demodulate(&txrx::ofdm_modulate(&grid, &o).unwrap(), &o).unwrap();
    let rt = grid.data.iter().zip(&back.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ok &= rt <= 1e-10;
    notes.push(format!("round trip {rt:.1e}"));

    // A delay the CP covers is a pure phase ramp on every tone.
    let sig = txrx::ofdm_modulate(&grid, &o).unwrap();
    let mut ramp_err: f64 = 0.0;
    for d in 0..=o.cp_len() {
        let rx = txrx::ofdm_demodulate(&dsp::fractional_delay(&sig, d as f64).unwrap(), &o).unwrap();
        for k in 0..o.n_ofdm_symbols {
            for m in 0..64 {
                let r = Complex64::from_polar(1.0, -2.0 * PI * (m as f64 - 32.0) * d as f64 / 64.0);
                ramp_err = ramp_err.max((rx.row(k)[m] - grid.row(k)[m] * r).norm());
            }
        }
    }
    ok &= ramp_err <= 1e-9;
    notes.push(format!("CP phase ramp {ramp_err:.1e}"));

    // Fractional delays compose.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = ComplexSignal::new(
        (0..256).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        1,
    );
    let mut comp: f64 = 0.0;
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let ab = dsp::fractional_delay(&dsp::fractional_delay(&x, a).unwrap(), b).unwrap();
        let direct = dsp::fractional_delay(&x, a + b).unwrap();
        comp = comp.max(ab.samples.iter().zip(&direct.samples).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max));
    }
    ok &= comp <= 1e-9;
    notes.push(format!("delay composition {comp:.1e}"));

    // EVM is blind to a complex gain.
    let reference: Vec<Complex64> = grid.tone(3);
    let rx: Vec<Complex64> = reference.iter().enumerate().map(|(i, r)| r + Complex64::new(0.01 * (i % 7) as f64, -0.02)).collect();
    let base = dsp::measure_evm(&rx, &reference, false).unwrap().evm_db;
    let mut inv: f64 = 0.0;
    for _ in 0..20 {
        let c = Complex64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(-PI..PI));
        let scaled: Vec<Complex64> = rx.iter().map(|v| v * c).collect();
        inv = inv.max((dsp::measure_evm(&scaled, &reference, false).unwrap().evm_db - base).abs());
    }
    ok &= inv <= 1e-9;
    notes.push(format!("scalar-fit invariance {inv:.1e}"));

    // CLI outputs are byte-identical for a fixed seed, whatever the worker count.
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("exp.toml");
    std::fs::write(
        &cfg_path,
        "snr_db = 15.0\n[array]\nn_elements = 16\ntheta_deg = 40.0\n[signal]\nbw_frac = 0.2\nseed = 7\n[ofdm]\nm_carriers = 32\nn_ofdm_symbols = 64\n[combiner]\nkind = \"idft\"\n",
    )
    .unwrap();
    let cfg_arg = cfg_path.to_str().unwrap();
    let mut same = true;
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, workers) in dirs.iter().zip([None, None, Some("1")]) {
        let out = cli(&["simulate", "--config", cfg_arg, "--out", dir.to_str().unwrap()], workers);
        same &= out.status.success();
    }
    for name in ["report.json", "tones.csv", "constellation.csv"] {
        let a = read(&dirs[0], name);
        same &= !a.is_empty() && dirs[1..].iter().all(|d| read(d, name) == a);
    }
    let sweep_args = ["sweep", "--n", "4,16", "--theta-deg", "10,45", "--bw", "0.1,0.2", "--seed", "5"];
    let s1 = cli(&sweep_args, None);
    let s2 = cli(&sweep_args, Some("1"));
    let mut json_args = sweep_args.to_vec();
    json_args.extend(["--format", "json"]);
    let j1 = cli(&json_args, None);
    let j2 = cli(&json_args, None);
    same &= s1.status.success() && !s1.stdout.is_empty() && s1.stdout == s2.stdout;
    same &= j1.status.success() && j1.stdout == j2.stdout;
    let a1 = cli(&["analyze", "--n", "64", "--carriers", "128", "--format", "json"], None);
    let a2 = cli(&["analyze", "--n", "64", "--carriers", "128", "--format", "json"], None);
    same &= a1.status.success() && a1.stdout == a2.stdout;

    // A simulate run and the matching sweep cell agree exactly.
    let point = ["--n", "16", "--theta-deg", "40", "--bw", "0.2", "--seed", "7", "--snr-db", "inf"];
    let sim = cli(&[&["simulate"][..], &point[..]].concat(), None);
    let cell = cli(&[&["sweep"][..], &point[..]].concat(), None);
    let report: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap_or_default();
    let sim_ssir = report["report"]["overall_ssir_db"].as_f64();
    let csv = String::from_utf8_lossy(&cell.stdout);
    let cell_ssir = csv.lines().nth(1).and_then(|l| l.split(',').nth(3)).and_then(|v| v.parse::<f64>().ok());
    same &= sim_ssir.is_some() && sim_ssir == cell_ssir;
    ok &= same;
    notes.push(format!("CLI determinism {}", if same { "byte-identical" } else { "MISMATCH" }));

    outcome(ok, notes.join(", "))
}

type Check = fn() -> Outcome;

fn main() {
    let checks: [(u32, &str, Check, Option<u64>); 11] = [
        (1, "closed form vs direct sum", closed_form_matches_direct_sum, Some(1)),
        (2, "coherent bandwidth", coherent_bandwidth_grid, Some(1)),
        (3, "keystone tone sum", keystone_tone_sum, Some(10)),
        (4, "single-carrier points", single_carrier_points, Some(60)),
        (5, "OFDM point", ofdm_point, Some(60)),
        (6, "deep-fade tones", deep_fades, None),
        (7, "OFDM vs single-carrier grid", ofdm_improvement_grid, Some(600)),
        (8, "full IDFT flatness", full_idft_flatness, None),
        (9, "reduced IDFT", reduced_idft, None),
        (10, "EVM combination law", evm_combination_law, None),
        (11, "property suites", property_suites, None),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check, limit) in checks {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = within_time(check(), start.elapsed(), limit.map(Duration::from_secs));
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{id:>2}] {name}: {} ({:.2} s)", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
