use std::process::{Command, Output};

use squintfree::sweep::SweepGrid;
use squintfree::txrx::{self, RunConfig, SimReport};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squintfree"))
        .args(args)
        .env_remove("SQUINTFREE_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_prints_predictions() {
    let o = run(&["analyze", "--n", "16", "--theta-deg", "30", "--bw", "0.2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("coherent BW      0.221"), "{text}");
    assert!(text.contains("ISI BW limit     0.250"));

    let o = run(&["analyze", "--n", "64", "--bw", "0.2", "--carriers", "128", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["reduced_sizing"]["n_groups"], 4);
    assert_eq!(v["report"]["reduced_sizing"]["m_groups"], 4);
    assert_eq!(v["report"]["tone_bounds"]["null_low_tone"], 24);

    let o = run(&["analyze", "--n", "8", "--carriers", "16", "--format", "csv"]);
    let csv = stdout(&o);
    assert!(csv.starts_with("tone,f_ratio,space_factor,space_factor_db\n"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn exit_codes() {
    let o = run(&["analyze", "--theta-deg", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broadside"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[signal]\nbw = 0.2\n").unwrap();
    let o = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("bw"), "{err}");

    assert_eq!(run(&["simulate", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--combiner", "idft"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--n", "4,8"]).status.code(), Some(2));

    // Unwritable output is a runtime failure.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = run(&["simulate", "--n", "2", "--snr-db", "inf", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "simulate", "--n", "16", "--theta-deg", "25", "--bw", "0.15", "--carriers", "32", "--combiner", "reduced",
        "--snr-db", "18", "--seed", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let report: SimReport = serde_json::from_value(v["report"].clone()).unwrap();
    let c: RunConfig = report.config.clone();
    let again = txrx::run_ofdm(&c.array, &c.signal, &c.ofdm.unwrap(), c.snr_db, &c.combiner).unwrap();
    assert_eq!(again, report);

    let tones = std::fs::read_to_string(out.join("tones.csv")).unwrap();
    assert!(tones.starts_with("tone,evm_db,ssir_db\n"));
    assert_eq!(tones.lines().count(), 33);
    let cons = std::fs::read_to_string(out.join("constellation.csv")).unwrap();
    assert!(cons.starts_with("re,im,ref_re,ref_im\n"));
}

#[test]
fn timing_is_opt_in() {
    let plain = stdout(&run(&["simulate", "--n", "2", "--snr-db", "inf"]));
    assert!(!plain.contains("wall_time_s"));
    let timed = stdout(&run(&["simulate", "--n", "2", "--snr-db", "inf", "--timing"]));
    assert!(timed.contains("wall_time_s"));
}

#[test]
fn sweep_trends() {
    // SSIR falls with N and with θ₀, and each wider band sits below the
    // narrower one. Cells near the ~58 dB pulse-truncation floor wander by a
    // few tenths of a dB with the per-point seed.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "snr_db = \"inf\"\n[signal]\nn_symbols = 2000\n[sweep]\nn_list = [4, 8, 16, 32]\ntheta_list_deg = [10.0, 30.0, 50.0]\nbw_list = [0.05, 0.1, 0.2]\n",
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let grid: SweepGrid = serde_json::from_value(v["grid"].clone()).unwrap();
    let ssir = |b, n, t| grid.cell(b, n, t).ssir_db.unwrap();
    for b in 0..3 {
        for n in 0..4 {
            for t in 0..3 {
                if n > 0 {
                    assert!(ssir(b, n, t) <= ssir(b, n - 1, t) + 0.5);
                }
                if t > 0 {
                    assert!(ssir(b, n, t) <= ssir(b, n, t - 1) + 0.5);
                }
                if b > 0 {
                    assert!(ssir(b, n, t) <= ssir(b - 1, n, t) + 0.5);
                }
            }
        }
    }
    let csv = stdout(&run(&["sweep", "--config", cfg.to_str().unwrap()]));
    assert!(csv.starts_with("n_elements,theta_deg,bw_frac,ssir_db,evm_db\n"));
    assert_eq!(csv.lines().count(), 37);
}
