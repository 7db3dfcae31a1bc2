use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn spinbath(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_value(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("{key} missing from {}", path.display()))
        .to_owned()
}

#[test]
fn simulate_writes_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &[
            "simulate", "--case", "1", "--n", "200", "--seed", "42", "--steps", "321",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im,abs2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 321);
    let first: Vec<f64> = rows[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[3] - 1.0).abs() < 1e-12);
    let summary = dir.path().join("summary.txt");
    assert_eq!(summary_value(&summary, "seed"), "42");
    assert_ne!(summary_value(&summary, "decoherence_time"), "none");
}

#[test]
fn case2_never_decoheres() {
    let dir = TempDir::new().unwrap();
    for n in ["1", "3", "40"] {
        let o = spinbath(
            &["simulate", "--case", "2", "--n", n, "--j", "1"],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(
            summary_value(&dir.path().join("summary.txt"), "decoherence_time"),
            "none"
        );
    }
}

#[test]
fn usage_errors_exit_1_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &["simulate", "--case", "3", "--n", "4", "--p", "10"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("p exceeds N"), "{}", stderr(&o));
    let o = spinbath(&["simulate", "--case", "7"], dir.path());
    assert_eq!(code(&o), 1);
    let o = spinbath(&["sweep", "--param", "q", "--values", "1"], dir.path());
    assert_eq!(code(&o), 1);
    let o = spinbath(
        &["sweep", "--case", "1", "--param", "p", "--values", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("param"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = spinbath(&["simulate", "--n", "2"], &blocker.join("sub"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn missing_config_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &["simulate", "--config", "/nonexistent/run.toml"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_passes_within_oracle_capacity() {
    let dir = TempDir::new().unwrap();
    for case in ["1", "2", "3"] {
        let o = spinbath(
            &[
                "verify", "--case", case, "--n", "8", "--seed", "3", "--steps", "200",
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "case {case}: {}", stderr(&o));
        let report = dir.path().join("verify.txt");
        assert_eq!(summary_value(&report, "status"), "pass");
        let dev: f64 = summary_value(&report, "max_abs_deviation").parse().unwrap();
        assert!(dev <= 1e-10);
    }
}

#[test]
fn verify_with_random_phases() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &[
            "verify",
            "--case",
            "2",
            "--n",
            "5",
            "--phase-mode",
            "random",
            "--steps",
            "100",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_rejects_large_baths() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(&["verify", "--n", "20"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("N <= 14"), "{}", stderr(&o));
}

#[test]
fn verify_detects_corruption() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &["verify", "--n", "8", "--steps", "50", "--corrupt"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert_eq!(
        summary_value(&dir.path().join("verify.txt"), "status"),
        "fail"
    );
}

#[test]
fn strict_case2_form_fails_verification() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &[
            "verify",
            "--case",
            "2",
            "--n",
            "3",
            "--steps",
            "50",
            "--strict-paper",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn singleton_sweep_matches_simulate() {
    let sim = TempDir::new().unwrap();
    let sweep = TempDir::new().unwrap();
    let common = ["--case", "3", "--n", "12", "--seed", "5"];
    let mut a = vec!["simulate", "--p", "8"];
    a.extend(common);
    assert_eq!(code(&spinbath(&a, sim.path())), 0);
    let mut b = vec!["sweep", "--param", "p", "--values", "8"];
    b.extend(common);
    assert_eq!(code(&spinbath(&b, sweep.path())), 0);
    for f in ["curve.csv", "summary.txt"] {
        assert_eq!(
            fs::read(sim.path().join(f)).unwrap(),
            fs::read(sweep.path().join("p_8").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_p_damps_fluctuations() {
    let dir = TempDir::new().unwrap();
    let o = spinbath(
        &[
            "sweep", "--case", "3", "--n", "10", "--seed", "42", "--param", "p", "--values",
            "4,8,10",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for p in [4, 8, 10] {
        let csv = fs::read_to_string(dir.path().join(format!("p_{p}/curve.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 2001);
    }
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rms: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(rms[0] > rms[1] && rms[1] > rms[2], "{rms:?}");
}

#[test]
fn ensemble_sweep_over_n_orders_the_tail() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("late.toml");
    fs::write(
        &cfg,
        "schema_version = 1\n[grid]\nt_start = 500.0\nt_max = 520.0\nsteps = 41\n",
    )
    .unwrap();
    let o = spinbath(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--samples",
            "400",
            "--param",
            "n",
            "--values",
            "5,10",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tail_mean = |n: usize| {
        let csv = fs::read_to_string(dir.path().join(format!("n_{n}/ensemble.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,mean,variance,std_error"));
        let m: Vec<f64> = lines
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(m.len(), 41);
        m.iter().sum::<f64>() / m.len() as f64
    };
    let (m5, m10) = (tail_mean(5), tail_mean(10));
    let (e5, e10) = ((2.0_f64 / 3.0).powi(5), (2.0_f64 / 3.0).powi(10));
    assert!(m5 > m10);
    assert!((m5 / e5 - 1.0).abs() < 0.25, "{m5} vs {e5}");
    assert!((m10 / e10 - 1.0).abs() < 0.5, "{m10} vs {e10}");
}

#[test]
fn general_case_from_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("general.toml");
    fs::write(
        &cfg,
        r#"
schema_version = 1
case = "general"
n = 3

[system]
a = [0.6, 0.0]
b = [0.0, 0.8]

[sampling]
seed = 11
phase_mode = "random"

[grid]
t_max = 20.0
steps = 100

[observable]
system = { uu = 1.0, dd = 0.5, ud = [0.3, -0.2] }
particles = [
    { uu = 0.0, dd = 0.0, ud = [0.5, 0.0] },
    { uu = 1.0, dd = -1.0 },
    { uu = 1.0, dd = 1.0, ud = [0.1, 0.1] },
]
"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let o = spinbath(&["simulate", "--config", c], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(dir.path().join("curve.csv"))
            .unwrap()
            .lines()
            .count(),
        101
    );
    let o = spinbath(&["verify", "--config", c], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(["envelope", "--n", "4"])
        .env("SPINBATH_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = dir.path().join("envelope.txt");
    let min: f64 = summary_value(&report, "min_product").parse().unwrap();
    let scan_min: f64 = summary_value(&report, "scan_min").parse().unwrap();
    assert!(min <= scan_min);
    assert_eq!(
        summary_value(&report, "lower_bound"),
        "factor-wise, not simultaneous"
    );
}

#[test]
fn recurrence_of_a_common_coupling() {
    // Odd N: Re r1(pi/g) = -1, so the first return is the full period.
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("pair.toml");
    fs::write(
        &cfg,
        "schema_version = 1\n[grid]\nt_max = 10.0\nsteps = 10001\n\
         [[env]]\nalpha = [0.6, 0.0]\nbeta = [0.8, 0.0]\ng = 1.0\n\
         [[env]]\nalpha = [0.8, 0.0]\nbeta = [0.0, 0.6]\ng = 1.0\n\
         [[env]]\nalpha = [0.5, 0.5]\nbeta = [0.5, -0.5]\ng = 1.0\n",
    )
    .unwrap();
    let o = spinbath(
        &[
            "recurrence",
            "--config",
            cfg.to_str().unwrap(),
            "--recurrence-threshold",
            "0.99",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = dir.path().join("recurrence.txt");
    let peak: f64 = summary_value(&report, "peak").parse().unwrap();
    assert!((peak - std::f64::consts::TAU).abs() <= 1e-3, "{peak}");
}

#[test]
fn no_recurrence_for_a_large_random_bath() {
    let dir = TempDir::new().unwrap();
    let t_max = (100.0 * std::f64::consts::TAU).to_string();
    let o = spinbath(
        &[
            "recurrence",
            "--n",
            "200",
            "--seed",
            "1",
            "--t-max",
            &t_max,
            "--steps",
            "20001",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        summary_value(&dir.path().join("recurrence.txt"), "onset"),
        "none"
    );
}
