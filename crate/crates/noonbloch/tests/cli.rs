use std::fs;
use std::path::Path;
use std::process::Command;

use noonbloch::run::compute;
use noonbloch::table::{read_density, read_gamma, read_matrix, read_period, read_report};
use noonbloch::verify::CheckStatus;
use noonbloch::{parse_config, verify};

const BIN: &str = env!("CARGO_BIN_EXE_noonbloch");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn defaults_verify_cleanly() {
    let cfg = parse_config("N = 2\nsite_a = 0\nsite_b = 1\nphase = 0.0\n").unwrap();
    let report = verify(&cfg);
    assert!(report.passed(), "{report}");
    assert!(report.checks.iter().all(|c| c.status == CheckStatus::Pass), "{report}");
}

#[test]
fn impossible_tolerance_fails_the_report() {
    let cfg = parse_config("N = 2\nsite_a = 0\nsite_b = 1\n[tolerances]\node = 1e-30\n").unwrap();
    let report = verify(&cfg);
    assert!(!report.passed());
    assert!(report.get("ode").unwrap().status.is_failure());
    assert_eq!(report.get("revival").unwrap().status, CheckStatus::Pass);
}

#[test]
fn large_photon_numbers_skip_the_multinomial_checks() {
    let cfg = parse_config("N = 10\nsite_a = 0\nsite_b = 1\nB = 0.5\n").unwrap();
    let report = verify(&cfg);
    assert!(report.passed(), "{report}");
    for name in ["oracle", "density", "normalization"] {
        assert_eq!(report.get(name).unwrap().status, CheckStatus::Skipped("N>4".into()));
    }
    for name in ["unitarity", "revival", "ode", "analytic_density_sum", "period_law"] {
        assert_eq!(report.get(name).unwrap().status, CheckStatus::Pass, "{name}");
    }
}

#[test]
fn every_table_reads_back() {
    let cfg = parse_config(
        "N = 2\nsite_a = 0\nsite_b = 1\nphase = 0.5\nsamples = 256\n\
         observables = [\"density\", \"single_density\", \"correlation(1)\", \"gamma(1)\", \"period\", \"verify\"]\n",
    )
    .unwrap();
    let out = compute(&cfg).unwrap();
    let names: Vec<String> = out.artifacts.iter().map(|a| a.path.display().to_string()).collect();
    assert_eq!(names.len(), 5 + 256);
    for art in &out.artifacts {
        let bytes = &art.bytes[..];
        let name = art.path.to_string_lossy();
        if name.starts_with("correlation") {
            let m = read_matrix(bytes).unwrap();
            assert_eq!((m.p, m.q, m.sites.len()), (1, 1, cfg.window.len()));
        } else if name.ends_with("density.csv") {
            assert_eq!(read_density(bytes).unwrap().len(), 256 * cfg.window.len());
        } else if name == "gamma_p1.csv" {
            assert_eq!(read_gamma(bytes).unwrap().len(), 256);
        } else if name == "period.csv" {
            assert!(read_period(bytes).unwrap().relative_error < 0.01);
        } else {
            assert_eq!(name, "verify.csv");
            assert!(read_report(bytes).unwrap().passed());
        }
    }
}

#[test]
fn run_writes_tables_and_honours_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &format!(
            "N = 2\nsite_a = 0\nsite_b = 1\nobservables = [\"gamma\", \"period\"]\noutput_dir = \"{}\"\n",
            tmp.path().join("from_config").display()
        ),
    );

    let status = Command::new(BIN).arg("run").arg(&cfg).status().unwrap();
    assert!(status.success());
    assert!(tmp.path().join("from_config/period.csv").is_file());

    let env_dir = tmp.path().join("from_env");
    let status = Command::new(BIN).arg("run").arg(&cfg).env("NOONBLOCH_OUTPUT_DIR", &env_dir).status().unwrap();
    assert!(status.success());
    assert!(env_dir.join("gamma_p1.csv").is_file());

    let cli_dir = tmp.path().join("from_cli");
    let status = Command::new(BIN)
        .args(["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), cli_dir.as_os_str()])
        .env("NOONBLOCH_OUTPUT_DIR", &env_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(cli_dir.join("period.csv").is_file());
    assert_eq!(
        fs::read(cli_dir.join("period.csv")).unwrap(),
        fs::read(env_dir.join("period.csv")).unwrap()
    );
}

#[test]
fn failed_verification_exits_nonzero_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "N = 2\nsite_a = 0\nsite_b = 1\nobservables = [\"density\", \"verify\"]\n[tolerances]\node = 1e-30\n",
    );
    let out = tmp.path().join("out");
    let run = Command::new(BIN)
        .args(["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str()])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(!out.exists());

    let v = Command::new(BIN).arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(v.status.code(), Some(1));
    let stdout = String::from_utf8(v.stdout).unwrap();
    assert!(stdout.contains("overall: fail"), "{stdout}");
}

#[test]
fn config_errors_exit_with_usage_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "w.toml", "N = 2\nsite_a = 0\nsite_b = 1\nhalf_width = 5\nB = 0.1\n");
    let out = Command::new(BIN).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("half_width must be at least 51"), "{stderr}");

    let out = Command::new(BIN).args(["preset", "fig9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_writes_subdirectories() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    let status = Command::new(BIN)
        .args(["preset".as_ref(), "fig2a".as_ref(), "--out".as_ref(), dir.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());
    let files = fs::read_dir(dir.join("correlation")).unwrap().count();
    assert_eq!(files, 5);
    let m = read_matrix(fs::File::open(dir.join("correlation/p1_z00004.csv")).unwrap()).unwrap();
    assert_eq!((m.p, m.q), (1, 1));
}
