use std::fs;
use std::path::Path;

use fraclap_cli::cli::{run, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};
use fraclap_cli::{run_suite, Report, Suite, SuiteConfig};
use serde_json::Value;

fn fraclap(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fraclap").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Records and summary with timings zeroed; the config echoes the output path.
fn strip_timings(mut v: Value) -> Value {
    for r in v["records"].as_array_mut().unwrap() {
        r["ms"] = Value::from(0.0);
    }
    Value::from(vec![v["records"].take(), v["summary"].take()])
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "suite = \"poisson\"\norders = [0.5,\n").unwrap();
    let (code, _, err) = fraclap(&["verify", "poisson", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("configuration error"), "{err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(SuiteConfig::from_toml("suite = \"norms\"\nordres = [0.5]\n").is_err());
}

#[test]
fn config_for_another_suite_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("norms.toml");
    fs::write(&cfg, SuiteConfig::new(Suite::Norms).to_toml().unwrap()).unwrap();
    let (code, _, _) = fraclap(&["verify", "poisson", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn invalid_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let out = out.to_str().unwrap();
    for extra in [
        &["--presets", "no-such-preset"][..],
        &["--orders", "1.5"],
        &["--orders", "abc"],
        &["--rho", "0"],
        &["--dim", "1"],
    ] {
        let mut args = vec!["verify", "poisson", "--out", out];
        args.extend_from_slice(extra);
        let (code, _, _) = fraclap(&args);
        assert_eq!(code, EXIT_CONFIG, "{extra:?}");
    }
    assert_eq!(fraclap(&["verify", "nope"]).0, EXIT_CONFIG);
    assert_eq!(fraclap(&["frobnicate"]).0, EXIT_CONFIG);
    assert!(!Path::new(out).exists());
}

#[test]
fn empty_grid_yields_an_empty_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.json");
    let (code, _, _) = fraclap(&[
        "verify",
        "poisson",
        "--orders",
        "",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS);
    let v = read_report(&out);
    assert_eq!(v["records"].as_array().unwrap().len(), 0);
    assert_eq!(v["summary"]["total"], 0);
    assert!(dir.path().join("empty.csv").exists());
}

#[test]
fn constant_datum_reproduces_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("poisson.json");
    let (code, stdout, _) = fraclap(&["verify", "poisson", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    let v = read_report(&out);
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 30);
    for r in records {
        assert_eq!(r["pass"], true);
        assert_eq!(r["oracle"], 1.0);
        assert!((r["value"].as_f64().unwrap() - 1.0).abs() <= 1e-4);
    }
}

#[test]
fn leibniz_grid_passes() {
    let mut cfg = SuiteConfig::new(Suite::Leibniz);
    cfg.points = 6;
    let report = run_suite(&cfg).unwrap();
    assert_eq!(report.summary.total, 18);
    assert!(report.all_passed(), "{}", report.to_json().unwrap());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let (code, _, _) = fraclap(&[
            "verify",
            "poisson",
            "--presets",
            "gaussian",
            "--orders",
            "0.5",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
    }
    assert_eq!(
        strip_timings(read_report(&a)),
        strip_timings(read_report(&b))
    );
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tight.json");
    let (code, stdout, _) = fraclap(&[
        "verify",
        "norms",
        "--tolerance",
        "1e-30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_FAIL);
    assert!(stdout.contains("FAIL"), "{stdout}");
    let report: Report = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.summary.failed > 0);
    assert_eq!(
        report.summary.passed + report.summary.failed,
        report.summary.total
    );
}

#[test]
fn config_round_trips_through_toml() {
    for suite in Suite::ALL {
        let cfg = SuiteConfig::new(suite);
        let back = SuiteConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back.to_toml().unwrap(), cfg.to_toml().unwrap());
        back.validate().unwrap();
    }
}

#[test]
fn eval_prints_value_and_error() {
    let (code, stdout, _) = fraclap(&[
        "eval", "--preset", "gaussian", "--s", "0.5", "--point", "0,0",
    ]);
    assert_eq!(code, EXIT_PASS);
    let value: f64 = stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - std::f64::consts::PI).abs() < 1e-6);
    assert_eq!(
        fraclap(&["eval", "--preset", "gaussian", "--s", "0.5", "--point", "0,0,0"]).0,
        EXIT_CONFIG
    );
}
