use std::path::PathBuf;
use std::process::Command;

use oll_cli::job::Outcome;
use oll_cli::report::{canonical_json, round_sig, TRACE_CSV_HEADER};
use oll_cli::{parse_config, parse_config_str, run_job, run_norm, run_rearrange, CliError, SourceFormat};
use oll_core::{Notion, Status};

fn catalog(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../catalog").join(format!("{name}.toml"))
}

fn oll(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_oll")).args(args).env("OLL_LOG", "off").output().unwrap()
}

const BASE: &str = r#"
[space]
mass = { family = "geometric", r = 0.5 }
[tau]
family = "shift"
d = 1
[phi]
family = "power"
p = 1.0
"#;

fn with_weight(weight: &str, extra: &str) -> String {
    format!("{extra}\n{BASE}\n[weight]\n{weight}\n")
}

#[test]
fn s1_config_round_trips() {
    let cfg = parse_config(&catalog("s1-geometric-shift")).unwrap();
    assert_eq!(cfg.distortion_m, Some(2.0));
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(parse_config_str(&json, SourceFormat::Json).unwrap(), cfg);
}

#[test]
fn alpha_above_one_is_rejected() {
    let text = with_weight("family = \"power_decay\"\nalpha = 1.2", "");
    let err = parse_config_str(&text, SourceFormat::Toml).unwrap_err();
    assert!(err.to_string().contains("weight not locally integrable"), "{err}");
}

#[test]
fn distortion_constant_below_bound_names_an_atom() {
    let text = with_weight("family = \"constant\"\nc = 1.0", "distortion_M = 1.5");
    match parse_config_str(&text, SourceFormat::Toml).unwrap_err() {
        CliError::Core(oll_core::Error::Validation { witness, .. }) => assert!(witness.is_some()),
        other => panic!("{other}"),
    }
}

#[test]
fn unknown_keys_report_their_path() {
    let text = with_weight("family = \"constant\"\nc = 1.0\nslope = 2.0", "");
    let err = parse_config_str(&text, SourceFormat::Toml).unwrap_err();
    assert!(matches!(&err, CliError::Config { path, .. } if path.starts_with("weight")), "{err}");
    let err =
        parse_config_str(r#"{"space": {"window": 8, "mass": {"family": "cantor"}}}"#, SourceFormat::Json).unwrap_err();
    assert!(matches!(&err, CliError::Config { path, .. } if path.starts_with("space.mass")), "{err}");
}

#[test]
fn unknown_notion_is_a_config_error() {
    let text = with_weight("family = \"constant\"\nc = 1.0", "notions = [\"chaotic\"]");
    assert!(matches!(parse_config_str(&text, SourceFormat::Toml), Err(CliError::Config { .. })));
}

#[test]
fn distortion_constant_defaults_to_the_computed_bound() {
    let text = with_weight("family = \"constant\"\nc = 1.0", "");
    let cfg = parse_config_str(&text, SourceFormat::Toml).unwrap();
    assert_eq!(cfg.system().unwrap().distortion_m, 2.0);
}

#[test]
fn run_job_examples() {
    let mut cfg = parse_config(&catalog("s1-geometric-shift")).unwrap();
    cfg.notions = vec!["positive".into(), "uniform_positive".into()];
    let report = run_job(&cfg).unwrap();
    assert_eq!(report.result.notions.len(), 2);
    for r in report.result.notions.values() {
        assert_eq!(r.criterion.status(), Some(Status::Holds));
        assert!(r.agreement);
    }

    let mut cfg = parse_config(&catalog("identity")).unwrap();
    cfg.notions = vec!["expansive".into()];
    let report = run_job(&cfg).unwrap();
    let Outcome::Verdict(v) = &report.result.notions["expansive"].criterion else { panic!() };
    assert_eq!(v.status, Status::Fails);
    assert!(v.witness.is_some());

    let mut cfg = parse_config(&catalog("counting-shift")).unwrap();
    cfg.notions = vec!["uniform".into()];
    let report = run_job(&cfg).unwrap();
    assert_eq!(report.result.notions["uniform"].criterion.status(), Some(Status::Fails));
}

#[test]
fn inadmissible_notion_does_not_abort_the_others() {
    let text = with_weight("family = \"constant\"\nc = 1.0", "notions = [\"expansive\", \"positive\"]")
        .replace("d = 1", "d = 1\ninvertible = false");
    let cfg = parse_config_str(&text, SourceFormat::Toml).unwrap();
    let report = run_job(&cfg).unwrap();
    assert!(matches!(report.result.notions["expansive"].criterion, Outcome::Error(_)));
    assert_eq!(report.result.notions["positive"].criterion.status(), Some(Status::Holds));
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn norm_and_rearrange_on_catalog_function() {
    let cfg = parse_config(&catalog("s1-geometric-shift")).unwrap();
    // L^1 of 2^-k: 1 + 2·(1/2) + 0.5·(1/8)
    let norm = run_norm(&cfg).unwrap().result.norm.value;
    assert!((norm - 2.0625).abs() < 1e-9 * 2.0625, "{norm}");
    let star = run_rearrange(&cfg).unwrap().result.rearrangement;
    assert_eq!(star.values, vec![2.0, 1.0, 0.5]);
    assert_eq!(star.breakpoints, vec![0.5, 1.5, 1.625]);
}

#[test]
fn complex_values_reduce_to_moduli() {
    let text =
        with_weight("family = \"constant\"\nc = 1.0", "") + "[function]\nvalues = [[0, [3.0, 4.0]], [1, -1.0]]\n";
    let cfg = parse_config_str(&text, SourceFormat::Toml).unwrap();
    let g = cfg.simple_function().unwrap().unwrap();
    assert_eq!(g.entries(), &[(0, 5.0), (1, -1.0)]);
}

#[test]
fn canonical_json_rounds_and_sorts() {
    assert_eq!(round_sig(0.1 + 0.2), 0.3);
    assert_eq!(round_sig(2f64.powi(-40)), 9.09494701773e-13);
    let v = serde_json::json!({"b": 1.0 / 3.0, "a": [f64::MAX]});
    assert_eq!(
        canonical_json(&v).unwrap(),
        "{\n  \"a\": [\n    1.79769313486e+308\n  ],\n  \"b\": 0.333333333333\n}\n"
    );
}

#[test]
fn binary_exit_codes() {
    let s1 = catalog("s1-geometric-shift");
    let out = oll(&["classify", "--config", s1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["agreement"], true);

    let growth = catalog("bilateral-growth");
    let out = oll(&["classify", "--config", growth.to_str().unwrap(), "--notion", "positive"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, with_weight("family = \"power_decay\"\nalpha = 1.2", "")).unwrap();
    let out = oll(&["classify", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weight not locally integrable"));
}

#[test]
fn binary_csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let s1 = catalog("s1-geometric-shift");
    let out = oll(&[
        "simulate",
        "--config",
        s1.to_str().unwrap(),
        "--format",
        "csv",
        "--horizon",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_CSV_HEADER));
    // {0}, n = 2: c_n = 2^-2 and ratio 4
    assert!(csv.contains("\n{0},2,0.25,4,"), "{csv}");
    assert_eq!(lines.count(), 31 * 7);
}

#[test]
fn binary_runs_are_byte_identical_except_timing() {
    let s1 = catalog("lorentz-weight");
    let strip = |bytes: Vec<u8>| {
        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&v).unwrap()
    };
    let a = oll(&["classify", "--config", s1.to_str().unwrap(), "--seed", "3"]);
    let b = oll(&["classify", "--config", s1.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(strip(a.stdout), strip(b.stdout));
}

#[test]
fn probe_delta2_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"space": {"mass": {"family": "counting"}}, "tau": {"family": "identity"},
            "phi": {"family": "exp_minus_one"}, "weight": {"family": "constant", "c": 1.0}}"#,
    )
    .unwrap();
    let out = oll(&["probe-delta2", "--config", cfg.to_str().unwrap(), "--s-max", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["satisfied_on_grid"], false);
    assert_eq!(Notion::from_key("uniform"), Some(Notion::UniformlyExpansive));
}
