use std::io::Write;
use std::process::Command as Process;

use qkd_limits::cli::{execute, parse_args, run, Command, Intensity};
use qkd_limits::report::OutputFormat;
use qkd_limits::Error;
use serde_json::Value;

fn argv(args: &str) -> Vec<String> {
    std::iter::once("qkd-limits".to_owned())
        .chain(args.split_whitespace().map(str::to_owned))
        .collect()
}

fn run_str(args: &str) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv(args), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &str) -> Vec<Value> {
    let (code, out, err) = run_str(&format!("{args} --format json"));
    assert_eq!(code, 0, "{err}");
    serde_json::from_str::<Value>(&out).unwrap().as_array().unwrap().clone()
}

#[test]
fn happy_path_parses() {
    let spec = parse_args(argv("bound --source wcp --mu optimal --eta-b 0.11 --dark-b 1e-5")).unwrap();
    assert_eq!(spec.command, Command::Bound);
    assert_eq!(spec.physical.mu, Intensity::Optimal);
    assert_eq!(spec.physical.bob.eta, 0.11);
    assert_eq!(spec.output_format, OutputFormat::Table);
}

#[test]
fn out_of_range_value_names_the_key() {
    match parse_args(argv("bound --mu -0.1")) {
        Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "mu"),
        other => panic!("{other:?}"),
    }
    let (code, _, err) = run_str("bound --mu -0.1");
    assert_eq!(code, 1);
    assert!(err.contains("mu"), "{err}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"beta": 0.38, "eta_b": 0.2}}"#).unwrap();
    let path = file.path().display().to_string();
    let spec = parse_args(argv(&format!("distance --config {path} --beta 0.25"))).unwrap();
    assert_eq!(spec.physical.beta, 0.25);
    assert_eq!(spec.physical.bob.eta, 0.2);
}

#[test]
fn unknown_keys_are_rejected() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"betta": 0.38}}"#).unwrap();
    let path = file.path().display().to_string();
    let err = parse_args(argv(&format!("bound --config {path}"))).unwrap_err();
    assert!(err.to_string().contains("betta"), "{err}");
    assert!(parse_args(argv("bound --betta 1")).is_err());
    // Simulation keys belong to simulate and sweep only.
    assert!(parse_args(argv("bound --seed 3")).is_err());
}

#[test]
fn wcp_optimum_row() {
    let rows = json("bound --source wcp --mu optimal");
    let row = &rows[0];
    let f = row["f_min"].as_f64().unwrap();
    let mu = row["optimal_intensity"].as_f64().unwrap();
    assert!((f - 0.0407).abs() / 0.0407 < 0.02);
    assert!((mu - 4.47e-3).abs() / 4.47e-3 < 0.02);
}

#[test]
fn pdc_distance_row() {
    let row = &json("distance --source pdc --chi2 optimal --beta 0.38 --c 5")[0];
    let l = row["l_max_km"].as_f64().unwrap();
    assert!((l - 67.8).abs() < 1.0, "{l}");
    assert_eq!(row["reach"], "finite");
}

#[test]
fn insecure_result_is_not_an_error() {
    let (code, out, _) = run_str("distance --mu 0.1");
    assert_eq!(code, 0);
    assert!(out.contains("insecure_at_any_distance"));
    let row = &json("check --mu 0.1")[0];
    assert_eq!(row["combined_secure"], false);
    assert_eq!(row["error_only_secure"], true);
}

#[test]
fn csv_single_row_has_two_lines() {
    let (code, out, _) = run_str("budget --mu 0.1 --format csv");
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    assert!(out.ends_with('\n') && !out.contains('\r'));
}

#[test]
fn json_values_keep_six_significant_digits() {
    let row = &json("budget --mu 0.1")[0];
    let p_exp = row["p_exp"].as_f64().unwrap();
    let spec = parse_args(argv("budget --mu 0.1")).unwrap();
    let exact = execute(&spec).unwrap()[0].num("p_exp").unwrap();
    assert!((p_exp - exact).abs() <= 5e-6 * exact);
    assert_eq!(format!("{:.5e}", p_exp), format!("{:.5e}", exact));
}

#[test]
fn output_is_deterministic() {
    for args in [
        "bound --source pdc --method exact",
        "simulate --pulses 20000 --eve pns --mu 0.1 --seed 4 --format csv",
        "simulate --pulses 20000 --eve pns --mu 0.1 --seed 4 --format csv --shards 7",
    ] {
        let a = run_str(args);
        assert_eq!(a.0, 0, "{}", a.2);
        assert_eq!(a, run_str(args));
    }
    assert_eq!(
        run_str("simulate --pulses 20000 --mu 0.1 --seed 4 --shards 1").1,
        run_str("simulate --pulses 20000 --mu 0.1 --seed 4 --shards 9").1
    );
}

#[test]
fn every_command_and_source_is_reachable() {
    let per_command = |c: Command| match c {
        Command::Sweep => "--axis length --start 0 --stop 10 --steps 3",
        Command::Simulate => "--pulses 1000",
        _ => "",
    };
    for command in Command::ALL {
        for source in ["sp", "wcp", "pdc"] {
            for method in ["closed", "exact"] {
                let args = format!("{} --source {source} --method {method} {}", command.name(), per_command(command));
                let (code, out, err) = run_str(&args);
                assert_eq!(code, 0, "{args}: {err}");
                assert!(!out.is_empty());
            }
        }
    }
    for args in [
        "bound --trusted-detector --mu 0.1",
        "simulate --pulses 1000 --eve ir",
        "simulate --pulses 1000 --eve pns-ir --block 0.5 --intercept 0.3",
        "simulate --pulses 1000 --eve pns --forward one --eve-controls-eta false",
        "sweep --axis mu --start 1e-3 --stop 1e-2 --steps 3 --of budget",
        "sweep --axis length --start 0 --stop 10 --steps 3 --of simulate --pulses 1000",
    ] {
        let (code, _, err) = run_str(args);
        assert_eq!(code, 0, "{args}: {err}");
    }
}

#[test]
fn mu_sweep_has_interior_minimum() {
    let rows = json("sweep --axis mu --start 1e-4 --stop 1e-1 --steps 50 --scale log --of bound");
    assert_eq!(rows.len(), 50);
    let f: Vec<f64> = rows.iter().map(|r| r["f_min"].as_f64().unwrap()).collect();
    let argmin = f
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    assert!(0 < argmin && argmin < 49);
    assert!(f[..=argmin].windows(2).all(|w| w[1] <= w[0]));
    assert!(f[argmin..].windows(2).all(|w| w[1] >= w[0]));
    // The grid minimum brackets the closed-form optimum.
    let mu = |i: usize| rows[i]["mu"].as_f64().unwrap();
    assert!(mu(argmin - 1) < 4.4721e-3 && 4.4721e-3 < mu(argmin + 1));
}

#[test]
fn sweep_steps_must_be_at_least_two() {
    assert!(parse_args(argv("sweep --axis mu --start 1e-3 --stop 1e-2 --steps 1")).is_err());
    assert!(parse_args(argv("sweep --axis seed --start 1 --stop 2")).is_err());
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_qkd-limits");
    let ok = Process::new(bin).args(["bound", "--source", "sp"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("9.09091e-5"));
    let bad = Process::new(bin).args(["bound", "--eta-b", "2"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("eta-b"));
    let usage = Process::new(bin).args(["bound", "--betta", "1"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let help = Process::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
}
