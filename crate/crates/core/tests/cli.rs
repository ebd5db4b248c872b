use std::fs;
use std::path::Path;

use agora::cli::{run, EXIT_CHECK_FAILED, EXIT_NOT_REGULAR, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn agora(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("agora").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const BIMODAL: &str = r#"{"family":"piecewise","params":[0.25,0.75,1.9,0.1,1.9]}"#;

#[test]
fn solve_writes_profit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq.json");
    let o = agora(&[
        "solve",
        "--dist",
        "uniform",
        "--p",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = json_file(&path);
    assert_eq!(v["profit"].as_f64().unwrap(), 0.0625);
    assert_eq!(v["protocol"], "nash");
    assert_eq!(v["theta_low"].as_f64().unwrap(), 0.25);

    let o = agora(&["solve", "--dist", "uniform", "--p", "0"]);
    assert_eq!(o.code, EXIT_OK);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["profit"].as_f64().unwrap(), 0.125);

    let o = agora(&["solve", "--dist", "beta", "--baseline"]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["ratio"].as_f64().unwrap(), 1.0);
}

#[test]
fn solve_double_auction() {
    let o = agora(&["solve", "--dist", "uniform", "--protocol", "da"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["protocol"], "double_auction");
    assert!((v["profit"].as_f64().unwrap() - 1.0 / 24.0).abs() < 1e-11);
}

#[test]
fn solve_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("bad.csv");
    fs::write(&table, "theta,cdf\n0,0\n0.5,0.7\n0.6,0.4\n1,1\n").unwrap();
    let spec = format!(r#"{{"family":"table","table_path":"{}"}}"#, table.display());
    assert_eq!(agora(&["solve", "--dist", &spec]).code, EXIT_USAGE);

    let o = agora(&["solve", "--dist", BIMODAL]);
    assert_eq!(o.code, EXIT_NOT_REGULAR);
    assert!(
        o.stderr.contains("regularity violations at"),
        "{}",
        o.stderr
    );

    assert_eq!(
        agora(&["solve", "--dist", "uniform", "--p", "1.5"]).code,
        EXIT_USAGE
    );
    assert_eq!(agora(&["solve", "--dist", "nonsense"]).code, EXIT_USAGE);
    assert_eq!(agora(&["solve"]).code, EXIT_USAGE);
    assert_eq!(agora(&["--help"]).code, EXIT_OK);
}

#[test]
fn dist_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("dist.json");
    fs::write(&spec, r#"{"family":"power","params":[2.0]}"#).unwrap();
    let arg = format!("@{}", spec.display());
    let o = agora(&["solve", "--dist", &arg, "--p", "0.5"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["ratio"].as_f64().unwrap() - 0.75).abs() < 1e-11);
}

#[test]
fn sweep_columns() {
    let o = agora(&["sweep", "--dist", "uniform", "--grid", "0,0.5,1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "p",
            "theta_low",
            "theta_high",
            "p_s",
            "p_b",
            "profit",
            "compensations",
            "ratio",
            "welfare_total",
            "welfare_search_only",
            "welfare_marketplace_only"
        ]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r[7]).collect();
    assert_eq!(ratios, [1.0, 0.75, 0.5]);
    assert!(rows.iter().all(|r| r[1] == rows[0][1]));

    let o = agora(&["sweep", "--dist", "trunc_exp", "--grid", "0:0.25:1"]);
    let theta_low: Vec<String> = o
        .stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(theta_low.len(), 5);
    assert!(theta_low.iter().all(|t| *t == theta_low[0]));

    assert_eq!(
        agora(&["sweep", "--dist", "uniform", "--grid", ""]).code,
        EXIT_USAGE
    );
    assert_eq!(agora(&["sweep", "--dist", BIMODAL]).code, EXIT_NOT_REGULAR);
}

#[test]
fn check_table() {
    let o = agora(&["check", "--dist", "uniform"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert_eq!(o.stdout.lines().filter(|l| l.contains(" pass ")).count(), 4);

    let o = agora(&["check", "--dist", r#"{"family":"beta","params":[2,2]}"#]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);

    let o = agora(&["check", "--dist", BIMODAL]);
    assert_eq!(o.code, EXIT_CHECK_FAILED);
    assert!(o
        .stdout
        .lines()
        .any(|l| l.starts_with("regularity") && l.contains("FAIL")));
}

#[test]
fn simulate_writes_report_and_bins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let args = [
        "simulate", "--dist", "uniform", "--p", "1", "--n", "20000", "--reps", "6", "--seed", "3",
        "--bins", "20", "--out",
    ];
    let mut full: Vec<&str> = args.to_vec();
    full.push(path.to_str().unwrap());
    let o = agora(&full);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("payoff bins: max |z|"));
    let v = json_file(&path);
    assert_eq!(v["config"]["mode"], "coexistence-nash");
    assert_eq!(v["bin_payoffs"].as_array().unwrap().len(), 20);
    let bins = fs::read_to_string(dir.path().join("sim.bins.csv")).unwrap();
    assert_eq!(bins.lines().count(), 21);
    assert!(bins.starts_with("bin_mid,mean,stderr,count"));

    // Byte-identical on rerun.
    let first = fs::read(&path).unwrap();
    assert_eq!(agora(&full).code, EXIT_OK);
    assert_eq!(fs::read(&path).unwrap(), first);
}

#[test]
fn simulate_without_friction_has_no_search_trades() {
    for mode in ["coexistence-nash", "search-only"] {
        let o = agora(&[
            "simulate", "--dist", "uniform", "--mode", mode, "--p", "0", "--n", "10000", "--reps",
            "4", "--bins", "10",
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        assert!(
            o.stdout.contains("search 0 per replication"),
            "{}",
            o.stdout
        );
    }
}

#[test]
fn simulate_double_auction_reports_both_closed_forms() {
    let o = agora(&[
        "simulate",
        "--dist",
        "uniform",
        "--protocol",
        "da",
        "--n",
        "20000",
        "--reps",
        "6",
        "--bins",
        "10",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("implied profit"));
    assert!(o.stdout.contains("implied vs 1-5p/6"));
}

#[test]
fn simulate_rejects_bad_config() {
    assert_eq!(
        agora(&["simulate", "--dist", "uniform", "--n", "10"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        agora(&["simulate", "--dist", "uniform", "--reps", "0"]).code,
        EXIT_USAGE
    );
}
