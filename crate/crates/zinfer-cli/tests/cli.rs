//! End-to-end command-line behaviour: exit codes, determinism, report
//! round-trips and the bundled-data examples.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zinfer"))
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn fish_csv() -> String {
    workspace_file("data/fish.csv")
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn zinfer")
}

fn fish_fit_args(out: &str) -> Vec<String> {
    vec![
        "fit".into(),
        "--data".into(),
        fish_csv(),
        "--response".into(),
        "count".into(),
        "--theta-covariates".into(),
        "persons,camper".into(),
        "--drop-response-above".into(),
        "64".into(),
        "--zi-type".into(),
        "hurdle".into(),
        "--output".into(),
        out.into(),
    ]
}

#[test]
fn fish_fit_report_has_expected_shape_and_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let status = bin()
        .args(fish_fit_args(out.to_str().unwrap()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["n"], serde_json::json!(248));
    assert_eq!(report["model"]["zi_type"], serde_json::json!("hurdle"));
    assert_eq!(report["converged"], serde_json::json!(true));
    for key in ["loglik", "aic", "bic", "ess", "n0", "iterations"] {
        assert!(report.get(key).is_some(), "missing key {key}");
    }
    assert!(
        report["coefficients"]["beta"]["persons"]["se"]
            .as_f64()
            .unwrap()
            > 0.0
    );
}

#[test]
fn fit_json_is_byte_identical_across_runs_and_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let status = bin()
            .args(fish_fit_args(out.to_str().unwrap()))
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "two runs must produce identical bytes");
    let golden = std::fs::read(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fish_fit_hurdle.json"),
    )
    .unwrap();
    assert_eq!(a, golden, "report drifted from the committed golden file");
}

#[test]
fn compare_json_is_byte_identical_and_ranks_hurdle_first() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "compare",
                "--data",
                &fish_csv(),
                "--response",
                "count",
                "--theta-covariates",
                "persons,camper",
                "--drop-response-above",
                "64",
                "--types",
                "multiplicative,additive,hurdle",
                "--output",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&out1).unwrap();
    assert_eq!(a, std::fs::read(&out2).unwrap());
    let golden =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fish_compare.json"))
            .unwrap();
    assert_eq!(a, golden);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let first = rows
        .iter()
        .find(|r| r["rank"] == serde_json::json!(1))
        .unwrap();
    assert_eq!(first["zi_type"], serde_json::json!("hurdle"));
}

#[test]
fn report_loglik_round_trips_through_the_library() {
    // re-reading a report and re-evaluating loglik from its parameters on the
    // same data reproduces the stored value
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    bin()
        .args(fish_fit_args(out.to_str().unwrap()))
        .status()
        .unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();

    // rebuild the dataset exactly as the CLI does
    let mut y = Vec::new();
    let mut persons = Vec::new();
    let mut camper = Vec::new();
    let mut rdr = csv::Reader::from_path(fish_csv()).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let count: u64 = rec[0].parse().unwrap();
        if count > 64 {
            continue;
        }
        y.push(count);
        persons.push(rec[1].parse::<f64>().unwrap());
        camper.push(rec[2].parse::<f64>().unwrap());
    }
    let n = y.len();
    let x_beta = nalgebra::DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => persons[i],
        _ => camper[i],
    });
    let x_alpha = nalgebra::DMatrix::from_element(n, 1, 1.0);
    let data = zinfer::Dataset::new(
        y,
        x_beta,
        x_alpha,
        vec!["intercept".into(), "persons".into(), "camper".into()],
        vec!["intercept".into()],
    )
    .unwrap();

    let beta = [
        report["coefficients"]["beta"]["intercept"]["estimate"]
            .as_f64()
            .unwrap(),
        report["coefficients"]["beta"]["persons"]["estimate"]
            .as_f64()
            .unwrap(),
        report["coefficients"]["beta"]["camper"]["estimate"]
            .as_f64()
            .unwrap(),
    ];
    let alpha = [report["coefficients"]["alpha"]["intercept"]["estimate"]
        .as_f64()
        .unwrap()];
    let beta_v = nalgebra::DVector::from_row_slice(&beta);
    let alpha_v = nalgebra::DVector::from_row_slice(&alpha);

    let mut ll = 0.0;
    for i in 0..n {
        let theta = (data.x_beta().row(i) * &beta_v)[0];
        let gamma = (data.x_alpha().row(i) * &alpha_v)[0];
        let model = zinfer::ZiModel::new(
            zinfer::BaseCount::Poisson,
            zinfer::ZiType::hurdle(),
            theta,
            gamma,
        )
        .unwrap();
        ll += model.log_pmf(data.y()[i]).unwrap();
    }
    let stored = report["loglik"].as_f64().unwrap();
    assert!(
        (ll - stored).abs() <= 1e-9 * (1.0 + stored.abs()),
        "recomputed {ll} vs stored {stored}"
    );
}

#[test]
fn missing_column_exits_one_and_names_it() {
    let out = run(&[
        "fit",
        "--data",
        &fish_csv(),
        "--response",
        "count",
        "--theta-covariates",
        "persons,boat",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("boat"), "stderr should name the column: {err}");
}

#[test]
fn unreadable_file_exits_one() {
    let out = run(&[
        "fit",
        "--data",
        "/nonexistent/nowhere.csv",
        "--response",
        "count",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_integer_response_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "count,x\n1.5,0\n2,1\n").unwrap();
    let out = run(&[
        "fit",
        "--data",
        path.to_str().unwrap(),
        "--response",
        "count",
        "--theta-covariates",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = [
        "simulate",
        "--n",
        "500",
        "--base",
        "poisson",
        "--zi-type",
        "multiplicative",
        "--beta",
        "0.3,0.5",
        "--alpha",
        "0.4",
        "--gen",
        "x:uniform:-1,1",
        "--seed",
        "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = bin().args(args).args(["--seed", "100"]).output().unwrap();
    assert_ne!(a.stdout, c.stdout, "different seed should change the draw");
}

#[test]
fn simulate_zero_fraction_matches_model() {
    let out = run(&[
        "simulate",
        "--n",
        "100000",
        "--beta",
        "0",
        "--zi-type",
        "multiplicative",
        "--alpha",
        "0.6931471805599453",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut zeros = 0usize;
    let mut n = 0usize;
    for line in text.lines().skip(1) {
        n += 1;
        if line.split(',').next() == Some("0") {
            zeros += 1;
        }
    }
    assert_eq!(n, 100000);
    let zf = zeros as f64 / n as f64;
    assert!(
        (zf - 0.5378828427399902).abs() < 0.0063,
        "zero fraction {zf}"
    );
}

#[test]
fn simulate_without_alpha_draws_from_the_base() {
    // chi-square GOF of the omega = 0 stream against the Poisson pmf
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let out = run(&["simulate", "--n", "100000", "--beta", "0.5", "--seed", "21"]);
    assert_eq!(out.status.code(), Some(0));
    let lambda = 0.5f64.exp();
    let text = String::from_utf8_lossy(&out.stdout);
    let mut observed = vec![0.0f64; 40];
    let mut n = 0.0;
    for line in text.lines().skip(1) {
        let y: usize = line.split(',').next().unwrap().parse().unwrap();
        observed[y.min(39)] += 1.0;
        n += 1.0;
    }
    let mut expected: Vec<f64> = (0..40)
        .map(|k| {
            let lp =
                k as f64 * lambda.ln() - lambda - (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
            n * lp.exp()
        })
        .collect();
    while expected.len() > 2 && *expected.last().unwrap() < 5.0 {
        let last = expected.len() - 1;
        expected[last - 1] += expected[last];
        observed[last - 1] += observed[last];
        expected.pop();
        observed.pop();
    }
    let stat: f64 = expected
        .iter()
        .zip(&observed)
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let crit = ChiSquared::new((expected.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    assert!(stat <= crit, "chi2 {stat} over critical {crit}");
}

#[test]
fn null_data_alpha_is_within_three_se_across_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut good = 0;
    let seeds = 10;
    for seed in 0..seeds {
        let sim = dir.path().join(format!("null{seed}.csv"));
        let status = bin()
            .args([
                "simulate",
                "--n",
                "2000",
                "--beta",
                "0.4,0.6",
                "--gen",
                "x:uniform:-1,1",
                "--seed",
                &seed.to_string(),
                "--output",
                sim.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let out = run(&[
            "fit",
            "--data",
            sim.to_str().unwrap(),
            "--response",
            "y",
            "--theta-covariates",
            "x",
            "--zi-type",
            "multiplicative",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let alpha = v["coefficients"]["alpha"]["intercept"]["estimate"]
            .as_f64()
            .unwrap();
        let se = v["coefficients"]["alpha"]["intercept"]["se"]
            .as_f64()
            .unwrap();
        if alpha.abs() < 3.0 * se {
            good += 1;
        }
    }
    assert!(
        good * 10 >= seeds * 9,
        "null alpha inside 3 SE in {good}/{seeds} seeds"
    );
}

#[test]
fn compare_also_writes_a_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cmp.json");
    let csv_path = dir.path().join("cmp.csv");
    let status = bin()
        .args([
            "compare",
            "--data",
            &fish_csv(),
            "--response",
            "count",
            "--theta-covariates",
            "persons,camper",
            "--drop-response-above",
            "64",
            "--types",
            "multiplicative,additive,hurdle",
            "--output",
            json.to_str().unwrap(),
            "--output-csv",
            csv_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let table = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "zi_type,tau1,tau2,loglik,k,aic,bic,rank,status"
    );
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().nth(1).unwrap().starts_with("hurdle"));
}

#[test]
fn simulate_rejects_bad_beta_length() {
    let out = run(&[
        "simulate",
        "--n",
        "10",
        "--beta",
        "0.3,0.5,0.9",
        "--gen",
        "x:uniform:0,1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diagnose_hurdle_pi0_tilde_is_flat_and_row_count_matches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diag.csv");
    let status = bin()
        .args([
            "diagnose",
            "--data",
            &fish_csv(),
            "--response",
            "count",
            "--theta-covariates",
            "persons,camper",
            "--drop-response-above",
            "64",
            "--zi-type",
            "hurdle",
            "--output",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut pt: Vec<f64> = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        pt.push(fields[1].parse().unwrap());
    }
    assert_eq!(pt.len(), 248);
    let spread =
        pt.iter().cloned().fold(f64::MIN, f64::max) - pt.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 1e-10, "hurdle pi~0 spread {spread}");
    // header carries the covariates for plotting
    assert!(text.lines().next().unwrap().contains("persons"));
}

#[test]
fn compare_keeps_going_when_one_type_fails() {
    let out = run(&[
        "compare",
        "--data",
        &fish_csv(),
        "--response",
        "count",
        "--theta-covariates",
        "persons,camper",
        "--drop-response-above",
        "64",
        "--types",
        "hurdle,custom:-1.5:0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let failed = rows
        .iter()
        .find(|r| r["zi_type"] == serde_json::json!("custom:-1.5:0"))
        .unwrap();
    assert!(failed["status"].as_str().unwrap().starts_with("failed"));
    let ok = rows
        .iter()
        .find(|r| r["zi_type"] == serde_json::json!("hurdle"))
        .unwrap();
    assert_eq!(ok["rank"], serde_json::json!(1));
}

#[test]
fn max_iter_env_var_is_honoured() {
    // a one-iteration cap cannot satisfy the score tolerance on this data
    let out = bin()
        .args([
            "fit",
            "--data",
            &fish_csv(),
            "--response",
            "count",
            "--theta-covariates",
            "persons,camper",
            "--drop-response-above",
            "64",
            "--zi-type",
            "multiplicative",
        ])
        .env("ZINFER_MAX_ITER", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "expected non-convergence exit");
}
