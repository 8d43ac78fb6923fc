//! End-to-end tests of the `birisk` binary: config ingestion, solve
//! exit codes, file formats, verification, and the estimate round
//! trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_birisk")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("birisk_cli_{}_{}", std::process::id(), name));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Parses a `key = value` document into (key, value) pairs.
fn doc_value<'a>(doc: &'a str, key: &str) -> Option<&'a str> {
    doc.lines().find_map(|line| {
        let (k, v) = line.split_once('=')?;
        (k.trim() == key).then_some(v.trim())
    })
}

const TEST_MARKET: &str = "mean = 0.10 0.20\ncov = 0.04 0.01 ; 0.01 0.09\n";

const WORKED_SCENARIOS: &str = "prob,asset_1,asset_2\n0.5,0.0,0.2\n0.5,0.2,0.0\n";

#[test]
fn gaussian_solve_binding_bound() {
    let dir = workdir("g_solve");
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = gaussian\n{TEST_MARKET}rho1 = avar:0.05\nrho2 = neg_expectation\nr = -0.15\n"
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let doc = stdout_of(&out);
    assert_eq!(doc_value(&doc, "tag"), Some("optimal"));
    let w: Vec<f64> = doc_value(&doc, "portfolio")
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert!((w[0] - 0.5).abs() < 1e-8 && (w[1] - 0.5).abs() < 1e-8, "portfolio {w:?}");
    let value: f64 = doc_value(&doc, "value").unwrap().parse().unwrap();
    assert!((value - 0.24943).abs() < 1e-4, "value {value}");
}

#[test]
fn gaussian_solve_low_coefficient_is_unbounded() {
    let dir = workdir("g_unbounded");
    let cfg = write(
        &dir,
        "p.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}rho1 = coeff:0.2\nrho2 = coeff:0\nr = 0\n"),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(doc_value(&stdout_of(&out), "tag"), Some("unbounded"));
}

#[test]
fn scenario_solve_worked_instance() {
    let dir = workdir("s_solve");
    let csv = write(&dir, "s.csv", WORKED_SCENARIOS);
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = scenario\nscenario_csv = {}\nrho1 = avar:0.5\nrho2 = neg_expectation\nr = -0.05\n",
            csv.display()
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let doc = stdout_of(&out);
    let w: Vec<f64> = doc_value(&doc, "portfolio")
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert!((w[0] - 0.5).abs() < 1e-8 && (w[1] - 0.5).abs() < 1e-8);
    let value: f64 = doc_value(&doc, "value").unwrap().parse().unwrap();
    assert!((value + 0.1).abs() < 1e-10);
}

#[test]
fn scenario_solve_infeasible_bound_exits_two() {
    let dir = workdir("s_infeasible");
    let csv = write(&dir, "s.csv", WORKED_SCENARIOS);
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = scenario\nscenario_csv = {}\nrho1 = avar:0.5\nrho2 = neg_expectation\nr = -0.15\n",
            csv.display()
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc_value(&stdout_of(&out), "tag"), Some("infeasible"));
}

#[test]
fn estimate_rejects_rank_deficient_history() {
    let dir = workdir("est_rank");
    let csv = write(&dir, "r.csv", "asset_1,asset_2\n0.1,0.1\n0.2,0.2\n0.0,0.0\n");
    let cfg = write(&dir, "p.cfg", &format!("mode = gaussian\nreturns_csv = {}\n", csv.display()));
    let out_path = dir.join("m.txt");
    let out = run(&["estimate", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("positive definite"), "stderr: {}", stderr_of(&out));
}

#[test]
fn estimate_rejects_constant_mean() {
    let dir = workdir("est_mean");
    // Identical sample means across assets, full-rank covariance.
    let csv = write(
        &dir,
        "r.csv",
        "asset_1,asset_2\n0.3,0.1\n-0.1,0.1\n0.1,-0.2\n0.1,0.4\n",
    );
    let cfg = write(&dir, "p.cfg", &format!("mode = gaussian\nreturns_csv = {}\n", csv.display()));
    let out_path = dir.join("m.txt");
    let out = run(&["estimate", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("parallel"), "stderr: {}", stderr_of(&out));
}

#[test]
fn estimate_parse_error_carries_line_and_column() {
    let dir = workdir("est_parse");
    let csv = write(&dir, "r.csv", "asset_1,asset_2\n0.1,0.2\nbad,0.1\n0.0,0.1\n");
    let cfg = write(&dir, "p.cfg", &format!("mode = gaussian\nreturns_csv = {}\n", csv.display()));
    let out_path = dir.join("m.txt");
    let out = run(&["estimate", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("line 3") && err.contains("column 1"), "stderr: {err}");
}

#[test]
fn estimate_round_trip_recovers_market() {
    let dir = workdir("round_trip");
    // Draw a deterministic sample from the reference market and lay it
    // out as a returns history.
    let market = birisk::markowitz::GaussianMarket::build(
        vec![0.10, 0.20],
        vec![vec![0.04, 0.01], vec![0.01, 0.09]],
    )
    .unwrap();
    let space = birisk::oracle::sample_gaussian(&market, 200_000, 77).unwrap();
    let mut csv = String::from("asset_1,asset_2\n");
    for row in space.returns() {
        csv.push_str(&format!("{:.17e},{:.17e}\n", row[0], row[1]));
    }
    let csv_path = write(&dir, "history.csv", &csv);
    let est_cfg = write(
        &dir,
        "estimate.cfg",
        &format!("mode = gaussian\nreturns_csv = {}\n", csv_path.display()),
    );
    let market_path = dir.join("market.txt");
    let out = run(&[
        "estimate",
        "--config",
        est_cfg.to_str().unwrap(),
        "--out",
        market_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    // The estimates themselves sit within sampling concentration bounds.
    let market_doc = std::fs::read_to_string(&market_path).unwrap();
    let est_mean: Vec<f64> = doc_value(&market_doc, "mean")
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let est_cov: Vec<Vec<f64>> = doc_value(&market_doc, "cov")
        .unwrap()
        .split(';')
        .map(|row| row.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    let true_cov = [[0.04, 0.01], [0.01, 0.09]];
    let k = 200_000.0f64;
    for i in 0..2 {
        let tol = 3.0 * (true_cov[i][i] / k).sqrt();
        assert!(
            (est_mean[i] - market.mean()[i]).abs() < tol,
            "mean[{i}] {} vs {} (tol {tol})",
            est_mean[i],
            market.mean()[i]
        );
    }
    let mut dist = 0.0;
    let mut norm = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            dist += (est_cov[i][j] - true_cov[i][j]).powi(2);
            norm += true_cov[i][j].powi(2);
        }
    }
    assert!(dist.sqrt() < 0.05 * norm.sqrt(), "covariance off by {}", dist.sqrt());

    let solve_cfg = write(
        &dir,
        "solve.cfg",
        &format!(
            "mode = gaussian\nmarket_file = {}\nrho1 = avar:0.05\nrho2 = neg_expectation\nr = -0.15\n",
            market_path.display()
        ),
    );
    let out = run(&["solve", "--config", solve_cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let doc = stdout_of(&out);
    let w: Vec<f64> = doc_value(&doc, "portfolio")
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    // The true-market solve puts half in each asset.
    assert!((w[0] - 0.5).abs() <= 0.05 && (w[1] - 0.5).abs() <= 0.05, "portfolio {w:?}");
}

#[test]
fn frontier_emits_constants_and_consistent_rows() {
    let dir = workdir("frontier");
    let cfg = write(&dir, "p.cfg", &format!("mode = gaussian\n{TEST_MARKET}"));
    let out = run(&["frontier", "--config", cfg.to_str().unwrap(), "--grid", "41"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let slope_line = text
        .lines()
        .find(|l| l.starts_with("# asymptote_slope"))
        .expect("slope header present");
    let slope: f64 = slope_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((slope - 0.301511).abs() <= 1e-6, "slope {slope}");

    let (gamma, delta, beta) = (220.0 / 7.0, 20.0 / 7.0, 4.0);
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("mu,")) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let (mu, sigma) = (fields[0], fields[1]);
        let resid = sigma * sigma - (gamma / delta) * (mu - beta / gamma).powi(2) - 1.0 / gamma;
        assert!(resid.abs() <= 1e-9, "hyperbola residual {resid}");
        rows += 1;
    }
    assert_eq!(rows, 41);

    // An explicit two-point grid yields exactly the endpoints.
    let cfg2 = write(
        &dir,
        "p2.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}mu_lo = 0.0\nmu_hi = 0.4\ncount = 2\n"),
    );
    let out = run(&["frontier", "--config", cfg2.to_str().unwrap()]);
    let text = stdout_of(&out);
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("mu,") && !l.trim().is_empty())
        .collect();
    assert_eq!(data_rows.len(), 2);
}

#[test]
fn verify_gaussian_passes_with_bridge() {
    let dir = workdir("verify_g");
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = gaussian\n{TEST_MARKET}rho1 = avar:0.05\nrho2 = neg_expectation\nr = -0.15\nbridge_samples = 20000\n"
        ),
    );
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "2024"]);
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "output: {text}");
    assert!(text.contains("[PASS] oracle dominance"));
    assert!(text.contains("[PASS] gaussian/scenario bridge"));
    assert!(text.contains("verify: PASS"));
}

#[test]
fn verify_scenario_downgrades_gap_when_slater_violated() {
    let dir = workdir("verify_s");
    let csv = write(&dir, "s.csv", WORKED_SCENARIOS);
    // r = -0.1 touches the constant constraint exactly: feasible but no
    // strictly feasible point exists.
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = scenario\nscenario_csv = {}\nrho1 = avar:0.5\nrho2 = neg_expectation\nr = -0.1\n",
            csv.display()
        ),
    );
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "output: {text}");
    assert!(text.contains("Slater violated"), "output: {text}");
}

#[test]
fn epsilon_flag_emits_near_optimal_portfolio() {
    let dir = workdir("epsilon");
    // rho1 exactly on the asymptote slope: finite unattained infimum.
    let slope = (1.0f64 / 11.0).sqrt();
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = gaussian\n{TEST_MARKET}rho1 = coeff:{slope:.17}\nrho2 = coeff:0\nr = 0\n"
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(doc_value(&stdout_of(&out), "epsilon_portfolio").is_none());

    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--epsilon", "1e-3"]);
    assert_eq!(out.status.code(), Some(4));
    let doc = stdout_of(&out);
    let infimum: f64 = doc_value(&doc, "value").unwrap().parse().unwrap();
    assert!((infimum + 7.0 / 55.0).abs() < 1e-10);
    let eps_value: f64 = doc_value(&doc, "epsilon_value").unwrap().parse().unwrap();
    assert!(eps_value <= infimum + 1e-3, "epsilon value {eps_value} vs infimum {infimum}");
    let w: Vec<f64> = doc_value(&doc, "epsilon_portfolio")
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
}

#[test]
fn verify_agrees_on_infeasible_and_unbounded_tags() {
    let dir = workdir("verify_tags");
    let cfg = write(
        &dir,
        "inf.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}rho1 = coeff:2.0627\nrho2 = coeff:2.0627\nr = 0.20\n"),
    );
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "output: {text}");
    assert!(text.contains("tag = infeasible"));
    assert!(text.contains("[PASS] oracle agrees infeasible"));

    let cfg = write(
        &dir,
        "unb.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}rho1 = coeff:0.2\nrho2 = coeff:0\nr = 0\n"),
    );
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "output: {text}");
    assert!(text.contains("tag = unbounded"));
    assert!(text.contains("[PASS] widening grids keep improving"));
}

#[test]
fn epsilon_solution_respects_binding_slope_constraint() {
    let dir = workdir("epsilon_slope");
    // Both coefficients on the asymptote slope; the bound stays above
    // the feasibility threshold -beta/gamma.
    let slope = (1.0f64 / 11.0).sqrt();
    let cfg = write(
        &dir,
        "p.cfg",
        &format!(
            "mode = gaussian\n{TEST_MARKET}rho1 = coeff:{slope:.17}\nrho2 = coeff:{slope:.17}\nr = -0.05\n"
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--epsilon", "1e-4"]);
    assert_eq!(out.status.code(), Some(4));
    let doc = stdout_of(&out);
    let infimum: f64 = doc_value(&doc, "value").unwrap().parse().unwrap();
    let eps_value: f64 = doc_value(&doc, "epsilon_value").unwrap().parse().unwrap();
    assert!(eps_value <= infimum + 1e-4);
    // The emitted portfolio satisfies the risk bound.
    let sigma: f64 = doc_value(&doc, "epsilon_sigma").unwrap().parse().unwrap();
    let mu: f64 = doc_value(&doc, "epsilon_mu").unwrap().parse().unwrap();
    assert!(slope * sigma - mu <= -0.05 + 1e-12, "constraint {}", slope * sigma - mu);
}

#[test]
fn config_errors_exit_one() {
    let dir = workdir("cfg_err");
    // Two market sources.
    let cfg = write(
        &dir,
        "two.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}market_file = nowhere.txt\nrho1 = coeff:1\nrho2 = coeff:0\nr = 0\n"),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("exactly one"));

    // V@R in the scenario solver is a hard error.
    let csv = write(&dir, "s.csv", WORKED_SCENARIOS);
    let cfg = write(
        &dir,
        "var.cfg",
        &format!(
            "mode = scenario\nscenario_csv = {}\nrho1 = var:0.05\nrho2 = neg_expectation\nr = 0\n",
            csv.display()
        ),
    );
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("Gaussian coefficient"), "stderr: {}", stderr_of(&out));

    // Unknown command and missing config.
    let out = run(&["bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["solve"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_document() {
    let dir = workdir("outfile");
    let cfg = write(
        &dir,
        "p.cfg",
        &format!("mode = gaussian\n{TEST_MARKET}rho1 = coeff:2.0627\nrho2 = coeff:0\nr = 0\n"),
    );
    let out_path = dir.join("result.txt");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(file, stdout_of(&out));
    assert_eq!(doc_value(&file, "tag"), Some("optimal"));
}
