//! Subcommand implementations. Each returns the process exit code.

use std::path::{Path, PathBuf};

use birisk::gaussian::{GaussianProblem, SolveOutcome};
use birisk::markowitz::GaussianMarket;
use birisk::oracle::{
    grid_oracle_gaussian, grid_oracle_scenario_boxed, sample_gaussian, OracleError,
};
use birisk::risk::ScenarioSpace;
use birisk::scenario::{ScenarioOutcome, ScenarioProblem, SlaterStatus};

use crate::config::{ConfigError, MarketSource, Mode, ProblemConfig};
use crate::csvio::{frontier_csv, read_returns_csv, read_scenario_csv};
use crate::report::{
    exit_code_for_tag, fmt_num, fmt_vec, gaussian_document, scenario_document, EpsilonSolution,
};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Message(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{}", e),
            CliError::Message(m) => write!(f, "{}", m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn msg(e: impl std::fmt::Display) -> CliError {
    CliError::Message(e.to_string())
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub epsilon: Option<f64>,
}

impl Flags {
    fn load_config(&self) -> Result<ProblemConfig, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Message("--config PATH is required".into()))?;
        Ok(ProblemConfig::load(path)?)
    }

    fn out_path<'a>(&'a self, cfg: &'a ProblemConfig) -> Option<&'a Path> {
        self.out.as_deref().or(cfg.out.as_deref())
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    print!("{}", contents);
    if let Some(path) = path {
        std::fs::write(path, contents)
            .map_err(|e| CliError::Message(format!("cannot write {}: {}", path.display(), e)))?;
    }
    Ok(())
}

/// Sample mean and unbiased sample covariance of observation rows.
fn estimate_moments(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let t = rows.len();
    let n = rows[0].len();
    let mut mean = vec![0.0; n];
    for row in rows {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= t as f64;
    }
    let mut cov = vec![vec![0.0; n]; n];
    for row in rows {
        for i in 0..n {
            let di = row[i] - mean[i];
            for j in i..n {
                cov[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            cov[i][j] /= (t - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    (mean, cov)
}

fn market_file_contents(mean: &[f64], cov: &[Vec<f64>], origin: &str) -> String {
    let cov_text = cov
        .iter()
        .map(|row| row.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(" ; ");
    format!("# market estimated from {}\nmean = {}\ncov = {}\n", origin, fmt_vec(mean), cov_text)
}

fn load_market_file(path: &Path) -> Result<GaussianMarket, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Message(format!("cannot read {}: {}", path.display(), e)))?;
    let map = crate::config::parse_key_values(&text)?;
    let mean = map
        .get("mean")
        .ok_or(CliError::Message("market file is missing `mean`".into()))?;
    let cov = map
        .get("cov")
        .ok_or(CliError::Message("market file is missing `cov`".into()))?;
    let mean: Vec<f64> = mean
        .1
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Message(format!("market file mean: {}", e)))?;
    let cov: Vec<Vec<f64>> = cov
        .1
        .split(';')
        .map(|row| row.split_whitespace().map(|t| t.parse::<f64>()).collect())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Message(format!("market file cov: {}", e)))?;
    GaussianMarket::build(mean, cov).map_err(msg)
}

fn load_gaussian_market(cfg: &ProblemConfig) -> Result<GaussianMarket, CliError> {
    match &cfg.source {
        MarketSource::Inline { mean, cov } => {
            GaussianMarket::build(mean.clone(), cov.clone()).map_err(msg)
        }
        MarketSource::MarketFile(path) => load_market_file(path),
        MarketSource::ReturnsCsv(path) => {
            let rows = read_returns_csv(path).map_err(msg)?;
            let (mean, cov) = estimate_moments(&rows);
            GaussianMarket::build(mean, cov).map_err(msg)
        }
        MarketSource::ScenarioCsv(_) => {
            Err(CliError::Message("gaussian mode cannot use a scenario file".into()))
        }
    }
}

pub fn cmd_estimate(flags: &Flags) -> Result<i32, CliError> {
    let cfg = flags.load_config()?;
    let path = match (&cfg.source, &cfg.returns_csv_for_estimate) {
        (MarketSource::ReturnsCsv(p), _) | (_, Some(p)) => p.clone(),
        _ => return Err(CliError::Message("estimate requires `returns_csv`".into())),
    };
    let rows = read_returns_csv(&path).map_err(msg)?;
    let (mean, cov) = estimate_moments(&rows);
    // Market invariants gate the estimate.
    GaussianMarket::build(mean.clone(), cov.clone()).map_err(msg)?;
    let doc = market_file_contents(&mean, &cov, &format!("{} ({} rows)", path.display(), rows.len()));
    let out = flags.out_path(&cfg);
    if out.is_none() {
        return Err(CliError::Message("estimate needs an output path (--out or `out`)".into()));
    }
    write_output(out, &doc)?;
    Ok(0)
}

/// A feasible portfolio within `epsilon` of an unattained infimum,
/// found by walking the frontier outward until both the value gap and
/// the risk bound clear their targets.
fn epsilon_solution(
    market: &GaussianMarket,
    rho1: f64,
    rho2: f64,
    r: f64,
    infimum: f64,
    epsilon: f64,
) -> Option<EpsilonSolution> {
    if !(epsilon > 0.0) {
        return None;
    }
    let corner_mu = market.beta() / market.gamma();
    let c2 = market.delta() / (market.gamma() * market.gamma());
    let mut t = (c2 / (2.0 * epsilon)).max(c2.sqrt());
    for _ in 0..200 {
        let mu = corner_mu + t;
        let sigma = market.sigma_of_mu(mu);
        let value = rho1 * sigma - mu;
        if value <= infimum + epsilon && rho2 * sigma - mu <= r {
            return Some(EpsilonSolution {
                epsilon,
                weights: market.min_variance_portfolio(mu),
                sigma,
                mu,
                value,
            });
        }
        t *= 2.0;
    }
    None
}

pub fn cmd_solve(flags: &Flags) -> Result<i32, CliError> {
    let cfg = flags.load_config()?;
    match cfg.mode {
        Mode::Gaussian => {
            let market = load_gaussian_market(&cfg)?;
            let rho1 = cfg.require_rho1()?.gaussian_coefficient();
            let rho2 = cfg.require_rho2()?.gaussian_coefficient();
            let r = cfg.require_r()?;
            let problem = GaussianProblem::new(&market, rho1, rho2, r).map_err(msg)?;
            let thresholds = problem.thresholds();
            let outcome = problem.solve();
            let eps = match (&outcome, flags.epsilon) {
                (SolveOutcome::InfimumNotAttained { value }, Some(e)) => {
                    epsilon_solution(&market, rho1, rho2, r, *value, e)
                }
                _ => None,
            };
            let doc = gaussian_document(rho1, rho2, r, &thresholds, &outcome, eps.as_ref());
            write_output(flags.out_path(&cfg), &doc)?;
            Ok(exit_code_for_tag(outcome.tag_name()))
        }
        Mode::Scenario => {
            let (space, outcome) = solve_scenario_config(&cfg)?;
            let _ = space;
            let doc = scenario_document(cfg.require_r()?, cfg.long_only, &outcome);
            write_output(flags.out_path(&cfg), &doc)?;
            Ok(exit_code_for_tag(outcome.tag_name()))
        }
    }
}

fn scenario_space_from(cfg: &ProblemConfig) -> Result<ScenarioSpace, CliError> {
    match &cfg.source {
        MarketSource::ScenarioCsv(path) => read_scenario_csv(path).map_err(msg),
        _ => Err(CliError::Message("scenario mode requires `scenario_csv`".into())),
    }
}

fn solve_scenario_config(
    cfg: &ProblemConfig,
) -> Result<(ScenarioSpace, ScenarioOutcome), CliError> {
    let space = scenario_space_from(cfg)?;
    let rho1 = *cfg
        .require_rho1()?
        .spec()
        .ok_or_else(|| CliError::Message("scenario mode needs a named rho1".into()))?;
    let rho2 = *cfg
        .require_rho2()?
        .spec()
        .ok_or_else(|| CliError::Message("scenario mode needs a named rho2".into()))?;
    let r = cfg.require_r()?;
    let problem = ScenarioProblem::new(&space, rho1, rho2, r, cfg.long_only).map_err(msg)?;
    let outcome = problem.solve().map_err(msg)?;
    Ok((space, outcome))
}

pub fn cmd_frontier(flags: &Flags) -> Result<i32, CliError> {
    let cfg = flags.load_config()?;
    let market = load_gaussian_market(&cfg)?;
    let corner_mu = market.corner().mu;
    let mu_lo = cfg.mu_lo.unwrap_or(corner_mu - 0.1);
    let mu_hi = cfg.mu_hi.unwrap_or(corner_mu + 0.3);
    let count = flags.grid.or(cfg.count).unwrap_or(101);
    let rows = market.frontier_points(mu_lo, mu_hi, count).map_err(msg)?;
    let doc = frontier_csv(&market, &rows);
    write_output(flags.out_path(&cfg), &doc)?;
    Ok(0)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report_checks(header: &str, checks: &[Check]) -> i32 {
    println!("{}", header);
    let mut all = true;
    for c in checks {
        println!("  [{}] {} — {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    println!("verify: {}", if all { "PASS" } else { "FAIL" });
    if all {
        0
    } else {
        1
    }
}

pub fn cmd_verify(flags: &Flags) -> Result<i32, CliError> {
    let cfg = flags.load_config()?;
    match cfg.mode {
        Mode::Gaussian => verify_gaussian(flags, &cfg),
        Mode::Scenario => verify_scenario(flags, &cfg),
    }
}

fn verify_gaussian(flags: &Flags, cfg: &ProblemConfig) -> Result<i32, CliError> {
    let market = load_gaussian_market(cfg)?;
    let rho1 = cfg.require_rho1()?.gaussian_coefficient();
    let rho2 = cfg.require_rho2()?.gaussian_coefficient();
    let r = cfg.require_r()?;
    let problem = GaussianProblem::new(&market, rho1, rho2, r).map_err(msg)?;
    let outcome = problem.solve();
    let grid = flags.grid.or(cfg.count).unwrap_or(4001).max(100);
    let corner_mu = market.corner().mu;
    let mut checks = Vec::new();

    match &outcome {
        SolveOutcome::Optimal(opt) => {
            let report = grid_oracle_gaussian(&problem, opt.mu - 0.5, opt.mu + 0.5, grid)
                .map_err(msg)?;
            checks.push(Check {
                name: "oracle dominance (1e-5)",
                passed: report.best_value >= opt.value - 1e-5,
                detail: format!(
                    "solver {} vs grid best {} (gap {})",
                    fmt_num(opt.value),
                    fmt_num(report.best_value),
                    fmt_num(report.best_value - opt.value)
                ),
            });
            checks.push(Check {
                name: "budget",
                passed: (opt.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-10,
                detail: format!("1'w = {}", fmt_num(opt.weights.iter().sum::<f64>())),
            });
            checks.push(Check {
                name: "risk bound",
                passed: rho2 * opt.sigma - opt.mu <= r + 1e-9,
                detail: format!("rho2*sigma - mu = {}", fmt_num(rho2 * opt.sigma - opt.mu)),
            });
            checks.push(Check {
                name: "sigma consistency",
                passed: (market.portfolio_sigma(&opt.weights) - opt.sigma).abs() <= 1e-9,
                detail: format!(
                    "|sqrt(w'Cw) - sigma| = {}",
                    fmt_num((market.portfolio_sigma(&opt.weights) - opt.sigma).abs())
                ),
            });
            if let Some(k) = cfg.bridge_samples {
                checks.push(bridge_check(cfg, &market, &opt.weights, k, flags.seed)?);
            }
        }
        SolveOutcome::Infeasible => {
            let empty = matches!(
                grid_oracle_gaussian(&problem, corner_mu - 2.0, corner_mu + 2.0, grid),
                Err(OracleError::EmptyFeasibleGrid)
            );
            checks.push(Check {
                name: "oracle agrees infeasible",
                passed: empty,
                detail: "no feasible grid point".into(),
            });
        }
        SolveOutcome::Unbounded => {
            let narrow = grid_oracle_gaussian(&problem, corner_mu, corner_mu + 5.0, grid)
                .map_err(msg)?;
            let wide = grid_oracle_gaussian(&problem, corner_mu, corner_mu + 50.0, grid)
                .map_err(msg)?;
            checks.push(Check {
                name: "widening grids keep improving",
                passed: wide.best_value < narrow.best_value - 1.0,
                detail: format!(
                    "best {} -> {}",
                    fmt_num(narrow.best_value),
                    fmt_num(wide.best_value)
                ),
            });
        }
        SolveOutcome::InfimumNotAttained { value } => {
            let wide = grid_oracle_gaussian(&problem, corner_mu, corner_mu + 50.0, grid)
                .map_err(msg)?;
            checks.push(Check {
                name: "grid approaches the infimum from above",
                passed: wide.best_value >= value - 1e-6 && wide.best_value - value < 0.1,
                detail: format!("grid best {} vs infimum {}", fmt_num(wide.best_value), fmt_num(*value)),
            });
        }
    }
    Ok(report_checks(
        &format!("verify gaussian: tag = {}", outcome.tag_name()),
        &checks,
    ))
}

/// Samples the Gaussian market, solves the scenario dual on the sample
/// and compares portfolios.
fn bridge_check(
    cfg: &ProblemConfig,
    market: &GaussianMarket,
    closed_form: &[f64],
    k: usize,
    seed_flag: Option<u64>,
) -> Result<Check, CliError> {
    let rho1 = cfg
        .require_rho1()?
        .spec()
        .copied()
        .ok_or_else(|| CliError::Message("bridge check needs a named rho1, not a coefficient".into()))?;
    let rho2 = cfg
        .require_rho2()?
        .spec()
        .copied()
        .ok_or_else(|| CliError::Message("bridge check needs a named rho2, not a coefficient".into()))?;
    let seed = seed_flag.or(cfg.seed).unwrap_or(42);
    let space = sample_gaussian(market, k, seed).map_err(msg)?;
    let problem =
        ScenarioProblem::new(&space, rho1, rho2, cfg.require_r()?, cfg.long_only).map_err(msg)?;
    match problem.solve().map_err(msg)? {
        ScenarioOutcome::Optimal(sol) => {
            let dist = sol
                .portfolio
                .iter()
                .zip(closed_form)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            Ok(Check {
                name: "gaussian/scenario bridge (0.05)",
                passed: dist <= 0.05,
                detail: format!(
                    "l-inf distance {} over {} scenarios (seed {})",
                    fmt_num(dist),
                    k,
                    seed
                ),
            })
        }
        other => Ok(Check {
            name: "gaussian/scenario bridge (0.05)",
            passed: false,
            detail: format!("scenario solve returned {}", other.tag_name()),
        }),
    }
}

fn verify_scenario(flags: &Flags, cfg: &ProblemConfig) -> Result<i32, CliError> {
    let (space, outcome) = solve_scenario_config(cfg)?;
    let rho1 = *cfg.require_rho1()?.spec().unwrap();
    let rho2 = *cfg.require_rho2()?.spec().unwrap();
    let r = cfg.require_r()?;
    let problem = ScenarioProblem::new(&space, rho1, rho2, r, cfg.long_only).map_err(msg)?;
    let step = cfg.resolution.unwrap_or(1.0 / 400.0);
    let _ = flags;
    let mut checks = Vec::new();

    match &outcome {
        ScenarioOutcome::Optimal(sol) => {
            match grid_oracle_scenario_boxed(&problem, step, 2.0) {
                Ok(report) => {
                    checks.push(Check {
                        name: "oracle dominance (1e-4)",
                        passed: report.best_value >= sol.value - 1e-4,
                        detail: format!(
                            "solver {} vs lattice best {}{}",
                            fmt_num(sol.value),
                            fmt_num(report.best_value),
                            if report.on_box_boundary { " (at search box boundary)" } else { "" }
                        ),
                    });
                }
                Err(OracleError::UnsupportedDimension(n)) => {
                    checks.push(Check {
                        name: "oracle dominance (1e-4)",
                        passed: true,
                        detail: format!("skipped: lattice oracle supports n <= 3, got {}", n),
                    });
                }
                Err(e) => return Err(msg(e)),
            }
            checks.push(Check {
                name: "budget",
                passed: sol.budget_residual <= 1e-8,
                detail: format!("|1'w - 1| = {}", fmt_num(sol.budget_residual)),
            });
            checks.push(Check {
                name: "risk bound",
                passed: sol.rho2_value <= r + 1e-6,
                detail: format!("rho2 = {} vs r = {}", fmt_num(sol.rho2_value), fmt_num(r)),
            });
            match &sol.slater {
                SlaterStatus::Satisfied { .. } => checks.push(Check {
                    name: "duality gap (1e-6)",
                    passed: sol.duality_gap <= 1e-6,
                    detail: format!("gap {}", fmt_num(sol.duality_gap)),
                }),
                SlaterStatus::Violated { min_rho2 } => checks.push(Check {
                    name: "duality gap (report only: Slater violated)",
                    passed: true,
                    detail: format!(
                        "gap {} not enforced; min rho2 = {}",
                        fmt_num(sol.duality_gap),
                        fmt_num(*min_rho2)
                    ),
                }),
            }
            if cfg.long_only {
                let min_w = sol.portfolio.iter().fold(f64::INFINITY, |a, &w| a.min(w));
                checks.push(Check {
                    name: "long-only weights",
                    passed: min_w >= -1e-9,
                    detail: format!("min weight {}", fmt_num(min_w)),
                });
            }
        }
        ScenarioOutcome::Infeasible { .. } => {
            let empty = matches!(
                grid_oracle_scenario_boxed(&problem, step, 2.0),
                Err(OracleError::EmptyFeasibleGrid)
            );
            checks.push(Check {
                name: "oracle agrees infeasible",
                passed: empty,
                detail: "no feasible lattice point".into(),
            });
        }
        ScenarioOutcome::DualInfeasible { .. } => {
            checks.push(Check {
                name: "diagnostic",
                passed: true,
                detail: "dual infeasible: primal unbounded or infimum not attained".into(),
            });
        }
    }
    Ok(report_checks(
        &format!("verify scenario: tag = {}", outcome.tag_name()),
        &checks,
    ))
}
