//! Independent brute-force verification: frontier grid search, lattice
//! search over scenario portfolios, and deterministic Gaussian
//! scenario sampling.
//!
//! Grid evaluation is data-parallel when the `parallel` feature is on.
//! Reductions are argmin by (value, index), a total order, so the
//! parallel and sequential paths return bit-identical reports; each
//! entry point also has an always-sequential twin used by the benches.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::gaussian::GaussianProblem;
use crate::markowitz::GaussianMarket;
use crate::risk::{RiskError, ScenarioSpace};
use crate::rng::CounterRng;
use crate::scenario::ScenarioProblem;

/// Feasibility fuzz applied to the risk bound on grid points.
const FEAS_FUZZ: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// No lattice point satisfied the risk bound.
    EmptyFeasibleGrid,
    /// Scenario lattice search only supports two or three assets.
    UnsupportedDimension(usize),
    BadArguments(String),
    Risk(RiskError),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::EmptyFeasibleGrid => write!(f, "no feasible point on the grid"),
            OracleError::UnsupportedDimension(n) => {
                write!(f, "lattice oracle supports 2 or 3 assets, got {}", n)
            }
            OracleError::BadArguments(msg) => write!(f, "{}", msg),
            OracleError::Risk(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<RiskError> for OracleError {
    fn from(e: RiskError) -> Self {
        OracleError::Risk(e)
    }
}

/// Outcome of a brute-force search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub best_value: f64,
    /// Budget holds by construction: the last weight is one minus the rest.
    pub best_portfolio: Vec<f64>,
    pub grid_resolution: f64,
    pub feasible_count: usize,
    /// Constraint violation at the reported point (zero when feasible
    /// without fuzz).
    pub violation_at_best: f64,
    /// The best point touched the search box, hinting the true problem
    /// may improve beyond it.
    pub on_box_boundary: bool,
}

/// Deterministic argmin over `0..count` of an optional objective,
/// ties broken by the smaller index. Returns the winning index, its
/// value and the number of `Some` entries.
fn argmin_seq<F>(count: usize, eval: F) -> (Option<(f64, usize)>, usize)
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    let mut best: Option<(f64, usize)> = None;
    let mut feasible = 0usize;
    for i in 0..count {
        if let Some(v) = eval(i) {
            feasible += 1;
            if best.map_or(true, |(bv, bi)| v < bv || (v == bv && i < bi)) {
                best = Some((v, i));
            }
        }
    }
    (best, feasible)
}

#[cfg(feature = "parallel")]
fn argmin_par<F>(count: usize, eval: F) -> (Option<(f64, usize)>, usize)
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let entry = eval(i).map(|v| (v, i));
            (entry, entry.map_or(0usize, |_| 1))
        })
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let merged = match (a, b) {
                    (Some((va, ia)), Some((vb, ib))) => {
                        if vb < va || (vb == va && ib < ia) {
                            Some((vb, ib))
                        } else {
                            Some((va, ia))
                        }
                    }
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                };
                (merged, ca + cb)
            },
        )
}

fn argmin<F>(count: usize, eval: F) -> (Option<(f64, usize)>, usize)
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        argmin_par(count, eval)
    }
    #[cfg(not(feature = "parallel"))]
    {
        argmin_seq(count, eval)
    }
}

fn gaussian_grid_report(
    problem: &GaussianProblem<'_>,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
    best: Option<(f64, usize)>,
    feasible: usize,
) -> Result<OracleReport, OracleError> {
    let (_, best_idx) = best.ok_or(OracleError::EmptyFeasibleGrid)?;
    let step = (mu_hi - mu_lo) / (count - 1) as f64;
    let market = problem.market();
    let mu = mu_lo + step * best_idx as f64;
    let sigma = market.sigma_of_mu(mu);
    Ok(OracleReport {
        best_value: problem.rho1() * sigma - mu,
        best_portfolio: market.min_variance_portfolio(mu),
        grid_resolution: step,
        feasible_count: feasible,
        violation_at_best: (problem.rho2() * sigma - mu - problem.risk_bound()).max(0.0),
        on_box_boundary: best_idx == 0 || best_idx + 1 == count,
    })
}

fn gaussian_eval<'a>(
    problem: &'a GaussianProblem<'a>,
    mu_lo: f64,
    step: f64,
) -> impl Fn(usize) -> Option<f64> + Sync + 'a {
    let rho1 = problem.rho1();
    let rho2 = problem.rho2();
    let r = problem.risk_bound();
    let market = problem.market();
    move |i: usize| {
        let mu = mu_lo + step * i as f64;
        let sigma = market.sigma_of_mu(mu);
        if rho2 * sigma - mu <= r + FEAS_FUZZ {
            Some(rho1 * sigma - mu)
        } else {
            None
        }
    }
}

/// Scans the frontier objective ρ₁σ(μ) − μ over an equally spaced μ
/// grid, filtering by the risk bound. Minimizing over the frontier is
/// exhaustive: for every μ the frontier point has the smallest σ, which
/// simultaneously minimizes the objective and the constraint.
pub fn grid_oracle_gaussian(
    problem: &GaussianProblem<'_>,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
) -> Result<OracleReport, OracleError> {
    check_gaussian_grid_args(mu_lo, mu_hi, count)?;
    let step = (mu_hi - mu_lo) / (count - 1) as f64;
    let (best, feasible) = argmin(count, gaussian_eval(problem, mu_lo, step));
    gaussian_grid_report(problem, mu_lo, mu_hi, count, best, feasible)
}

/// Always-sequential variant of [`grid_oracle_gaussian`].
pub fn grid_oracle_gaussian_seq(
    problem: &GaussianProblem<'_>,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
) -> Result<OracleReport, OracleError> {
    check_gaussian_grid_args(mu_lo, mu_hi, count)?;
    let step = (mu_hi - mu_lo) / (count - 1) as f64;
    let (best, feasible) = argmin_seq(count, gaussian_eval(problem, mu_lo, step));
    gaussian_grid_report(problem, mu_lo, mu_hi, count, best, feasible)
}

/// Always-parallel variant of [`grid_oracle_gaussian`].
#[cfg(feature = "parallel")]
pub fn grid_oracle_gaussian_par(
    problem: &GaussianProblem<'_>,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
) -> Result<OracleReport, OracleError> {
    check_gaussian_grid_args(mu_lo, mu_hi, count)?;
    let step = (mu_hi - mu_lo) / (count - 1) as f64;
    let (best, feasible) = argmin_par(count, gaussian_eval(problem, mu_lo, step));
    gaussian_grid_report(problem, mu_lo, mu_hi, count, best, feasible)
}

fn check_gaussian_grid_args(mu_lo: f64, mu_hi: f64, count: usize) -> Result<(), OracleError> {
    if count < 100 {
        return Err(OracleError::BadArguments(format!(
            "frontier grid needs at least 100 points, got {}",
            count
        )));
    }
    if !(mu_lo < mu_hi) {
        return Err(OracleError::BadArguments(format!(
            "need mu_lo < mu_hi, got [{}, {}]",
            mu_lo, mu_hi
        )));
    }
    Ok(())
}

/// Shortsell box half-width for the lattice oracle; the portfolio set
/// itself is unbounded, so the box is reported when it binds.
pub const DEFAULT_SHORTSELL_BOX: f64 = 2.0;

/// Exhaustive lattice evaluation of ρ₁(wᵀX) with the feasibility
/// filter ρ₂(wᵀX) ≤ r, over the unit simplex (long-only) or the box
/// [−B, 1+B]ⁿ intersected with the budget plane.
pub fn grid_oracle_scenario(
    problem: &ScenarioProblem<'_>,
    step: f64,
) -> Result<OracleReport, OracleError> {
    scenario_lattice(problem, step, DEFAULT_SHORTSELL_BOX, true)
}

/// Always-sequential variant of [`grid_oracle_scenario`].
pub fn grid_oracle_scenario_seq(
    problem: &ScenarioProblem<'_>,
    step: f64,
) -> Result<OracleReport, OracleError> {
    scenario_lattice(problem, step, DEFAULT_SHORTSELL_BOX, false)
}

/// Lattice oracle with an explicit shortsell box half-width.
pub fn grid_oracle_scenario_boxed(
    problem: &ScenarioProblem<'_>,
    step: f64,
    shortsell_box: f64,
) -> Result<OracleReport, OracleError> {
    scenario_lattice(problem, step, shortsell_box, true)
}

fn scenario_lattice(
    problem: &ScenarioProblem<'_>,
    step: f64,
    shortsell_box: f64,
    allow_parallel: bool,
) -> Result<OracleReport, OracleError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(OracleError::BadArguments(format!("bad lattice step {}", step)));
    }
    let n = problem.space().num_assets();
    if n > 3 {
        return Err(OracleError::UnsupportedDimension(n));
    }
    let (lo, hi) = if problem.long_only() {
        (0.0, 1.0)
    } else {
        (-shortsell_box, 1.0 + shortsell_box)
    };
    let per_axis = ((hi - lo) / step).floor() as usize + 1;

    let space = problem.space();
    let probs = space.probs();
    let rho1 = problem.rho1();
    let rho2 = problem.rho2();
    let r = problem.risk_bound();

    let weights_at = move |flat: usize| -> Option<Vec<f64>> {
        let mut w = Vec::with_capacity(n);
        match n {
            2 => {
                let w1 = lo + step * flat as f64;
                let w2 = 1.0 - w1;
                if w2 < lo - 1e-12 || w2 > hi + 1e-12 {
                    return None;
                }
                w.push(w1);
                w.push(w2);
            }
            3 => {
                let i = flat / per_axis;
                let j = flat % per_axis;
                let w1 = lo + step * i as f64;
                let w2 = lo + step * j as f64;
                let w3 = 1.0 - w1 - w2;
                if w3 < lo - 1e-12 || w3 > hi + 1e-12 {
                    return None;
                }
                w.push(w1);
                w.push(w2);
                w.push(w3);
            }
            _ => return None,
        }
        Some(w)
    };

    let eval = move |flat: usize| -> Option<f64> {
        let w = weights_at(flat)?;
        let y = space.portfolio_returns(&w);
        let g2 = rho2.evaluate_scenario(&y, probs).ok()?;
        if g2 <= r + FEAS_FUZZ {
            rho1.evaluate_scenario(&y, probs).ok()
        } else {
            None
        }
    };

    let total = if n == 2 { per_axis } else { per_axis * per_axis };
    let (best, feasible) = if allow_parallel {
        argmin(total, &eval)
    } else {
        argmin_seq(total, &eval)
    };
    let (best_value, best_idx) = best.ok_or(OracleError::EmptyFeasibleGrid)?;
    let w = weights_at(best_idx).expect("winning index produced weights");
    let y = space.portfolio_returns(&w);
    let violation =
        (rho2.evaluate_scenario(&y, probs)? - r).max(0.0);
    let edge = step * 1.5;
    let on_box_boundary =
        !problem.long_only() && w.iter().any(|&wi| wi - lo < edge || hi - wi < edge);
    Ok(OracleReport {
        best_value,
        best_portfolio: w,
        grid_resolution: step,
        feasible_count: feasible,
        violation_at_best: violation,
        on_box_boundary,
    })
}

/// K equiprobable draws from N(m, C) through the Cholesky factor and a
/// counter-based generator: a fixed seed reproduces the matrix bit for
/// bit, in any thread schedule.
pub fn sample_gaussian(
    market: &GaussianMarket,
    k: usize,
    seed: u64,
) -> Result<ScenarioSpace, OracleError> {
    sample_impl(market, k, seed, true)
}

/// Always-sequential variant of [`sample_gaussian`].
pub fn sample_gaussian_seq(
    market: &GaussianMarket,
    k: usize,
    seed: u64,
) -> Result<ScenarioSpace, OracleError> {
    sample_impl(market, k, seed, false)
}

fn sample_impl(
    market: &GaussianMarket,
    k: usize,
    seed: u64,
    allow_parallel: bool,
) -> Result<ScenarioSpace, OracleError> {
    if k < 2 {
        return Err(OracleError::BadArguments(format!(
            "need at least 2 scenarios, got {}",
            k
        )));
    }
    let n = market.num_assets();
    let rng = CounterRng::new(seed);
    let row = |idx: usize| -> Vec<f64> {
        let z: Vec<f64> = (0..n).map(|j| rng.normal((idx * n + j) as u64)).collect();
        let correlated = market.cholesky().lower_matvec(&z);
        market
            .mean()
            .iter()
            .zip(&correlated)
            .map(|(&m, &c)| m + c)
            .collect()
    };

    let rows: Vec<Vec<f64>>;
    #[cfg(feature = "parallel")]
    {
        rows = if allow_parallel {
            (0..k).into_par_iter().map(row).collect()
        } else {
            (0..k).map(row).collect()
        };
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = allow_parallel;
        rows = (0..k).map(row).collect();
    }

    ScenarioSpace::equiprobable(rows).map_err(OracleError::from)
}
