//! Finite-scenario risk-risk problems solved through the dual LP.
//!
//! On a finite probability space the dual of the risk-risk problem is a
//! linear program over a density U in the dual set of the objective
//! measure, a cone element M for the constraint measure and a free
//! scalar λ:
//!
//! ```text
//!   maximize  −r·E[M] − λ
//!   s.t.      E[U X_i] + E[M X_i] − λ = 0   (one row per asset)
//!             U ∈ 𝒟(𝒬₁),  M ∈ cone(𝒟(𝒬₂)),  λ ∈ ℝ
//! ```
//!
//! The optimal portfolio is the vector of Lagrange multipliers of the
//! asset-balance rows at dual optimality, which the simplex reports
//! from its final basis. The long-only variant relaxes the balance rows
//! to ≤ 0 and the multipliers become nonnegative.

use crate::linalg::dot;
use crate::lp::{simplex_solve, LinearProgram, LpError, LpSolution, LpStatus, RowOp};
use crate::risk::{dual_density_bounds, RiskError, RiskKind, RiskSpec, ScenarioSpace};

/// A strictly feasible point must clear the bound by this margin.
const SLATER_MARGIN: f64 = 1e-10;
/// Box placed on portfolio weights inside the Slater LP; the feasible
/// set of the risk-risk problem itself is unbounded.
const SLATER_BOX: f64 = 1e3;
/// Interior floor for the long-only Slater point.
const SLATER_INTERIOR_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Risk(RiskError),
    Lp(LpError),
    Dimension(String),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Risk(e) => write!(f, "{}", e),
            ScenarioError::Lp(e) => write!(f, "{}", e),
            ScenarioError::Dimension(msg) => write!(f, "{}", msg),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<RiskError> for ScenarioError {
    fn from(e: RiskError) -> Self {
        ScenarioError::Risk(e)
    }
}

impl From<LpError> for ScenarioError {
    fn from(e: LpError) -> Self {
        ScenarioError::Lp(e)
    }
}

/// A scenario-space instance of the risk-risk problem.
#[derive(Debug, Clone)]
pub struct ScenarioProblem<'a> {
    space: &'a ScenarioSpace,
    rho1: RiskSpec,
    rho2: RiskSpec,
    r: f64,
    long_only: bool,
}

/// Variables of the solved dual, mapped back to density form.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub status: LpStatus,
    /// Objective-measure density U (all ones when it is the singleton).
    pub u: Vec<f64>,
    /// Constraint-measure cone element M per scenario.
    pub m: Vec<f64>,
    pub lambda: f64,
    pub objective: f64,
    /// Multipliers for every row of the dual LP.
    pub row_duals: Vec<f64>,
    /// Basic variable per row at the final basis.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlaterStatus {
    /// A strictly feasible portfolio with its constraint value.
    Satisfied { strict_point: Vec<f64>, rho2_value: f64 },
    Violated { min_rho2: f64 },
}

impl SlaterStatus {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, SlaterStatus::Satisfied { .. })
    }
}

/// An optimal scenario solve with its certificates.
#[derive(Debug, Clone)]
pub struct ScenarioSolution {
    /// Recovered portfolio: multipliers of the asset-balance rows,
    /// oriented so the weights sum to +1 (long-only: tiny negative
    /// multipliers are clipped to zero).
    pub portfolio: Vec<f64>,
    /// Primal objective ρ₁((w*)ᵀX).
    pub value: f64,
    pub dual_objective: f64,
    /// |primal − dual|; meaningful as a zero-gap certificate only when
    /// Slater's condition holds.
    pub duality_gap: f64,
    /// Constraint measure evaluated at the recovered portfolio.
    pub rho2_value: f64,
    /// |1ᵀw − 1| before any clipping.
    pub budget_residual: f64,
    pub slater: SlaterStatus,
    pub dual: DualSolution,
}

/// Every scenario instance maps to one of these.
#[derive(Debug, Clone)]
pub enum ScenarioOutcome {
    Optimal(Box<ScenarioSolution>),
    /// The dual is unbounded, so no portfolio satisfies the bound.
    Infeasible { slater: SlaterStatus },
    /// The dual is infeasible: the primal is unbounded or its infimum
    /// is not attained.
    DualInfeasible { slater: SlaterStatus },
}

impl ScenarioOutcome {
    pub fn tag_name(&self) -> &'static str {
        match self {
            ScenarioOutcome::Optimal(_) => "optimal",
            ScenarioOutcome::Infeasible { .. } => "infeasible",
            ScenarioOutcome::DualInfeasible { .. } => "unbounded",
        }
    }
}

/// Which of the two measures a subgradient query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichRisk {
    Objective,
    Constraint,
}

/// A maximizing density from the attainment set together with the
/// induced subgradient of w ↦ ρ(wᵀX).
#[derive(Debug, Clone)]
pub struct SubgradientReport {
    /// One vertex of the attainment set.
    pub density: Vec<f64>,
    /// E[−V·X]: a subgradient at the queried portfolio.
    pub subgradient: Vec<f64>,
    /// Ties at the tail boundary make the attainment set a face rather
    /// than a point.
    pub degenerate: bool,
}

impl<'a> ScenarioProblem<'a> {
    pub fn new(
        space: &'a ScenarioSpace,
        rho1: RiskSpec,
        rho2: RiskSpec,
        r: f64,
        long_only: bool,
    ) -> Result<Self, ScenarioError> {
        for spec in [&rho1, &rho2] {
            if spec.kind() == RiskKind::ValueAtRisk {
                return Err(ScenarioError::Risk(RiskError::VarOnScenarios));
            }
        }
        if !r.is_finite() {
            return Err(ScenarioError::Dimension(format!("risk bound must be finite, got {r}")));
        }
        Ok(ScenarioProblem { space, rho1, rho2, r, long_only })
    }

    pub fn space(&self) -> &ScenarioSpace {
        self.space
    }

    pub fn rho1(&self) -> &RiskSpec {
        &self.rho1
    }

    pub fn rho2(&self) -> &RiskSpec {
        &self.rho2
    }

    pub fn risk_bound(&self) -> f64 {
        self.r
    }

    pub fn long_only(&self) -> bool {
        self.long_only
    }

    /// Assembles the dual LP.
    ///
    /// Variable layout: the U block (absent when ρ₁ is the negative
    /// expectation, whose density is identically one and folds into the
    /// row constants), then the M block (a single scalar for a
    /// negative-expectation constraint, one variable per scenario for
    /// AV@R), then λ. The n asset-balance rows come first and are
    /// tagged in `asset_rows`.
    pub fn build_dual(&self) -> Result<LinearProgram, ScenarioError> {
        let k = self.space.num_scenarios();
        let n = self.space.num_assets();
        let probs = self.space.probs();
        let returns = self.space.returns();
        let mean = self.space.mean_returns();

        let u_len = match self.rho1.kind() {
            RiskKind::NegExpectation => 0,
            RiskKind::AverageValueAtRisk => k,
            RiskKind::ValueAtRisk => return Err(ScenarioError::Risk(RiskError::VarOnScenarios)),
        };
        let m_len = match self.rho2.kind() {
            RiskKind::NegExpectation => 1,
            RiskKind::AverageValueAtRisk => k,
            RiskKind::ValueAtRisk => return Err(ScenarioError::Risk(RiskError::VarOnScenarios)),
        };
        let nvars = u_len + m_len + 1;
        let lambda_col = nvars - 1;

        let mut maximize = vec![0.0; nvars];
        let mut lower = vec![0.0; nvars];
        let mut upper = vec![f64::INFINITY; nvars];

        if u_len > 0 {
            let bounds = dual_density_bounds(&self.rho1, k)?;
            lower[..k].copy_from_slice(&bounds.lower);
            upper[..k].copy_from_slice(&bounds.upper);
        }
        // Objective: −r·E[M] − λ.
        match self.rho2.kind() {
            RiskKind::NegExpectation => maximize[u_len] = -self.r,
            RiskKind::AverageValueAtRisk => {
                for j in 0..k {
                    maximize[u_len + j] = -self.r * probs[j];
                }
            }
            RiskKind::ValueAtRisk => unreachable!(),
        }
        maximize[lambda_col] = -1.0;
        lower[lambda_col] = f64::NEG_INFINITY;

        let mut lp = LinearProgram::new(maximize, lower, upper);
        let balance_op = if self.long_only { RowOp::Le } else { RowOp::Eq };

        // Asset-balance rows: E[U X_i] + E[M X_i] − λ = 0 (≤ 0 when
        // shortselling is excluded). An eliminated U contributes the
        // constant E[X_i], which moves to the right-hand side.
        for i in 0..n {
            let mut coeffs = vec![0.0; nvars];
            for kk in 0..k {
                let px = probs[kk] * returns[kk][i];
                if u_len > 0 {
                    coeffs[kk] = px;
                }
                match self.rho2.kind() {
                    RiskKind::NegExpectation => coeffs[u_len] += px,
                    RiskKind::AverageValueAtRisk => coeffs[u_len + kk] = px,
                    RiskKind::ValueAtRisk => unreachable!(),
                }
            }
            coeffs[lambda_col] = -1.0;
            let rhs = if u_len == 0 { -mean[i] } else { 0.0 };
            let row = lp.push_row(coeffs, balance_op, rhs);
            lp.asset_rows.push(row);
        }

        // Density normalization for an AV@R objective: Σ p_k U_k = 1.
        if u_len > 0 && dual_density_bounds(&self.rho1, k)?.normalization {
            let mut coeffs = vec![0.0; nvars];
            coeffs[..k].copy_from_slice(probs);
            lp.push_row(coeffs, RowOp::Eq, 1.0);
        }

        // Cone rows for an AV@R constraint: θ₂ M_j ≤ E[M] per scenario.
        if self.rho2.kind() == RiskKind::AverageValueAtRisk {
            let theta2 = self.rho2.theta().unwrap();
            for j in 0..k {
                let mut coeffs = vec![0.0; nvars];
                for kk in 0..k {
                    coeffs[u_len + kk] = -probs[kk];
                }
                coeffs[u_len + j] += theta2;
                lp.push_row(coeffs, RowOp::Le, 0.0);
            }
        }

        Ok(lp)
    }

    /// Solves the dual LP and recovers the portfolio from the
    /// asset-balance row multipliers.
    pub fn solve(&self) -> Result<ScenarioOutcome, ScenarioError> {
        let slater = self.check_slater()?;
        let lp = self.build_dual()?;
        let sol = simplex_solve(&lp)?;
        match sol.status {
            LpStatus::Unbounded => Ok(ScenarioOutcome::Infeasible { slater }),
            LpStatus::Infeasible => Ok(ScenarioOutcome::DualInfeasible { slater }),
            LpStatus::Optimal => {
                let solution = self.extract_solution(&lp, sol, slater)?;
                Ok(ScenarioOutcome::Optimal(Box::new(solution)))
            }
        }
    }

    fn extract_solution(
        &self,
        lp: &LinearProgram,
        sol: LpSolution,
        slater: SlaterStatus,
    ) -> Result<ScenarioSolution, ScenarioError> {
        let k = self.space.num_scenarios();
        let u_len = if self.rho1.kind() == RiskKind::NegExpectation { 0 } else { k };

        let mut portfolio: Vec<f64> =
            lp.asset_rows.iter().map(|&row| sol.row_duals[row]).collect();
        let sum: f64 = portfolio.iter().sum();
        if sum < 0.0 {
            for w in &mut portfolio {
                *w = -*w;
            }
        }
        let budget_residual = (portfolio.iter().sum::<f64>() - 1.0).abs();
        if self.long_only {
            for w in &mut portfolio {
                if *w < 0.0 && *w >= -1e-9 {
                    *w = 0.0;
                }
            }
        }

        let y = self.space.portfolio_returns(&portfolio);
        let value = self.rho1.evaluate_scenario(&y, self.space.probs())?;
        let rho2_value = self.rho2.evaluate_scenario(&y, self.space.probs())?;

        let u = if u_len == 0 { vec![1.0; k] } else { sol.x[..k].to_vec() };
        let m = match self.rho2.kind() {
            RiskKind::NegExpectation => vec![sol.x[u_len]; k],
            RiskKind::AverageValueAtRisk => sol.x[u_len..u_len + k].to_vec(),
            RiskKind::ValueAtRisk => unreachable!(),
        };
        let lambda = sol.x[sol.x.len() - 1];
        let dual_objective = sol.objective;

        Ok(ScenarioSolution {
            portfolio,
            value,
            dual_objective,
            duality_gap: (value - dual_objective).abs(),
            rho2_value,
            budget_residual,
            slater,
            dual: DualSolution {
                status: sol.status,
                u,
                m,
                lambda,
                objective: dual_objective,
                row_duals: sol.row_duals,
                basis: sol.basis,
                iterations: sol.iterations,
            },
        })
    }

    /// Minimizes ρ₂(wᵀX) over the (boxed) portfolio set and reports a
    /// strictly feasible point when the minimum clears the bound.
    ///
    /// Long-only problems additionally demand an interior point of the
    /// simplex, enforced through a small positive floor on the weights.
    pub fn check_slater(&self) -> Result<SlaterStatus, ScenarioError> {
        let (min_rho2, minimizer) = self.minimize_measure(&self.rho2)?;
        if min_rho2 < self.r - SLATER_MARGIN {
            Ok(SlaterStatus::Satisfied { strict_point: minimizer, rho2_value: min_rho2 })
        } else {
            Ok(SlaterStatus::Violated { min_rho2 })
        }
    }

    /// LP minimization of a coherent measure over the portfolio set:
    /// linear for the negative expectation, the scalar-minimization
    /// form for AV@R. Weights are boxed to keep the LP bounded.
    fn minimize_measure(&self, spec: &RiskSpec) -> Result<(f64, Vec<f64>), ScenarioError> {
        let k = self.space.num_scenarios();
        let n = self.space.num_assets();
        let probs = self.space.probs();
        let returns = self.space.returns();

        let (w_lo, w_hi) = if self.long_only {
            (SLATER_INTERIOR_EPS, 1.0)
        } else {
            (-SLATER_BOX, SLATER_BOX)
        };

        match spec.kind() {
            RiskKind::NegExpectation => {
                // min −E[wᵀX] = −max E[wᵀX].
                let mean = self.space.mean_returns();
                let mut lp =
                    LinearProgram::new(mean.clone(), vec![w_lo; n], vec![w_hi; n]);
                lp.push_row(vec![1.0; n], RowOp::Eq, 1.0);
                let sol = simplex_solve(&lp)?;
                if sol.status != LpStatus::Optimal {
                    return Ok((f64::INFINITY, Vec::new()));
                }
                Ok((-sol.objective, sol.x))
            }
            RiskKind::AverageValueAtRisk => {
                // Variables (w, t, s): min t + (1/θ)Σ p_k s_k with
                // s_k ≥ −wᵀX_k − t, s ≥ 0.
                let theta = spec.theta().unwrap();
                let nvars = n + 1 + k;
                let mut maximize = vec![0.0; nvars];
                maximize[n] = -1.0;
                for j in 0..k {
                    maximize[n + 1 + j] = -probs[j] / theta;
                }
                let mut lower = vec![w_lo; n];
                let mut upper = vec![w_hi; n];
                lower.push(f64::NEG_INFINITY);
                upper.push(f64::INFINITY);
                lower.extend(std::iter::repeat(0.0).take(k));
                upper.extend(std::iter::repeat(f64::INFINITY).take(k));
                let mut lp = LinearProgram::new(maximize, lower, upper);
                for j in 0..k {
                    let mut coeffs = vec![0.0; nvars];
                    for i in 0..n {
                        coeffs[i] = -returns[j][i];
                    }
                    coeffs[n] = -1.0;
                    coeffs[n + 1 + j] = -1.0;
                    lp.push_row(coeffs, RowOp::Le, 0.0);
                }
                lp.push_row(
                    (0..nvars).map(|i| if i < n { 1.0 } else { 0.0 }).collect(),
                    RowOp::Eq,
                    1.0,
                );
                let sol = simplex_solve(&lp)?;
                if sol.status != LpStatus::Optimal {
                    return Ok((f64::INFINITY, Vec::new()));
                }
                Ok((-sol.objective, sol.x[..n].to_vec()))
            }
            RiskKind::ValueAtRisk => Err(ScenarioError::Risk(RiskError::VarOnScenarios)),
        }
    }

    /// Unconstrained minimum of the objective measure over the
    /// portfolio set; used to decide whether the risk constraint must
    /// be active at an optimum.
    pub fn minimize_objective(&self) -> Result<(f64, Vec<f64>), ScenarioError> {
        self.minimize_measure(&self.rho1)
    }

    /// Maximizer of E[−V·wᵀX] over the dual density set of the chosen
    /// measure, with the induced subgradient E[−VX].
    pub fn subgradient_attainment(
        &self,
        weights: &[f64],
        which: WhichRisk,
    ) -> Result<SubgradientReport, ScenarioError> {
        let spec = match which {
            WhichRisk::Objective => &self.rho1,
            WhichRisk::Constraint => &self.rho2,
        };
        let k = self.space.num_scenarios();
        let n = self.space.num_assets();
        if weights.len() != n {
            return Err(ScenarioError::Dimension(format!(
                "portfolio has {} weights, space has {} assets",
                weights.len(),
                n
            )));
        }
        let probs = self.space.probs();
        let y = self.space.portfolio_returns(weights);

        let (density, degenerate) = match spec.kind() {
            RiskKind::NegExpectation => (vec![1.0; k], false),
            RiskKind::AverageValueAtRisk => {
                let theta = spec.theta().unwrap();
                let cap = 1.0 / theta;
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| {
                    y[a].partial_cmp(&y[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
                });
                let mut density = vec![0.0; k];
                let mut mass = 0.0;
                let mut boundary = None;
                for &j in &order {
                    let remaining = theta - mass;
                    if remaining <= probs[j] {
                        density[j] = remaining / (theta * probs[j]);
                        boundary = Some(j);
                        break;
                    }
                    density[j] = cap;
                    mass += probs[j];
                }
                // The maximizer is a face when scenarios tied with the
                // boundary outcome carry different density values.
                let degenerate = match boundary {
                    Some(b) => {
                        let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                        let tol = 1e-12 * scale;
                        let group: Vec<usize> =
                            (0..k).filter(|&j| (y[j] - y[b]).abs() <= tol).collect();
                        let dmin = group.iter().map(|&j| density[j]).fold(f64::INFINITY, f64::min);
                        let dmax =
                            group.iter().map(|&j| density[j]).fold(f64::NEG_INFINITY, f64::max);
                        dmax - dmin > 1e-9
                    }
                    None => false,
                };
                (density, degenerate)
            }
            RiskKind::ValueAtRisk => return Err(ScenarioError::Risk(RiskError::VarOnScenarios)),
        };

        let mut subgradient = vec![0.0; n];
        for j in 0..k {
            let weight = probs[j] * density[j];
            if weight != 0.0 {
                for i in 0..n {
                    subgradient[i] -= weight * self.space.returns()[j][i];
                }
            }
        }
        // Consistency: E[−V·wᵀX] must equal the measure at w.
        debug_assert!({
            let attained = dot(&subgradient, weights);
            let direct = spec.evaluate_scenario(&y, probs).unwrap();
            (attained - direct).abs() <= 1e-8 * (1.0 + direct.abs())
        });

        Ok(SubgradientReport { density, subgradient, degenerate })
    }
}
