//! Coherent risk measures on finite scenario spaces and their scalar
//! coefficients on the Gaussian subspace.
//!
//! Three measures are supported: negative expected value, value-at-risk
//! and average value-at-risk. V@R is not convex on general scenario
//! spaces, so it is admitted only where that defect is harmless: as the
//! scalar coefficient ρ(Z) multiplying the standard deviation of a
//! Gaussian portfolio return. Any attempt to evaluate V@R on scenarios
//! or to ask for its dual density set is a hard error.

use crate::linalg::kahan_sum;
use crate::normal;

#[derive(Debug, Clone, PartialEq)]
pub enum RiskError {
    /// Probability level outside the open interval (0, 1).
    ThetaOutOfRange(f64),
    /// Outcome and probability vectors disagree in length.
    DimensionMismatch { outcomes: usize, probs: usize },
    /// V@R has no coherent dual density set on a general scenario space.
    UnsupportedDual,
    /// V@R cannot be evaluated on scenarios.
    VarOnScenarios,
    /// Scenario space probabilities are invalid.
    BadProbabilities(String),
    /// Scenario matrix is empty or ragged.
    BadScenarios(String),
}

impl std::fmt::Display for RiskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RiskError::ThetaOutOfRange(t) => {
                write!(f, "probability level must lie strictly in (0, 1), got {}", t)
            }
            RiskError::DimensionMismatch { outcomes, probs } => write!(
                f,
                "outcome vector has {} entries but probability vector has {}",
                outcomes, probs
            ),
            RiskError::UnsupportedDual => {
                write!(f, "value-at-risk has no coherent dual density set")
            }
            RiskError::VarOnScenarios => {
                write!(f, "value-at-risk is only admitted as a Gaussian coefficient")
            }
            RiskError::BadProbabilities(msg) => write!(f, "invalid probabilities: {}", msg),
            RiskError::BadScenarios(msg) => write!(f, "invalid scenario matrix: {}", msg),
        }
    }
}

impl std::error::Error for RiskError {}

fn check_theta(theta: f64) -> Result<(), RiskError> {
    if theta.is_finite() && theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(RiskError::ThetaOutOfRange(theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskKind {
    NegExpectation,
    ValueAtRisk,
    AverageValueAtRisk,
}

/// A risk-measure selection together with its probability level.
///
/// Construction validates the level, so a `RiskSpec` value always
/// carries a `theta` strictly inside (0, 1) when one is present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSpec {
    kind: RiskKind,
    theta: Option<f64>,
}

impl RiskSpec {
    pub fn neg_expectation() -> Self {
        RiskSpec { kind: RiskKind::NegExpectation, theta: None }
    }

    pub fn var(theta: f64) -> Result<Self, RiskError> {
        check_theta(theta)?;
        Ok(RiskSpec { kind: RiskKind::ValueAtRisk, theta: Some(theta) })
    }

    pub fn avar(theta: f64) -> Result<Self, RiskError> {
        check_theta(theta)?;
        Ok(RiskSpec { kind: RiskKind::AverageValueAtRisk, theta: Some(theta) })
    }

    pub fn kind(&self) -> RiskKind {
        self.kind
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    /// The scalar ρ(Z) for a standard Gaussian Z.
    pub fn gaussian_coefficient(&self) -> f64 {
        match self.kind {
            RiskKind::NegExpectation => 0.0,
            RiskKind::ValueAtRisk => var_gaussian_coeff(self.theta.unwrap())
                .expect("theta validated at construction"),
            RiskKind::AverageValueAtRisk => avar_gaussian_coeff(self.theta.unwrap())
                .expect("theta validated at construction"),
        }
    }

    /// Evaluates the measure on a vector of portfolio returns.
    pub fn evaluate_scenario(&self, outcomes: &[f64], probs: &[f64]) -> Result<f64, RiskError> {
        match self.kind {
            RiskKind::NegExpectation => neg_expectation(outcomes, probs),
            RiskKind::AverageValueAtRisk => avar_scenario(outcomes, probs, self.theta.unwrap()),
            RiskKind::ValueAtRisk => Err(RiskError::VarOnScenarios),
        }
    }
}

impl std::fmt::Display for RiskSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            RiskKind::NegExpectation => write!(f, "neg_expectation"),
            RiskKind::ValueAtRisk => write!(f, "var:{}", self.theta.unwrap()),
            RiskKind::AverageValueAtRisk => write!(f, "avar:{}", self.theta.unwrap()),
        }
    }
}

/// A finite probability space of asset returns: K scenarios of n
/// per-period gross-return multiples plus strictly positive scenario
/// probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpace {
    returns: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl ScenarioSpace {
    pub fn new(returns: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self, RiskError> {
        let k = returns.len();
        if k == 0 {
            return Err(RiskError::BadScenarios("need at least one scenario".into()));
        }
        let n = returns[0].len();
        if n < 2 {
            return Err(RiskError::BadScenarios("need at least two assets".into()));
        }
        if returns.iter().any(|row| row.len() != n) {
            return Err(RiskError::BadScenarios("ragged scenario rows".into()));
        }
        if returns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RiskError::BadScenarios("non-finite return entry".into()));
        }
        if probs.len() != k {
            return Err(RiskError::DimensionMismatch { outcomes: k, probs: probs.len() });
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(RiskError::BadProbabilities(
                "every probability must be strictly positive".into(),
            ));
        }
        let total = kahan_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(RiskError::BadProbabilities(format!(
                "probabilities sum to {}, not 1",
                total
            )));
        }
        Ok(ScenarioSpace { returns, probs })
    }

    /// K scenarios with probability 1/K each.
    pub fn equiprobable(returns: Vec<Vec<f64>>) -> Result<Self, RiskError> {
        let k = returns.len();
        if k == 0 {
            return Err(RiskError::BadScenarios("need at least one scenario".into()));
        }
        ScenarioSpace::new(returns, vec![1.0 / k as f64; k])
    }

    pub fn num_scenarios(&self) -> usize {
        self.returns.len()
    }

    pub fn num_assets(&self) -> usize {
        self.returns[0].len()
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn scenario(&self, k: usize) -> &[f64] {
        &self.returns[k]
    }

    /// Per-scenario portfolio returns wᵀX(ω_k).
    pub fn portfolio_returns(&self, weights: &[f64]) -> Vec<f64> {
        assert_eq!(weights.len(), self.num_assets());
        self.returns
            .iter()
            .map(|row| crate::linalg::dot(row, weights))
            .collect()
    }

    /// Expected return per asset under the scenario probabilities.
    pub fn mean_returns(&self) -> Vec<f64> {
        let n = self.num_assets();
        let mut m = vec![0.0; n];
        for (row, &p) in self.returns.iter().zip(&self.probs) {
            for (mi, &x) in m.iter_mut().zip(row) {
                *mi += p * x;
            }
        }
        m
    }
}

/// ρ(Y) = −Σ p_k Y_k.
pub fn neg_expectation(outcomes: &[f64], probs: &[f64]) -> Result<f64, RiskError> {
    if outcomes.len() != probs.len() {
        return Err(RiskError::DimensionMismatch {
            outcomes: outcomes.len(),
            probs: probs.len(),
        });
    }
    Ok(-kahan_sum(outcomes.iter().zip(probs).map(|(&y, &p)| p * y)))
}

/// Average value-at-risk at level `theta`, evaluated exactly as the
/// tail average of the worst θ probability mass of outcomes with
/// fractional weight on the boundary atom.
///
/// This matches the scalar minimization
/// min_t { t + (1/θ)·E[(−Y − t)⁺] }, whose minimizer is a θ-quantile of
/// −Y; sorting evaluates that minimum without an optimization loop.
pub fn avar_scenario(outcomes: &[f64], probs: &[f64], theta: f64) -> Result<f64, RiskError> {
    check_theta(theta)?;
    if outcomes.len() != probs.len() {
        return Err(RiskError::DimensionMismatch {
            outcomes: outcomes.len(),
            probs: probs.len(),
        });
    }
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    // Worst outcomes first; index order on ties keeps the weighting
    // identical under translation.
    order.sort_by(|&a, &b| {
        outcomes[a]
            .partial_cmp(&outcomes[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut tail_sum = 0.0;
    let mut mass = 0.0;
    let mut mass_carry = 0.0;
    for &k in &order {
        let remaining = theta - mass;
        if remaining <= probs[k] {
            tail_sum += remaining * outcomes[k];
            break;
        }
        tail_sum += probs[k] * outcomes[k];
        // Kahan update of the consumed mass keeps the boundary weight
        // accurate to a few ulps even for very long tails.
        let y = probs[k] - mass_carry;
        let t = mass + y;
        mass_carry = (t - mass) - y;
        mass = t;
    }
    Ok(-tail_sum / theta)
}

/// V@R_θ(Z) = Φ⁻¹(1 − θ) for a standard Gaussian Z.
pub fn var_gaussian_coeff(theta: f64) -> Result<f64, RiskError> {
    check_theta(theta)?;
    Ok(normal::quantile(1.0 - theta))
}

/// AV@R_θ(Z) = (1/θ)·∫₀^θ Φ⁻¹(1 − u) du = φ(Φ⁻¹(1 − θ))/θ.
///
/// The closed identity is verified against direct numerical
/// integration of the defining integral in the test suite.
pub fn avar_gaussian_coeff(theta: f64) -> Result<f64, RiskError> {
    check_theta(theta)?;
    Ok(normal::pdf(normal::quantile(1.0 - theta)) / theta)
}

/// Box description of a dual density set 𝒟(𝒬) on K scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDensityBox {
    /// Per-coordinate lower bounds.
    pub lower: Vec<f64>,
    /// Per-coordinate upper bounds.
    pub upper: Vec<f64>,
    /// Whether the normalization row Σ p_k V_k = 1 must be imposed.
    /// (For the singleton density set it is already implied.)
    pub normalization: bool,
}

/// Dual density set of a coherent measure on K scenarios:
/// the singleton {1} for negative expectation, the box
/// {0 ≤ V ≤ 1/θ, Σ p_k V_k = 1} for AV@R_θ.
pub fn dual_density_bounds(spec: &RiskSpec, k: usize) -> Result<DualDensityBox, RiskError> {
    match spec.kind() {
        RiskKind::NegExpectation => Ok(DualDensityBox {
            lower: vec![1.0; k],
            upper: vec![1.0; k],
            normalization: false,
        }),
        RiskKind::AverageValueAtRisk => {
            let theta = spec.theta().unwrap();
            Ok(DualDensityBox {
                lower: vec![0.0; k],
                upper: vec![1.0 / theta; k],
                normalization: true,
            })
        }
        RiskKind::ValueAtRisk => Err(RiskError::UnsupportedDual),
    }
}
