//! Closed-form solution of the risk-risk problem for Gaussian markets.
//!
//! With jointly Gaussian returns and law-invariant coherent measures,
//! minimizing ρ₁·σ − μ over portfolios subject to ρ₂·σ − μ ≤ r reduces
//! to a two-dimensional problem over the minimum-variance frontier. The
//! solver classifies every instance by comparing the coefficients ρ₁,
//! ρ₂ with the frontier's asymptote slope √(δ/γ) and by locating the
//! intersection of the constraint line with the frontier hyperbola,
//! then reconstructs the optimal portfolio through the minimum-variance
//! map μ ↦ w(μ).

use crate::markowitz::{FrontierPoint, GaussianMarket};

/// Relative tolerance for classifying a coefficient as equal to the
/// asymptote slope. The three regimes are closed-form but numerically
/// adjacent; an explicit band keeps dispatch deterministic.
const SLOPE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GaussianError {
    /// Risk coefficients of coherent law-invariant measures on the
    /// Gaussian subspace are nonnegative.
    NegativeCoefficient(f64),
    /// Non-finite coefficient or risk bound.
    NonFiniteInput(f64),
}

impl std::fmt::Display for GaussianError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GaussianError::NegativeCoefficient(c) => {
                write!(f, "risk coefficient must be nonnegative, got {}", c)
            }
            GaussianError::NonFiniteInput(v) => write!(f, "non-finite input {}", v),
        }
    }
}

impl std::error::Error for GaussianError {}

/// An instance of the Gaussian problem: minimize ρ₁σ_w − μ_w subject to
/// ρ₂σ_w − μ_w ≤ r over fully invested portfolios.
#[derive(Debug, Clone, Copy)]
pub struct GaussianProblem<'a> {
    market: &'a GaussianMarket,
    rho1: f64,
    rho2: f64,
    r: f64,
}

/// Critical parameter values governing the case taxonomy.
///
/// `sigma_star`/`mu_star`/`r_star` exist only when ρ₁ exceeds the
/// asymptote slope (otherwise no frontier minimizer exists);
/// `r_minus`/`r_plus` exist only when ρ₂ exceeds the slope (otherwise
/// the constraint line always meets the frontier).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub slope: f64,
    pub sigma_star: Option<f64>,
    pub mu_star: Option<f64>,
    pub r_star: Option<f64>,
    pub r_zero: f64,
    pub r_minus: Option<f64>,
    pub r_plus: Option<f64>,
}

/// The constraint line's intersection with the frontier hyperbola.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intersection {
    /// Two distinct points, labelled by the sign of the square root in
    /// the quadratic formula.
    Two { plus: FrontierPoint, minus: FrontierPoint },
    /// Discriminant zero: the line is tangent.
    Tangent(FrontierPoint),
    /// ρ₂ matches the asymptote slope: at most one intersection point.
    Single(FrontierPoint),
    Empty,
}

/// Which solution branch produced an optimal portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveCase {
    /// The risk bound does not cut off the frontier minimizer.
    GlobalMinimum,
    /// Constraint binds at the plus root of the intersection.
    ConstraintPlusRoot,
    /// Constraint binds at the minus root of the intersection.
    ConstraintMinusRoot,
    /// Constraint slope equals the asymptote slope; constraint binds at
    /// the unique intersection point.
    ConstraintSinglePoint,
}

impl std::fmt::Display for SolveCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveCase::GlobalMinimum => "global-minimum",
            SolveCase::ConstraintPlusRoot => "constraint-plus-root",
            SolveCase::ConstraintMinusRoot => "constraint-minus-root",
            SolveCase::ConstraintSinglePoint => "constraint-single-point",
        };
        f.write_str(s)
    }
}

/// An optimal portfolio together with its frontier coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPortfolio {
    pub weights: Vec<f64>,
    pub sigma: f64,
    pub mu: f64,
    pub value: f64,
    pub case: SolveCase,
    /// Human-readable description of the regime that fired.
    pub case_label: String,
}

/// Every instance maps to exactly one of these outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// Objective decreases without bound along the frontier.
    Unbounded,
    /// Finite infimum approached along the asymptote but never attained.
    InfimumNotAttained { value: f64 },
    /// No portfolio satisfies the risk bound.
    Infeasible,
    Optimal(OptimalPortfolio),
}

impl SolveOutcome {
    pub fn tag_name(&self) -> &'static str {
        match self {
            SolveOutcome::Unbounded => "unbounded",
            SolveOutcome::InfimumNotAttained { .. } => "infimum-not-attained",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::Optimal(_) => "optimal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlopeRegime {
    Below,
    Equal,
    Above,
}

fn classify(coeff: f64, slope: f64) -> SlopeRegime {
    let tol = SLOPE_REL_TOL * slope.max(1.0);
    if (coeff - slope).abs() <= tol {
        SlopeRegime::Equal
    } else if coeff < slope {
        SlopeRegime::Below
    } else {
        SlopeRegime::Above
    }
}

impl<'a> GaussianProblem<'a> {
    pub fn new(
        market: &'a GaussianMarket,
        rho1: f64,
        rho2: f64,
        r: f64,
    ) -> Result<Self, GaussianError> {
        for &c in &[rho1, rho2] {
            if !c.is_finite() {
                return Err(GaussianError::NonFiniteInput(c));
            }
            if c < 0.0 {
                return Err(GaussianError::NegativeCoefficient(c));
            }
        }
        if !r.is_finite() {
            return Err(GaussianError::NonFiniteInput(r));
        }
        Ok(GaussianProblem { market, rho1, rho2, r })
    }

    pub fn market(&self) -> &GaussianMarket {
        self.market
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    pub fn risk_bound(&self) -> f64 {
        self.r
    }

    /// Objective ρ₁σ − μ at a frontier point.
    pub fn objective(&self, p: FrontierPoint) -> f64 {
        self.rho1 * p.sigma - p.mu
    }

    /// Constraint value ρ₂σ − μ at a frontier point.
    pub fn constraint(&self, p: FrontierPoint) -> f64 {
        self.rho2 * p.sigma - p.mu
    }

    /// Critical values: the frontier minimizer (σ*, μ*) of the
    /// objective when ρ₁ exceeds the slope, the bound r* below which
    /// the constraint cuts it off, the corner bound r₀, and the
    /// feasibility thresholds r± when ρ₂ exceeds the slope.
    pub fn thresholds(&self) -> Thresholds {
        let m = self.market;
        let (beta, gamma, delta) = (m.beta(), m.gamma(), m.delta());
        let slope = m.asymptote_slope();

        let (sigma_star, mu_star, r_star) = if classify(self.rho1, slope) == SlopeRegime::Above {
            let root = (gamma * self.rho1 * self.rho1 - delta).sqrt();
            let sigma_star = self.rho1 / root;
            let mu_star = beta / gamma + delta / (gamma * root);
            let r_star = self.rho2 * sigma_star - mu_star;
            (Some(sigma_star), Some(mu_star), Some(r_star))
        } else {
            (None, None, None)
        };

        let r_zero = self.rho2 / gamma.sqrt() - beta / gamma;

        let (r_minus, r_plus) = if classify(self.rho2, slope) == SlopeRegime::Above {
            let root = (gamma * self.rho2 * self.rho2 - delta).sqrt();
            (Some((-beta - root) / gamma), Some((-beta + root) / gamma))
        } else {
            (None, None)
        };

        Thresholds { slope, sigma_star, mu_star, r_star, r_zero, r_minus, r_plus }
    }

    /// Discriminant Δ(r) = (4/δ)(γr² + 2βr + α − ρ₂²) of the quadratic
    /// locating the line–hyperbola intersection.
    pub fn discriminant(&self, r: f64) -> f64 {
        let m = self.market;
        4.0 / m.delta() * self.quadratic_core(r)
    }

    /// γr² + 2βr + α − ρ₂², the sign-carrying core of the discriminant.
    fn quadratic_core(&self, r: f64) -> f64 {
        let m = self.market;
        m.gamma() * r * r + 2.0 * m.beta() * r + m.alpha() - self.rho2 * self.rho2
    }

    /// Intersection of the constraint line {ρ₂σ − μ = r} with the full
    /// hyperbola (both branches).
    pub fn intersect_line(&self) -> Intersection {
        let m = self.market;
        let (alpha, beta, gamma, delta) = (m.alpha(), m.beta(), m.gamma(), m.delta());
        let slope = m.asymptote_slope();
        let r = self.r;

        if classify(self.rho2, slope) == SlopeRegime::Equal {
            // The quadratic degenerates to a linear equation.
            let pivot = gamma * r + beta;
            if pivot.abs() <= 1e-12 * (gamma * r.abs() + beta.abs()).max(1.0) {
                return Intersection::Empty;
            }
            let sigma = (gamma * r * r + 2.0 * beta * r + alpha) / (2.0 * self.rho2 * pivot);
            let mu = self.rho2 * sigma - r;
            return Intersection::Single(FrontierPoint { sigma, mu });
        }

        let core = self.quadratic_core(r);
        let scale = (gamma * r * r).abs() + 2.0 * (beta * r).abs() + alpha + self.rho2 * self.rho2;
        let denom = delta - gamma * self.rho2 * self.rho2;
        if core > 1e-10 * scale {
            let root = (delta * core).sqrt();
            let lead = -(gamma * r + beta) * self.rho2;
            let sigma_plus = (lead + root) / denom;
            let sigma_minus = (lead - root) / denom;
            let mu_plus = (-delta * r - beta * self.rho2 * self.rho2 + self.rho2 * root) / denom;
            let mu_minus = (-delta * r - beta * self.rho2 * self.rho2 - self.rho2 * root) / denom;
            Intersection::Two {
                plus: FrontierPoint { sigma: sigma_plus, mu: mu_plus },
                minus: FrontierPoint { sigma: sigma_minus, mu: mu_minus },
            }
        } else if core >= -1e-10 * scale {
            let sigma = -(gamma * r + beta) * self.rho2 / denom;
            let mu = self.rho2 * sigma - r;
            Intersection::Tangent(FrontierPoint { sigma, mu })
        } else {
            Intersection::Empty
        }
    }

    fn optimal_at(&self, mu: f64, case: SolveCase, label: String) -> SolveOutcome {
        let weights = self.market.min_variance_portfolio(mu);
        let sigma = self.market.sigma_of_mu(mu);
        SolveOutcome::Optimal(OptimalPortfolio {
            weights,
            sigma,
            mu,
            value: self.rho1 * sigma - mu,
            case,
            case_label: label,
        })
    }

    /// Full case dispatch. Every input maps to exactly one outcome.
    pub fn solve(&self) -> SolveOutcome {
        let m = self.market;
        let slope = m.asymptote_slope();
        let corner_mu = m.beta() / m.gamma();
        let t = self.thresholds();
        let r = self.r;

        match classify(self.rho2, slope) {
            SlopeRegime::Below => match classify(self.rho1, slope) {
                SlopeRegime::Below => SolveOutcome::Unbounded,
                SlopeRegime::Equal => SolveOutcome::InfimumNotAttained { value: -corner_mu },
                SlopeRegime::Above => {
                    let r_star = t.r_star.unwrap();
                    if r >= r_star {
                        self.optimal_at(
                            t.mu_star.unwrap(),
                            SolveCase::GlobalMinimum,
                            format!("rho2<slope, r>={:.6}: risk bound slack at frontier minimum", r_star),
                        )
                    } else {
                        let plus = match self.intersect_line() {
                            Intersection::Two { plus, .. } => plus,
                            Intersection::Tangent(p) => p,
                            _ => unreachable!("rho2 below slope always intersects"),
                        };
                        self.optimal_at(
                            plus.mu,
                            SolveCase::ConstraintPlusRoot,
                            format!("rho2<slope, r<{:.6}: risk bound binds", r_star),
                        )
                    }
                }
            },
            SlopeRegime::Above => {
                let r_plus = t.r_plus.unwrap();
                if r < r_plus {
                    return SolveOutcome::Infeasible;
                }
                let intersection = self.intersect_line();
                let (plus, minus) = match intersection {
                    Intersection::Two { plus, minus } => (plus, minus),
                    Intersection::Tangent(p) => (p, p),
                    _ => return SolveOutcome::Infeasible,
                };
                match classify(self.rho1, slope) {
                    SlopeRegime::Below | SlopeRegime::Equal => self.optimal_at(
                        minus.mu,
                        SolveCase::ConstraintMinusRoot,
                        "rho2>slope, rho1<=slope: risk bound binds at the far intersection".into(),
                    ),
                    SlopeRegime::Above => {
                        let r_star = t.r_star.unwrap();
                        let coeff_tol = SLOPE_REL_TOL * slope.max(1.0);
                        if r >= r_star || (self.rho1 - self.rho2).abs() <= coeff_tol {
                            self.optimal_at(
                                t.mu_star.unwrap(),
                                SolveCase::GlobalMinimum,
                                format!("rho2>slope, r>={:.6}: risk bound slack at frontier minimum", r_star),
                            )
                        } else if self.rho1 < self.rho2 {
                            self.optimal_at(
                                minus.mu,
                                SolveCase::ConstraintMinusRoot,
                                "rho2>slope, rho1<rho2, r<r*: risk bound binds".into(),
                            )
                        } else {
                            self.optimal_at(
                                plus.mu,
                                SolveCase::ConstraintPlusRoot,
                                "rho2>slope, rho1>rho2, r<r*: risk bound binds".into(),
                            )
                        }
                    }
                }
            }
            SlopeRegime::Equal => {
                if r <= -corner_mu {
                    return SolveOutcome::Infeasible;
                }
                match classify(self.rho1, slope) {
                    SlopeRegime::Below => SolveOutcome::Unbounded,
                    SlopeRegime::Equal => SolveOutcome::InfimumNotAttained { value: -corner_mu },
                    SlopeRegime::Above => {
                        let r_star = t.r_star.unwrap();
                        if r >= r_star {
                            self.optimal_at(
                                t.mu_star.unwrap(),
                                SolveCase::GlobalMinimum,
                                format!("rho2=slope, r>={:.6}: risk bound slack at frontier minimum", r_star),
                            )
                        } else {
                            let point = match self.intersect_line() {
                                Intersection::Single(p) => p,
                                _ => unreachable!("r > -beta/gamma yields one intersection"),
                            };
                            self.optimal_at(
                                point.mu,
                                SolveCase::ConstraintSinglePoint,
                                "rho2=slope, r<r*: risk bound binds at the single intersection".into(),
                            )
                        }
                    }
                }
            }
        }
    }
}
