//! Gaussian market statistics and the minimum-variance frontier.
//!
//! A `GaussianMarket` caches C⁻¹ together with the four scalars
//! α = mᵀC⁻¹m, β = mᵀC⁻¹1, γ = 1ᵀC⁻¹1, δ = αγ − β², because every
//! closed-form expression downstream is written in terms of them. The
//! frontier of minimum-variance portfolios is the right wing of the
//! hyperbola σ² − (γ/δ)(μ − β/γ)² = 1/γ with corner (1/√γ, β/γ) and
//! asymptote slope √(δ/γ).

use crate::linalg::{dot, Cholesky, FactorError, SquareMatrix};

/// Scale-relative pivot tolerance for accepting C as positive definite.
const PD_REL_TOL: f64 = 1e-10;
/// Scale-relative tolerance for the linear independence of m and 1.
const INDEP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum MarketError {
    /// Covariance factorization failed the positive-definiteness check.
    NotPositiveDefinite,
    /// Mean vector is (numerically) a multiple of the ones vector.
    MeanParallelToOnes,
    /// Vector/matrix dimensions disagree or n < 2.
    DimensionMismatch(String),
    /// Requested σ lies below the frontier corner 1/√γ.
    SigmaBelowCorner { sigma: f64, corner: f64 },
    /// Derived constants violated α, γ, δ > 0.
    DegenerateConstants,
}

impl std::fmt::Display for MarketError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarketError::NotPositiveDefinite => {
                write!(f, "covariance matrix is not positive definite")
            }
            MarketError::MeanParallelToOnes => {
                write!(f, "mean vector is parallel to the ones vector")
            }
            MarketError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {}", msg),
            MarketError::SigmaBelowCorner { sigma, corner } => write!(
                f,
                "sigma {} lies below the frontier corner {}",
                sigma, corner
            ),
            MarketError::DegenerateConstants => {
                write!(f, "derived market constants are not strictly positive")
            }
        }
    }
}

impl std::error::Error for MarketError {}

/// Validated Gaussian market: mean vector, covariance and the cached
/// Markowitz constants.
#[derive(Debug, Clone)]
pub struct GaussianMarket {
    mean: Vec<f64>,
    cov: SquareMatrix,
    chol: Cholesky,
    cinv: SquareMatrix,
    cinv_mean: Vec<f64>,
    cinv_ones: Vec<f64>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

/// A (σ, μ) pair on the frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub sigma: f64,
    pub mu: f64,
}

/// One sampled frontier row: the point plus its unique portfolio.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub mu: f64,
    pub sigma: f64,
    pub weights: Vec<f64>,
}

impl GaussianMarket {
    /// Validates the inputs and precomputes C⁻¹, C⁻¹m, C⁻¹1 and
    /// α, β, γ, δ.
    pub fn build(mean: Vec<f64>, cov_rows: Vec<Vec<f64>>) -> Result<Self, MarketError> {
        let n = mean.len();
        if n < 2 {
            return Err(MarketError::DimensionMismatch(format!(
                "need at least 2 assets, got {}",
                n
            )));
        }
        if cov_rows.len() != n || cov_rows.iter().any(|r| r.len() != n) {
            return Err(MarketError::DimensionMismatch(format!(
                "covariance must be {}x{}",
                n, n
            )));
        }
        if mean.iter().any(|v| !v.is_finite())
            || cov_rows.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(MarketError::DimensionMismatch("non-finite input entry".into()));
        }

        let cov = SquareMatrix::from_rows(&cov_rows)
            .map_err(|_| MarketError::DimensionMismatch("bad covariance shape".into()))?;
        let chol = match Cholesky::factor(&cov, PD_REL_TOL) {
            Ok(c) => c,
            Err(FactorError::NotPositiveDefinite { .. }) => {
                return Err(MarketError::NotPositiveDefinite)
            }
            Err(FactorError::BadShape) => {
                return Err(MarketError::DimensionMismatch("bad covariance shape".into()))
            }
        };

        // m and 1 must be linearly independent: the residual of m after
        // projection onto span{1} has to clear a scale-relative floor.
        let mean_avg = mean.iter().sum::<f64>() / n as f64;
        let resid_norm = mean
            .iter()
            .map(|&v| (v - mean_avg).abs())
            .fold(0.0f64, f64::max);
        let mean_norm = mean.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        if resid_norm <= INDEP_REL_TOL * mean_norm.max(1e-300) {
            return Err(MarketError::MeanParallelToOnes);
        }
        let cinv = chol.inverse();
        let cinv_mean = chol.solve(&mean);
        let ones = vec![1.0; n];
        let cinv_ones = chol.solve(&ones);

        let alpha = dot(&mean, &cinv_mean);
        let beta = dot(&mean, &cinv_ones);
        let gamma = dot(&ones, &cinv_ones);
        let delta = alpha * gamma - beta * beta;
        if !(alpha > 0.0 && gamma > 0.0 && delta > 0.0) {
            return Err(MarketError::DegenerateConstants);
        }

        Ok(GaussianMarket {
            mean,
            cov,
            chol,
            cinv,
            cinv_mean,
            cinv_ones,
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn num_assets(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SquareMatrix {
        &self.cov
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn covariance_inverse(&self) -> &SquareMatrix {
        &self.cinv
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Asymptote slope √(δ/γ).
    pub fn asymptote_slope(&self) -> f64 {
        (self.delta / self.gamma).sqrt()
    }

    /// The frontier corner (1/√γ, β/γ): the global minimum-variance point.
    pub fn corner(&self) -> FrontierPoint {
        FrontierPoint {
            sigma: 1.0 / self.gamma.sqrt(),
            mu: self.beta / self.gamma,
        }
    }

    /// Expected return mᵀw of a portfolio.
    pub fn portfolio_mean(&self, weights: &[f64]) -> f64 {
        dot(&self.mean, weights)
    }

    /// Standard deviation √(wᵀCw) of a portfolio.
    pub fn portfolio_sigma(&self, weights: &[f64]) -> f64 {
        self.cov.quadratic_form(weights).max(0.0).sqrt()
    }

    /// The unique minimum-variance portfolio with mean μ:
    /// w(μ) = (1/δ)[(γμ − β)C⁻¹m + (α − βμ)C⁻¹1].
    pub fn min_variance_portfolio(&self, mu: f64) -> Vec<f64> {
        let a = (self.gamma * mu - self.beta) / self.delta;
        let b = (self.alpha - self.beta * mu) / self.delta;
        self.cinv_mean
            .iter()
            .zip(&self.cinv_ones)
            .map(|(&cm, &co)| a * cm + b * co)
            .collect()
    }

    /// σ(μ) = √(1/γ + (γ/δ)(μ − β/γ)²), the frontier abscissa at mean μ.
    pub fn sigma_of_mu(&self, mu: f64) -> f64 {
        let d = mu - self.beta / self.gamma;
        (1.0 / self.gamma + (self.gamma / self.delta) * d * d).sqrt()
    }

    /// μ(σ) = β/γ + √((δ/γ)σ² − δ/γ²), the upper branch of the frontier.
    ///
    /// σ slightly below the corner (within 1e-9) is clamped onto it;
    /// anything further below is an error.
    pub fn mu_of_sigma(&self, sigma: f64) -> Result<f64, MarketError> {
        let corner = 1.0 / self.gamma.sqrt();
        if sigma < corner - 1e-9 {
            return Err(MarketError::SigmaBelowCorner { sigma, corner });
        }
        let radicand =
            ((self.delta / self.gamma) * sigma * sigma - self.delta / (self.gamma * self.gamma))
                .max(0.0);
        Ok(self.beta / self.gamma + radicand.sqrt())
    }

    /// Samples the frontier on an equally spaced μ grid.
    pub fn frontier_points(
        &self,
        mu_lo: f64,
        mu_hi: f64,
        count: usize,
    ) -> Result<Vec<FrontierRow>, MarketError> {
        if !(mu_lo < mu_hi) {
            return Err(MarketError::DimensionMismatch(format!(
                "need mu_lo < mu_hi, got [{}, {}]",
                mu_lo, mu_hi
            )));
        }
        if count < 2 {
            return Err(MarketError::DimensionMismatch(
                "need at least 2 frontier points".into(),
            ));
        }
        let step = (mu_hi - mu_lo) / (count - 1) as f64;
        Ok((0..count)
            .map(|i| {
                let mu = if i + 1 == count { mu_hi } else { mu_lo + step * i as f64 };
                FrontierRow {
                    mu,
                    sigma: self.sigma_of_mu(mu),
                    weights: self.min_variance_portfolio(mu),
                }
            })
            .collect())
    }
}
