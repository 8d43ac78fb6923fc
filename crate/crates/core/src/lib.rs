//! Portfolio optimization with two coherent risk measures: one in the
//! objective, one as a constraint.
//!
//! The crate solves the problem of minimizing ρ₁(wᵀX) over fully
//! invested portfolios subject to ρ₂(wᵀX) ≤ r along two routes:
//!
//! * [`gaussian`] — a complete closed-form case analysis for jointly
//!   Gaussian returns, built on the minimum-variance frontier machinery
//!   in [`markowitz`];
//! * [`scenario`] — a finite-scenario formulation whose equality-
//!   constrained dual is a linear program; the optimal portfolio is
//!   read off as the multipliers of the asset-balance rows, solved by
//!   the bounded-variable simplex in [`lp`].
//!
//! [`oracle`] hosts independent brute-force verification (grid search,
//! deterministic Gaussian sampling) used by the test suite and the CLI
//! `verify` command.

pub mod gaussian;
pub mod linalg;
pub mod lp;
pub mod markowitz;
pub mod normal;
pub mod oracle;
pub mod risk;
pub mod rng;
pub mod scenario;
