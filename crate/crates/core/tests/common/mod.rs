//! Shared test oracles, all deliberately independent of the library's
//! implementation paths: a series/continued-fraction normal CDF, a
//! bisection quantile, adaptive Simpson quadrature, the scalar
//! minimization form of AV@R, and seeded random instance generators.
#![allow(dead_code)]

use birisk::linalg::dot;
use birisk::markowitz::GaussianMarket;
use birisk::risk::ScenarioSpace;
use birisk::rng::StreamRng;

const FRAC_2_SQRT_PI: f64 = 1.1283791670955126;

/// erf by Maclaurin series (|x| small) or a Lentz continued fraction
/// for erfc (|x| large). Slower but algorithmically unrelated to the
/// rational-approximation route in the library.
pub fn erf_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_oracle(-x);
    }
    if x <= 3.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0usize;
        loop {
            n += 1;
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) || n > 200 {
                break;
            }
        }
        FRAC_2_SQRT_PI * sum
    } else {
        1.0 - erfc_oracle(x)
    }
}

/// erfc via the classical continued fraction, evaluated with the
/// modified Lentz algorithm. Accurate for x ≥ 1.
pub fn erfc_oracle(x: f64) -> f64 {
    if x < 1.0 {
        return 1.0 - erf_oracle(x);
    }
    // erfc(x) = exp(-x^2)/(x sqrt(pi)) / F with the continued fraction
    // F = 1 + q1/(1 + q2/(1 + ...)), q_n = n / (2 x^2), evaluated by
    // the modified Lentz recurrence.
    let tiny = 1e-300;
    let mut f: f64 = 1.0;
    let mut c: f64 = 1.0;
    let mut d: f64 = 0.0;
    for n in 1..400 {
        let q = n as f64 / (2.0 * x * x);
        d = 1.0 + q * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + q / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / (x * std::f64::consts::PI.sqrt()) / f
}

pub fn normal_cdf_oracle(x: f64) -> f64 {
    0.5 * erfc_oracle(-x / std::f64::consts::SQRT_2)
}

/// Bisection on the oracle CDF; width 1e-13 after ~70 halvings.
pub fn normal_quantile_oracle(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-42.0f64, 42.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_oracle(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(_f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(f, a, m, fa, flm, fm);
    let right = simpson(f, m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` on [a, b].
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(&f, a, b, fa, fm, fb);
    adaptive_simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 60)
}

/// (1/θ)·∫₀^θ Φ⁻¹(1−u) du by quadrature on the oracle quantile.
///
/// The integrand blows up (integrably) at u → 0, so the piece below a
/// small pivot runs in the log variable u = eᵗ, where it is smooth;
/// the truncated mass under 1e-12 is itself far below the comparison
/// tolerances and is bounded by a one-term correction.
pub fn avar_gaussian_coeff_oracle(theta: f64) -> f64 {
    let eps = 1e-12f64;
    let pivot = theta.min(0.05);
    let log_part = adaptive_simpson(
        |t| t.exp() * normal_quantile_oracle(1.0 - t.exp()),
        eps.ln(),
        pivot.ln(),
        1e-12,
    );
    let plain_part = if theta > pivot {
        adaptive_simpson(|u| normal_quantile_oracle(1.0 - u), pivot, theta, 1e-12)
    } else {
        0.0
    };
    let truncated = eps * normal_quantile_oracle(1.0 - eps);
    (log_part + plain_part + truncated) / theta
}

/// AV@R by its scalar-minimization form: a coarse grid over candidate
/// thresholds followed by golden-section refinement.
pub fn avar_scalar_minimization_oracle(outcomes: &[f64], probs: &[f64], theta: f64) -> f64 {
    let objective = |t: f64| -> f64 {
        let mut acc = 0.0;
        for (&y, &p) in outcomes.iter().zip(probs) {
            acc += p * (-y - t).max(0.0);
        }
        t + acc / theta
    };
    let lo0 = outcomes.iter().fold(f64::INFINITY, |a, &v| a.min(-v)) - 1.0;
    let hi0 = outcomes.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(-v)) + 1.0;
    let steps = 2000usize;
    let h = (hi0 - lo0) / steps as f64;
    let mut best_idx = 0usize;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let v = objective(lo0 + h * i as f64);
        if v < best {
            best = v;
            best_idx = i;
        }
    }
    let mut a = lo0 + h * best_idx.saturating_sub(1) as f64;
    let mut b = lo0 + h * (best_idx + 1).min(steps) as f64;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    objective(0.5 * (a + b)).min(best)
}

/// A well-conditioned random market: covariance A·Aᵀ plus a diagonal
/// bump, mean entries spread enough to stay independent of the ones
/// vector.
pub fn random_market(rng: &mut StreamRng, n: usize) -> GaussianMarket {
    loop {
        let mut a = vec![vec![0.0; n]; n];
        for row in &mut a {
            for v in row.iter_mut() {
                *v = 0.15 * rng.normal();
            }
        }
        let mut cov = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                cov[i][j] = dot(&a[i], &a[j]);
            }
            cov[i][i] += 0.01 + 0.05 * rng.next_f64();
        }
        let mean: Vec<f64> = (0..n).map(|_| rng.range(0.01, 0.25)).collect();
        let avg = mean.iter().sum::<f64>() / n as f64;
        let spread = mean.iter().map(|&v| (v - avg).abs()).fold(0.0f64, f64::max);
        if spread < 5e-3 {
            continue;
        }
        if let Ok(m) = GaussianMarket::build(mean, cov) {
            return m;
        }
    }
}

/// Random scenario space with gross-return multiples around one and
/// strictly positive probabilities that sum to one by construction.
pub fn random_scenario_space(rng: &mut StreamRng, k: usize, n: usize) -> ScenarioSpace {
    let returns: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| 1.0 + 0.3 * rng.normal()).collect())
        .collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.range(0.2, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = probs[..k - 1].iter().sum();
    probs[k - 1] = 1.0 - head;
    ScenarioSpace::new(returns, probs).expect("generated space is valid")
}

/// Projects `z` onto the affine set {1ᵀw = 1, mᵀw = mu}; used to build
/// random feasible competitors for the minimum-variance portfolio.
pub fn project_to_mean_budget(z: &[f64], mean: &[f64], mu: f64) -> Vec<f64> {
    let n = z.len() as f64;
    let ones_z: f64 = z.iter().sum();
    let mean_z = dot(mean, z);
    let mean_sum: f64 = mean.iter().sum();
    let mean_sq = dot(mean, mean);
    // Gram matrix of the two constraint rows (1, m).
    let g11 = n;
    let g12 = mean_sum;
    let g22 = mean_sq;
    let det = g11 * g22 - g12 * g12;
    let r1 = 1.0 - ones_z;
    let r2 = mu - mean_z;
    let c1 = (g22 * r1 - g12 * r2) / det;
    let c2 = (g11 * r2 - g12 * r1) / det;
    z.iter().zip(mean).map(|(&zi, &mi)| zi + c1 + c2 * mi).collect()
}
