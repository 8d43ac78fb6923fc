//! Bounded-variable linear programs and a revised simplex solver.
//!
//! The solver is built for exact multiplier extraction rather than
//! scale: problems here have a few dozen rows (scenario duals, Slater
//! checks) and possibly many columns. It runs a two-phase
//! bounded-variable revised simplex with a dense LU-factorized basis
//! and product-form eta updates with periodic refactorization.
//! Pricing uses the most-negative reduced cost; a run of degenerate
//! pivots switches to Bland's smallest-index rule (for both the
//! entering and the leaving choice) until progress resumes, which
//! rules out cycling while keeping column scans productive on
//! many-column duals.
//!
//! Row multipliers are reported in the maximization orientation: for an
//! optimal basis they satisfy yᵀB = c_B, so the duals of equality rows
//! are exact Lagrange multipliers of those rows.

use std::fmt;

/// Reduced-cost tolerance for eligibility.
const DJ_TOL: f64 = 1e-9;
/// Pivot magnitude below which a column entry is treated as zero.
const PIV_TOL: f64 = 1e-10;
/// Ratio-test grouping tolerance for Bland tie-breaking.
const RATIO_TOL: f64 = 1e-10;
/// Refactorize the basis after this many eta updates.
const REFACTOR_EVERY: usize = 50;
/// Consecutive degenerate pivots before falling back to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Le,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub op: RowOp,
    pub rhs: f64,
}

/// A linear program in bounded-variable form:
/// maximize cᵀx subject to equality and ≤ rows with l ≤ x ≤ u
/// (±∞ bounds allowed).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub maximize: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// Indices of the rows whose multipliers form the recovered
    /// portfolio (the n asset-balance rows of a scenario dual).
    pub asset_rows: Vec<usize>,
}

impl LinearProgram {
    pub fn new(maximize: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        LinearProgram { maximize, lower, upper, rows: Vec::new(), asset_rows: Vec::new() }
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, op: RowOp, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, op, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.maximize.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.maximize.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::BadShape("bound vectors must match objective length".into()));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if l > u {
                return Err(LpError::BadShape(format!("empty bound interval [{}, {}]", l, u)));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::BadShape(format!("row {} has wrong arity", i)));
            }
            if !row.rhs.is_finite() {
                return Err(LpError::BadShape(format!("row {} has non-finite rhs", i)));
            }
        }
        for &i in &self.asset_rows {
            if i >= self.rows.len() {
                return Err(LpError::BadShape(format!("asset row {} out of range", i)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `x`, `row_duals` and `basis` are populated only
/// for optimal outcomes.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    /// Objective value in the maximization orientation.
    pub objective: f64,
    /// Row multipliers in the maximization orientation.
    pub row_duals: Vec<f64>,
    /// Basic variable per row (structural and slack indices).
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    BadShape(String),
    /// The pivot count exceeded 50·(rows + columns).
    MaxIterations { limit: usize },
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::BadShape(msg) => write!(f, "malformed linear program: {}", msg),
            LpError::MaxIterations { limit } => {
                write!(f, "simplex exceeded the iteration limit of {}", limit)
            }
        }
    }
}

impl std::error::Error for LpError {}

/// Dense LU factorization with partial pivoting, P·B = L·U.
#[derive(Debug, Clone)]
struct Lu {
    n: usize,
    /// Combined factors: strict lower triangle holds L (unit diagonal
    /// implied), upper triangle holds U.
    data: Vec<f64>,
    /// Row permutation: factored row i came from original row perm[i].
    perm: Vec<usize>,
}

impl Lu {
    fn factor(cols: &[&[f64]]) -> Option<Lu> {
        let n = cols.len();
        let mut a = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                a[i * n + j] = col[i];
            }
        }
        let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if n > 0 && !(scale > 0.0) {
            return None;
        }
        let cutoff = 1e-14 * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            let mut best_val = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > best_val {
                    best = i;
                    best_val = v;
                }
            }
            if best_val <= cutoff || !best_val.is_finite() {
                return None;
            }
            if best != k {
                for j in 0..n {
                    a.swap(k * n + j, best * n + j);
                }
                perm.swap(k, best);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Some(Lu { n, data: a, perm })
    }

    /// Solves B x = b in place.
    fn ftran(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.data[i * n + k] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.data[i * n + k] * y[k];
            }
            y[i] /= self.data[i * n + i];
        }
        b.copy_from_slice(&y);
    }

    /// Solves yᵀ B = cᵀ in place.
    fn btran(&self, c: &mut [f64]) {
        let n = self.n;
        // Uᵀ t = c (forward substitution).
        let mut t = vec![0.0; n];
        for i in 0..n {
            let mut s = c[i];
            for k in 0..i {
                s -= self.data[k * n + i] * t[k];
            }
            t[i] = s / self.data[i * n + i];
        }
        // Lᵀ s = t (back substitution, unit diagonal).
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                t[i] -= self.data[k * n + i] * t[k];
            }
        }
        // Undo the row permutation: y[perm[i]] = s[i].
        for i in 0..n {
            c[self.perm[i]] = t[i];
        }
    }
}

/// Product-form update: basis position `row` was replaced by a column
/// whose basis representation is `alpha`.
#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    alpha: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable parked at zero.
    FreeZero,
}

struct Simplex {
    m: usize,
    nstruct: usize,
    nslack: usize,
    ntotal: usize,
    cols: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    x: Vec<f64>,
    lu: Lu,
    etas: Vec<Eta>,
    iterations: usize,
    limit: usize,
    stalled: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Simplex {
        let m = lp.rows.len();
        let nstruct = lp.num_vars();
        let nslack = lp.rows.iter().filter(|r| r.op == RowOp::Le).count();
        let ntotal = nstruct + nslack + m;

        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(ntotal);
        for j in 0..nstruct {
            cols.push(lp.rows.iter().map(|r| r.coeffs[j]).collect());
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for (i, row) in lp.rows.iter().enumerate() {
            if row.op == RowOp::Le {
                let mut col = vec![0.0; m];
                col[i] = 1.0;
                cols.push(col);
                lower.push(0.0);
                upper.push(f64::INFINITY);
            }
        }

        // Nonbasic starting point: the finite bound nearer zero, or
        // zero for free variables.
        let mut state = Vec::with_capacity(ntotal);
        let mut x = Vec::with_capacity(ntotal);
        for j in 0..(nstruct + nslack) {
            let (l, u) = (lower[j], upper[j]);
            if l.is_finite() && (u.is_infinite() || l.abs() <= u.abs()) {
                state.push(VarState::AtLower);
                x.push(l);
            } else if u.is_finite() {
                state.push(VarState::AtUpper);
                x.push(u);
            } else {
                state.push(VarState::FreeZero);
                x.push(0.0);
            }
        }

        // Residuals decide the artificial column signs so that every
        // artificial starts basic at a nonnegative value.
        let mut resid: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        for j in 0..(nstruct + nslack) {
            if x[j] != 0.0 {
                for i in 0..m {
                    resid[i] -= cols[j][i] * x[j];
                }
            }
        }
        let mut basis = Vec::with_capacity(m);
        for (i, &r) in resid.iter().enumerate() {
            let mut col = vec![0.0; m];
            col[i] = if r >= 0.0 { 1.0 } else { -1.0 };
            cols.push(col);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            state.push(VarState::Basic);
            x.push(r.abs());
            basis.push(nstruct + nslack + i);
        }

        let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let limit = 50 * (m + ntotal);
        let lu = Lu::factor(&basis.iter().map(|&j| cols[j].as_slice()).collect::<Vec<_>>())
            .expect("signed identity basis is always invertible");

        Simplex {
            m,
            nstruct,
            nslack,
            ntotal,
            cols,
            rhs,
            lower,
            upper,
            cost: vec![0.0; ntotal],
            state,
            basis,
            x,
            lu,
            etas: Vec::new(),
            iterations: 0,
            limit,
            stalled: 0,
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        self.lu.ftran(v);
        for eta in &self.etas {
            let xp = v[eta.row] / eta.alpha[eta.row];
            for i in 0..self.m {
                if i == eta.row {
                    v[i] = xp;
                } else {
                    v[i] -= eta.alpha[i] * xp;
                }
            }
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.row];
            for i in 0..self.m {
                if i != eta.row {
                    s -= v[i] * eta.alpha[i];
                }
            }
            v[eta.row] = s / eta.alpha[eta.row];
        }
        self.lu.btran(v);
    }

    /// Rebuilds the factorization and recomputes basic values from the
    /// nonbasic point, clearing accumulated drift.
    fn refactorize(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        let cols: Vec<&[f64]> = self.basis.iter().map(|&j| self.cols[j].as_slice()).collect();
        self.lu = Lu::factor(&cols)
            .ok_or_else(|| LpError::BadShape("basis matrix became singular".into()))?;
        let mut rhs_eff = self.rhs.clone();
        for j in 0..self.ntotal {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for i in 0..self.m {
                    rhs_eff[i] -= self.cols[j][i] * self.x[j];
                }
            }
        }
        self.ftran(&mut rhs_eff);
        for (row, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs_eff[row];
        }
        Ok(())
    }

    fn duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (row, &j) in self.basis.iter().enumerate() {
            y[row] = self.cost[j];
        }
        self.btran(&mut y);
        y
    }

    /// One simplex iteration under the current (minimization) costs.
    fn step(&mut self) -> Result<StepOutcome, LpError> {
        if self.iterations >= self.limit {
            return Err(LpError::MaxIterations { limit: self.limit });
        }

        let y = self.duals();

        // Entering rule: most negative (direction-adjusted) reduced
        // cost; under a degenerate stall, Bland's smallest eligible
        // index, which cannot cycle.
        let bland = self.stalled >= STALL_LIMIT;
        let mut entering: Option<(usize, f64)> = None;
        let mut best_score = -DJ_TOL;
        for j in 0..self.ntotal {
            let (state, l, u) = (self.state[j], self.lower[j], self.upper[j]);
            if state == VarState::Basic || u - l <= 0.0 {
                continue;
            }
            let dj = self.cost[j] - crate::linalg::dot(&y, &self.cols[j]);
            // Improvement rate per unit step along the feasible
            // direction; negative means the move lowers the cost.
            let score = match state {
                VarState::AtLower => dj,
                VarState::AtUpper => -dj,
                VarState::FreeZero => -dj.abs(),
                VarState::Basic => unreachable!(),
            };
            if score < best_score {
                entering = Some((j, dj));
                if bland {
                    break;
                }
                best_score = score;
            }
        }
        let (j_in, dj) = match entering {
            Some(e) => e,
            None => return Ok(StepOutcome::Optimal),
        };
        let dir = if dj < 0.0 { 1.0 } else { -1.0 };

        let mut alpha = self.cols[j_in].clone();
        self.ftran(&mut alpha);

        // Ratio test: smallest step that hits a basic variable's bound
        // or the entering variable's own opposite bound.
        let own_range = self.upper[j_in] - self.lower[j_in];
        let mut t_best = f64::INFINITY;
        // (variable index, row) of the blocking basic variable; row
        // == usize::MAX encodes a bound flip of the entering variable.
        let mut blocker: Option<(usize, usize)> = None;
        if own_range.is_finite() {
            t_best = own_range;
            blocker = Some((j_in, usize::MAX));
        }
        for row in 0..self.m {
            let a = dir * alpha[row];
            if a.abs() <= PIV_TOL {
                continue;
            }
            let jb = self.basis[row];
            let t = if a > 0.0 {
                if self.lower[jb].is_finite() {
                    (self.x[jb] - self.lower[jb]).max(0.0) / a
                } else {
                    continue;
                }
            } else if self.upper[jb].is_finite() {
                (self.upper[jb] - self.x[jb]).max(0.0) / (-a)
            } else {
                continue;
            };
            let better = t < t_best - RATIO_TOL
                || (t < t_best + RATIO_TOL && blocker.map_or(true, |(jv, _)| jb < jv));
            if better {
                t_best = t;
                blocker = Some((jb, row));
            }
        }

        let (j_out, out_row) = match blocker {
            Some(b) => b,
            None => return Ok(StepOutcome::Unbounded),
        };
        let t = t_best.max(0.0);
        if t > RATIO_TOL {
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }

        // Move the entering variable and update basic values.
        self.x[j_in] += dir * t;
        if t != 0.0 {
            for row in 0..self.m {
                let jb = self.basis[row];
                self.x[jb] -= t * dir * alpha[row];
            }
        }
        self.iterations += 1;

        if out_row == usize::MAX {
            // Bound flip: the entering variable travelled to its other
            // bound; the basis is unchanged.
            self.state[j_in] = match self.state[j_in] {
                VarState::AtLower => VarState::AtUpper,
                VarState::AtUpper => VarState::AtLower,
                s => s,
            };
            self.x[j_in] = if self.state[j_in] == VarState::AtUpper {
                self.upper[j_in]
            } else {
                self.lower[j_in]
            };
            return Ok(StepOutcome::Pivoted);
        }

        // Basis exchange: j_in becomes basic in out_row, j_out leaves
        // to the bound it reached.
        let a_out = dir * alpha[out_row];
        self.state[j_out] = if a_out > 0.0 { VarState::AtLower } else { VarState::AtUpper };
        self.x[j_out] = if a_out > 0.0 { self.lower[j_out] } else { self.upper[j_out] };
        self.state[j_in] = VarState::Basic;
        self.basis[out_row] = j_in;
        self.etas.push(Eta { row: out_row, alpha });
        if self.etas.len() >= REFACTOR_EVERY {
            self.refactorize()?;
        }
        Ok(StepOutcome::Pivoted)
    }

    fn run_phase(&mut self) -> Result<StepOutcome, LpError> {
        loop {
            match self.step()? {
                StepOutcome::Pivoted => continue,
                other => return Ok(other),
            }
        }
    }

    fn objective_value(&self) -> f64 {
        (0..self.ntotal).map(|j| self.cost[j] * self.x[j]).sum()
    }
}

/// Solves a bounded-variable LP. Infeasible and unbounded instances are
/// reported as statuses; only structural defects and iteration blowup
/// are errors.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let mut s = Simplex::build(lp);
    let art_base = s.nstruct + s.nslack;

    // Phase 1: minimize the artificial mass.
    for j in art_base..s.ntotal {
        s.cost[j] = 1.0;
    }
    let phase1 = s.run_phase()?;
    let feas_tol = 1e-8 * (1.0 + s.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max));
    if !matches!(phase1, StepOutcome::Optimal) || s.objective_value() > feas_tol {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            row_duals: Vec::new(),
            basis: Vec::new(),
            iterations: s.iterations,
        });
    }

    // Phase 2: original costs (negated: internal orientation is
    // minimization); artificials are pinned at zero.
    for j in 0..s.ntotal {
        s.cost[j] = if j < s.nstruct { -lp.maximize[j] } else { 0.0 };
    }
    for j in art_base..s.ntotal {
        s.lower[j] = 0.0;
        s.upper[j] = 0.0;
        if s.state[j] != VarState::Basic {
            s.state[j] = VarState::AtLower;
            s.x[j] = 0.0;
        }
    }
    s.refactorize()?;

    match s.run_phase()? {
        StepOutcome::Optimal => {}
        StepOutcome::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::INFINITY,
                row_duals: Vec::new(),
                basis: Vec::new(),
                iterations: s.iterations,
            });
        }
        StepOutcome::Pivoted => unreachable!(),
    }

    s.refactorize()?;
    let y_min = s.duals();
    let row_duals: Vec<f64> = y_min.iter().map(|v| -v).collect();
    let x: Vec<f64> = s.x[..s.nstruct].to_vec();
    let objective = crate::linalg::dot(&lp.maximize, &x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        row_duals,
        basis: s.basis.clone(),
        iterations: s.iterations,
    })
}
