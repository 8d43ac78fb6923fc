//! Small dense linear-algebra kernels for symmetric positive definite systems.
//!
//! Problem sizes here are tiny (a handful of assets), so everything is
//! plain `Vec<f64>` row-major with no blocking or pivoted factorizations.

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorError {
    /// A diagonal pivot fell below the positive-definiteness tolerance.
    NotPositiveDefinite { pivot_index: usize },
    /// Input rows have inconsistent lengths or the matrix is empty.
    BadShape,
}

impl std::fmt::Display for FactorError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FactorError::NotPositiveDefinite { pivot_index } => {
                write!(f, "matrix is not positive definite (pivot {})", pivot_index)
            }
            FactorError::BadShape => write!(f, "matrix rows have inconsistent dimensions"),
        }
    }
}

impl std::error::Error for FactorError {}

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FactorError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(FactorError::BadShape);
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    /// xᵀ A x for symmetric A.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// The factorization rejects inputs whose diagonal pivot (the residual
/// variance before taking the square root) drops below
/// `rel_tol * max_diag(A)`; that guards both indefinite and numerically
/// singular matrices with a scale-relative cutoff.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle, including the diagonal.
    factor: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SquareMatrix, rel_tol: f64) -> Result<Self, FactorError> {
        let n = a.dim();
        let cutoff = rel_tol * a.max_diagonal().max(0.0);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut pivot = a.get(j, j);
            for k in 0..j {
                pivot -= l[j * n + k] * l[j * n + k];
            }
            if !(pivot > cutoff) || !pivot.is_finite() {
                return Err(FactorError::NotPositiveDefinite { pivot_index: j });
            }
            let ljj = pivot.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, factor: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.factor[i * self.n + j]
    }

    /// Solves A x = b using the stored factor (forward then back substitution).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let l = &self.factor;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= l[i * n + k] * y[k];
            }
            y[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= l[k * n + i] * y[k];
            }
            y[i] /= l[i * n + i];
        }
        y
    }

    /// A⁻¹ assembled column by column from `solve`.
    pub fn inverse(&self) -> SquareMatrix {
        let n = self.n;
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }

    /// y = L x, used for correlated Gaussian sampling.
    pub fn lower_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| (0..=i).map(|k| self.factor[i * n + k] * x[k]).sum())
            .collect()
    }
}

/// Compensated (Kahan) summation; keeps probability-mass checks tight
/// even for hundreds of thousands of terms.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
