//! Coercive, semi-algebraic test problems with certified gradient Lipschitz
//! constants: sparse least squares with a counting-norm penalty, one-norm
//! least squares, and box-constrained (possibly indefinite) quadratics.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{self, Xorshift64Star};
use crate::model::{CompositeProblem, NonsmoothFunction, SmoothFunction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("matrix must have full column rank (coercivity is not certified otherwise)")]
    RankDeficient,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("power iteration did not converge within {0} iterations")]
    PowerIterationDiverged(usize),
    #[error("{0}")]
    InvalidArgument(&'static str),
}

/// Dense row-major matrix; desk scale, no sparsity.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(ProblemError::InvalidArgument("matrix must be nonempty"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(ProblemError::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidArgument("matrix entries must be finite"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                math_dot(row, x)
            })
            .collect()
    }

    /// `A^T y`.
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                out[j] += row[j] * yi;
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let gap = math::abs(self.get(i, j) - self.get(j, i));
                let scale = math::abs(self.get(i, j)).max(math::abs(self.get(j, i))).max(1.0);
                if gap > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }
}

fn math_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const POWER_ITERATION_CAP: usize = 100_000;

/// Raw dominant eigenvalue of `M^T M` by power iteration with a seeded random
/// start, to relative tolerance `tol` on the Rayleigh quotient.
fn gram_lambda_max(m: &Matrix, tol: f64) -> Result<f64, ProblemError> {
    if m.is_zero() {
        return Ok(0.0);
    }
    let mut rng = Xorshift64Star::new(0x9E11_57A3_0C0F_FEE5);
    let mut v: Vec<f64> = (0..m.cols()).map(|_| rng.uniform(0.5, 1.5)).collect();
    let norm = math::norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lambda_prev = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let gv = m.tr_matvec(&m.matvec(&v));
        // Rayleigh quotient of the unit vector v.
        let lambda = math_dot(&v, &gv);
        let gv_norm = math::norm(&gv);
        if gv_norm == 0.0 {
            return Ok(0.0);
        }
        if math::abs(lambda - lambda_prev) <= tol * math::abs(lambda).max(1e-300) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
        v = gv.into_iter().map(|x| x / gv_norm).collect();
    }
    Err(ProblemError::PowerIterationDiverged(POWER_ITERATION_CAP))
}

/// Inflated upper estimate of the dominant eigenvalue of `M^T M` (the
/// squared spectral norm of `M`), safe to declare as the gradient Lipschitz
/// constant of `x -> M^T (M x - b)`. The power-iteration estimate is
/// multiplied by `1 + 1e-6` to cover its remaining gap.
pub fn gram_spectral_bound(m: &Matrix, tol: f64) -> Result<f64, ProblemError> {
    Ok(gram_lambda_max(m, tol)? * (1.0 + 1e-6))
}

/// Inflated upper estimate of the spectral radius of a symmetric `Q`,
/// computed as `sqrt(lambda_max(Q^T Q))`.
pub fn symmetric_spectral_radius_bound(q: &Matrix, tol: f64) -> Result<f64, ProblemError> {
    Ok(math::sqrt(gram_lambda_max(q, tol)?) * (1.0 + 1e-6))
}

/// Full-column-rank test via Cholesky pivots of `A^T A`.
fn has_full_column_rank(a: &Matrix) -> bool {
    let m = a.cols();
    if a.rows() < m {
        return false;
    }
    // Gram matrix, column-major lower triangle worked in place.
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut sum = 0.0;
            for k in 0..a.rows() {
                sum += a.get(k, i) * a.get(k, j);
            }
            g[i * m + j] = sum;
        }
    }
    let scale = (0..m).map(|i| g[i * m + i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    let mut l = vec![0.0; m * m];
    for j in 0..m {
        let mut pivot = g[j * m + j];
        for k in 0..j {
            pivot -= l[j * m + k] * l[j * m + k];
        }
        if pivot <= 1e-12 * scale {
            return false;
        }
        let d = math::sqrt(pivot);
        l[j * m + j] = d;
        for i in (j + 1)..m {
            let mut v = g[i * m + j];
            for k in 0..j {
                v -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = v / d;
        }
    }
    true
}

fn least_squares_smooth(a: Matrix, b: Vec<f64>) -> Result<SmoothFunction, ProblemError> {
    if b.len() != a.rows() {
        return Err(ProblemError::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    let lipschitz = gram_spectral_bound(&a, 1e-10)?;
    let dim = a.cols();
    let a = Arc::new(a);
    let b = Arc::new(b);
    let (a_value, b_value) = (Arc::clone(&a), Arc::clone(&b));
    let value = move |x: &[f64]| {
        let r = a_value.matvec(x);
        0.5 * r.iter().zip(b_value.iter()).map(|(ri, bi)| (ri - bi) * (ri - bi)).sum::<f64>()
    };
    let gradient = move |x: &[f64]| {
        let mut r = a.matvec(x);
        for (ri, bi) in r.iter_mut().zip(b.iter()) {
            *ri -= bi;
        }
        a.tr_matvec(&r)
    };
    SmoothFunction::new(
        dim,
        alloc::boxed::Box::new(value),
        alloc::boxed::Box::new(gradient),
        lipschitz,
    )
    .map_err(|_| ProblemError::InvalidArgument("invalid least-squares data"))
}

/// `min kappa ||x||_0 + 1/2 ||A x - b||^2` with `kappa > 0`. Requires full
/// column rank so the smooth part alone is coercive; rank-deficient inputs
/// are rejected rather than silently accepted.
pub fn sparse_least_squares(
    a: Matrix,
    b: Vec<f64>,
    kappa: f64,
) -> Result<CompositeProblem, ProblemError> {
    if a.is_zero() {
        return Err(ProblemError::InvalidArgument("matrix must be nonzero"));
    }
    if !has_full_column_rank(&a) {
        return Err(ProblemError::RankDeficient);
    }
    let smooth = least_squares_smooth(a, b)?;
    let nonsmooth = NonsmoothFunction::counting_norm(kappa)
        .map_err(|_| ProblemError::InvalidArgument("kappa must be positive"))?;
    Ok(CompositeProblem::new(smooth, nonsmooth)
        .expect("dimensions agree by construction")
        .with_coercive(true)
        .with_semialgebraic(true)
        .with_lower_bound(0.0))
}

/// `min kappa ||x||_1 + 1/2 ||A x - b||^2` with `kappa >= 0` (zero turns the
/// penalty off). Same rank requirement as [`sparse_least_squares`].
pub fn l1_least_squares(
    a: Matrix,
    b: Vec<f64>,
    kappa: f64,
) -> Result<CompositeProblem, ProblemError> {
    if a.is_zero() {
        return Err(ProblemError::InvalidArgument("matrix must be nonzero"));
    }
    if !has_full_column_rank(&a) {
        return Err(ProblemError::RankDeficient);
    }
    let smooth = least_squares_smooth(a, b)?;
    let nonsmooth = NonsmoothFunction::one_norm(kappa)
        .map_err(|_| ProblemError::InvalidArgument("kappa must be nonnegative"))?;
    Ok(CompositeProblem::new(smooth, nonsmooth)
        .expect("dimensions agree by construction")
        .with_coercive(true)
        .with_semialgebraic(true)
        .with_lower_bound(0.0))
}

/// `min 1/2 x^T Q x + <c, x>` over a box, with symmetric (possibly
/// indefinite) `Q`. The box keeps the problem coercive; the Lipschitz
/// constant is the certified spectral radius of `Q`.
pub fn box_constrained_quadratic(
    q: Matrix,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
) -> Result<CompositeProblem, ProblemError> {
    let m = q.cols();
    if q.rows() != m {
        return Err(ProblemError::DimensionMismatch {
            expected: m,
            got: q.rows(),
        });
    }
    if !q.is_symmetric(1e-12) {
        return Err(ProblemError::InvalidArgument("Q must be symmetric"));
    }
    for (name, len) in [("c", c.len()), ("lo", lo.len()), ("hi", hi.len())] {
        let _ = name;
        if len != m {
            return Err(ProblemError::DimensionMismatch { expected: m, got: len });
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
        return Err(ProblemError::InvalidArgument(
            "box bounds must satisfy lo <= hi componentwise",
        ));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(ProblemError::InvalidArgument("c must be finite"));
    }
    let lipschitz = symmetric_spectral_radius_bound(&q, 1e-10)?;
    // Conservative bound over the box: |x| never exceeds the worst corner.
    let corner_norm_sq: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| {
            let worst = math::abs(*l).max(math::abs(*h));
            worst * worst
        })
        .sum();
    let c_norm = math::norm(&c);
    let lower_bound = -(0.5 * lipschitz * corner_norm_sq + c_norm * math::sqrt(corner_norm_sq));
    let q = Arc::new(q);
    let c = Arc::new(c);
    let (q_value, c_value) = (Arc::clone(&q), Arc::clone(&c));
    let value = move |x: &[f64]| {
        let qx = q_value.matvec(x);
        0.5 * math_dot(x, &qx) + math_dot(&c_value, x)
    };
    let gradient = move |x: &[f64]| {
        let mut qx = q.matvec(x);
        for (g, ci) in qx.iter_mut().zip(c.iter()) {
            *g += ci;
        }
        qx
    };
    let smooth = SmoothFunction::new(
        m,
        alloc::boxed::Box::new(value),
        alloc::boxed::Box::new(gradient),
        lipschitz,
    )
    .map_err(|_| ProblemError::InvalidArgument("invalid quadratic data"))?;
    let nonsmooth = NonsmoothFunction::box_indicator(lo, hi)
        .map_err(|_| ProblemError::InvalidArgument("invalid box bounds"))?;
    Ok(CompositeProblem::new(smooth, nonsmooth)
        .expect("dimensions agree by construction")
        .with_coercive(true)
        .with_semialgebraic(true)
        .with_lower_bound(lower_bound))
}
