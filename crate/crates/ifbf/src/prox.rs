//! The backward step: solves
//!
//! ```text
//! p_n = argmin_x [ f(x) + D_u(x, x_n)/lambda_n + <x, grad_h(x_n)>
//!                  + (alpha_n/lambda_n) <x, x_{n-1} - x_n> ]
//! ```
//!
//! For a quadratic-form generator with diagonal `d`, completing the square
//! turns the subproblem into the separable generalized prox
//!
//! ```text
//! argmin_x [ f(x) + sum_i d_i/(2 lambda_n) (x_i - w_i)^2 ],
//! w_i = x_n_i - (lambda_n/d_i) grad_i + (alpha_n/d_i)(x_n_i - x_prev_i),
//! ```
//!
//! which [`solve_subproblem`] evaluates coordinatewise with the registered
//! scalar rules. The subproblem is generally set-valued; every rule here
//! commits to one deterministic selection. [`brute_force_prox`] is the
//! grid-search oracle the closed forms are verified against.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::bregman::BregmanGenerator;
use crate::math;
use crate::model::NonsmoothFunction;

/// Scalar value oracle for a separable nonsmooth term.
pub type ScalarFn = alloc::boxed::Box<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scalar prox rule `(w, lambda, d) -> argmin_t [ f(t) + d/(2 lambda) (t - w)^2 ]`.
pub type ScalarProxFn = alloc::boxed::Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// The separable prox families the backward step knows how to solve.
pub enum ProxFamily {
    Zero,
    CountingNorm { kappa: f64 },
    OneNorm { kappa: f64 },
    BoxIndicator { lo: Vec<f64>, hi: Vec<f64> },
    CustomScalar { value: ScalarFn, prox: ScalarProxFn },
}

impl fmt::Debug for ProxFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxFamily::Zero => write!(f, "Zero"),
            ProxFamily::CountingNorm { kappa } => write!(f, "CountingNorm {{ kappa: {kappa} }}"),
            ProxFamily::OneNorm { kappa } => write!(f, "OneNorm {{ kappa: {kappa} }}"),
            ProxFamily::BoxIndicator { lo, hi } => {
                write!(f, "BoxIndicator {{ lo: {lo:?}, hi: {hi:?} }}")
            }
            ProxFamily::CustomScalar { .. } => write!(f, "CustomScalar {{ .. }}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProxError {
    #[error("the backward step requires a quadratic-form generator")]
    UnsupportedGenerator,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("{0}")]
    InvalidArgument(&'static str),
}

/// The reduced backward subproblem: minimize
/// `f(x) + sum_i d_i/(2 lambda) (x_i - w_i)^2` over `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemTarget {
    /// The prox center `w`.
    pub center: Vec<f64>,
    /// The step size `lambda_n`.
    pub lambda: f64,
    /// The generator's quadratic diagonal (all ones for the euclidean one).
    pub weights: Vec<f64>,
}

/// Completes the square in the backward subproblem for a quadratic-form
/// generator. The returned target has the same argmin set as the original
/// expression.
pub fn reduce_subproblem(
    gen: &BregmanGenerator,
    lambda: f64,
    alpha: f64,
    x: &[f64],
    x_prev: &[f64],
    grad_at_x: &[f64],
) -> Result<SubproblemTarget, ProxError> {
    let weights = gen
        .quadratic_diagonal()
        .ok_or(ProxError::UnsupportedGenerator)?;
    let m = weights.len();
    for (name, len) in [("x", x.len()), ("x_prev", x_prev.len()), ("grad", grad_at_x.len())] {
        let _ = name;
        if len != m {
            return Err(ProxError::DimensionMismatch { expected: m, got: len });
        }
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ProxError::InvalidArgument("lambda must be positive"));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(ProxError::InvalidArgument("alpha must be nonnegative"));
    }
    let center = (0..m)
        .map(|i| x[i] - (lambda / weights[i]) * grad_at_x[i] + (alpha / weights[i]) * (x[i] - x_prev[i]))
        .collect();
    Ok(SubproblemTarget {
        center,
        lambda,
        weights: weights.to_vec(),
    })
}

/// Solves the reduced subproblem coordinatewise and returns one element of
/// the argmin set.
pub fn solve_subproblem(
    f: &NonsmoothFunction,
    target: &SubproblemTarget,
) -> Result<Vec<f64>, ProxError> {
    let m = target.center.len();
    if target.weights.len() != m {
        return Err(ProxError::DimensionMismatch {
            expected: m,
            got: target.weights.len(),
        });
    }
    let lambda = target.lambda;
    let w = &target.center;
    let d = &target.weights;
    let out = match f.family() {
        ProxFamily::Zero => w.clone(),
        ProxFamily::CountingNorm { kappa } => (0..m)
            .map(|i| {
                let tau = math::sqrt(2.0 * lambda * kappa / d[i]);
                prox_counting_norm(w[i], tau)
            })
            .collect(),
        ProxFamily::OneNorm { kappa } => (0..m)
            .map(|i| prox_one_norm(w[i], lambda * kappa / d[i]))
            .collect(),
        ProxFamily::BoxIndicator { lo, hi } => {
            if lo.len() != m {
                return Err(ProxError::DimensionMismatch {
                    expected: m,
                    got: lo.len(),
                });
            }
            (0..m).map(|i| prox_box(w[i], lo[i], hi[i])).collect()
        }
        ProxFamily::CustomScalar { prox, .. } => {
            (0..m).map(|i| prox(w[i], lambda, d[i])).collect()
        }
    };
    Ok(out)
}

/// Hard threshold: the scalar prox of `kappa * 1_{t != 0}` at threshold
/// `tau = sqrt(2 lambda kappa / d)`. Keeps `w` when `|w| > tau`, returns `0`
/// when `|w| < tau`; the tie `|w| = tau` resolves to the sparser point `0`
/// (both candidates attain the same subproblem value).
pub fn prox_counting_norm(w: f64, tau: f64) -> f64 {
    debug_assert!(tau > 0.0);
    if math::abs(w) > tau {
        w
    } else {
        0.0
    }
}

/// Soft threshold by `t`: `sign(w) * max(|w| - t, 0)`.
pub fn prox_one_norm(w: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if w > t {
        w - t
    } else if w < -t {
        w + t
    } else {
        0.0
    }
}

/// Projection of `w` onto `[lo, hi]`.
pub fn prox_box(w: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    w.clamp(lo, hi)
}

/// An inclusive scalar grid `lo, lo + step, ..., <= hi`.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }
}

/// Exhaustive scalar prox oracle: minimizes
/// `f(t) + d/(2 lambda) (t - w)^2` over the grid points, with the exact
/// candidates `0` and `w` always included. Ties resolve to the candidate of
/// smaller magnitude. The grid must cover both `0` and `w`.
pub fn brute_force_prox(
    f: &dyn Fn(f64) -> f64,
    w: f64,
    lambda: f64,
    d: f64,
    grid: &Grid,
) -> Result<f64, ProxError> {
    if !(grid.step.is_finite() && grid.step > 0.0) {
        return Err(ProxError::InvalidGrid("step must be positive"));
    }
    if !(grid.lo <= grid.hi) {
        return Err(ProxError::InvalidGrid("grid is empty (lo > hi)"));
    }
    if grid.lo > w.min(0.0) || grid.hi < w.max(0.0) {
        return Err(ProxError::InvalidGrid("grid must cover both w and 0"));
    }
    if !(lambda > 0.0 && d > 0.0) {
        return Err(ProxError::InvalidArgument("lambda and d must be positive"));
    }
    let objective = |t: f64| f(t) + (d / (2.0 * lambda)) * (t - w) * (t - w);
    let mut best_x = 0.0;
    let mut best_val = objective(0.0);
    let mut consider = |t: f64| {
        let v = objective(t);
        if v < best_val || (v == best_val && math::abs(t) < math::abs(best_x)) {
            best_val = v;
            best_x = t;
        }
    };
    consider(w);
    let mut k = 0u64;
    loop {
        let t = grid.lo + k as f64 * grid.step;
        if t > grid.hi + 0.5 * grid.step {
            break;
        }
        consider(t);
        k += 1;
    }
    Ok(best_x)
}
