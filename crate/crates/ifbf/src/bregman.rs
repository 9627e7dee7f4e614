//! Bregman generators `u` and the Bregman distance
//! `D_u(x, y) = u(x) - u(y) - <grad_u(y), x - y>`.
//!
//! A generator must be strongly convex with modulus `sigma > 0` and have an
//! `L_u`-Lipschitz gradient, which sandwiches the distance between scaled
//! squared Euclidean distances:
//!
//! ```text
//! sigma/2 ||x - y||^2  <=  D_u(x, y)  <=  L_u/2 ||x - y||^2
//! ```
//!
//! Only quadratic-form generators ship built in, because the backward step
//! admits a closed-form reduction exactly for those (see [`crate::prox`]).
//! A custom generator must declare `sigma` and `L_u` and survive a sampled
//! sandwich check at construction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::math::{self, Xorshift64Star};
use crate::model::{GradFn, ValueFn};

#[derive(Debug, Error, PartialEq)]
pub enum BregmanError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    InvalidArgument(&'static str),
    #[error("sandwich bound violated at a sampled pair: {side} bound, D_u = {distance}, bound = {bound}")]
    SandwichViolation {
        side: &'static str,
        distance: f64,
        bound: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Euclidean,
    DiagonalQuadratic,
    Custom,
}

/// A strongly convex generator with Lipschitz gradient.
pub struct BregmanGenerator {
    dim: usize,
    kind: GeneratorKind,
    sigma: f64,
    lipschitz: f64,
    /// Diagonal of the quadratic form, when the generator is one.
    weights: Option<Vec<f64>>,
    value: ValueFn,
    gradient: GradFn,
}

impl BregmanGenerator {
    /// `u(x) = ||x||^2 / 2`, so `D_u(x, y) = ||x - y||^2 / 2` and
    /// `sigma = L_u = 1`.
    pub fn euclidean(dim: usize) -> Result<Self, BregmanError> {
        if dim == 0 {
            return Err(BregmanError::InvalidArgument("dimension must be at least 1"));
        }
        Ok(Self {
            dim,
            kind: GeneratorKind::Euclidean,
            sigma: 1.0,
            lipschitz: 1.0,
            weights: Some(vec![1.0; dim]),
            value: alloc::boxed::Box::new(|x: &[f64]| 0.5 * math::norm_sq(x)),
            gradient: alloc::boxed::Box::new(|x: &[f64]| x.to_vec()),
        })
    }

    /// `u(x) = sum_i d_i x_i^2 / 2` with strictly positive weights;
    /// `sigma = min d_i`, `L_u = max d_i`.
    pub fn diagonal(weights: Vec<f64>) -> Result<Self, BregmanError> {
        if weights.is_empty() {
            return Err(BregmanError::InvalidArgument("weights must be nonempty"));
        }
        if weights.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(BregmanError::InvalidArgument(
                "weights must be finite and strictly positive",
            ));
        }
        let sigma = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let lipschitz = weights.iter().cloned().fold(0.0, f64::max);
        let dim = weights.len();
        let w_value = weights.clone();
        let w_grad = weights.clone();
        Ok(Self {
            dim,
            kind: GeneratorKind::DiagonalQuadratic,
            sigma,
            lipschitz,
            weights: Some(weights),
            value: alloc::boxed::Box::new(move |x: &[f64]| {
                0.5 * x.iter().zip(&w_value).map(|(v, d)| d * v * v).sum::<f64>()
            }),
            gradient: alloc::boxed::Box::new(move |x: &[f64]| {
                x.iter().zip(&w_grad).map(|(v, d)| d * v).collect()
            }),
        })
    }

    /// A user-supplied generator. The declared `sigma` and `lipschitz` are
    /// checked against the sandwich bounds on 64 sampled pairs (fixed seed,
    /// coordinates in `[-10, 10]`); construction fails on any violation.
    ///
    /// Custom generators cannot drive the backward step (no closed-form
    /// subproblem is registered for them); they are accepted here so the
    /// distance itself remains usable.
    pub fn custom(
        dim: usize,
        value: ValueFn,
        gradient: GradFn,
        sigma: f64,
        lipschitz: f64,
    ) -> Result<Self, BregmanError> {
        if dim == 0 {
            return Err(BregmanError::InvalidArgument("dimension must be at least 1"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(BregmanError::InvalidArgument("sigma must be positive"));
        }
        if !(lipschitz.is_finite() && lipschitz >= sigma) {
            return Err(BregmanError::InvalidArgument(
                "the gradient Lipschitz constant must satisfy L_u >= sigma",
            ));
        }
        let gen = Self {
            dim,
            kind: GeneratorKind::Custom,
            sigma,
            lipschitz,
            weights: None,
            value,
            gradient,
        };
        let mut rng = Xorshift64Star::new(0xB4E6_0D1A_7C3F_2291);
        for _ in 0..64 {
            let x = rng.vector(dim, -10.0, 10.0);
            let y = rng.vector(dim, -10.0, 10.0);
            let d = bregman_distance(&gen, &x, &y).expect("dimensions match by construction");
            let gap_sq = {
                let diff = math::sub(&x, &y);
                math::norm_sq(&diff)
            };
            let lower = 0.5 * gen.sigma * gap_sq;
            let upper = 0.5 * gen.lipschitz * gap_sq;
            let slack = 1e-9 * math::abs(upper).max(math::abs(d)).max(1.0);
            if d < lower - slack {
                return Err(BregmanError::SandwichViolation {
                    side: "lower",
                    distance: d,
                    bound: lower,
                });
            }
            if d > upper + slack {
                return Err(BregmanError::SandwichViolation {
                    side: "upper",
                    distance: d,
                    bound: upper,
                });
            }
        }
        Ok(gen)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// The diagonal of the quadratic form for euclidean/diagonal generators,
    /// `None` for custom ones.
    pub fn quadratic_diagonal(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }
}

impl fmt::Debug for BregmanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BregmanGenerator")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("sigma", &self.sigma)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// `D_u(x, y) = u(x) - u(y) - <grad_u(y), x - y>`; nonnegative by strong
/// convexity of `u`.
pub fn bregman_distance(
    gen: &BregmanGenerator,
    x: &[f64],
    y: &[f64],
) -> Result<f64, BregmanError> {
    if x.len() != gen.dim() {
        return Err(BregmanError::DimensionMismatch {
            expected: gen.dim(),
            got: x.len(),
        });
    }
    if y.len() != gen.dim() {
        return Err(BregmanError::DimensionMismatch {
            expected: gen.dim(),
            got: y.len(),
        });
    }
    let grad_y = gen.gradient(y);
    let diff = math::sub(x, y);
    Ok(gen.value(x) - gen.value(y) - math::dot(&grad_y, &diff))
}
