//! Domain types shared by all modules: composite problems, step schedules
//! and solver configuration.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Add;

use thiserror::Error;

use crate::math::{self, Xorshift64Star};
use crate::prox::ProxFamily;

/// Dense value oracle.
pub type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Dense gradient oracle; output length must equal the problem dimension.
pub type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    InvalidArgument(&'static str),
}

/// Extended-real value: finite or `+inf`. The nonsmooth part of a composite
/// objective takes values here; `-inf` is not representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Collapses to `f64`, mapping `PosInf` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::from(rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

/// The smooth part `h`: value and gradient oracles plus a declared Lipschitz
/// constant for the gradient. The constant is trusted, not estimated; see
/// [`validate_problem`] for a sampled spot check.
pub struct SmoothFunction {
    dim: usize,
    value: ValueFn,
    gradient: GradFn,
    lipschitz: f64,
}

impl SmoothFunction {
    pub fn new(
        dim: usize,
        value: ValueFn,
        gradient: GradFn,
        lipschitz: f64,
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::InvalidArgument("dimension must be at least 1"));
        }
        if !lipschitz.is_finite() || lipschitz < 0.0 {
            return Err(ModelError::InvalidArgument(
                "gradient Lipschitz constant must be finite and nonnegative",
            ));
        }
        Ok(Self {
            dim,
            value,
            gradient,
            lipschitz,
        })
    }

    /// The constant zero function on `R^dim`.
    pub fn zero(dim: usize) -> Result<Self, ModelError> {
        Self::new(
            dim,
            Box::new(|_| 0.0),
            Box::new(|x| alloc::vec![0.0; x.len()]),
            0.0,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// The nonsmooth part `f`: proper, lower semicontinuous, bounded below.
/// Values are derived from the prox family so the backward step and the
/// objective can never disagree.
pub struct NonsmoothFunction {
    family: ProxFamily,
    bounded_below: bool,
}

impl NonsmoothFunction {
    /// `f == 0`; the backward step degenerates to the identity.
    pub fn zero() -> Self {
        Self {
            family: ProxFamily::Zero,
            bounded_below: true,
        }
    }

    /// `f(x) = kappa * |{i : x_i != 0}|`, the counting-norm penalty.
    pub fn counting_norm(kappa: f64) -> Result<Self, ModelError> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(ModelError::InvalidArgument(
                "counting-norm weight must be finite and positive",
            ));
        }
        Ok(Self {
            family: ProxFamily::CountingNorm { kappa },
            bounded_below: true,
        })
    }

    /// `f(x) = kappa * sum_i |x_i|`. A zero weight is allowed and makes the
    /// penalty vanish.
    pub fn one_norm(kappa: f64) -> Result<Self, ModelError> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(ModelError::InvalidArgument(
                "one-norm weight must be finite and nonnegative",
            ));
        }
        Ok(Self {
            family: ProxFamily::OneNorm { kappa },
            bounded_below: true,
        })
    }

    /// Indicator of the box `[lo_1, hi_1] x ... x [lo_m, hi_m]`.
    pub fn box_indicator(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ModelError> {
        if lo.len() != hi.len() {
            return Err(ModelError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(ModelError::InvalidArgument("box must have dimension >= 1"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(ModelError::InvalidArgument(
                "box bounds must satisfy lo <= hi componentwise",
            ));
        }
        Ok(Self {
            family: ProxFamily::BoxIndicator { lo, hi },
            bounded_below: true,
        })
    }

    /// Separable `f(x) = sum_i value(x_i)` with a user-supplied scalar prox
    /// rule `(w, lambda, d) -> argmin_t [ value(t) + d/(2 lambda) (t-w)^2 ]`.
    ///
    /// `bounded_below` is the caller's assertion that `value` is bounded
    /// below; it must be `true` for the solver's guarantees to hold.
    pub fn custom_scalar(
        value: crate::prox::ScalarFn,
        prox: crate::prox::ScalarProxFn,
        bounded_below: bool,
    ) -> Result<Self, ModelError> {
        if !bounded_below {
            return Err(ModelError::InvalidArgument(
                "the nonsmooth part must be bounded from below",
            ));
        }
        Ok(Self {
            family: ProxFamily::CustomScalar { value, prox },
            bounded_below: true,
        })
    }

    pub fn family(&self) -> &ProxFamily {
        &self.family
    }

    pub fn bounded_below(&self) -> bool {
        self.bounded_below
    }

    /// Evaluates `f(x)`. Never returns `-inf`.
    pub fn value(&self, x: &[f64]) -> ExtReal {
        match &self.family {
            ProxFamily::Zero => ExtReal::Finite(0.0),
            ProxFamily::CountingNorm { kappa } => {
                let nonzeros = x.iter().filter(|v| **v != 0.0).count();
                ExtReal::Finite(kappa * nonzeros as f64)
            }
            ProxFamily::OneNorm { kappa } => {
                ExtReal::Finite(kappa * x.iter().map(|v| math::abs(*v)).sum::<f64>())
            }
            ProxFamily::BoxIndicator { lo, hi } => {
                let inside = x
                    .iter()
                    .enumerate()
                    .all(|(i, v)| lo[i] <= *v && *v <= hi[i]);
                if inside {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFamily::CustomScalar { value, .. } => {
                ExtReal::Finite(x.iter().map(|v| value(*v)).sum())
            }
        }
    }

    /// Dimension pinned by the family, if any (only boxes carry one).
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.family {
            ProxFamily::BoxIndicator { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }
}

impl fmt::Debug for NonsmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonsmoothFunction")
            .field("family", &self.family)
            .field("bounded_below", &self.bounded_below)
            .finish()
    }
}

/// The composite problem `min f(x) + h(x)`.
#[derive(Debug)]
pub struct CompositeProblem {
    smooth: SmoothFunction,
    nonsmooth: NonsmoothFunction,
    coercive: bool,
    semialgebraic: bool,
    lower_bound: f64,
}

impl CompositeProblem {
    pub fn new(smooth: SmoothFunction, nonsmooth: NonsmoothFunction) -> Result<Self, ModelError> {
        if let Some(fd) = nonsmooth.fixed_dim() {
            if fd != smooth.dim() {
                return Err(ModelError::DimensionMismatch {
                    expected: smooth.dim(),
                    got: fd,
                });
            }
        }
        Ok(Self {
            smooth,
            nonsmooth,
            coercive: false,
            semialgebraic: false,
            lower_bound: f64::NEG_INFINITY,
        })
    }

    /// Caller's assertion that `f + h` is coercive.
    pub fn with_coercive(mut self, coercive: bool) -> Self {
        self.coercive = coercive;
        self
    }

    /// Caller's assertion that `f + h` is semi-algebraic.
    pub fn with_semialgebraic(mut self, semialgebraic: bool) -> Self {
        self.semialgebraic = semialgebraic;
        self
    }

    /// A declared lower bound on `f + h`, checked by sampling tests.
    pub fn with_lower_bound(mut self, lower_bound: f64) -> Self {
        self.lower_bound = lower_bound;
        self
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth(&self) -> &SmoothFunction {
        &self.smooth
    }

    pub fn nonsmooth(&self) -> &NonsmoothFunction {
        &self.nonsmooth
    }

    pub fn coercive(&self) -> bool {
        self.coercive
    }

    pub fn semialgebraic(&self) -> bool {
        self.semialgebraic
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

/// Evaluates `f(x) + h(x)`; `+inf` exactly when `f(x) = +inf`.
pub fn evaluate_objective(problem: &CompositeProblem, x: &[f64]) -> Result<ExtReal, ModelError> {
    if x.len() != problem.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    Ok(problem.nonsmooth.value(x) + problem.smooth.value(x))
}

/// Per-iteration step rule. Custom rules are clamped into the schedule box at
/// emission so the bound invariants hold regardless of the closure.
pub enum StepRule {
    Constant(f64),
    Custom(Box<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl StepRule {
    fn eval(&self, n: usize) -> f64 {
        match self {
            StepRule::Constant(v) => *v,
            StepRule::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Constant(v) => write!(f, "Constant({v})"),
            StepRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Step-size and inertia schedule: `lambda_n in [lambda_lo, lambda_hi]` and
/// `alpha_n in [0, alpha_max]` for all `n >= 1`. The default rules are the
/// constants `lambda_hi` and `alpha_max`.
#[derive(Debug)]
pub struct StepSchedule {
    lambda_lo: f64,
    lambda_hi: f64,
    alpha_max: f64,
    lambda_rule: StepRule,
    alpha_rule: StepRule,
}

impl StepSchedule {
    pub fn new(lambda_lo: f64, lambda_hi: f64, alpha_max: f64) -> Result<Self, ModelError> {
        if !(lambda_lo.is_finite() && lambda_lo > 0.0) {
            return Err(ModelError::InvalidArgument("lambda_lo must be positive"));
        }
        if !(lambda_hi.is_finite() && lambda_hi >= lambda_lo) {
            return Err(ModelError::InvalidArgument(
                "lambda_hi must satisfy lambda_hi >= lambda_lo",
            ));
        }
        if !(alpha_max.is_finite() && alpha_max >= 0.0) {
            return Err(ModelError::InvalidArgument("alpha_max must be nonnegative"));
        }
        Ok(Self {
            lambda_lo,
            lambda_hi,
            alpha_max,
            lambda_rule: StepRule::Constant(lambda_hi),
            alpha_rule: StepRule::Constant(alpha_max),
        })
    }

    pub fn with_constant_lambda(mut self, lambda: f64) -> Result<Self, ModelError> {
        if !(lambda >= self.lambda_lo && lambda <= self.lambda_hi) {
            return Err(ModelError::InvalidArgument(
                "constant lambda must lie in [lambda_lo, lambda_hi]",
            ));
        }
        self.lambda_rule = StepRule::Constant(lambda);
        Ok(self)
    }

    pub fn with_constant_alpha(mut self, alpha: f64) -> Result<Self, ModelError> {
        if !(alpha >= 0.0 && alpha <= self.alpha_max) {
            return Err(ModelError::InvalidArgument(
                "constant alpha must lie in [0, alpha_max]",
            ));
        }
        self.alpha_rule = StepRule::Constant(alpha);
        Ok(self)
    }

    pub fn with_lambda_rule(mut self, rule: Box<dyn Fn(usize) -> f64 + Send + Sync>) -> Self {
        self.lambda_rule = StepRule::Custom(rule);
        self
    }

    pub fn with_alpha_rule(mut self, rule: Box<dyn Fn(usize) -> f64 + Send + Sync>) -> Self {
        self.alpha_rule = StepRule::Custom(rule);
        self
    }

    pub fn lambda_lo(&self) -> f64 {
        self.lambda_lo
    }

    pub fn lambda_hi(&self) -> f64 {
        self.lambda_hi
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    /// `lambda_n`, clamped into `[lambda_lo, lambda_hi]`.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda_rule.eval(n).clamp(self.lambda_lo, self.lambda_hi)
    }

    /// `alpha_n`, clamped into `[0, alpha_max]`.
    pub fn alpha(&self, n: usize) -> f64 {
        self.alpha_rule.eval(n).clamp(0.0, self.alpha_max)
    }
}

/// Stopping and trace options for a solve run.
#[derive(Debug)]
pub struct SolverConfig {
    pub schedule: StepSchedule,
    pub max_iterations: usize,
    /// Stop threshold on the backward residual `||x_n - p_n||`.
    pub residual_tolerance: f64,
    /// Stop threshold on the subgradient certificate norm `||s_n||`.
    pub certificate_tolerance: f64,
    pub record_trace: bool,
    /// Run even when the planner constants are infeasible. Decrease checks
    /// become advisory in that regime.
    pub allow_infeasible: bool,
}

impl SolverConfig {
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            schedule,
            max_iterations: 10_000,
            residual_tolerance: 1e-9,
            certificate_tolerance: 1e-7,
            record_trace: false,
            allow_infeasible: false,
        }
    }
}

/// Which standing assumption a sampled check saw violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    GradientDimension,
    GradientLipschitz,
    DescentInequality,
}

/// A violated inequality with its witnessing points.
#[derive(Clone, Debug)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of [`validate_problem`].
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Spot-checks the declared gradient Lipschitz constant and the quadratic
/// upper (descent) inequality on `sample_count` random pairs drawn uniformly
/// from `[-10, 10]^m`, with `1e-8` relative slack. Violations are reported
/// with witnesses, never thrown.
pub fn validate_problem(
    problem: &CompositeProblem,
    sample_count: usize,
    seed: u64,
) -> ValidationReport {
    let mut rng = Xorshift64Star::new(seed);
    let mut report = ValidationReport {
        samples: sample_count,
        ..ValidationReport::default()
    };
    let h = problem.smooth();
    let lip = h.lipschitz();
    let slack = 1e-8;
    for _ in 0..sample_count {
        let x = rng.vector(h.dim(), -10.0, 10.0);
        let y = rng.vector(h.dim(), -10.0, 10.0);
        let gx = h.gradient(&x);
        let gy = h.gradient(&y);
        if gx.len() != h.dim() || gy.len() != h.dim() {
            report.violations.push(Violation {
                kind: ViolationKind::GradientDimension,
                x,
                y,
                lhs: gx.len() as f64,
                rhs: h.dim() as f64,
            });
            continue;
        }
        let grad_gap = math::dist(&gx, &gy);
        let point_gap = math::dist(&x, &y);
        let lip_rhs = lip * point_gap;
        if grad_gap > lip_rhs + slack * lip_rhs.max(grad_gap).max(1.0) {
            report.violations.push(Violation {
                kind: ViolationKind::GradientLipschitz,
                x: x.clone(),
                y: y.clone(),
                lhs: grad_gap,
                rhs: lip_rhs,
            });
        }
        let descent_lhs = h.value(&y);
        let descent_rhs = h.value(&x)
            + math::dot(&gx, &math::sub(&y, &x))
            + 0.5 * lip * point_gap * point_gap;
        let scale = math::abs(descent_lhs).max(math::abs(descent_rhs)).max(1.0);
        if descent_lhs > descent_rhs + slack * scale {
            report.violations.push(Violation {
                kind: ViolationKind::DescentInequality,
                x,
                y,
                lhs: descent_lhs,
                rhs: descent_rhs,
            });
        }
    }
    report
}
