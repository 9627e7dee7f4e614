//! Step-size feasibility planning.
//!
//! The scheme's sufficient decrease argument hinges on two constants built
//! from the problem data and the schedule bounds:
//!
//! ```text
//! M1 = sigma/(2 lambda_hi) - L_h - nu - (alpha/lambda_lo) mu
//! M2 = lambda_hi^2 L_h^2 (L_h^2/(2 nu) + nu + L_h + L_u/(2 lambda_lo))
//!      + (alpha/lambda_lo) (mu lambda_hi^2 L_h^2 + (1 + lambda_hi L_h)^2/(2 mu))
//! ```
//!
//! When the feasibility inequality [`feasibility_lhs`]` < sigma` holds at
//! `lambda_lo`, some `lambda_hi > lambda_lo` with `M1 > M2` exists;
//! [`max_feasible_lambda_bar`] locates the largest workable one by bisection.
//! `M1` is strictly decreasing and `M2` nondecreasing in `lambda_hi`, so the
//! sign change of `M1 - M2` is unique.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("feasibility condition violated: lhs = {lhs} must be strictly below sigma = {sigma}")]
    Infeasible { lhs: f64, sigma: f64 },
    #[error("no decrease margin at lambda_hi = {lambda_bar}: M1 = {m1} <= M2 = {m2}")]
    NoMargin { lambda_bar: f64, m1: f64, m2: f64 },
    #[error("bisection bracket grew beyond 1e12 without a sign change")]
    BracketOverflow,
    #[error("the feasible window above lambda_lo is narrower than the bisection tolerance")]
    MarginTooNarrow,
    #[error("{0}")]
    InvalidArgument(&'static str),
}

/// Inputs to the feasibility check: the free smoothing parameters `nu`, `mu`,
/// the schedule bounds `alpha` and `lambda_lo`, and the problem constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerInput {
    pub nu: f64,
    pub mu: f64,
    pub alpha: f64,
    pub lambda_lo: f64,
    pub lipschitz_h: f64,
    pub sigma: f64,
    pub lipschitz_u: f64,
}

impl PlannerInput {
    pub fn new(
        nu: f64,
        mu: f64,
        alpha: f64,
        lambda_lo: f64,
        lipschitz_h: f64,
        sigma: f64,
        lipschitz_u: f64,
    ) -> Result<Self, PlannerError> {
        let input = Self {
            nu,
            mu,
            alpha,
            lambda_lo,
            lipschitz_h,
            sigma,
            lipschitz_u,
        };
        input.validate()?;
        Ok(input)
    }

    /// Defaults `nu = mu = L_h/20` (or `0.05` when `L_h = 0`); small values
    /// enlarge the feasible step region.
    pub fn with_default_smoothing(
        alpha: f64,
        lambda_lo: f64,
        lipschitz_h: f64,
        sigma: f64,
        lipschitz_u: f64,
    ) -> Result<Self, PlannerError> {
        let nu = if lipschitz_h > 0.0 {
            lipschitz_h / 20.0
        } else {
            0.05
        };
        Self::new(nu, nu, alpha, lambda_lo, lipschitz_h, sigma, lipschitz_u)
    }

    fn validate(&self) -> Result<(), PlannerError> {
        let positive = [
            (self.nu, "nu"),
            (self.mu, "mu"),
            (self.lambda_lo, "lambda_lo"),
            (self.sigma, "sigma"),
            (self.lipschitz_u, "lipschitz_u"),
        ];
        for (v, name) in positive {
            let _ = name;
            if !(v.is_finite() && v > 0.0) {
                return Err(PlannerError::InvalidArgument(
                    "nu, mu, lambda_lo, sigma and lipschitz_u must be finite and positive",
                ));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(PlannerError::InvalidArgument("alpha must be nonnegative"));
        }
        if !(self.lipschitz_h.is_finite() && self.lipschitz_h >= 0.0) {
            return Err(PlannerError::InvalidArgument(
                "lipschitz_h must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

/// Feasibility verdict and the decrease constants at the selected
/// `lambda_bar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerReport {
    pub input: PlannerInput,
    pub feasible: bool,
    /// Left side of the feasibility inequality (compared against `sigma`).
    pub lhs: f64,
    /// The selected upper step bound; present exactly when feasible.
    pub lambda_bar: Option<f64>,
    /// `M1` evaluated at `lambda_bar` (at `lambda_lo` when infeasible).
    pub m1: f64,
    /// `M2` evaluated at `lambda_bar` (at `lambda_lo` when infeasible).
    pub m2: f64,
    pub margin: f64,
}

impl PlannerReport {
    /// An infeasible report with the constants evaluated at `lambda_lo`.
    pub fn infeasible(input: PlannerInput) -> Self {
        let lhs = feasibility_lhs(&input);
        let m1 = compute_m1(input.lambda_lo, &input);
        let m2 = compute_m2(input.lambda_lo, &input);
        Self {
            input,
            feasible: false,
            lhs,
            lambda_bar: None,
            m1,
            m2,
            margin: m1 - m2,
        }
    }
}

/// The left side of the feasibility inequality:
///
/// ```text
/// 2 lambda_lo (L_h + nu)
///   + lambda_lo^2 L_h^2 (lambda_lo L_h^2/nu + L_u + 2 lambda_lo (L_h + nu))
///   + 2 alpha (mu + mu lambda_lo^2 L_h^2 + (1 + lambda_lo L_h)^2/(2 mu))
/// ```
pub fn feasibility_lhs(input: &PlannerInput) -> f64 {
    let l = input.lipschitz_h;
    let ll = input.lambda_lo;
    let nu = input.nu;
    let mu = input.mu;
    let term1 = 2.0 * ll * (l + nu);
    let term2 = ll * ll * l * l * (ll * l * l / nu + input.lipschitz_u + 2.0 * ll * (l + nu));
    let term3 = 2.0
        * input.alpha
        * (mu + mu * ll * ll * l * l + (1.0 + ll * l) * (1.0 + ll * l) / (2.0 * mu));
    term1 + term2 + term3
}

/// Whether the feasibility inequality holds strictly.
pub fn check_feasible(input: &PlannerInput) -> bool {
    feasibility_lhs(input) < input.sigma
}

/// `M1 = sigma/(2 lambda_bar) - L_h - nu - (alpha/lambda_lo) mu`; may be
/// negative.
pub fn compute_m1(lambda_bar: f64, input: &PlannerInput) -> f64 {
    input.sigma / (2.0 * lambda_bar)
        - input.lipschitz_h
        - input.nu
        - (input.alpha / input.lambda_lo) * input.mu
}

/// `M2 = lambda_bar^2 L_h^2 (L_h^2/(2 nu) + nu + L_h + L_u/(2 lambda_lo))
///       + (alpha/lambda_lo)(mu lambda_bar^2 L_h^2 + (1 + lambda_bar L_h)^2/(2 mu))`;
/// always nonnegative.
pub fn compute_m2(lambda_bar: f64, input: &PlannerInput) -> f64 {
    let l = input.lipschitz_h;
    let smooth = lambda_bar * lambda_bar * l * l
        * (l * l / (2.0 * input.nu)
            + input.nu
            + l
            + input.lipschitz_u / (2.0 * input.lambda_lo));
    let inertial = (input.alpha / input.lambda_lo)
        * (input.mu * lambda_bar * lambda_bar * l * l
            + (1.0 + lambda_bar * l) * (1.0 + lambda_bar * l) / (2.0 * input.mu));
    smooth + inertial
}

/// Feasibility report for a caller-fixed `lambda_bar`. Feasible exactly when
/// `lambda_bar >= lambda_lo` and `M1(lambda_bar) > M2(lambda_bar)` strictly
/// (which implies the feasibility inequality at `lambda_lo`).
pub fn report_for_lambda_bar(
    input: &PlannerInput,
    lambda_bar: f64,
) -> Result<PlannerReport, PlannerError> {
    input.validate()?;
    if !(lambda_bar.is_finite() && lambda_bar >= input.lambda_lo) {
        return Err(PlannerError::InvalidArgument(
            "lambda_bar must be finite and at least lambda_lo",
        ));
    }
    let m1 = compute_m1(lambda_bar, input);
    let m2 = compute_m2(lambda_bar, input);
    if !(m1 > m2) {
        return Err(PlannerError::NoMargin { lambda_bar, m1, m2 });
    }
    Ok(PlannerReport {
        input: *input,
        feasible: true,
        lhs: feasibility_lhs(input),
        lambda_bar: Some(lambda_bar),
        m1,
        m2,
        margin: m1 - m2,
    })
}

/// Locates the sign change of `M1 - M2` above `lambda_lo` by bisection and
/// returns `lambda_bar = lambda_lo + safety * (root - lambda_lo)`, keeping a
/// strict margin `M1 > M2`. Requires the feasibility inequality to hold.
pub fn max_feasible_lambda_bar(
    input: &PlannerInput,
    safety: f64,
    tolerance: f64,
) -> Result<PlannerReport, PlannerError> {
    input.validate()?;
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(PlannerError::InvalidArgument("safety must lie in (0, 1]"));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(PlannerError::InvalidArgument("tolerance must be positive"));
    }
    let lhs = feasibility_lhs(input);
    if !(lhs < input.sigma) {
        return Err(PlannerError::Infeasible {
            lhs,
            sigma: input.sigma,
        });
    }
    let gap = |lambda: f64| compute_m1(lambda, input) - compute_m2(lambda, input);
    // Feasibility is equivalent to M1 > M2 at lambda_lo, so the left bracket
    // end always carries a positive gap.
    debug_assert!(gap(input.lambda_lo) > 0.0);
    let mut lo = input.lambda_lo;
    let mut hi = input.lambda_lo * 2.0;
    while gap(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(PlannerError::BracketOverflow);
        }
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= input.lambda_lo {
        // The root sits within one tolerance of lambda_lo; no lambda_bar
        // strictly above lambda_lo can be certified at this precision.
        return Err(PlannerError::MarginTooNarrow);
    }
    let lambda_bar = input.lambda_lo + safety * (lo - input.lambda_lo);
    let m1 = compute_m1(lambda_bar, input);
    let m2 = compute_m2(lambda_bar, input);
    debug_assert!(m1 > m2);
    Ok(PlannerReport {
        input: *input,
        feasible: true,
        lhs,
        lambda_bar: Some(lambda_bar),
        m1,
        m2,
        margin: m1 - m2,
    })
}
