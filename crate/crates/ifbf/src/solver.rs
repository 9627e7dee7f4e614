//! The main iteration: backward Bregman-prox step with inertia, forward
//! gradient correction, per-iteration subgradient certificates and stopping
//! logic.
//!
//! Each completed iteration `n` yields a certificate vector
//!
//! ```text
//! s_n = (grad_u(x_n) - grad_u(p_n))/lambda_n + grad_h(p_n) - grad_h(x_n)
//!       + (alpha_n/lambda_n)(p_{n-1} - x_{n-1})
//!       + (alpha_n lambda_{n-1}/lambda_n)(grad_h(x_{n-1}) - grad_h(p_{n-1}))
//! ```
//!
//! which is an explicit element of the limiting subdifferential of `f + h`
//! at `p_n`, with the computable bound
//!
//! ```text
//! ||s_n|| <= (L_u/lambda_n + L_h) ||x_n - p_n||
//!            + (alpha_n/lambda_n)(1 + lambda_{n-1} L_h) ||x_{n-1} - p_{n-1}||.
//! ```
//!
//! The run stops when both the backward residual `||x_n - p_n||` and
//! `||s_n||` fall below their tolerances. The certificate needs the previous
//! iterate, so the earliest possible stop is `n = 2`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::bregman::BregmanGenerator;
use crate::diagnostics::{Trace, TraceRow};
use crate::math;
use crate::model::{
    evaluate_objective, CompositeProblem, ModelError, SolverConfig, StepSchedule,
};
use crate::planner::PlannerReport;
use crate::prox::{self, ProxError};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error("planner constants are infeasible (lhs = {lhs} >= sigma = {sigma}); set allow_infeasible to override")]
    InfeasibleConstants { lhs: f64, sigma: f64 },
    #[error("schedule box is not covered by the planner constants: {0}")]
    ScheduleOutsidePlan(&'static str),
    #[error("variant requires an identically zero smooth part")]
    VariantRequiresZeroSmooth,
    #[error("{0}")]
    InvalidArgument(&'static str),
}

/// Terminal status of a solve run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    SubproblemFailure,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::SubproblemFailure => "subproblem-failure",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        write!(f, "{name}")
    }
}

/// State after iteration `n`: the two points entering the iteration, the
/// backward output `p_n`, the corrected `x_{n+1}`, cached gradients and the
/// derived diagnostics.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub n: usize,
    /// `x_{n-1}`.
    pub x_prev: Vec<f64>,
    /// `x_n`.
    pub x: Vec<f64>,
    /// `p_n`.
    pub p: Vec<f64>,
    /// `x_{n+1} = p_n + lambda_n (grad_h(x_n) - grad_h(p_n))`.
    pub x_next: Vec<f64>,
    /// `grad_h(x_n)`.
    pub grad_x: Vec<f64>,
    /// `grad_h(p_n)`.
    pub grad_p: Vec<f64>,
    /// `s_n`; absent at `n = 1`.
    pub s: Option<Vec<f64>>,
    pub certificate_norm: Option<f64>,
    pub certificate_bound: Option<f64>,
    /// `||x_n - p_n||`.
    pub residual: f64,
    /// `(f + h)(p_n)`.
    pub objective: f64,
    /// `H(p_n, x_n) = (f + h)(p_n) + M2 ||x_n - p_n||^2`.
    pub merit: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl IterateState {
    fn is_finite(&self) -> bool {
        self.p.iter().all(|v| v.is_finite())
            && self.x_next.iter().all(|v| v.is_finite())
            && self.residual.is_finite()
            && self.objective.is_finite()
            && self.merit.is_finite()
    }
}

/// Everything the certificate needs from the current and previous iteration.
pub struct CertificatePieces<'a> {
    pub lambda: f64,
    pub alpha: f64,
    pub lambda_prev: f64,
    pub x: &'a [f64],
    pub p: &'a [f64],
    pub grad_x: &'a [f64],
    pub grad_p: &'a [f64],
    pub x_prev: &'a [f64],
    pub p_prev: &'a [f64],
    pub grad_x_prev: &'a [f64],
    pub grad_p_prev: &'a [f64],
}

/// Evaluates `s_n` from cached gradients; see the module docs for the
/// formula.
pub fn compute_certificate(gen: &BregmanGenerator, pieces: &CertificatePieces<'_>) -> Vec<f64> {
    let gu_x = gen.gradient(pieces.x);
    let gu_p = gen.gradient(pieces.p);
    let inv_lambda = 1.0 / pieces.lambda;
    let inertia = pieces.alpha * inv_lambda;
    let memory = pieces.alpha * pieces.lambda_prev * inv_lambda;
    (0..pieces.x.len())
        .map(|i| {
            inv_lambda * (gu_x[i] - gu_p[i]) + pieces.grad_p[i] - pieces.grad_x[i]
                + inertia * (pieces.p_prev[i] - pieces.x_prev[i])
                + memory * (pieces.grad_x_prev[i] - pieces.grad_p_prev[i])
        })
        .collect()
}

/// The computable upper bound on `||s_n||`.
pub fn certificate_bound(
    gen: &BregmanGenerator,
    lipschitz_h: f64,
    lambda: f64,
    alpha: f64,
    lambda_prev: f64,
    residual: f64,
    residual_prev: f64,
) -> f64 {
    (gen.lipschitz() / lambda + lipschitz_h) * residual
        + (alpha / lambda) * (1.0 + lambda_prev * lipschitz_h) * residual_prev
}

fn advance(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    m2: f64,
    n: usize,
    lambda: f64,
    alpha: f64,
    x_prev: &[f64],
    x: &[f64],
    prev: Option<&IterateState>,
) -> Result<IterateState, SolverError> {
    let grad_x = problem.smooth().gradient(x);
    let target = prox::reduce_subproblem(gen, lambda, alpha, x, x_prev, &grad_x)?;
    let p = prox::solve_subproblem(problem.nonsmooth(), &target)?;
    let grad_p = problem.smooth().gradient(&p);
    let x_next: Vec<f64> = (0..x.len())
        .map(|i| p[i] + lambda * (grad_x[i] - grad_p[i]))
        .collect();
    let residual = math::dist(x, &p);
    let objective = evaluate_objective(problem, &p)?.to_f64();
    let merit = objective + m2 * residual * residual;
    let (s, certificate_norm, certificate_bound_value) = match prev {
        Some(prev_state) => {
            let pieces = CertificatePieces {
                lambda,
                alpha,
                lambda_prev: prev_state.lambda,
                x,
                p: &p,
                grad_x: &grad_x,
                grad_p: &grad_p,
                x_prev,
                p_prev: &prev_state.p,
                grad_x_prev: &prev_state.grad_x,
                grad_p_prev: &prev_state.grad_p,
            };
            let s = compute_certificate(gen, &pieces);
            let norm = math::norm(&s);
            let bound = certificate_bound(
                gen,
                problem.smooth().lipschitz(),
                lambda,
                alpha,
                prev_state.lambda,
                residual,
                prev_state.residual,
            );
            (Some(s), Some(norm), Some(bound))
        }
        None => (None, None, None),
    };
    Ok(IterateState {
        n,
        x_prev: x_prev.to_vec(),
        x: x.to_vec(),
        p,
        x_next,
        grad_x,
        grad_p,
        s,
        certificate_norm,
        certificate_bound: certificate_bound_value,
        residual,
        objective,
        merit,
        lambda,
        alpha,
    })
}

/// Runs iteration 1 from the chosen starting points `x0, x1`. The
/// certificate is absent at this stage.
pub fn first_state(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    schedule: &StepSchedule,
    constants: &PlannerReport,
    x0: &[f64],
    x1: &[f64],
) -> Result<IterateState, SolverError> {
    check_dims(problem, gen, x0, x1)?;
    advance(
        problem,
        gen,
        constants.m2,
        1,
        schedule.lambda(1),
        schedule.alpha(1),
        x0,
        x1,
        None,
    )
}

/// Advances one iteration: backward step at `x_{n+1}`, forward correction,
/// certificate and merit update.
pub fn step(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    schedule: &StepSchedule,
    constants: &PlannerReport,
    state: &IterateState,
) -> Result<IterateState, SolverError> {
    let n = state.n + 1;
    advance(
        problem,
        gen,
        constants.m2,
        n,
        schedule.lambda(n),
        schedule.alpha(n),
        &state.x,
        &state.x_next,
        Some(state),
    )
}

/// Outcome of a solve run. `x_star` is the last backward output `p_n`.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x_star: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_certificate_norm: Option<f64>,
    pub final_objective: f64,
    pub trace: Option<Trace>,
}

/// Restrictions of the scheme used for equivalence testing and comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    /// The full scheme as configured.
    InertialFbf,
    /// Forces `alpha_n == 0`: the plain forward-backward-forward scheme.
    TsengPlain,
    /// Requires `h == 0`: proximal point with inertial and memory effects;
    /// the forward correction vanishes and `x_{n+1} = p_n` exactly.
    InertialProximalPoint,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::InertialFbf => "inertial-fbf",
            Variant::TsengPlain => "tseng-plain",
            Variant::InertialProximalPoint => "inertial-proximal-point",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for Variant {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inertial-fbf" => Ok(Variant::InertialFbf),
            "tseng-plain" => Ok(Variant::TsengPlain),
            "inertial-proximal-point" => Ok(Variant::InertialProximalPoint),
            _ => Err("unknown variant (expected inertial-fbf | tseng-plain | inertial-proximal-point)"),
        }
    }
}

fn check_dims(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    x0: &[f64],
    x1: &[f64],
) -> Result<(), SolverError> {
    let m = problem.dim();
    if gen.dim() != m {
        return Err(ModelError::DimensionMismatch {
            expected: m,
            got: gen.dim(),
        }
        .into());
    }
    for v in [x0, x1] {
        if v.len() != m {
            return Err(ModelError::DimensionMismatch {
                expected: m,
                got: v.len(),
            }
            .into());
        }
    }
    Ok(())
}

fn check_plan_covers_schedule(
    constants: &PlannerReport,
    schedule: &StepSchedule,
) -> Result<(), SolverError> {
    // The decrease constants bound the run only if every emitted step stays
    // inside the planned box.
    if schedule.lambda_lo() < constants.input.lambda_lo {
        return Err(SolverError::ScheduleOutsidePlan(
            "schedule lambda_lo is below the planned lambda_lo",
        ));
    }
    let lambda_bar = constants.lambda_bar.unwrap_or(constants.input.lambda_lo);
    if schedule.lambda_hi() > lambda_bar {
        return Err(SolverError::ScheduleOutsidePlan(
            "schedule lambda_hi exceeds the planned lambda_bar",
        ));
    }
    if schedule.alpha_max() > constants.input.alpha {
        return Err(SolverError::ScheduleOutsidePlan(
            "schedule alpha_max exceeds the planned alpha",
        ));
    }
    Ok(())
}

/// Iterates until both stopping tolerances are met or the iteration budget
/// is exhausted. `constants` must be feasible unless
/// `config.allow_infeasible` is set, and the schedule box must sit inside
/// the planned one.
pub fn run(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    config: &SolverConfig,
    constants: &PlannerReport,
    x0: &[f64],
    x1: &[f64],
) -> Result<SolveResult, SolverError> {
    run_variant(Variant::InertialFbf, problem, gen, config, constants, x0, x1)
}

/// [`run`] restricted to a [`Variant`].
pub fn run_variant(
    variant: Variant,
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    config: &SolverConfig,
    constants: &PlannerReport,
    x0: &[f64],
    x1: &[f64],
) -> Result<SolveResult, SolverError> {
    if !(config.residual_tolerance > 0.0 && config.certificate_tolerance > 0.0) {
        return Err(SolverError::InvalidArgument(
            "stopping tolerances must be strictly positive",
        ));
    }
    if config.max_iterations == 0 {
        return Err(SolverError::InvalidArgument(
            "max_iterations must be at least 1",
        ));
    }
    check_dims(problem, gen, x0, x1)?;
    if !constants.feasible && !config.allow_infeasible {
        return Err(SolverError::InfeasibleConstants {
            lhs: constants.lhs,
            sigma: constants.input.sigma,
        });
    }
    if !config.allow_infeasible {
        check_plan_covers_schedule(constants, &config.schedule)?;
    }
    if variant == Variant::InertialProximalPoint {
        let h = problem.smooth();
        let grad_norm = math::norm(&h.gradient(x1));
        if h.lipschitz() != 0.0 || grad_norm != 0.0 || h.value(x1) != 0.0 {
            return Err(SolverError::VariantRequiresZeroSmooth);
        }
    }
    // Custom generators cannot drive the backward step; fail before iterating.
    if gen.quadratic_diagonal().is_none() {
        return Err(ProxError::UnsupportedGenerator.into());
    }

    let schedule = &config.schedule;
    let alpha_at = |n: usize| {
        if variant == Variant::TsengPlain {
            0.0
        } else {
            schedule.alpha(n)
        }
    };

    let mut trace = if config.record_trace {
        Some(Trace::new())
    } else {
        None
    };
    let mut cum_res2 = 0.0;
    let mut cum_dx2 = 0.0;
    let record = |state: &IterateState, cum_res2: &mut f64, cum_dx2: &mut f64,
                  trace: &mut Option<Trace>| {
        *cum_res2 += state.residual * state.residual;
        let dx = math::dist(&state.x_next, &state.x);
        *cum_dx2 += dx * dx;
        if let Some(t) = trace {
            t.push(TraceRow {
                n: state.n,
                lambda: state.lambda,
                alpha: state.alpha,
                objective: state.objective,
                residual: state.residual,
                merit: state.merit,
                certificate: state.certificate_norm,
                certificate_bound: state.certificate_bound,
                cum_residual_sq: *cum_res2,
                cum_step_sq: *cum_dx2,
            });
        }
    };

    struct Snapshot {
        p: Vec<f64>,
        residual: f64,
        certificate: Option<f64>,
        objective: f64,
        n: usize,
    }

    let mut state = advance(
        problem,
        gen,
        constants.m2,
        1,
        schedule.lambda(1),
        alpha_at(1),
        x0,
        x1,
        None,
    )?;
    let mut last_good: Option<Snapshot> = None;
    let status = loop {
        if !state.is_finite() {
            break SolveStatus::NumericalFailure;
        }
        record(&state, &mut cum_res2, &mut cum_dx2, &mut trace);
        let certificate_ok = state
            .certificate_norm
            .map(|c| c <= config.certificate_tolerance)
            .unwrap_or(false);
        if state.residual <= config.residual_tolerance && certificate_ok {
            break SolveStatus::Converged;
        }
        if state.n >= config.max_iterations {
            break SolveStatus::MaxIterations;
        }
        last_good = Some(Snapshot {
            p: state.p.clone(),
            residual: state.residual,
            certificate: state.certificate_norm,
            objective: state.objective,
            n: state.n,
        });
        let n = state.n + 1;
        state = advance(
            problem,
            gen,
            constants.m2,
            n,
            schedule.lambda(n),
            alpha_at(n),
            &state.x,
            &state.x_next,
            Some(&state),
        )?;
    };

    if status == SolveStatus::NumericalFailure {
        if let Some(snapshot) = last_good {
            return Ok(SolveResult {
                status,
                x_star: snapshot.p,
                iterations: snapshot.n,
                final_residual: snapshot.residual,
                final_certificate_norm: snapshot.certificate,
                final_objective: snapshot.objective,
                trace,
            });
        }
    }
    Ok(SolveResult {
        status,
        x_star: state.p,
        iterations: state.n,
        final_residual: state.residual,
        final_certificate_norm: state.certificate_norm,
        final_objective: state.objective,
        trace,
    })
}

/// Fixed-point residual of the plain backward map at `x`: the distance
/// between `x` and the backward step taken at `x` with zero inertia. Zero
/// exactly at fixed points of the chosen prox-gradient selection, which on
/// the registered problem families coincide with the critical points of
/// `f + h`.
pub fn critical_point_residual(
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
    x: &[f64],
    lambda: f64,
) -> Result<f64, SolverError> {
    if x.len() != problem.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        }
        .into());
    }
    let grad = problem.smooth().gradient(x);
    let target = prox::reduce_subproblem(gen, lambda, 0.0, x, x, &grad)?;
    let p = prox::solve_subproblem(problem.nonsmooth(), &target)?;
    Ok(math::dist(&p, x))
}
