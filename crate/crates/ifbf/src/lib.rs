//! Inertial forward-backward-forward splitting with Bregman proximal steps.
//!
//! Minimizes composite objectives `f(x) + h(x)` on `R^m` where `f` is proper,
//! lower semicontinuous and bounded below (possibly nonsmooth and nonconvex,
//! e.g. the counting norm or a box indicator) and `h` is differentiable with
//! Lipschitz gradient (possibly nonconvex). Each iteration takes a backward
//! step on `f` measured in a Bregman distance, with an inertial term built
//! from the previous two iterates, followed by a forward gradient correction:
//!
//! ```text
//! p_n   = argmin_x [ f(x) + D_u(x, x_n)/lambda_n + <x, grad_h(x_n)>
//!                    + (alpha_n/lambda_n) <x, x_{n-1} - x_n> ]
//! x_{n+1} = p_n + lambda_n [ grad_h(x_n) - grad_h(p_n) ]
//! ```
//!
//! The crate ships:
//!
//! * [`model`] — problem and schedule types shared by everything else;
//! * [`bregman`] — quadratic-form Bregman generators and the distance `D_u`;
//! * [`prox`] — closed-form backward-step solutions for separable `f`, plus a
//!   grid-search verification oracle;
//! * [`planner`] — step-size feasibility constants `M1`/`M2` and the search
//!   for the largest workable upper step bound;
//! * [`solver`] — the main loop, per-iteration subgradient certificates and
//!   the plain-Tseng / proximal-point special cases;
//! * [`diagnostics`] — trace records and checks for the decrease, certificate
//!   and summability properties the scheme guarantees;
//! * [`problems`] — coercive semi-algebraic test problems with certified
//!   gradient Lipschitz constants.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature and enable `libm` for the scalar math fallbacks.

#![cfg_attr(not(feature = "std"), no_std)]
// Negated float comparisons like `!(lhs <= rhs)` are load-bearing: they
// treat NaN as a violation/rejection, which `lhs > rhs` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Iteration kernels pass their numeric state explicitly.
#![allow(clippy::too_many_arguments)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ifbf requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod bregman;
pub mod diagnostics;
pub mod math;
pub mod model;
pub mod planner;
pub mod problems;
pub mod prox;
pub mod solver;

pub use bregman::{bregman_distance, BregmanGenerator, GeneratorKind};
pub use model::{
    evaluate_objective, validate_problem, CompositeProblem, ExtReal, NonsmoothFunction,
    SmoothFunction, SolverConfig, StepSchedule,
};
pub use planner::{
    check_feasible, compute_m1, compute_m2, feasibility_lhs, max_feasible_lambda_bar,
    PlannerInput, PlannerReport,
};
pub use solver::{run, run_variant, SolveResult, SolveStatus, Variant};
