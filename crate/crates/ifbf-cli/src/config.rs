//! JSON problem configurations and their translation into solver inputs.
//!
//! ```json
//! {
//!   "problem":   {"type": "sparse_ls", "A": [[1,0],[0,1]], "b": [2,0.1], "kappa": 0.5},
//!   "generator": {"kind": "euclidean"},
//!   "schedule":  {"lambda_lo": 0.255, "alpha_max": 0.0},
//!   "planner":   {"nu": 0.05, "mu": 0.05, "safety": 0.9},
//!   "solver":    {"max_iterations": 10000, "residual_tolerance": 1e-9},
//!   "init":      {"x0": [0,0], "x1": [0,0]},
//!   "seed": 0
//! }
//! ```
//!
//! Problem types: `sparse_ls` (counting-norm penalty), `l1_ls`, `box_quad`.
//! Generators: `euclidean` or `diagonal` with a `weights` array (`custom` is
//! accepted by the parser but rejected when building, since custom
//! generators have no closed-form backward step). When `schedule.lambda_hi`
//! is omitted the planner searches for the largest workable bound.

use std::fmt;
use std::path::Path;

use ifbf::bregman::BregmanGenerator;
use ifbf::math::Xorshift64Star;
use ifbf::model::{CompositeProblem, SolverConfig, StepSchedule};
use ifbf::planner::{
    max_feasible_lambda_bar, report_for_lambda_bar, PlannerError, PlannerInput, PlannerReport,
};
use ifbf::problems::{self, Matrix};
use serde::Deserialize;

/// Why a config could not be turned into solver inputs.
#[derive(Debug)]
pub enum BuildError {
    /// Unreadable file or malformed JSON (exit 64).
    Parse(String),
    /// Parsed but names something the solver cannot drive (exit 65).
    Unsupported(String),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::Parse(msg) => write!(f, "{msg}"),
            BuildError::Unsupported(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type")]
pub enum ProblemConfig {
    #[serde(rename = "sparse_ls")]
    SparseLs {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        kappa: f64,
    },
    #[serde(rename = "l1_ls")]
    L1Ls {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        kappa: f64,
    },
    #[serde(rename = "box_quad")]
    BoxQuad {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorConfig {
    #[default]
    Euclidean,
    Diagonal {
        weights: Vec<f64>,
    },
    /// Accepted syntactically; building it always fails (no closed-form
    /// backward step exists for generators outside the quadratic family).
    Custom,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default)]
    pub alpha_max: f64,
    /// Fixed upper step bound; omitted means "let the planner search".
    pub lambda_hi: Option<f64>,
    /// Constant per-iteration step; defaults to the upper bound.
    pub lambda: Option<f64>,
    /// Constant per-iteration inertia; defaults to `alpha_max`.
    pub alpha: Option<f64>,
}

fn default_lambda_lo() -> f64 {
    0.1
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            lambda_lo: default_lambda_lo(),
            alpha_max: 0.0,
            lambda_hi: None,
            lambda: None,
            alpha: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_bisection_tolerance")]
    pub bisection_tolerance: f64,
}

fn default_safety() -> f64 {
    0.9
}

fn default_bisection_tolerance() -> f64 {
    1e-12
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            nu: None,
            mu: None,
            safety: default_safety(),
            bisection_tolerance: default_bisection_tolerance(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default = "default_certificate_tolerance")]
    pub certificate_tolerance: f64,
    #[serde(default)]
    pub allow_infeasible: bool,
}

fn default_max_iterations() -> usize {
    10_000
}

fn default_residual_tolerance() -> f64 {
    1e-9
}

fn default_certificate_tolerance() -> f64 {
    1e-7
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            residual_tolerance: default_residual_tolerance(),
            certificate_tolerance: default_certificate_tolerance(),
            allow_infeasible: false,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub x0: Option<Vec<f64>>,
    pub x1: Option<Vec<f64>>,
    /// Scale of uniform jitter applied to a zero start (both points get the
    /// same draw, so the first inertial term still vanishes).
    #[serde(default)]
    pub jitter: f64,
}

pub fn load(path: &Path) -> Result<ConfigFile, BuildError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BuildError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| BuildError::Parse(format!("cannot parse {}: {e}", path.display())))
}

fn matrix(rows: &[Vec<f64>]) -> Result<Matrix, BuildError> {
    Matrix::from_rows(rows.to_vec()).map_err(|e| BuildError::Unsupported(e.to_string()))
}

pub fn build_problem(config: &ProblemConfig) -> Result<CompositeProblem, BuildError> {
    let built = match config {
        ProblemConfig::SparseLs { a, b, kappa } => {
            problems::sparse_least_squares(matrix(a)?, b.clone(), *kappa)
        }
        ProblemConfig::L1Ls { a, b, kappa } => {
            problems::l1_least_squares(matrix(a)?, b.clone(), *kappa)
        }
        ProblemConfig::BoxQuad { q, c, lo, hi } => problems::box_constrained_quadratic(
            matrix(q)?,
            c.clone(),
            lo.clone(),
            hi.clone(),
        ),
    };
    built.map_err(|e| BuildError::Unsupported(e.to_string()))
}

pub fn build_generator(
    config: &GeneratorConfig,
    dim: usize,
) -> Result<BregmanGenerator, BuildError> {
    match config {
        GeneratorConfig::Euclidean => {
            BregmanGenerator::euclidean(dim).map_err(|e| BuildError::Unsupported(e.to_string()))
        }
        GeneratorConfig::Diagonal { weights } => {
            if weights.len() != dim {
                return Err(BuildError::Unsupported(format!(
                    "generator weights have length {}, problem dimension is {dim}",
                    weights.len()
                )));
            }
            BregmanGenerator::diagonal(weights.clone())
                .map_err(|e| BuildError::Unsupported(e.to_string()))
        }
        GeneratorConfig::Custom => Err(BuildError::Unsupported(
            "custom generators cannot be built from a config: the backward step \
             has no registered closed form for them"
                .to_string(),
        )),
    }
}

/// Assembles the planner input from the problem constants and the schedule
/// bounds, with `nu`/`mu` defaults when the config leaves them out.
pub fn planner_input(
    config: &ConfigFile,
    problem: &CompositeProblem,
    gen: &BregmanGenerator,
) -> Result<PlannerInput, PlannerError> {
    let lipschitz_h = problem.smooth().lipschitz();
    let default_smoothing = if lipschitz_h > 0.0 {
        lipschitz_h / 20.0
    } else {
        0.05
    };
    PlannerInput::new(
        config.planner.nu.unwrap_or(default_smoothing),
        config.planner.mu.unwrap_or(default_smoothing),
        config.schedule.alpha_max,
        config.schedule.lambda_lo,
        lipschitz_h,
        gen.sigma(),
        gen.lipschitz(),
    )
}

/// Plans the constants: a fixed `lambda_hi` is checked as-is, otherwise the
/// largest workable bound is searched.
pub fn plan(config: &ConfigFile, input: &PlannerInput) -> Result<PlannerReport, PlannerError> {
    match config.schedule.lambda_hi {
        Some(lambda_hi) => report_for_lambda_bar(input, lambda_hi),
        None => max_feasible_lambda_bar(
            input,
            config.planner.safety,
            config.planner.bisection_tolerance,
        ),
    }
}

pub fn build_solver_config(
    config: &ConfigFile,
    constants: &PlannerReport,
) -> Result<SolverConfig, BuildError> {
    let lambda_hi = config
        .schedule
        .lambda_hi
        .or(constants.lambda_bar)
        .unwrap_or(config.schedule.lambda_lo);
    let mut schedule = StepSchedule::new(
        config.schedule.lambda_lo,
        lambda_hi,
        config.schedule.alpha_max,
    )
    .map_err(|e| BuildError::Unsupported(e.to_string()))?;
    if let Some(lambda) = config.schedule.lambda {
        schedule = schedule
            .with_constant_lambda(lambda)
            .map_err(|e| BuildError::Unsupported(e.to_string()))?;
    }
    if let Some(alpha) = config.schedule.alpha {
        schedule = schedule
            .with_constant_alpha(alpha)
            .map_err(|e| BuildError::Unsupported(e.to_string()))?;
    }
    let mut solver_config = SolverConfig::new(schedule);
    solver_config.max_iterations = config.solver.max_iterations;
    solver_config.residual_tolerance = config.solver.residual_tolerance;
    solver_config.certificate_tolerance = config.solver.certificate_tolerance;
    solver_config.allow_infeasible = config.solver.allow_infeasible;
    solver_config.record_trace = true;
    Ok(solver_config)
}

/// Starting points: configured vectors, else zeros with optional seeded
/// jitter shared by both points.
pub fn initial_points(config: &ConfigFile, dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let default = || {
        if config.init.jitter != 0.0 {
            let mut rng = Xorshift64Star::new(seed);
            rng.vector(dim, -config.init.jitter, config.init.jitter)
        } else {
            vec![0.0; dim]
        }
    };
    let x0 = config.init.x0.clone().unwrap_or_else(default);
    let x1 = config.init.x1.clone().unwrap_or_else(|| x0.clone());
    (x0, x1)
}
