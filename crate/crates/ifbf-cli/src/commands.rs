//! The four subcommands. Each returns its process exit code and prints one
//! JSON document to stdout; diagnostics go to stderr.

use std::path::{Path, PathBuf};

use ifbf::diagnostics::{
    check_certificate_bounds, check_merit_decrease, check_summability, merit_decrease_slack,
    DiagnosticsError, Trace,
};
use ifbf::model::validate_problem;
use ifbf::planner::{PlannerError, PlannerInput, PlannerReport};
use ifbf::solver::{run_variant, SolveResult, SolveStatus, SolverError, Variant};
use serde::Serialize;

use crate::config::{self, BuildError, ConfigFile};
use crate::exit_code;
use crate::logging;
use crate::trace_io;

#[derive(Serialize)]
struct PlanOutput {
    feasible: bool,
    lhs: f64,
    sigma: f64,
    nu: f64,
    mu: f64,
    alpha: f64,
    lambda_lo: f64,
    lipschitz_h: f64,
    lipschitz_u: f64,
    lambda_bar: Option<f64>,
    m1: f64,
    m2: f64,
    margin: f64,
}

impl PlanOutput {
    fn from_report(report: &PlannerReport) -> Self {
        Self {
            feasible: report.feasible,
            lhs: report.lhs,
            sigma: report.input.sigma,
            nu: report.input.nu,
            mu: report.input.mu,
            alpha: report.input.alpha,
            lambda_lo: report.input.lambda_lo,
            lipschitz_h: report.input.lipschitz_h,
            lipschitz_u: report.input.lipschitz_u,
            lambda_bar: report.lambda_bar,
            m1: report.m1,
            m2: report.m2,
            margin: report.margin,
        }
    }
}

#[derive(Serialize)]
struct RunOutput {
    variant: String,
    status: String,
    iterations: usize,
    x_star: Vec<f64>,
    final_objective: f64,
    final_residual: f64,
    final_certificate_norm: Option<f64>,
    lambda_bar: Option<f64>,
    m1: f64,
    m2: f64,
    trace_path: Option<String>,
}

#[derive(Serialize)]
struct MeritSection {
    passed: bool,
    advisory: bool,
    checked_rows: usize,
    slack: f64,
    violations: usize,
    first_violation_row: Option<usize>,
}

#[derive(Serialize)]
struct CertificateSection {
    passed: bool,
    violations: usize,
    first_violation_row: Option<usize>,
}

#[derive(Serialize)]
struct SummabilitySection {
    checked: bool,
    tail_ratio_residual_sq: Option<f64>,
    tail_ratio_step_sq: Option<f64>,
    flagged: bool,
}

#[derive(Serialize)]
struct CheckOutput {
    passed: bool,
    m1: f64,
    m2: f64,
    merit_decrease: MeritSection,
    certificate_bound: CertificateSection,
    summability: SummabilitySection,
}

#[derive(Serialize)]
struct CompareRow {
    variant: String,
    status: String,
    iterations: usize,
    final_objective: f64,
    final_residual: f64,
}

fn print_json<T: Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("ifbf: cannot serialize output: {e}"),
    }
}

fn build_exit(e: &BuildError) -> i32 {
    eprintln!("ifbf: {e}");
    match e {
        BuildError::Parse(_) => exit_code::PARSE,
        BuildError::Unsupported(_) => exit_code::UNSUPPORTED,
    }
}

fn solver_exit(e: &SolverError) -> i32 {
    eprintln!("ifbf: {e}");
    match e {
        SolverError::InfeasibleConstants { .. } => exit_code::INFEASIBLE,
        SolverError::ScheduleOutsidePlan(_)
        | SolverError::VariantRequiresZeroSmooth
        | SolverError::Prox(_) => exit_code::UNSUPPORTED,
        SolverError::Model(_) | SolverError::InvalidArgument(_) => exit_code::PARSE,
    }
}

struct Setup {
    config: ConfigFile,
    problem: ifbf::model::CompositeProblem,
    generator: ifbf::bregman::BregmanGenerator,
    input: PlannerInput,
}

fn load_setup(config_path: &Path) -> Result<Setup, i32> {
    let config = config::load(config_path).map_err(|e| build_exit(&e))?;
    let problem = config::build_problem(&config.problem).map_err(|e| build_exit(&e))?;
    let generator =
        config::build_generator(&config.generator, problem.dim()).map_err(|e| build_exit(&e))?;
    let input = config::planner_input(&config, &problem, &generator).map_err(|e| {
        eprintln!("ifbf: invalid planner inputs: {e}");
        exit_code::PARSE
    })?;
    Ok(Setup {
        config,
        problem,
        generator,
        input,
    })
}

fn plan_or_report(setup: &Setup) -> Result<PlannerReport, (PlannerReport, i32)> {
    match config::plan(&setup.config, &setup.input) {
        Ok(report) => Ok(report),
        Err(PlannerError::Infeasible { .. }) | Err(PlannerError::NoMargin { .. }) => {
            Err((PlannerReport::infeasible(setup.input), exit_code::INFEASIBLE))
        }
        Err(e) => {
            eprintln!("ifbf: planning failed: {e}");
            Err((PlannerReport::infeasible(setup.input), exit_code::PARSE))
        }
    }
}

/// `plan <config.json>`: prints the feasibility report; exit 0 when
/// feasible, 2 when not.
pub fn cmd_plan(config_path: &Path) -> i32 {
    let setup = match load_setup(config_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match plan_or_report(&setup) {
        Ok(report) => {
            print_json(&PlanOutput::from_report(&report));
            exit_code::OK
        }
        Err((report, code)) => {
            print_json(&PlanOutput::from_report(&report));
            code
        }
    }
}

pub struct RunOptions {
    pub config_path: PathBuf,
    pub trace_path: Option<PathBuf>,
    pub variant: Variant,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
}

fn execute_run(
    setup: &Setup,
    variant: Variant,
    max_iters: Option<usize>,
    seed: Option<u64>,
) -> Result<(SolveResult, PlannerReport), i32> {
    let constants = match plan_or_report(setup) {
        Ok(report) => report,
        Err((report, code)) => {
            if setup.config.solver.allow_infeasible {
                logging::info("planner infeasible; continuing under allow_infeasible");
                report
            } else {
                eprintln!(
                    "ifbf: infeasible configuration (lhs = {}, sigma = {})",
                    report.lhs, report.input.sigma
                );
                return Err(code);
            }
        }
    };
    let mut solver_config =
        config::build_solver_config(&setup.config, &constants).map_err(|e| build_exit(&e))?;
    if let Some(mi) = max_iters {
        solver_config.max_iterations = mi;
    }
    let seed = seed.unwrap_or(setup.config.seed);
    let (x0, x1) = config::initial_points(&setup.config, setup.problem.dim(), seed);

    let spot_check = validate_problem(&setup.problem, 32, seed);
    if !spot_check.is_clean() {
        logging::info(&format!(
            "problem validation reported {} violation(s) on {} samples",
            spot_check.violations.len(),
            spot_check.samples
        ));
    } else {
        logging::debug("problem validation clean on 32 samples");
    }

    let result = run_variant(
        variant,
        &setup.problem,
        &setup.generator,
        &solver_config,
        &constants,
        &x0,
        &x1,
    )
    .map_err(|e| solver_exit(&e))?;
    Ok((result, constants))
}

/// `run <config.json> [--trace out.csv] [--variant name] [--max-iters N]
/// [--seed S]`: solves and prints the result; exit 0 on convergence, 3 on
/// the iteration budget, 4 on numerical failure.
pub fn cmd_run(opts: &RunOptions) -> i32 {
    let setup = match load_setup(&opts.config_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (result, constants) =
        match execute_run(&setup, opts.variant, opts.max_iters, opts.seed) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
    if let Some(path) = &opts.trace_path {
        let rows = result.trace.as_ref().map(|t| t.rows()).unwrap_or(&[]);
        if let Err(e) = trace_io::write_csv_path(rows, path) {
            eprintln!("ifbf: {e}");
            return exit_code::PARSE;
        }
        logging::debug(&format!("trace written to {}", path.display()));
    }
    logging::info(&format!(
        "{} after {} iteration(s), residual {:.3e}",
        result.status, result.iterations, result.final_residual
    ));
    print_json(&RunOutput {
        variant: opts.variant.name().to_string(),
        status: result.status.to_string(),
        iterations: result.iterations,
        x_star: result.x_star.clone(),
        final_objective: result.final_objective,
        final_residual: result.final_residual,
        final_certificate_norm: result.final_certificate_norm,
        lambda_bar: constants.lambda_bar,
        m1: constants.m1,
        m2: constants.m2,
        trace_path: opts.trace_path.as_ref().map(|p| p.display().to_string()),
    });
    match result.status {
        SolveStatus::Converged => exit_code::OK,
        SolveStatus::MaxIterations => exit_code::MAX_ITERATIONS,
        SolveStatus::NumericalFailure => exit_code::NUMERICAL_FAILURE,
        SolveStatus::SubproblemFailure => exit_code::UNSUPPORTED,
    }
}

pub struct CheckOptions {
    pub trace_path: PathBuf,
    pub config_path: Option<PathBuf>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

/// `check <trace.csv> --config <config.json> | --m1 V --m2 V`: replays the
/// decrease, certificate-bound and summability checks over a trace; exit 0
/// if everything passes, 5 otherwise.
pub fn cmd_check(opts: &CheckOptions) -> i32 {
    let trace: Trace = match trace_io::read_csv_path(&opts.trace_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ifbf: {e}");
            return exit_code::PARSE;
        }
    };
    let (m1, m2) = match (opts.m1, opts.m2) {
        (Some(m1), Some(m2)) => (m1, m2),
        (None, None) => {
            let Some(config_path) = &opts.config_path else {
                eprintln!("ifbf: check needs either --config or both --m1 and --m2");
                return exit_code::PARSE;
            };
            let setup = match load_setup(config_path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match plan_or_report(&setup) {
                Ok(report) | Err((report, _)) => (report.m1, report.m2),
            }
        }
        _ => {
            eprintln!("ifbf: --m1 and --m2 must be given together");
            return exit_code::PARSE;
        }
    };

    let slack = merit_decrease_slack(&trace);
    let merit_report = check_merit_decrease(&trace, m1, m2, slack);
    let certificate_violations = check_certificate_bounds(&trace);
    let summability = match check_summability(&trace) {
        Ok(report) => Some(report),
        Err(DiagnosticsError::TraceTooShort { len, min }) => {
            logging::info(&format!(
                "summability skipped: {len} rows, needs {min}"
            ));
            None
        }
    };

    let passed = merit_report.passed()
        && certificate_violations.is_empty()
        && summability.map(|s| !s.flagged).unwrap_or(true);
    print_json(&CheckOutput {
        passed,
        m1,
        m2,
        merit_decrease: MeritSection {
            passed: merit_report.passed(),
            advisory: merit_report.advisory,
            checked_rows: merit_report.checked_rows,
            slack,
            violations: merit_report.violations.len(),
            first_violation_row: merit_report.first_violation().map(|v| v.n),
        },
        certificate_bound: CertificateSection {
            passed: certificate_violations.is_empty(),
            violations: certificate_violations.len(),
            first_violation_row: certificate_violations.first().map(|v| v.n),
        },
        summability: SummabilitySection {
            checked: summability.is_some(),
            tail_ratio_residual_sq: summability.map(|s| s.tail_ratio_residual_sq),
            tail_ratio_step_sq: summability.map(|s| s.tail_ratio_step_sq),
            flagged: summability.map(|s| s.flagged).unwrap_or(false),
        },
    });
    if passed {
        exit_code::OK
    } else {
        exit_code::CHECK_FAILED
    }
}

/// `compare <config.json> [--variants a,b,c] [--seed S]`: runs each variant
/// from the same configuration and seed, printing one JSON row per variant
/// ordered by name.
pub fn cmd_compare(config_path: &Path, variants: &[Variant], seed: Option<u64>) -> i32 {
    let mut sorted: Vec<Variant> = variants.to_vec();
    sorted.sort_by_key(|v| v.name());
    sorted.dedup();
    let mut rows = Vec::new();
    for variant in sorted {
        // Problems hold boxed oracles, so each run rebuilds its own setup.
        let setup = match load_setup(config_path) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let (result, _constants) = match execute_run(&setup, variant, None, seed) {
            Ok(pair) => pair,
            Err(code) => return code,
        };
        logging::info(&format!(
            "{variant}: {} in {} iteration(s)",
            result.status, result.iterations
        ));
        rows.push(CompareRow {
            variant: variant.name().to_string(),
            status: result.status.to_string(),
            iterations: result.iterations,
            final_objective: result.final_objective,
            final_residual: result.final_residual,
        });
    }
    print_json(&rows);
    exit_code::OK
}
