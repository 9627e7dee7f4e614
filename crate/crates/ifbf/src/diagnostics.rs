//! Trace records and checks for the guarantees the scheme carries in the
//! feasible step regime: monotone decrease of the merit
//! `H(p_n, x_n) = (f + h)(p_n) + M2 ||x_n - p_n||^2`, row-wise soundness of
//! the certificate bound, square-summability of the residuals and the
//! quadratic upper (descent) inequality of the smooth part.
//!
//! Summability of an infinite series is not machine-checkable; the proxy
//! here is tail mass: the share of `sum ||x_n - p_n||^2` carried by the last
//! quarter of a trace. Convergent runs concentrate that sum early, so a
//! large tail flags a non-Cauchy run.

use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{self, Xorshift64Star};
use crate::model::{evaluate_objective, CompositeProblem, ExtReal, ModelError, SmoothFunction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("trace too short: {len} rows, need at least {min}")]
    TraceTooShort { len: usize, min: usize },
}

/// One solver iteration as recorded in a trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    /// `(f + h)(p_n)`.
    pub objective: f64,
    /// `||x_n - p_n||`.
    pub residual: f64,
    /// `H(p_n, x_n)`.
    pub merit: f64,
    /// `||s_n||`; absent at `n = 1`.
    pub certificate: Option<f64>,
    /// The computable bound on `||s_n||`; absent at `n = 1`.
    pub certificate_bound: Option<f64>,
    /// Running `sum_k ||x_k - p_k||^2`.
    pub cum_residual_sq: f64,
    /// Running `sum_k ||x_{k+1} - x_k||^2`.
    pub cum_step_sq: f64,
}

/// An append-only per-run trace; rows carry strictly increasing iteration
/// numbers and nondecreasing cumulative sums.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<TraceRow>) -> Self {
        let mut trace = Self::new();
        for row in rows {
            trace.push(row);
        }
        trace
    }

    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            debug_assert!(row.n > last.n, "iteration numbers must increase");
            debug_assert!(row.cum_residual_sq >= last.cum_residual_sq);
            debug_assert!(row.cum_step_sq >= last.cum_step_sq);
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// `H(p, x) = (f + h)(p) + m2 ||p - x||^2`; `PosInf` marks an infinite
/// objective value at `p`.
pub fn merit(
    problem: &CompositeProblem,
    m2: f64,
    p: &[f64],
    x: &[f64],
) -> Result<ExtReal, ModelError> {
    if x.len() != problem.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    let objective = evaluate_objective(problem, p)?;
    let gap = math::dist(p, x);
    Ok(objective + m2 * gap * gap)
}

/// A row where the merit decrease inequality failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeritViolation {
    pub n: usize,
    /// `H(p_n, x_n) + (M1 - M2) ||x_n - p_n||^2`.
    pub lhs: f64,
    /// `H(p_{n-1}, x_{n-1})` plus the allowed slack.
    pub rhs: f64,
}

/// Outcome of [`check_merit_decrease`].
#[derive(Clone, Debug)]
pub struct MeritDecreaseReport {
    pub checked_rows: usize,
    /// The decrease guarantee presumes `M1 > M2`; outside that regime the
    /// report is advisory and violations are expected.
    pub advisory: bool,
    pub slack: f64,
    pub violations: Vec<MeritViolation>,
}

impl MeritDecreaseReport {
    pub fn passed(&self) -> bool {
        self.advisory || self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&MeritViolation> {
        self.violations.first()
    }
}

/// Verifies `H(p_n, x_n) + (m1 - m2) ||x_n - p_n||^2 <= H(p_{n-1}, x_{n-1})
/// + slack` for every adjacent pair of rows.
pub fn check_merit_decrease(
    trace: &Trace,
    m1: f64,
    m2: f64,
    slack: f64,
) -> MeritDecreaseReport {
    let mut report = MeritDecreaseReport {
        checked_rows: 0,
        advisory: !(m1 > m2),
        slack,
        violations: Vec::new(),
    };
    for pair in trace.rows().windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        report.checked_rows += 1;
        let lhs = cur.merit + (m1 - m2) * cur.residual * cur.residual;
        let rhs = prev.merit + slack;
        if !(lhs <= rhs) {
            report.violations.push(MeritViolation {
                n: cur.n,
                lhs,
                rhs,
            });
        }
    }
    report
}

/// Slack used by the acceptance checks: `1e-9` relative to the first merit
/// value of the trace.
pub fn merit_decrease_slack(trace: &Trace) -> f64 {
    let scale = trace
        .rows()
        .first()
        .map(|r| math::abs(r.merit))
        .unwrap_or(0.0);
    1e-9 * (1.0 + scale)
}

/// A row where `||s_n||` exceeded its bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateViolation {
    pub n: usize,
    pub certificate: f64,
    pub bound: f64,
}

/// Row-wise check of `||s_n|| <= bound + 1e-10`; rows without a certificate
/// (the first one) are skipped.
pub fn check_certificate_bounds(trace: &Trace) -> Vec<CertificateViolation> {
    let mut violations = Vec::new();
    for row in trace.rows() {
        if let (Some(certificate), Some(bound)) = (row.certificate, row.certificate_bound) {
            if !(certificate <= bound + 1e-10) {
                violations.push(CertificateViolation {
                    n: row.n,
                    certificate,
                    bound,
                });
            }
        }
    }
    violations
}

/// Tail-mass proxy for square-summability.
#[derive(Clone, Copy, Debug)]
pub struct SummabilityReport {
    /// Share of `sum ||x_n - p_n||^2` in the last quarter of the trace.
    pub tail_ratio_residual_sq: f64,
    /// Share of `sum ||x_{n+1} - x_n||^2` in the last quarter.
    pub tail_ratio_step_sq: f64,
    /// Set when the residual tail carries more than half the total mass.
    pub flagged: bool,
}

/// Computes the tail ratios over the last quarter of the rows. Requires at
/// least 16 rows; all-zero traces report a zero ratio.
pub fn check_summability(trace: &Trace) -> Result<SummabilityReport, DiagnosticsError> {
    let len = trace.len();
    if len < 16 {
        return Err(DiagnosticsError::TraceTooShort { len, min: 16 });
    }
    let tail_start = len - len / 4;
    let res = {
        let total: f64 = trace.rows().iter().map(|r| r.residual * r.residual).sum();
        if total == 0.0 {
            0.0
        } else {
            let tail: f64 = trace.rows()[tail_start..]
                .iter()
                .map(|r| r.residual * r.residual)
                .sum();
            tail / total
        }
    };
    // The step column is cumulative; difference it for per-row masses.
    let mut prev = 0.0;
    let mut total_step = 0.0;
    let mut tail_step = 0.0;
    for (i, row) in trace.rows().iter().enumerate() {
        let mass = row.cum_step_sq - prev;
        prev = row.cum_step_sq;
        total_step += mass;
        if i >= tail_start {
            tail_step += mass;
        }
    }
    let step = if total_step == 0.0 {
        0.0
    } else {
        tail_step / total_step
    };
    Ok(SummabilityReport {
        tail_ratio_residual_sq: res,
        tail_ratio_step_sq: step,
        flagged: res > 0.5,
    })
}

/// A sampled pair violating the quadratic upper bound.
#[derive(Clone, Debug)]
pub struct DescentViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of [`check_descent_lemma`].
#[derive(Clone, Debug, Default)]
pub struct DescentReport {
    pub samples: usize,
    pub violations: Vec<DescentViolation>,
}

impl DescentReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `h(y) <= h(x) + <grad_h(x), y - x> + L/2 ||y - x||^2` on random
/// pairs from `[-10, 10]^m` with `1e-9` relative slack.
pub fn check_descent_lemma(h: &SmoothFunction, sample_count: usize, seed: u64) -> DescentReport {
    let mut rng = Xorshift64Star::new(seed);
    let mut report = DescentReport {
        samples: sample_count,
        ..DescentReport::default()
    };
    for _ in 0..sample_count {
        let x = rng.vector(h.dim(), -10.0, 10.0);
        let y = rng.vector(h.dim(), -10.0, 10.0);
        let gap = math::sub(&y, &x);
        let lhs = h.value(&y);
        let rhs = h.value(&x)
            + math::dot(&h.gradient(&x), &gap)
            + 0.5 * h.lipschitz() * math::norm_sq(&gap);
        if lhs > rhs + 1e-9 * math::abs(lhs).max(math::abs(rhs)).max(1.0) {
            report.violations.push(DescentViolation { x, y, lhs, rhs });
        }
    }
    report
}
