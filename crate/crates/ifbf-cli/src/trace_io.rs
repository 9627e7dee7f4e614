//! CSV trace format: header
//! `n,lambda,alpha,objective,residual,merit,cert,cert_bound,cum_res2,cum_dx2`,
//! one row per iteration, numbers printed with 17 significant digits so that
//! a parse of the emitted file reproduces every value exactly. The first
//! iteration has no certificate; its `cert` and `cert_bound` fields hold
//! `NaN`.

use std::fmt;
use std::io::Write;
use std::path::Path;

use ifbf::diagnostics::{Trace, TraceRow};

pub const HEADER: &str = "n,lambda,alpha,objective,residual,merit,cert,cert_bound,cum_res2,cum_dx2";

#[derive(Debug)]
pub enum TraceIoError {
    Io(String),
    Malformed { line: usize, reason: String },
    Empty,
}

impl fmt::Display for TraceIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceIoError::Io(msg) => write!(f, "{msg}"),
            TraceIoError::Malformed { line, reason } => {
                write!(f, "malformed trace at line {line}: {reason}")
            }
            TraceIoError::Empty => write!(f, "trace file has no data rows"),
        }
    }
}

fn field(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional_field(v: Option<f64>) -> String {
    field(v.unwrap_or(f64::NAN))
}

pub fn write_csv<W: Write>(rows: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            field(r.lambda),
            field(r.alpha),
            field(r.objective),
            field(r.residual),
            field(r.merit),
            optional_field(r.certificate),
            optional_field(r.certificate_bound),
            field(r.cum_residual_sq),
            field(r.cum_step_sq),
        )?;
    }
    Ok(())
}

pub fn write_csv_path(rows: &[TraceRow], path: &Path) -> Result<(), TraceIoError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| TraceIoError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_csv(rows, &mut file)
        .map_err(|e| TraceIoError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn read_csv_path(path: &Path) -> Result<Trace, TraceIoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TraceIoError::Io(format!("cannot read {}: {e}", path.display())))?;
    read_csv(&text)
}

pub fn read_csv(text: &str) -> Result<Trace, TraceIoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceIoError::Empty)?;
    if header.trim() != HEADER {
        return Err(TraceIoError::Malformed {
            line: 1,
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(TraceIoError::Malformed {
                line: line_no,
                reason: format!("expected 10 fields, found {}", fields.len()),
            });
        }
        let n: usize = fields[0].parse().map_err(|e| TraceIoError::Malformed {
            line: line_no,
            reason: format!("bad iteration number: {e}"),
        })?;
        let mut values = [0.0f64; 9];
        for (k, raw) in fields[1..].iter().enumerate() {
            values[k] = raw.parse().map_err(|e| TraceIoError::Malformed {
                line: line_no,
                reason: format!("bad number {raw:?}: {e}"),
            })?;
        }
        let opt = |v: f64| if v.is_nan() { None } else { Some(v) };
        let row = TraceRow {
            n,
            lambda: values[0],
            alpha: values[1],
            objective: values[2],
            residual: values[3],
            merit: values[4],
            certificate: opt(values[5]),
            certificate_bound: opt(values[6]),
            cum_residual_sq: values[7],
            cum_step_sq: values[8],
        };
        if let Some(last) = rows.last() {
            let prev: &TraceRow = last;
            if row.n <= prev.n {
                return Err(TraceIoError::Malformed {
                    line: line_no,
                    reason: "iteration numbers must increase".to_string(),
                });
            }
            if row.cum_residual_sq < prev.cum_residual_sq || row.cum_step_sq < prev.cum_step_sq {
                return Err(TraceIoError::Malformed {
                    line: line_no,
                    reason: "cumulative sums must be nondecreasing".to_string(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TraceIoError::Empty);
    }
    Ok(Trace::from_rows(rows))
}
