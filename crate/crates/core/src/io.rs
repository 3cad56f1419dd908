//! Plain-text exchange formats.
//!
//! Matrices and vectors share one format: a header line `m n field` with
//! `field` either `real` or `complex`, followed by `m` lines of `n`
//! whitespace-separated entries. Complex entries are written `re+imj` with no
//! interior spaces; vectors are single-column matrices. Traces and study
//! tables serialize to CSV with a mandatory header row and fixed column
//! order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Scalar};
use crate::problems::TestProblem;
use crate::solvers::{DsmTrace, IterationTrace};
use crate::stopping::NoisyData;

/// Operator over either scalar field, as read from or written to disk.
#[derive(Clone, Debug)]
pub enum AnyOperator {
    Real(LinearOperator<f64>),
    Complex(LinearOperator<Complex64>),
}

impl AnyOperator {
    pub fn nrows(&self) -> usize {
        match self {
            AnyOperator::Real(a) => a.nrows(),
            AnyOperator::Complex(a) => a.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            AnyOperator::Real(a) => a.ncols(),
            AnyOperator::Complex(a) => a.ncols(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, AnyOperator::Complex(_))
    }

    pub fn to_complex_operator(&self) -> LinearOperator<Complex64> {
        match self {
            AnyOperator::Real(a) => a.to_complex(),
            AnyOperator::Complex(a) => a.clone(),
        }
    }
}

/// Vector over either scalar field.
#[derive(Clone, Debug)]
pub enum AnyVector {
    Real(DVector<f64>),
    Complex(DVector<Complex64>),
}

impl AnyVector {
    pub fn len(&self) -> usize {
        match self {
            AnyVector::Real(v) => v.len(),
            AnyVector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, AnyVector::Complex(_))
    }

    pub fn to_complex_vector(&self) -> DVector<Complex64> {
        match self {
            AnyVector::Real(v) => v.map(|x| Complex64::new(x, 0.0)),
            AnyVector::Complex(v) => v.clone(),
        }
    }
}

fn format_real(x: f64) -> String {
    format!("{x:e}")
}

fn format_complex(z: Complex64) -> String {
    let (sign, mag) = if z.im < 0.0 { ('-', -z.im) } else { ('+', z.im.abs()) };
    format!("{:e}{}{:e}j", z.re, sign, mag)
}

fn parse_real(token: &str) -> Result<f64> {
    let x: f64 = token
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse real entry '{token}'")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("entry '{token}' is not finite")));
    }
    Ok(x)
}

fn parse_complex(token: &str) -> Result<Complex64> {
    let z: Complex64 = token
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse complex entry '{token}'")))?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Parse(format!("entry '{token}' is not finite")));
    }
    Ok(z)
}

/// Renders an operator in the shared matrix text format.
pub fn format_operator(op: &AnyOperator) -> String {
    let mut out = String::new();
    match op {
        AnyOperator::Real(a) => {
            let m = a.matrix();
            let _ = writeln!(out, "{} {} real", m.nrows(), m.ncols());
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format_real(m[(i, j)])).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        AnyOperator::Complex(a) => {
            let m = a.matrix();
            let _ = writeln!(out, "{} {} complex", m.nrows(), m.ncols());
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    }
    out
}

/// Parses the matrix text format.
pub fn parse_operator(text: &str) -> Result<AnyOperator> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    let m: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header '{header}': expected 'm n field'")))?;
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header '{header}': expected 'm n field'")))?;
    let field = parts
        .next()
        .ok_or_else(|| Error::Parse(format!("bad header '{header}': missing field")))?;
    if parts.next().is_some() {
        return Err(Error::Parse(format!("bad header '{header}': trailing tokens")));
    }
    if m == 0 || n == 0 {
        return Err(Error::Parse(format!("bad header '{header}': dimensions must be >= 1")));
    }

    let mut rows: Vec<Vec<&str>> = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {m} rows, file ended early")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(Error::Parse(format!(
                "row has {} entries, expected {n}: '{line}'",
                tokens.len()
            )));
        }
        rows.push(tokens);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing content after the last row".into()));
    }

    match field {
        "real" => {
            let mut data = DMatrix::zeros(m, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, tok) in row.iter().enumerate() {
                    data[(i, j)] = parse_real(tok)?;
                }
            }
            Ok(AnyOperator::Real(LinearOperator::new(data)?))
        }
        "complex" => {
            let mut data = DMatrix::from_element(m, n, Complex64::new(0.0, 0.0));
            for (i, row) in rows.iter().enumerate() {
                for (j, tok) in row.iter().enumerate() {
                    data[(i, j)] = parse_complex(tok)?;
                }
            }
            Ok(AnyOperator::Complex(LinearOperator::new(data)?))
        }
        other => Err(Error::Parse(format!("unknown field '{other}', expected 'real' or 'complex'"))),
    }
}

pub fn write_operator(op: &AnyOperator, path: &Path) -> Result<()> {
    fs::write(path, format_operator(op))?;
    Ok(())
}

pub fn read_operator(path: &Path) -> Result<AnyOperator> {
    parse_operator(&fs::read_to_string(path)?)
}

/// Renders a vector as a single-column matrix.
pub fn format_vector(v: &AnyVector) -> String {
    match v {
        AnyVector::Real(v) => {
            let op = AnyOperator::Real(
                LinearOperator::new(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
                    .expect("finite vector"),
            );
            format_operator(&op)
        }
        AnyVector::Complex(v) => {
            let op = AnyOperator::Complex(
                LinearOperator::new(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
                    .expect("finite vector"),
            );
            format_operator(&op)
        }
    }
}

pub fn parse_vector(text: &str) -> Result<AnyVector> {
    match parse_operator(text)? {
        AnyOperator::Real(a) => {
            if a.ncols() != 1 {
                return Err(Error::Parse(format!("expected a single-column vector, got {} columns", a.ncols())));
            }
            Ok(AnyVector::Real(a.matrix().column(0).into_owned()))
        }
        AnyOperator::Complex(a) => {
            if a.ncols() != 1 {
                return Err(Error::Parse(format!("expected a single-column vector, got {} columns", a.ncols())));
            }
            Ok(AnyVector::Complex(a.matrix().column(0).into_owned()))
        }
    }
}

pub fn write_vector(v: &AnyVector, path: &Path) -> Result<()> {
    fs::write(path, format_vector(v))?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<AnyVector> {
    parse_vector(&fs::read_to_string(path)?)
}

/// One CSV row of a solver trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow {
    pub step_or_time: f64,
    pub error: Option<f64>,
    pub residual: f64,
}

/// Writes trace rows as `step_or_time,error,residual`; the error column stays
/// blank when no reference solution was supplied.
pub fn write_trace_csv(mut w: impl std::io::Write, rows: &[TraceRow]) -> Result<()> {
    writeln!(w, "step_or_time,error,residual")?;
    for row in rows {
        match row.error {
            Some(e) => writeln!(w, "{:e},{:e},{:e}", row.step_or_time, e, row.residual)?,
            None => writeln!(w, "{:e},,{:e}", row.step_or_time, row.residual)?,
        }
    }
    Ok(())
}

pub fn trace_rows_from_iteration<S: Scalar>(trace: &IterationTrace<S>) -> Vec<TraceRow> {
    let has_errors = !trace.errors().is_empty();
    (0..trace.steps())
        .map(|k| TraceRow {
            step_or_time: k as f64,
            error: if has_errors { Some(trace.errors()[k]) } else { None },
            residual: trace.residuals()[k],
        })
        .collect()
}

pub fn trace_rows_from_dsm<S: Scalar>(trace: &DsmTrace<S>) -> Vec<TraceRow> {
    let has_errors = !trace.errors().is_empty();
    (0..trace.len())
        .map(|k| TraceRow {
            step_or_time: trace.times()[k],
            error: if has_errors { Some(trace.errors()[k]) } else { None },
            residual: trace.residuals()[k],
        })
        .collect()
}

/// One row of a convergence table.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub residual: f64,
    pub spectral_prediction: f64,
}

pub fn write_convergence_csv(mut w: impl std::io::Write, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "n,error,residual,spectral_prediction")?;
    for r in rows {
        writeln!(w, "{},{:e},{:e},{:e}", r.n, r.error, r.residual, r.spectral_prediction)?;
    }
    Ok(())
}

/// One row of a noise study.
#[derive(Clone, Copy, Debug)]
pub struct NoiseStudyRow {
    pub delta: f64,
    pub n_delta: usize,
    pub error_stopped: f64,
    pub envelope: f64,
}

pub fn write_noise_study_csv(mut w: impl std::io::Write, rows: &[NoiseStudyRow]) -> Result<()> {
    writeln!(w, "delta,n_delta,error_stopped,envelope")?;
    for r in rows {
        writeln!(w, "{:e},{},{:e},{:e}", r.delta, r.n_delta, r.error_stopped, r.envelope)?;
    }
    Ok(())
}

/// Exports a problem to a directory: `A.txt`, `f.txt` (noisy data when
/// given), `y.txt`, and a `problem.json` sidecar `{label, m, n, delta}`.
pub fn export_problem(problem: &TestProblem, noisy: Option<&NoisyData>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_operator(&AnyOperator::Real(problem.operator().clone()), &dir.join("A.txt"))?;
    let f = noisy.map(|n| n.data().clone()).unwrap_or_else(|| problem.rhs().clone());
    write_vector(&AnyVector::Real(f), &dir.join("f.txt"))?;
    write_vector(&AnyVector::Real(problem.solution().clone()), &dir.join("y.txt"))?;
    let sidecar = serde_json::json!({
        "label": problem.label(),
        "m": problem.nrows(),
        "n": problem.ncols(),
        "delta": noisy.map(|n| n.delta()).unwrap_or(0.0),
    });
    fs::write(dir.join("problem.json"), serde_json::to_string_pretty(&sidecar).expect("serializable"))?;
    Ok(())
}
