//! Job files for `sweep`.
//!
//! One cell per line, written as `key=value` pairs separated by whitespace:
//!
//! ```text
//! # comment
//! fn=x^2 a=1 b=2 q=2
//! fn="x^2 * ln(x)" a=1 b=2.718281828459045
//! ```
//!
//! `fn`, `a` and `b` are required. `q` is optional and enables the two
//! derivative bounds (the Hölder bound only for `q > 1`). Values containing
//! spaces are quoted with shell rules. Blank lines and lines starting with
//! `#` are skipped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::FunctionSpec;
use crate::hh::{
    hh_triple, hoelder_bound_check, lemma_identity_check, powermean_bound_check, BoundOptions,
};
use crate::quad::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub line: usize,
    pub source: String,
    pub a: f64,
    pub b: f64,
    pub q: Option<f64>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("job file line {line}: {msg}"))
}

fn number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| bad(line, format_args!("`{key}` is not a number: {v:?}")))
}

pub fn parse_line(line: usize, text: &str) -> Result<Option<Job>> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let words = shlex::split(trimmed).ok_or_else(|| bad(line, "unbalanced quotes"))?;
    let (mut source, mut a, mut b, mut q) = (None, None, None, None);
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| bad(line, format_args!("expected key=value, got {w:?}")))?;
        let slot = match k {
            "fn" => {
                source = Some(v.to_string());
                continue;
            }
            "a" => &mut a,
            "b" => &mut b,
            "q" => &mut q,
            _ => return Err(bad(line, format_args!("unknown key `{k}`"))),
        };
        *slot = Some(number(line, k, v)?);
    }
    Ok(Some(Job {
        line,
        source: source.ok_or_else(|| bad(line, "missing `fn`"))?,
        a: a.ok_or_else(|| bad(line, "missing `a`"))?,
        b: b.ok_or_else(|| bad(line, "missing `b`"))?,
        q,
    }))
}

pub fn parse_jobs(text: &str) -> Result<Vec<Job>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| parse_line(i + 1, l).transpose())
        .collect()
}

/// One output row. Every row has the same fields so CSV headers stay fixed;
/// quantities that do not apply are null.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub line: usize,
    #[serde(rename = "fn")]
    pub source: String,
    pub a: f64,
    pub b: f64,
    pub q: Option<f64>,
    pub left: Option<f64>,
    pub middle: Option<f64>,
    pub right: Option<f64>,
    pub hh_holds: Option<bool>,
    pub identity_gap: Option<f64>,
    pub identity_holds: Option<bool>,
    pub powermean_lhs: Option<f64>,
    pub powermean_rhs: Option<f64>,
    pub powermean_holds: Option<bool>,
    pub hoelder_rhs: Option<f64>,
    pub hoelder_holds: Option<bool>,
    pub error: Option<String>,
    pub holds: bool,
}

impl SweepRow {
    fn empty(job: &Job) -> Self {
        SweepRow {
            line: job.line,
            source: job.source.clone(),
            a: job.a,
            b: job.b,
            q: job.q,
            left: None,
            middle: None,
            right: None,
            hh_holds: None,
            identity_gap: None,
            identity_holds: None,
            powermean_lhs: None,
            powermean_rhs: None,
            powermean_holds: None,
            hoelder_rhs: None,
            hoelder_holds: None,
            error: None,
            holds: false,
        }
    }
}

fn fill(row: &mut SweepRow, job: &Job, tol: f64, gap_tol: f64) -> Result<()> {
    let fs = FunctionSpec::parse(&job.source)?;
    let iv = Interval::new(job.a, job.b)?;
    let hh = hh_triple(&fs, &iv, tol)?;
    row.left = Some(hh.left);
    row.middle = Some(hh.middle);
    row.right = Some(hh.right);
    row.hh_holds = Some(hh.holds());
    let mut ok = hh.holds();
    if iv.is_positive() {
        let id = lemma_identity_check(&fs, &iv, tol)?;
        row.identity_gap = Some(id.gap);
        row.identity_holds = Some(id.within_relative(gap_tol));
        ok &= id.within_relative(gap_tol);
        if let Some(q) = job.q {
            let opts = BoundOptions::with_tol(tol);
            let pm = powermean_bound_check(&fs, &iv, q, &opts)?;
            row.powermean_lhs = Some(pm.lhs_abs);
            row.powermean_rhs = Some(pm.rhs);
            row.powermean_holds = Some(pm.holds);
            ok &= pm.holds;
            if q > 1.0 {
                let ho = hoelder_bound_check(&fs, &iv, q, &opts)?;
                row.hoelder_rhs = Some(ho.rhs);
                row.hoelder_holds = Some(ho.holds);
                ok &= ho.holds;
            }
        }
    }
    row.holds = ok;
    Ok(())
}

/// Runs one cell. Errors are recorded in the row rather than aborting the
/// sweep.
pub fn run_job(job: &Job, tol: f64, gap_tol: f64) -> SweepRow {
    let mut row = SweepRow::empty(job);
    if let Err(e) = fill(&mut row, job, tol, gap_tol) {
        row.error = Some(e.to_string());
        row.holds = false;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_quoted_values_and_comments() {
        let jobs =
            parse_jobs("# header\n\nfn=\"x^2 + 1\" a=1 b=2 q=2\n  fn=x a=0.5 b=3\n").unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].source, "x^2 + 1");
        assert_eq!(jobs[0].line, 3);
        assert_eq!(jobs[0].q, Some(2.0));
        assert_eq!(jobs[1].q, None);
        assert_eq!(jobs[1].line, 4);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_jobs("fn=x a=1 b=2\nfn=x a=1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_jobs("fn=x a=one b=2").is_err());
        assert!(parse_jobs("fn=x a=1 b=2 r=3").is_err());
        assert!(parse_jobs("fn=\"x a=1 b=2").is_err());
    }

    #[test]
    fn domain_errors_stay_in_the_row() {
        let job = parse_line(1, "fn=ln(x) a=-2 b=-1").unwrap().unwrap();
        let row = run_job(&job, 1e-10, 1e-8);
        assert!(!row.holds);
        assert!(row.error.is_some());
    }

    #[test]
    fn full_row() {
        let job = parse_line(1, "fn=x^2 a=1 b=2 q=2").unwrap().unwrap();
        let row = run_job(&job, 1e-10, 1e-8);
        assert!(row.holds, "{row:?}");
        assert!((row.middle.unwrap() - 2.0).abs() < 1e-10);
        assert!(row.hoelder_holds.unwrap());
    }
}
