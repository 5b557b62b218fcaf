//! Adaptive Simpson quadrature with Richardson error estimates, and the
//! sign-definite [`Interval`] every inequality in the crate lives on.

use serde::Serialize;

use crate::error::{Error, QuadError, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 10_000;

/// Which side of zero an interval lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSign {
    Positive,
    Negative,
}

/// A closed interval `[a, b]` with `a < b` that does not contain zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let bad = |reason| Err(Error::InvalidInterval { a, b, reason });
        if !a.is_finite() || !b.is_finite() {
            return bad("endpoints must be finite");
        }
        if a >= b {
            return bad("requires a < b");
        }
        if a <= 0.0 && b >= 0.0 {
            return bad("interval must not contain zero");
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn sign(&self) -> DomainSign {
        if self.a > 0.0 {
            DomainSign::Positive
        } else {
            DomainSign::Negative
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == DomainSign::Positive
    }

    /// `2ab / (a + b)`, always inside the interval.
    pub fn harmonic_midpoint(&self) -> f64 {
        2.0 * self.a * self.b / (self.a + self.b)
    }

    /// Image under `x -> 1/x`, sorted by value.
    ///
    /// `1/x` is decreasing on each half-line, so for `0 < a < b` the image is
    /// `[1/b, 1/a]` and for `a < b < 0` it is also `[1/b, 1/a]` (both
    /// negative). Sorting covers both cases without a sign branch.
    pub fn reciprocal(&self) -> Interval {
        let (u, v) = (1.0 / self.a, 1.0 / self.b);
        Interval {
            a: u.min(v),
            b: u.max(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance on the whole integral.
    pub tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: DEFAULT_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute, non-negative; at most the requested tolerance.
    pub error_estimate: f64,
    /// Number of accepted Simpson panels.
    pub subdivisions: usize,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn sample<F, E>(g: &mut F, x: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadError>,
{
    let v = g(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite { at: x, value: v }.into())
    }
}

fn check_bounds(lo: f64, hi: f64, cfg: &QuadConfig) -> Result<(), QuadError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadError::BadBounds { lo, hi });
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(QuadError::BadTolerance(cfg.tol));
    }
    Ok(())
}

/// Integrates a fallible integrand over `[lo, hi]`.
///
/// A panel is accepted once `|S(halves) - S(whole)| / 15` is at most `tol`
/// times its share of the total width and the same test passes one level
/// down, between the quarters and the halves. The summed estimate never
/// exceeds `tol`. Accepted panels contribute the Richardson-extrapolated
/// quarter-panel value.
pub fn try_integrate<F, E>(mut g: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadError>,
{
    check_bounds(lo, hi, cfg)?;
    let span = hi - lo;
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (sample(&mut g, lo)?, sample(&mut g, m)?, sample(&mut g, hi)?);
    let mut stack = vec![Panel {
        a: lo,
        m,
        b: hi,
        fa,
        fm,
        fb,
        whole: simpson(lo, hi, fa, fm, fb),
    }];

    let mut value = CompensatedSum::default();
    let mut error = CompensatedSum::default();
    let mut accepted = 0usize;
    // accepted + pending panels
    let mut leaves = 1usize;

    while let Some(p) = stack.pop() {
        let lm = 0.5 * (p.a + p.m);
        let rm = 0.5 * (p.m + p.b);
        let flm = sample(&mut g, lm)?;
        let frm = sample(&mut g, rm)?;
        let left = simpson(p.a, p.m, p.fa, flm, p.fm);
        let right = simpson(p.m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        let budget = cfg.tol * (p.b - p.a) / span;

        if diff.abs() <= 15.0 * budget {
            // S(whole) and S(halves) can agree by accident on a coarse panel,
            // so the quarters have to agree with the halves as well
            let q = [
                sample(&mut g, 0.5 * (p.a + lm))?,
                sample(&mut g, 0.5 * (lm + p.m))?,
                sample(&mut g, 0.5 * (p.m + rm))?,
                sample(&mut g, 0.5 * (rm + p.b))?,
            ];
            let fine = simpson(p.a, lm, p.fa, q[0], flm)
                + simpson(lm, p.m, flm, q[1], p.fm)
                + simpson(p.m, rm, p.fm, q[2], frm)
                + simpson(rm, p.b, frm, q[3], p.fb);
            let fine_diff = fine - (left + right);
            if fine_diff.abs() <= 15.0 * budget {
                value.add(fine + fine_diff / 15.0);
                error.add(fine_diff.abs() / 15.0);
                accepted += 1;
                continue;
            }
        }
        if leaves + 1 > cfg.max_subdivisions || lm <= p.a || rm >= p.b {
            return Err(QuadError::SubdivisionCap {
                cap: cfg.max_subdivisions,
                error_estimate: error.value() + diff.abs() / 15.0,
            }
            .into());
        }
        leaves += 1;
        stack.push(Panel {
            a: p.m,
            m: rm,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        });
        stack.push(Panel {
            a: p.a,
            m: lm,
            b: p.m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        });
    }

    Ok(QuadResult {
        value: value.value(),
        error_estimate: error.value(),
        subdivisions: accepted,
    })
}

pub fn integrate<F>(mut g: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok::<_, QuadError>(g(x)), lo, hi, cfg)
}

/// Splits `[lo, hi]` at the given interior kinks and integrates each piece
/// with a proportional share of the tolerance.
pub fn try_integrate_kink_split<F, E>(
    mut g: F,
    lo: f64,
    hi: f64,
    kinks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadError>,
{
    check_bounds(lo, hi, cfg)?;
    let inside = kinks.iter().all(|&k| k > lo && k < hi);
    let sorted = kinks.windows(2).all(|w| w[0] < w[1]);
    if !inside || !sorted {
        return Err(QuadError::BadKinks.into());
    }

    let span = hi - lo;
    let mut value = CompensatedSum::default();
    let mut error = 0.0;
    let mut subdivisions = 0;
    let mut start = lo;
    for &end in kinks.iter().chain(std::iter::once(&hi)) {
        let piece = QuadConfig {
            tol: cfg.tol * (end - start) / span,
            max_subdivisions: cfg.max_subdivisions,
        };
        let r = try_integrate(&mut g, start, end, &piece)?;
        value.add(r.value);
        error += r.error_estimate;
        subdivisions += r.subdivisions;
        start = end;
    }
    Ok(QuadResult {
        value: value.value(),
        error_estimate: error,
        subdivisions,
    })
}

pub fn integrate_kink_split<F>(
    mut g: F,
    lo: f64,
    hi: f64,
    kinks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_kink_split(|x| Ok::<_, QuadError>(g(x)), lo, hi, kinks, cfg)
}
