//! The harmonic Hermite-Hadamard triple, the trapezoid identity behind the
//! derivative bounds, the closed-form kernel constants, and the two bound
//! checks built on them.

use serde::Serialize;

use crate::convexity::{check_harmonic_convexity_fn, SamplingConfig, Verdict};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::FunctionSpec;
use crate::quad::{try_integrate, Interval, QuadConfig};

/// Below this relative width `(b - a)/a` the kernel constants are summed
/// from their power series instead of the closed forms.
pub const SERIES_THRESHOLD: f64 = 1e-2;

const MAX_SERIES_TERMS: usize = 64;

/// Rounding allowance, in units of the largest member magnitude.
const ROUNDING_ULPS: f64 = 16.0;

fn rounding(scale: f64) -> f64 {
    ROUNDING_ULPS * f64::EPSILON * scale
}

/// `(f(2ab/(a+b)), ab/(b-a) ∫ f(x)/x² dx, (f(a)+f(b))/2)` and their verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HHReport {
    pub left: f64,
    pub middle: f64,
    pub right: f64,
    pub middle_error: f64,
    /// Additive allowance used by both verdicts.
    pub slack: f64,
    pub verdict_left: bool,
    pub verdict_right: bool,
}

impl HHReport {
    pub fn holds(&self) -> bool {
        self.verdict_left && self.verdict_right
    }

    /// The chain in the concave direction, `left >= middle >= right`.
    pub fn holds_reversed(&self) -> bool {
        self.middle <= self.left + self.slack && self.right <= self.middle + self.slack
    }
}

struct Middle {
    value: f64,
    error: f64,
    fa: f64,
    fb: f64,
    fh: f64,
}

fn middle_member(fs: &FunctionSpec, iv: &Interval, tol: f64) -> Result<Middle> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (a, b) = (iv.a(), iv.b());
    let (fa, fb, fh) = (fs.eval(a)?, fs.eval(b)?, fs.eval(iv.harmonic_midpoint())?);
    let fscale = 1f64.max(fa.abs()).max(fb.abs()).max(fh.abs());
    // ab/(b-a) > 0 on either half-line
    let weight = a * b / (b - a);
    let cfg = QuadConfig::with_tol(tol * fscale / weight);
    let r = try_integrate(|x| Ok::<_, Error>(fs.eval(x)? / (x * x)), a, b, &cfg)?;
    Ok(Middle {
        value: weight * r.value,
        error: weight * r.error_estimate,
        fa,
        fb,
        fh,
    })
}

/// Evaluates the three members of the harmonic Hermite-Hadamard chain.
///
/// `tol` is relative to `max(1, |f|)` at the endpoints and the harmonic
/// midpoint. Verdicts allow `middle_error + tol` plus a few ulps of the
/// largest member.
pub fn hh_triple(fs: &FunctionSpec, iv: &Interval, tol: f64) -> Result<HHReport> {
    let m = middle_member(fs, iv, tol)?;
    let left = m.fh;
    let right = 0.5 * (m.fa + m.fb);
    let scale = left.abs().max(right.abs()).max(m.value.abs());
    let slack = m.error + tol + rounding(scale);
    Ok(HHReport {
        left,
        middle: m.value,
        right,
        middle_error: m.error,
        slack,
        verdict_left: left <= m.value + slack,
        verdict_right: m.value <= right + slack,
    })
}

/// [`hh_triple`] over many intervals, results in input order.
pub fn hh_triple_batch(
    fs: &FunctionSpec,
    intervals: &[Interval],
    tol: f64,
    exec: Exec,
) -> Vec<Result<HHReport>> {
    exec.map(intervals, |iv| hh_triple(fs, iv, tol))
}

fn require_positive(iv: &Interval, what: &str) -> Result<()> {
    if iv.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} requires an interval in (0, inf), got [{}, {}]",
            iv.a(),
            iv.b()
        )))
    }
}

/// Both sides of the trapezoid identity
///
/// ```text
/// (f(a)+f(b))/2 - ab/(b-a) ∫ₐᵇ f(x)/x² dx
///     = ab(b-a)/2 ∫₀¹ (1-2t)/(tb+(1-t)a)² f'(ab/(tb+(1-t)a)) dt
/// ```
///
/// The left side integrates `f`, the right side integrates the symbolic
/// derivative over a different variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
    /// `max(1, |f|)` over the endpoints and the harmonic midpoint.
    pub scale: f64,
}

impl IdentityReport {
    /// `gap <= tol * scale`
    pub fn within_relative(&self, tol: f64) -> bool {
        self.gap <= tol * self.scale
    }
}

pub fn lemma_identity_check(fs: &FunctionSpec, iv: &Interval, tol: f64) -> Result<IdentityReport> {
    require_positive(iv, "the trapezoid identity")?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (a, b) = (iv.a(), iv.b());
    let (fa, fb, fh) = (fs.eval(a)?, fs.eval(b)?, fs.eval(iv.harmonic_midpoint())?);
    let fscale = 1f64.max(fa.abs()).max(fb.abs()).max(fh.abs());
    let trapezoid = 0.5 * (fa + fb);

    // ab/(b-a) ∫ dx/x² = 1, so the trapezoid moves under the integral and
    // the subtraction happens pointwise instead of between two large totals
    let weight = a * b / (b - a);
    let l = try_integrate(
        |x| Ok::<_, Error>((trapezoid - fs.eval(x)?) / (x * x)),
        a,
        b,
        &QuadConfig::with_tol(tol * fscale / weight),
    )?;
    let lhs = weight * l.value;

    let prefactor = a * b * (b - a) / 2.0;
    let h = |t: f64| -> Result<f64> {
        let s = t * b + (1.0 - t) * a;
        Ok(fs.eval_derivative(a * b / s)? / (s * s))
    };
    // ∫₀¹ (1-2t) h(t) dt folded onto [0, 1/2]; the halves cancel pointwise
    let r = try_integrate(
        |t| Ok::<_, Error>((1.0 - 2.0 * t) * (h(t)? - h(1.0 - t)?)),
        0.0,
        0.5,
        &QuadConfig::with_tol(tol * fscale / prefactor),
    )?;
    let rhs = prefactor * r.value;
    Ok(IdentityReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        lhs_error: weight * l.error_estimate,
        rhs_error: prefactor * r.error_estimate,
        scale: fscale,
    })
}

/// `λ₁ = ∫₀¹ |1-2t| / (tb+(1-t)a)² dt` and its `t` and `(1-t)` weighted
/// parts `λ₂`, `λ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaConstants {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

/// `μ₁ = ∫₀¹ t (tb+(1-t)a)^(-2q) dt` and `μ₂ = ∫₀¹ (1-t)(tb+(1-t)a)^(-2q) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuConstants {
    pub mu1: f64,
    pub mu2: f64,
    pub q: f64,
}

fn relative_width(iv: &Interval) -> f64 {
    iv.width() / iv.a()
}

/// `∫₀¹ |1-2t| t^k dt`
fn abs_kernel_moment(k: usize) -> f64 {
    let k_f = k as f64;
    (0.5f64.powi(k as i32) + k_f) / ((k_f + 1.0) * (k_f + 2.0))
}

/// Sums `Σ c_k r^k` until the terms stop mattering.
fn sum_series(r: f64, coeff: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut rk = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let term = coeff(k) * rk;
        sum += term;
        if k > 2 && term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        rk *= r;
    }
    sum
}

fn lambda_closed_form(a: f64, b: f64) -> LambdaConstants {
    let d = b - a;
    // ln((a+b)²/(4ab)) = ln(1 + (b-a)²/(4ab))
    let log_term = (d * d / (4.0 * a * b)).ln_1p();
    let d3 = d * d * d;
    LambdaConstants {
        lambda1: 1.0 / (a * b) - 2.0 / (d * d) * log_term,
        lambda2: -1.0 / (b * d) + (3.0 * a + b) / d3 * log_term,
        lambda3: 1.0 / (a * d) - (3.0 * b + a) / d3 * log_term,
    }
}

/// Expansion of `(1 + rt)^-2` under the moments, with `r = (b-a)/a`.
fn lambda_series(a: f64, r: f64) -> LambdaConstants {
    let scale = 1.0 / (a * a);
    let weight = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 } * (k as f64 + 1.0);
    LambdaConstants {
        lambda1: scale * sum_series(r, |k| weight(k) * abs_kernel_moment(k)),
        lambda2: scale * sum_series(r, |k| weight(k) * abs_kernel_moment(k + 1)),
        lambda3: scale
            * sum_series(r, |k| {
                weight(k) * (abs_kernel_moment(k) - abs_kernel_moment(k + 1))
            }),
    }
}

pub fn lambda_constants(iv: &Interval) -> Result<LambdaConstants> {
    require_positive(iv, "the lambda constants")?;
    let r = relative_width(iv);
    Ok(if r < SERIES_THRESHOLD {
        lambda_series(iv.a(), r)
    } else {
        lambda_closed_form(iv.a(), iv.b())
    })
}

fn mu_closed_form(a: f64, b: f64, q: f64) -> (f64, f64) {
    let d = b - a;
    let s = 1.0 - 2.0 * q;
    let den = 2.0 * d * d * (1.0 - q) * s;
    let mu1 = (a.powf(2.0 - 2.0 * q) + b.powf(s) * (d * s - a)) / den;
    let mu2 = (b.powf(2.0 - 2.0 * q) - a.powf(s) * (d * s + b)) / den;
    (mu1, mu2)
}

/// Binomial expansion of `(1 + rt)^(-2q)`.
fn mu_series(a: f64, r: f64, q: f64) -> (f64, f64) {
    let binom = |k: usize| (0..k).fold(1.0, |c, j| c * (-2.0 * q - j as f64) / (j as f64 + 1.0));
    let scale = a.powf(-2.0 * q);
    let mu1 = sum_series(r, |k| binom(k) / (k as f64 + 2.0));
    let mu2 = sum_series(r, |k| binom(k) / ((k as f64 + 1.0) * (k as f64 + 2.0)));
    (scale * mu1, scale * mu2)
}

pub fn mu_constants(iv: &Interval, q: f64) -> Result<MuConstants> {
    require_positive(iv, "the mu constants")?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mu constants need q > 1, got {q}"
        )));
    }
    let r = relative_width(iv);
    let (mu1, mu2) = if r < SERIES_THRESHOLD {
        mu_series(iv.a(), r, q)
    } else {
        mu_closed_form(iv.a(), iv.b(), q)
    };
    Ok(MuConstants { mu1, mu2, q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    PowerMean,
    Hoelder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundConstants {
    Lambda(LambdaConstants),
    Mu(MuConstants),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub q: f64,
    /// Conjugate exponent; only set for the Hölder bound.
    pub p: Option<f64>,
    pub lhs_abs: f64,
    pub rhs: f64,
    pub constants: BoundConstants,
    pub fprime_a: f64,
    pub fprime_b: f64,
    pub slack: f64,
    /// `lhs_abs / rhs`, absent when `rhs == 0`.
    pub tightness: Option<f64>,
    pub hypothesis_checked: bool,
    /// Sampled harmonic convexity of `|f'|^q`, when checked.
    pub hypothesis: Option<Verdict>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub tol: f64,
    /// When set, `|f'|^q` is sampled for harmonic convexity and the result
    /// recorded. The bound is evaluated either way.
    pub hypothesis: Option<SamplingConfig>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            tol: crate::quad::DEFAULT_TOL,
            hypothesis: None,
        }
    }
}

impl BoundOptions {
    pub fn with_tol(tol: f64) -> Self {
        BoundOptions {
            tol,
            hypothesis: None,
        }
    }
}

/// Harmonic convexity of `|f'|^q` on `iv`.
pub fn derivative_power_convexity(
    fs: &FunctionSpec,
    iv: &Interval,
    q: f64,
    cfg: &SamplingConfig,
) -> Result<Verdict> {
    let g = |x: f64| -> Result<f64> { Ok(fs.eval_derivative(x)?.abs().powf(q)) };
    Ok(check_harmonic_convexity_fn(g, iv, cfg)?.harmonically_convex)
}

struct BoundInputs {
    hh: HHReport,
    fa: f64,
    fb: f64,
    prefactor: f64,
    hypothesis: Option<Verdict>,
}

fn bound_inputs(
    fs: &FunctionSpec,
    iv: &Interval,
    q: f64,
    opts: &BoundOptions,
) -> Result<BoundInputs> {
    require_positive(iv, "the derivative bounds")?;
    let hh = hh_triple(fs, iv, opts.tol)?;
    let hypothesis = opts
        .hypothesis
        .as_ref()
        .map(|cfg| derivative_power_convexity(fs, iv, q, cfg))
        .transpose()?;
    Ok(BoundInputs {
        hh,
        fa: fs.eval_derivative(iv.a())?.abs(),
        fb: fs.eval_derivative(iv.b())?.abs(),
        prefactor: iv.a() * iv.b() * iv.width() / 2.0,
        hypothesis,
    })
}

fn finish(
    kind: BoundKind,
    q: f64,
    p: Option<f64>,
    rhs: f64,
    c: BoundConstants,
    inp: BoundInputs,
) -> BoundReport {
    let lhs_abs = (inp.hh.right - inp.hh.middle).abs();
    let slack = inp.hh.slack;
    BoundReport {
        kind,
        q,
        p,
        lhs_abs,
        rhs,
        constants: c,
        fprime_a: inp.fa,
        fprime_b: inp.fb,
        slack,
        tightness: (rhs > 0.0).then(|| lhs_abs / rhs),
        hypothesis_checked: inp.hypothesis.is_some(),
        hypothesis: inp.hypothesis,
        holds: lhs_abs <= rhs + slack,
    }
}

/// `|(f(a)+f(b))/2 - middle| <= ab(b-a)/2 · λ₁^(1-1/q) · [λ₂|f'(a)|^q + λ₃|f'(b)|^q]^(1/q)`
pub fn powermean_bound_check(
    fs: &FunctionSpec,
    iv: &Interval,
    q: f64,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power-mean bound needs q >= 1, got {q}"
        )));
    }
    let inp = bound_inputs(fs, iv, q, opts)?;
    let lc = lambda_constants(iv)?;
    // λ₁^0 = 1 even when λ₁ = 0
    let lead = if q == 1.0 {
        1.0
    } else {
        lc.lambda1.powf(1.0 - 1.0 / q)
    };
    let inner = lc.lambda2 * inp.fa.powf(q) + lc.lambda3 * inp.fb.powf(q);
    let rhs = inp.prefactor * lead * inner.powf(1.0 / q);
    Ok(finish(
        BoundKind::PowerMean,
        q,
        None,
        rhs,
        BoundConstants::Lambda(lc),
        inp,
    ))
}

/// `|(f(a)+f(b))/2 - middle| <= ab(b-a)/2 · (1/(p+1))^(1/p) · (μ₁|f'(a)|^q + μ₂|f'(b)|^q)^(1/q)`
pub fn hoelder_bound_check(
    fs: &FunctionSpec,
    iv: &Interval,
    q: f64,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Hölder bound needs q > 1, got {q}"
        )));
    }
    let p = q / (q - 1.0);
    let inp = bound_inputs(fs, iv, q, opts)?;
    let mc = mu_constants(iv, q)?;
    let inner = mc.mu1 * inp.fa.powf(q) + mc.mu2 * inp.fb.powf(q);
    let rhs = inp.prefactor * (1.0 / (p + 1.0)).powf(1.0 / p) * inner.powf(1.0 / q);
    Ok(finish(
        BoundKind::Hoelder,
        q,
        Some(p),
        rhs,
        BoundConstants::Mu(mc),
        inp,
    ))
}
