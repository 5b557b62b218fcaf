//! Two-variable means and the inequalities obtained by specializing the
//! harmonic Hermite-Hadamard chain to `x`, `x²`, `x^(p+2)` and `x² ln x`.
//!
//! All means are evaluated in forms that avoid overflow and cancellation:
//! `ln b - ln a` becomes `ln_1p((b-a)/a)`, the identric mean is taken through
//! its logarithm, and `b^(p+1) - a^(p+1)` goes through `exp_m1`. When the
//! relative gap `(b-a)/a` drops below [`NEAR_EQUAL`], L, I and L_p switch to
//! their two-term expansions around `a`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::FunctionSpec;
use crate::hh::{hh_triple, HHReport};
use crate::quad::Interval;

pub const NEAR_EQUAL: f64 = 1e-8;

/// Relative agreement required between the closed-form and quadrature paths.
pub const PATH_AGREEMENT: f64 = 1e-8;

const CHAIN_ULPS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpValue {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValues {
    #[serde(rename = "A")]
    pub arithmetic: f64,
    #[serde(rename = "G")]
    pub geometric: f64,
    #[serde(rename = "H")]
    pub harmonic: f64,
    #[serde(rename = "L")]
    pub logarithmic: f64,
    #[serde(rename = "I")]
    pub identric: f64,
    #[serde(rename = "Lp")]
    pub lp: Option<LpValue>,
}

impl MeanValues {
    /// `H <= G <= L <= I <= A`, strictly when `strict` is set.
    pub fn chain_holds(&self, strict: bool) -> bool {
        let chain = [
            self.harmonic,
            self.geometric,
            self.logarithmic,
            self.identric,
            self.arithmetic,
        ];
        chain
            .windows(2)
            .all(|w| if strict { w[0] < w[1] } else { w[0] <= w[1] })
    }

    pub fn all_within(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = (a.min(b), a.max(b));
        let mut vals = vec![
            self.arithmetic,
            self.geometric,
            self.harmonic,
            self.logarithmic,
            self.identric,
        ];
        vals.extend(self.lp.map(|l| l.value));
        vals.iter().all(|&v| v >= lo && v <= hi)
    }
}

/// Validates positivity and returns `(min, max)`.
fn normalize(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "means need finite positive inputs, got ({a}, {b})"
        )));
    }
    Ok((a.min(b), a.max(b)))
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p == 0.0 || p == -1.0 {
        return Err(Error::InvalidParameter(format!(
            "p-logarithmic mean needs finite p outside {{-1, 0}}, got {p}"
        )));
    }
    Ok(())
}

pub fn arithmetic(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

pub fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

pub fn geometric(a: f64, b: f64) -> f64 {
    let prod = a * b;
    if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        a.sqrt() * b.sqrt()
    }
}

// inputs already normalized: 0 < a <= b
fn logarithmic_unchecked(a: f64, b: f64) -> f64 {
    let d = b - a;
    let r = d / a;
    if r < NEAR_EQUAL {
        a + 0.5 * d
    } else {
        d / r.ln_1p()
    }
}

fn identric_unchecked(a: f64, b: f64) -> f64 {
    let d = b - a;
    let r = d / a;
    if r < NEAR_EQUAL {
        a + 0.5 * d
    } else {
        // ln I = (b ln b - a ln a)/(b - a) - 1 = ln b + ln(1+r)/r - 1
        b * (r.ln_1p() / r - 1.0).exp()
    }
}

fn lp_unchecked(a: f64, b: f64, p: f64) -> f64 {
    let d = b - a;
    let r = d / a;
    if r < NEAR_EQUAL {
        return a + 0.5 * d;
    }
    // (b^(p+1) - a^(p+1)) / ((p+1)(b-a)) = b^p · (1 - (a/b)^(p+1)) / ((p+1)(1 - a/b))
    let head = -(-(p + 1.0) * r.ln_1p()).exp_m1();
    let ratio = head / ((p + 1.0) * (d / b));
    b * (ratio.ln() / p).exp()
}

pub fn logarithmic(a: f64, b: f64) -> Result<f64> {
    let (a, b) = normalize(a, b)?;
    Ok(logarithmic_unchecked(a, b))
}

pub fn identric(a: f64, b: f64) -> Result<f64> {
    let (a, b) = normalize(a, b)?;
    Ok(identric_unchecked(a, b))
}

/// p-logarithmic mean for `p ∉ {-1, 0}`.
pub fn p_logarithmic(a: f64, b: f64, p: f64) -> Result<f64> {
    let (a, b) = normalize(a, b)?;
    check_p(p)?;
    Ok(lp_unchecked(a, b, p))
}

/// `L_p` extended by continuity: `L_{-1} = L`, `L_0 = I`.
pub fn p_logarithmic_extended(a: f64, b: f64, p: f64) -> Result<f64> {
    let (a, b) = normalize(a, b)?;
    if !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must be finite, got {p}"
        )));
    }
    Ok(if p == -1.0 {
        logarithmic_unchecked(a, b)
    } else if p == 0.0 {
        identric_unchecked(a, b)
    } else {
        lp_unchecked(a, b, p)
    })
}

/// All means of `a` and `b` (in either order), plus `L_p` when `p` is given
/// (extended to `p = -1` and `p = 0`).
pub fn compute_means(a: f64, b: f64, p: Option<f64>) -> Result<MeanValues> {
    let (a, b) = normalize(a, b)?;
    let lp = match p {
        Some(p) => Some(LpValue {
            p,
            value: p_logarithmic_extended(a, b, p)?,
        }),
        None => None,
    };
    Ok(MeanValues {
        arithmetic: arithmetic(a, b),
        geometric: geometric(a, b),
        harmonic: harmonic(a, b),
        logarithmic: logarithmic_unchecked(a, b),
        identric: identric_unchecked(a, b),
        lp,
    })
}

/// The default monotonicity grid: 48 evenly spaced points on [-5, 5] plus
/// -1 and 0, sorted.
pub fn default_p_grid() -> Vec<f64> {
    let n = 48;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| -5.0 + 10.0 * i as f64 / (n - 1) as f64)
        .chain([-1.0, 0.0])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid
}

/// True iff `L_p` is nondecreasing along the sorted grid, up to a relative
/// slack of 1e-12. Grid points -1 and 0 evaluate to L and I.
pub fn lp_monotonicity_check(a: f64, b: f64, p_grid: &[f64]) -> Result<bool> {
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("p grid must be sorted".into()));
    }
    let values = p_grid
        .iter()
        .map(|&p| p_logarithmic_extended(a, b, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(values
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * 1f64.max(w[0].abs())))
}

/// Specializations of the harmonic Hermite-Hadamard chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposition {
    /// `f(x) = x`: `H <= G²/L <= A`.
    Linear,
    /// `f(x) = x²`: `H² <= G² <= A(a², b²)`.
    Square,
    /// `f(x) = x^(p+2)`: `H^(p+2) <= G² L_p^p <= A(a^(p+2), b^(p+2))`.
    Power,
    /// `f(x) = x² ln x`: `H² ln H <= G² ln I <= A(a² ln a, b² ln b)`.
    SquareLog,
}

impl Proposition {
    pub const ALL: [Proposition; 4] = [
        Proposition::Linear,
        Proposition::Square,
        Proposition::Power,
        Proposition::SquareLog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Proposition::Linear => "linear",
            Proposition::Square => "square",
            Proposition::Power => "power",
            Proposition::SquareLog => "square-log",
        }
    }

    /// The function whose Hermite-Hadamard chain this is.
    pub fn generating_function(self, p: Option<f64>) -> Result<FunctionSpec> {
        let src = match self {
            Proposition::Linear => "x".to_string(),
            Proposition::Square => "x^2".to_string(),
            Proposition::Power => format!("x^{}", power_p(p)? + 2.0),
            Proposition::SquareLog => "x^2*ln(x)".to_string(),
        };
        FunctionSpec::parse(&src).map_err(Error::from)
    }
}

impl std::str::FromStr for Proposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Proposition::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown proposition `{s}`")))
    }
}

fn power_p(p: Option<f64>) -> Result<f64> {
    match p {
        Some(p) if p > -1.0 && p != 0.0 && p.is_finite() => Ok(p),
        Some(p) => Err(Error::InvalidParameter(format!(
            "power chain needs p in (-1, inf) without 0, got {p}"
        ))),
        None => Err(Error::InvalidParameter("power chain needs p".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropositionReport {
    pub proposition: Proposition,
    pub a: f64,
    pub b: f64,
    pub p: Option<f64>,
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    /// The same three members from quadrature of the generating function.
    pub quadrature: HHReport,
    /// Largest relative difference between the two paths.
    pub path_gap: f64,
    pub paths_agree: bool,
    /// `lhs <= mid <= rhs` on the closed-form path.
    pub holds: bool,
}

impl PropositionReport {
    pub fn ok(&self) -> bool {
        self.holds && self.paths_agree
    }
}

fn rel_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / 1f64.max(x.abs()).max(y.abs())
}

/// Evaluates one chain from the means' closed forms and cross-checks it
/// against [`hh_triple`] of the generating function.
pub fn proposition_check(
    which: Proposition,
    a: f64,
    b: f64,
    p: Option<f64>,
    tol: f64,
) -> Result<PropositionReport> {
    let iv = Interval::new(a, b)?;
    if !iv.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "propositions need 0 < a < b, got ({a}, {b})"
        )));
    }
    let h = harmonic(a, b);
    let g2 = a * b;
    let (lhs, mid, rhs, p) = match which {
        Proposition::Linear => (h, g2 / logarithmic_unchecked(a, b), arithmetic(a, b), None),
        Proposition::Square => (h * h, g2, arithmetic(a * a, b * b), None),
        Proposition::Power => {
            let p = power_p(p)?;
            let e = p + 2.0;
            let lp = lp_unchecked(a, b, p);
            (
                h.powf(e),
                g2 * lp.powf(p),
                arithmetic(a.powf(e), b.powf(e)),
                Some(p),
            )
        }
        Proposition::SquareLog => (
            h * h * h.ln(),
            g2 * identric_unchecked(a, b).ln(),
            arithmetic(a * a * a.ln(), b * b * b.ln()),
            None,
        ),
    };

    let quadrature = hh_triple(&which.generating_function(p)?, &iv, tol)?;
    let path_gap = rel_gap(lhs, quadrature.left)
        .max(rel_gap(mid, quadrature.middle))
        .max(rel_gap(rhs, quadrature.right));
    let slack = CHAIN_ULPS * f64::EPSILON * lhs.abs().max(mid.abs()).max(rhs.abs());
    Ok(PropositionReport {
        proposition: which,
        a,
        b,
        p,
        lhs,
        mid,
        rhs,
        quadrature,
        path_gap,
        paths_agree: path_gap <= PATH_AGREEMENT,
        holds: lhs <= mid + slack && mid <= rhs + slack,
    })
}
