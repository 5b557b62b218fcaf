//! Sampling checks for harmonic convexity, plus the classification table
//! relating ordinary convexity, monotonicity and harmonic convexity.
//!
//! A triple `(x, y, t)` violates harmonic convexity when
//!
//! ```text
//! defect = t f(y) + (1 - t) f(x) - f(xy / (tx + (1 - t)y)) < 0
//! ```
//!
//! Sampling can refute the property but never prove it, so
//! [`Verdict::Holds`] only ever means "no violation found".
//!
//! Violations are measured against `tol * max(1, |f(x)|, |f(y)|, |f(h)|)`, so
//! functions with large values are not flagged for rounding noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::FunctionSpec;
use crate::quad::{DomainSign, Interval};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_GRID: (usize, usize, usize) = (33, 33, 17);

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No violation found among the sampled points.
    Holds,
    /// A sampled point violates the property; a witness is attached.
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn fails(self) -> bool {
        self == Verdict::Fails
    }

    /// Neither verdict claims the opposite of the other.
    pub fn compatible(self, other: Verdict) -> bool {
        !matches!(
            (self, other),
            (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds)
        )
    }
}

/// A sampled point where the inequality is broken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    /// How far the inequality is broken (positive).
    pub violation: f64,
    /// The scaled tolerance the violation exceeded.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub harmonically_convex: Verdict,
    pub harmonically_concave: Verdict,
    /// Present iff `harmonically_convex` fails.
    pub convex_witness: Option<Witness>,
    /// Present iff `harmonically_concave` fails.
    pub concave_witness: Option<Witness>,
    pub points_evaluated: usize,
}

impl ConvexityVerdict {
    /// Witness for the failing direction, convex first.
    pub fn witness(&self) -> Option<&Witness> {
        self.convex_witness
            .as_ref()
            .or(self.concave_witness.as_ref())
    }

    pub fn compatible(&self, other: &ConvexityVerdict) -> bool {
        self.harmonically_convex
            .compatible(other.harmonically_convex)
            && self
                .harmonically_concave
                .compatible(other.harmonically_concave)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Random samples drawn in addition to the grid.
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Grid resolution along x, y and t. The midpoint check uses the first two.
    pub grid: (usize, usize, usize),
    pub exec: Exec,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            grid: DEFAULT_GRID,
            exec: Exec::default(),
        }
    }
}

impl SamplingConfig {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be finite and non-negative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Harmonic convexity defect `t f(y) + (1-t) f(x) - f(xy/(tx+(1-t)y))`
/// together with the magnitude used to scale the tolerance.
pub fn harmonic_defect<F>(f: &F, x: f64, y: f64, t: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let h = x * y / (t * x + (1.0 - t) * y);
    let (fx, fy, fh) = (f(x)?, f(y)?, f(h)?);
    let defect = t * fy + (1.0 - t) * fx - fh;
    let scale = 1f64.max(fx.abs()).max(fy.abs()).max(fh.abs());
    Ok((defect, scale))
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    (0..n).map(move |i| {
        if i + 1 == n && n > 1 {
            hi
        } else {
            lo + step * i as f64
        }
    })
}

#[derive(Clone, Copy)]
struct Worst {
    ratio: f64,
    index: usize,
    violation: f64,
    threshold: f64,
}

impl Worst {
    fn better(a: Option<Worst>, b: Option<Worst>) -> Option<Worst> {
        match (a, b) {
            (Some(a), Some(b)) => {
                if b.ratio > a.ratio || (b.ratio == a.ratio && b.index < a.index) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, None) => a,
            (None, b) => b,
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    // largest violation/threshold for each direction
    below: Option<Worst>,
    above: Option<Worst>,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            below: Worst::better(self.below, other.below),
            above: Worst::better(self.above, other.above),
        }
    }

    fn record(&mut self, index: usize, defect: f64, scale: f64, tol: f64) {
        let threshold = tol * scale;
        let denom = threshold.max(f64::MIN_POSITIVE);
        let candidate = |violation: f64| Worst {
            ratio: violation / denom,
            index,
            violation,
            threshold,
        };
        if defect < 0.0 {
            self.below = Worst::better(self.below, Some(candidate(-defect)));
        } else if defect > 0.0 {
            self.above = Worst::better(self.above, Some(candidate(defect)));
        }
    }
}

/// Evaluates `defect(i)` for every index in parallel chunks and reduces in
/// index order.
fn scan<D>(n: usize, tol: f64, exec: Exec, defect: D) -> Result<Tally>
where
    D: Fn(usize) -> Result<(f64, f64)> + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = exec.map_indexed(chunks, |c| -> Result<Tally> {
        let mut tally = Tally::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let (d, scale) = defect(i)?;
            tally.record(i, d, scale, tol);
        }
        Ok(tally)
    });
    let mut total = Tally::default();
    for p in partial {
        total = total.merge(p?);
    }
    Ok(total)
}

fn verdict(worst: Option<Worst>) -> (Verdict, Option<Worst>) {
    match worst {
        Some(w) if w.violation > w.threshold => (Verdict::Fails, Some(w)),
        _ => (Verdict::Holds, None),
    }
}

/// Harmonic convexity check of an arbitrary real function, sampling the
/// definition directly on a regular grid plus seeded random triples.
pub fn check_harmonic_convexity_fn<F>(
    f: F,
    iv: &Interval,
    cfg: &SamplingConfig,
) -> Result<ConvexityVerdict>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    let (a, b) = (iv.a(), iv.b());
    let (nx, ny, nt) = cfg.grid;
    let mut triples = Vec::with_capacity(nx * ny * nt + cfg.samples);
    for x in linspace(a, b, nx) {
        for y in linspace(a, b, ny) {
            for t in linspace(0.0, 1.0, nt) {
                triples.push((x, y, t));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        triples.push((
            rng.gen_range(a..=b),
            rng.gen_range(a..=b),
            rng.gen_range(0.0..=1.0),
        ));
    }

    let tally = scan(triples.len(), cfg.tol, cfg.exec, |i| {
        let (x, y, t) = triples[i];
        harmonic_defect(&f, x, y, t)
    })?;

    let to_witness = |w: Worst| {
        let (x, y, t) = triples[w.index];
        Witness {
            x,
            y,
            t,
            violation: w.violation,
            threshold: w.threshold,
        }
    };
    let (convex, cw) = verdict(tally.below);
    let (concave, kw) = verdict(tally.above);
    Ok(ConvexityVerdict {
        harmonically_convex: convex,
        harmonically_concave: concave,
        convex_witness: cw.map(to_witness),
        concave_witness: kw.map(to_witness),
        points_evaluated: triples.len(),
    })
}

/// Samples the harmonic convexity inequality for `f` on `iv`.
pub fn check_harmonic_convexity(
    fs: &FunctionSpec,
    iv: &Interval,
    cfg: &SamplingConfig,
) -> Result<ConvexityVerdict> {
    check_harmonic_convexity_fn(|x| Ok(fs.eval(x)?), iv, cfg)
}

/// Pairs `(u, v)` for the midpoint checks: grid plus seeded random draws.
fn midpoint_pairs(iv: &Interval, cfg: &SamplingConfig) -> Vec<(f64, f64)> {
    let (lo, hi) = (iv.a(), iv.b());
    let (nx, ny, _) = cfg.grid;
    let mut pairs = Vec::with_capacity(nx * ny + cfg.samples);
    for u in linspace(lo, hi, nx) {
        for v in linspace(lo, hi, ny) {
            pairs.push((u, v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        pairs.push((rng.gen_range(lo..=hi), rng.gen_range(lo..=hi)));
    }
    pairs
}

/// Midpoint defect `(g(u) + g(v))/2 - g((u+v)/2)` and its scale.
fn midpoint_defect<G>(g: &G, u: f64, v: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64> + ?Sized,
{
    let (gu, gv, gm) = (g(u)?, g(v)?, g(0.5 * (u + v))?);
    let scale = 1f64.max(gu.abs()).max(gv.abs()).max(gm.abs());
    Ok((0.5 * (gu + gv) - gm, scale))
}

/// Harmonic convexity of `f` via ordinary midpoint convexity of
/// `g(u) = f(1/u)` on the reciprocal interval.
///
/// Witnesses are mapped back to `(x, y, t) = (1/u, 1/v, 1/2)` and their
/// violation re-measured with the harmonic defect, so they can be checked
/// against the definition directly.
pub fn check_via_reciprocal_transform_fn<F>(
    f: F,
    iv: &Interval,
    cfg: &SamplingConfig,
) -> Result<ConvexityVerdict>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    let recip = iv.reciprocal();
    let pairs = midpoint_pairs(&recip, cfg);
    let g = |u: f64| f(1.0 / u);
    let tally = scan(pairs.len(), cfg.tol, cfg.exec, |i| {
        let (u, v) = pairs[i];
        midpoint_defect(&g, u, v)
    })?;

    let to_witness = |w: Worst| -> Result<Witness> {
        let (u, v) = pairs[w.index];
        let (x, y, t) = (1.0 / u, 1.0 / v, 0.5);
        let (defect, scale) = harmonic_defect(&f, x, y, t)?;
        Ok(Witness {
            x,
            y,
            t,
            violation: defect.abs(),
            threshold: cfg.tol * scale,
        })
    };
    let (convex, cw) = verdict(tally.below);
    let (concave, kw) = verdict(tally.above);
    Ok(ConvexityVerdict {
        harmonically_convex: convex,
        harmonically_concave: concave,
        convex_witness: cw.map(to_witness).transpose()?,
        concave_witness: kw.map(to_witness).transpose()?,
        points_evaluated: pairs.len(),
    })
}

pub fn check_via_reciprocal_transform(
    fs: &FunctionSpec,
    iv: &Interval,
    cfg: &SamplingConfig,
) -> Result<ConvexityVerdict> {
    check_via_reciprocal_transform_fn(|x| Ok(fs.eval(x)?), iv, cfg)
}

/// Ordinary (midpoint) convexity of `f` on `iv`: `(convex, concave)`.
pub fn check_ordinary_convexity_fn<F>(
    f: F,
    iv: &Interval,
    cfg: &SamplingConfig,
) -> Result<(Verdict, Verdict)>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    let pairs = midpoint_pairs(iv, cfg);
    let tally = scan(pairs.len(), cfg.tol, cfg.exec, |i| {
        let (u, v) = pairs[i];
        midpoint_defect(&f, u, v)
    })?;
    Ok((verdict(tally.below).0, verdict(tally.above).0))
}

/// Hypotheses of the convexity/monotonicity classification table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FunctionTraits {
    pub convex: Verdict,
    pub harmonically_convex: Verdict,
    pub nondecreasing: Verdict,
    pub nonincreasing: Verdict,
    pub sign_of_domain: DomainSign,
}

fn monotone_from_slopes(slopes: impl Iterator<Item = (f64, f64)>, tol: f64) -> (Verdict, Verdict) {
    let (mut up, mut down) = (Verdict::Holds, Verdict::Holds);
    let mut any = false;
    for (slope, scale) in slopes {
        any = true;
        if slope < -tol * scale {
            up = Verdict::Fails;
        }
        if slope > tol * scale {
            down = Verdict::Fails;
        }
    }
    if any {
        (up, down)
    } else {
        (Verdict::Inconclusive, Verdict::Inconclusive)
    }
}

fn sorted_points(iv: &Interval, cfg: &SamplingConfig) -> Vec<f64> {
    let n = cfg.grid.0.max(2) * cfg.grid.1.max(2);
    linspace(iv.a(), iv.b(), n).collect()
}

impl FunctionTraits {
    /// Traits of a parsed function. Monotonicity comes from the sign of the
    /// symbolic derivative on a grid.
    pub fn estimate(fs: &FunctionSpec, iv: &Interval, cfg: &SamplingConfig) -> Result<Self> {
        let f = |x: f64| -> Result<f64> { Ok(fs.eval(x)?) };
        let points = sorted_points(iv, cfg);
        let slopes = points
            .iter()
            .map(|&x| Ok((fs.eval_derivative(x)?, 1f64.max(fs.eval(x)?.abs()))))
            .collect::<Result<Vec<_>>>()?;
        let (nondecreasing, nonincreasing) = monotone_from_slopes(slopes.into_iter(), cfg.tol);
        Ok(FunctionTraits {
            convex: check_ordinary_convexity_fn(f, iv, cfg)?.0,
            harmonically_convex: check_harmonic_convexity(fs, iv, cfg)?.harmonically_convex,
            nondecreasing,
            nonincreasing,
            sign_of_domain: iv.sign(),
        })
    }

    /// Traits of a function known only through its values. Monotonicity
    /// comes from comparing consecutive samples.
    pub fn estimate_fn<F>(f: F, iv: &Interval, cfg: &SamplingConfig) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync + Send,
    {
        let points = sorted_points(iv, cfg);
        let values = points.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let steps = values
            .windows(2)
            .map(|w| (w[1] - w[0], 1f64.max(w[0].abs()).max(w[1].abs())));
        let (nondecreasing, nonincreasing) = monotone_from_slopes(steps, cfg.tol);
        let harmonic = check_harmonic_convexity_fn(&f, iv, cfg)?.harmonically_convex;
        Ok(FunctionTraits {
            convex: check_ordinary_convexity_fn(&f, iv, cfg)?.0,
            harmonically_convex: harmonic,
            nondecreasing,
            nonincreasing,
            sign_of_domain: iv.sign(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Convex,
    HarmonicallyConvex,
}

/// The four one-directional implications between convexity, monotonicity
/// and harmonic convexity. Converses are not claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Implication {
    /// `I ⊂ (0,∞)`, convex and nondecreasing ⇒ harmonically convex.
    PositiveConvexNondecreasing,
    /// `I ⊂ (0,∞)`, harmonically convex and nonincreasing ⇒ convex.
    PositiveHarmonicNonincreasing,
    /// `I ⊂ (-∞,0)`, harmonically convex and nondecreasing ⇒ convex.
    NegativeHarmonicNondecreasing,
    /// `I ⊂ (-∞,0)`, convex and nonincreasing ⇒ harmonically convex.
    NegativeConvexNonincreasing,
}

impl Implication {
    pub fn conclusion(self) -> Conclusion {
        match self {
            Implication::PositiveConvexNondecreasing | Implication::NegativeConvexNonincreasing => {
                Conclusion::HarmonicallyConvex
            }
            Implication::PositiveHarmonicNonincreasing
            | Implication::NegativeHarmonicNondecreasing => Conclusion::Convex,
        }
    }
}

/// Implications whose hypotheses all hold. Inconclusive or failing traits
/// contribute nothing.
pub fn classify_by_proposition(traits: &FunctionTraits) -> Vec<Implication> {
    let positive = traits.sign_of_domain == DomainSign::Positive;
    let convex = traits.convex.holds();
    let harmonic = traits.harmonically_convex.holds();
    let up = traits.nondecreasing.holds();
    let down = traits.nonincreasing.holds();

    let mut out = Vec::new();
    if positive && convex && up {
        out.push(Implication::PositiveConvexNondecreasing);
    }
    if positive && harmonic && down {
        out.push(Implication::PositiveHarmonicNonincreasing);
    }
    if !positive && harmonic && up {
        out.push(Implication::NegativeHarmonicNondecreasing);
    }
    if !positive && convex && down {
        out.push(Implication::NegativeConvexNonincreasing);
    }
    out
}
