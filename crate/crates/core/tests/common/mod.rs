//! Shared fixtures: a brute-force Simpson oracle that shares nothing with
//! the adaptive integrator, the test corpus, and seeded interval draws.

#![allow(dead_code)]

use harmonia::{FunctionSpec, Interval};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_PANELS: usize = 1 << 20;

/// Composite Simpson on `n` (even) equal panels with Neumaier summation.
pub fn simpson_n(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (hi - lo) / n as f64;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut add = |v: f64| {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    };
    add(g(lo));
    add(g(hi));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        add(w * g(lo + i as f64 * h));
    }
    (sum + comp) * h / 3.0
}

pub fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    simpson_n(g, lo, hi, ORACLE_PANELS)
}

/// Oracle split at interior kinks, half the panels on each side of each.
pub fn simpson_split(g: impl Fn(f64) -> f64, lo: f64, hi: f64, kinks: &[f64]) -> f64 {
    let mut edges = vec![lo];
    edges.extend_from_slice(kinks);
    edges.push(hi);
    let per = ORACLE_PANELS / (edges.len() - 1);
    edges
        .windows(2)
        .map(|w| simpson_n(&g, w[0], w[1], per + per % 2))
        .sum()
}

/// `(λ₁, λ₂, λ₃)` by brute force.
pub fn oracle_lambda(a: f64, b: f64) -> (f64, f64, f64) {
    let s = |t: f64| t * b + (1.0 - t) * a;
    let k = |t: f64| (1.0 - 2.0 * t).abs() / (s(t) * s(t));
    (
        simpson_split(k, 0.0, 1.0, &[0.5]),
        simpson_split(|t| k(t) * t, 0.0, 1.0, &[0.5]),
        simpson_split(|t| k(t) * (1.0 - t), 0.0, 1.0, &[0.5]),
    )
}

/// `(μ₁, μ₂)` by brute force.
pub fn oracle_mu(a: f64, b: f64, q: f64) -> (f64, f64) {
    let w = |t: f64| (t * b + (1.0 - t) * a).powf(-2.0 * q);
    (
        simpson(|t| t * w(t), 0.0, 1.0),
        simpson(|t| (1.0 - t) * w(t), 0.0, 1.0),
    )
}

/// A corpus function with the range its intervals are drawn from.
pub struct CorpusEntry {
    pub source: &'static str,
    pub lo: f64,
    pub hi: f64,
}

pub const CORPUS: [CorpusEntry; 7] = [
    CorpusEntry {
        source: "x",
        lo: 0.0,
        hi: 100.0,
    },
    CorpusEntry {
        source: "x^2",
        lo: 0.0,
        hi: 100.0,
    },
    CorpusEntry {
        source: "x^1.5",
        lo: 0.0,
        hi: 100.0,
    },
    CorpusEntry {
        source: "x^3",
        lo: 0.0,
        hi: 100.0,
    },
    CorpusEntry {
        source: "x^4",
        lo: 0.0,
        hi: 100.0,
    },
    CorpusEntry {
        source: "x^2*ln(x)",
        lo: 1.0,
        hi: std::f64::consts::E,
    },
    CorpusEntry {
        source: "1",
        lo: 0.0,
        hi: 100.0,
    },
];

pub fn spec(source: &str) -> FunctionSpec {
    FunctionSpec::parse(source).expect("corpus parses")
}

/// Draws a point in `(lo, hi]`.
fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    hi - rng.gen::<f64>() * (hi - lo)
}

/// `n` seeded intervals with endpoints in `(lo, hi]`.
pub fn intervals(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<Interval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (x, y) = (draw(&mut rng, lo, hi), draw(&mut rng, lo, hi));
        if let Ok(iv) = Interval::new(x.min(y), x.max(y)) {
            out.push(iv);
        }
    }
    out
}

/// Seeded pairs `a < b` with both in `(lo, hi]`.
pub fn pairs(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    intervals(seed, n, lo, hi)
        .into_iter()
        .map(|iv| (iv.a(), iv.b()))
        .collect()
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
