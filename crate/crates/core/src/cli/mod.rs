//! Command-line front end.
//!
//! Every subcommand builds one report, serializes it as JSON, CSV or plain
//! text, and maps its verdict to the exit code: 0 when everything holds,
//! 1 when a verdict fails, 2 on usage, parse or domain errors.

pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::convexity::{
    check_harmonic_convexity, check_via_reciprocal_transform, classify_by_proposition,
    ConvexityVerdict, FunctionTraits, Implication, SamplingConfig, Witness, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::FunctionSpec;
use crate::hh::{
    hh_triple, hoelder_bound_check, lambda_constants, lemma_identity_check, mu_constants,
    powermean_bound_check, BoundOptions, BoundReport,
};
use crate::means::{
    compute_means, default_p_grid, lp_monotonicity_check, proposition_check, MeanValues,
    Proposition, PropositionReport,
};
use crate::quad::{Interval, DEFAULT_TOL};

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "harmonia",
    version,
    about = "Numerical checks for harmonically convex functions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for random sampling.
    #[arg(long, global = true, env = "HARMONIA_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads. 1 runs sequentially; omitted uses all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct FnInterval {
    /// Function of `x`, e.g. "x^2*ln(x)".
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    /// Left endpoint. The interval must not contain 0.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Right endpoint.
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    /// Random samples on top of the fixed grid.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Tolerance on the convexity defect, relative to max(1, |f|).
    #[arg(long, default_value_t = crate::convexity::DEFAULT_TOL)]
    pub conv_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Convex,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    All,
    Linear,
    Square,
    Power,
    SquareLog,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample harmonic convexity by definition and via f(1/u).
    Convexity {
        #[command(flatten)]
        target: FnInterval,
        #[command(flatten)]
        sampling: Sampling,
        /// Fail unless this property is observed.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Hermite-Hadamard chain f(H) <= ab/(b-a) ∫f/x² <= (f(a)+f(b))/2.
    Hh {
        #[command(flatten)]
        target: FnInterval,
    },
    /// Trapezoid identity: both sides by independent quadratures.
    Identity {
        #[command(flatten)]
        target: FnInterval,
        /// Allowed gap, relative to max(1, |lhs|, |rhs|).
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
    },
    /// Power-mean bound on the trapezoid gap.
    BoundPowermean(BoundArgs),
    /// Hölder bound on the trapezoid gap.
    BoundHoelder(BoundArgs),
    /// Closed-form λ and μ constants.
    Constants {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Also compute μ₁, μ₂ for this q > 1.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Two-variable means and their ordering.
    Means {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Also report L_p.
        #[arg(long, allow_negative_numbers = true)]
        p: Option<f64>,
    },
    /// Mean inequalities from the Hermite-Hadamard chain of x, x², x^(p+2), x² ln x.
    Props {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Exponents for the power case, comma separated.
        #[arg(
            long,
            allow_hyphen_values = true,
            value_delimiter = ',',
            default_value = "1"
        )]
        p: Vec<f64>,
    },
    /// Run hh, identity and bounds over every line of a job file.
    Sweep {
        /// Job file, or `-` for stdin.
        jobs: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub target: FnInterval,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Also sample harmonic convexity of |f'|^q.
    #[arg(long)]
    pub check_hypothesis: bool,
    #[command(flatten)]
    pub sampling: Sampling,
}

/// Outcome of one subcommand before rendering.
pub struct Outcome {
    pub report: Value,
    pub holds: bool,
    /// Printed to stderr when the verdict fails.
    pub note: Option<String>,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, holds: bool) -> Self {
        Outcome {
            report: output::to_value(report),
            holds,
            note: None,
        }
    }
}

#[derive(Serialize)]
struct ConvexityReport<'a> {
    command: &'static str,
    #[serde(rename = "fn")]
    source: &'a str,
    a: f64,
    b: f64,
    samples: usize,
    seed: u64,
    conv_tol: f64,
    expect: Option<Expect>,
    definition: ConvexityVerdict,
    reciprocal: ConvexityVerdict,
    agree: bool,
    traits: FunctionTraits,
    implications: Vec<Implication>,
    witness: Option<Witness>,
    holds: bool,
}

#[derive(Serialize)]
struct HhReport<'a> {
    command: &'static str,
    #[serde(rename = "fn")]
    source: &'a str,
    a: f64,
    b: f64,
    tol: f64,
    left: f64,
    middle: f64,
    right: f64,
    middle_error: f64,
    slack: f64,
    verdict_left: bool,
    verdict_right: bool,
    holds: bool,
}

#[derive(Serialize)]
struct IdentityOut<'a> {
    command: &'static str,
    #[serde(rename = "fn")]
    source: &'a str,
    a: f64,
    b: f64,
    tol: f64,
    gap_tol: f64,
    lhs: f64,
    rhs: f64,
    gap: f64,
    relative_gap: f64,
    lhs_error: f64,
    rhs_error: f64,
    holds: bool,
}

#[derive(Serialize)]
struct BoundOut<'a> {
    command: &'static str,
    #[serde(rename = "fn")]
    source: &'a str,
    a: f64,
    b: f64,
    tol: f64,
    #[serde(flatten)]
    report: BoundReport,
}

#[derive(Serialize)]
struct ConstantsOut {
    command: &'static str,
    a: f64,
    b: f64,
    q: Option<f64>,
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    mu1: Option<f64>,
    mu2: Option<f64>,
    holds: bool,
}

#[derive(Serialize)]
struct MeansOut {
    command: &'static str,
    a: f64,
    b: f64,
    #[serde(flatten)]
    means: MeanValues,
    chain_holds: bool,
    lp_grid_points: usize,
    lp_monotone: bool,
    holds: bool,
}

#[derive(Serialize)]
struct PropsOut {
    command: &'static str,
    tol: f64,
    rows: Vec<PropositionReport>,
    holds: bool,
}

#[derive(Serialize)]
struct SweepOut {
    command: &'static str,
    tol: f64,
    gap_tol: f64,
    rows: Vec<sweep::SweepRow>,
    holds: bool,
}

fn witness_note(w: &Witness) -> String {
    format!(
        "witness: x={} y={} t={} violation={} (threshold {})",
        w.x, w.y, w.t, w.violation, w.threshold
    )
}

fn load(target: &FnInterval) -> Result<(FunctionSpec, Interval)> {
    Ok((
        FunctionSpec::parse(&target.function)?,
        Interval::new(target.a, target.b)?,
    ))
}

fn sampling_config(s: &Sampling, seed: u64, exec: Exec) -> SamplingConfig {
    SamplingConfig {
        samples: s.samples,
        tol: s.conv_tol,
        seed,
        exec,
        ..SamplingConfig::default()
    }
}

fn convexity(
    cli: &Cli,
    target: &FnInterval,
    s: &Sampling,
    expect: Option<Expect>,
    exec: Exec,
) -> Result<Outcome> {
    let (fs, iv) = load(target)?;
    let cfg = sampling_config(s, cli.seed, exec);
    let definition = check_harmonic_convexity(&fs, &iv, &cfg)?;
    let reciprocal = check_via_reciprocal_transform(&fs, &iv, &cfg)?;
    let traits = FunctionTraits::estimate(&fs, &iv, &cfg)?;
    let agree = definition.compatible(&reciprocal);
    let (expected, witness) = match expect {
        Some(Expect::Convex) => (
            definition.harmonically_convex.holds() && reciprocal.harmonically_convex.holds(),
            definition.convex_witness.or(reciprocal.convex_witness),
        ),
        Some(Expect::Concave) => (
            definition.harmonically_concave.holds() && reciprocal.harmonically_concave.holds(),
            definition.concave_witness.or(reciprocal.concave_witness),
        ),
        None => (true, None),
    };
    let holds = agree && expected;
    let report = ConvexityReport {
        command: "convexity",
        source: fs.source(),
        a: iv.a(),
        b: iv.b(),
        samples: cfg.samples,
        seed: cfg.seed,
        conv_tol: cfg.tol,
        expect,
        implications: classify_by_proposition(&traits),
        definition,
        reciprocal,
        agree,
        traits,
        witness,
        holds,
    };
    let mut out = Outcome::new(&report, holds);
    out.note = match (holds, witness) {
        (false, Some(w)) => Some(witness_note(&w)),
        (false, None) => Some("checkers disagree".into()),
        _ => None,
    };
    Ok(out)
}

fn hh(cli: &Cli, target: &FnInterval) -> Result<Outcome> {
    let (fs, iv) = load(target)?;
    let r = hh_triple(&fs, &iv, cli.tol)?;
    let report = HhReport {
        command: "hh",
        source: fs.source(),
        a: iv.a(),
        b: iv.b(),
        tol: cli.tol,
        left: r.left,
        middle: r.middle,
        right: r.right,
        middle_error: r.middle_error,
        slack: r.slack,
        verdict_left: r.verdict_left,
        verdict_right: r.verdict_right,
        holds: r.holds(),
    };
    Ok(Outcome::new(&report, r.holds()))
}

fn identity(cli: &Cli, target: &FnInterval, gap_tol: f64) -> Result<Outcome> {
    let (fs, iv) = load(target)?;
    let r = lemma_identity_check(&fs, &iv, cli.tol)?;
    let holds = r.within_relative(gap_tol);
    let report = IdentityOut {
        command: "identity",
        source: fs.source(),
        a: iv.a(),
        b: iv.b(),
        tol: cli.tol,
        gap_tol,
        lhs: r.lhs,
        rhs: r.rhs,
        gap: r.gap,
        relative_gap: r.gap / r.scale,
        lhs_error: r.lhs_error,
        rhs_error: r.rhs_error,
        holds,
    };
    Ok(Outcome::new(&report, holds))
}

fn bound(cli: &Cli, args: &BoundArgs, hoelder: bool, exec: Exec) -> Result<Outcome> {
    let (fs, iv) = load(&args.target)?;
    let opts = BoundOptions {
        tol: cli.tol,
        hypothesis: args
            .check_hypothesis
            .then(|| sampling_config(&args.sampling, cli.seed, exec)),
    };
    let (command, r) = if hoelder {
        (
            "bound-hoelder",
            hoelder_bound_check(&fs, &iv, args.q, &opts)?,
        )
    } else {
        (
            "bound-powermean",
            powermean_bound_check(&fs, &iv, args.q, &opts)?,
        )
    };
    let report = BoundOut {
        command,
        source: fs.source(),
        a: iv.a(),
        b: iv.b(),
        tol: cli.tol,
        report: r,
    };
    let mut out = Outcome::new(&report, r.holds);
    if !r.holds {
        out.note = Some(format!(
            "bound violated: lhs {} > rhs {} + slack {}",
            r.lhs_abs, r.rhs, r.slack
        ));
    }
    Ok(out)
}

fn constants(a: f64, b: f64, q: Option<f64>) -> Result<Outcome> {
    let iv = Interval::new(a, b)?;
    let lc = lambda_constants(&iv)?;
    let mc = q.map(|q| mu_constants(&iv, q)).transpose()?;
    let report = ConstantsOut {
        command: "constants",
        a,
        b,
        q,
        lambda1: lc.lambda1,
        lambda2: lc.lambda2,
        lambda3: lc.lambda3,
        mu1: mc.map(|m| m.mu1),
        mu2: mc.map(|m| m.mu2),
        holds: true,
    };
    Ok(Outcome::new(&report, true))
}

fn means(a: f64, b: f64, p: Option<f64>) -> Result<Outcome> {
    let m = compute_means(a, b, p)?;
    let grid = default_p_grid();
    let lp_monotone = lp_monotonicity_check(a.min(b), a.max(b), &grid)?;
    let chain_holds = m.chain_holds(false);
    let holds = chain_holds && lp_monotone;
    let report = MeansOut {
        command: "means",
        a,
        b,
        means: m,
        chain_holds,
        lp_grid_points: grid.len(),
        lp_monotone,
        holds,
    };
    Ok(Outcome::new(&report, holds))
}

fn props(cli: &Cli, a: f64, b: f64, which: Which, ps: &[f64], exec: Exec) -> Result<Outcome> {
    let chosen: Vec<Proposition> = match which {
        Which::All => Proposition::ALL.to_vec(),
        Which::Linear => vec![Proposition::Linear],
        Which::Square => vec![Proposition::Square],
        Which::Power => vec![Proposition::Power],
        Which::SquareLog => vec![Proposition::SquareLog],
    };
    let cells: Vec<(Proposition, Option<f64>)> = chosen
        .into_iter()
        .flat_map(|w| match w {
            Proposition::Power => ps.iter().map(|&p| (w, Some(p))).collect(),
            _ => vec![(w, None)],
        })
        .collect();
    let rows = exec
        .map(&cells, |&(w, p)| proposition_check(w, a, b, p, cli.tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let holds = rows.iter().all(PropositionReport::ok);
    let note = rows
        .iter()
        .find(|r| !r.ok())
        .map(|r| format!("{} fails at ({}, {})", r.proposition.name(), r.a, r.b));
    let report = PropsOut {
        command: "props",
        tol: cli.tol,
        rows,
        holds,
    };
    let mut out = Outcome::new(&report, holds);
    out.note = note;
    Ok(out)
}

fn read_jobs(path: &PathBuf) -> Result<String> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

/// Sweep outcome; `errors` counts cells that could not be evaluated.
fn sweep_run(cli: &Cli, path: &PathBuf, gap_tol: f64, exec: Exec) -> Result<(Outcome, usize)> {
    let jobs = sweep::parse_jobs(&read_jobs(path)?)?;
    let rows = exec.map(&jobs, |job| sweep::run_job(job, cli.tol, gap_tol));
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    let holds = rows.iter().all(|r| r.holds);
    let note = rows.iter().find(|r| !r.holds).map(|r| match &r.error {
        Some(e) => format!("line {}: {e}", r.line),
        None => format!("line {}: verdict failed", r.line),
    });
    let report = SweepOut {
        command: "sweep",
        tol: cli.tol,
        gap_tol,
        rows,
        holds,
    };
    let mut out = Outcome::new(&report, holds);
    out.note = note;
    Ok((out, errors))
}

fn dispatch(cli: &Cli, exec: Exec) -> Result<(Outcome, usize)> {
    let single = |o: Result<Outcome>| o.map(|o| (o, 0));
    match &cli.command {
        Command::Convexity {
            target,
            sampling,
            expect,
        } => single(convexity(cli, target, sampling, *expect, exec)),
        Command::Hh { target } => single(hh(cli, target)),
        Command::Identity { target, gap_tol } => single(identity(cli, target, *gap_tol)),
        Command::BoundPowermean(args) => single(bound(cli, args, false, exec)),
        Command::BoundHoelder(args) => single(bound(cli, args, true, exec)),
        Command::Constants { a, b, q } => single(constants(*a, *b, *q)),
        Command::Means { a, b, p } => single(means(*a, *b, *p)),
        Command::Props { a, b, which, p } => single(props(cli, *a, *b, *which, p, exec)),
        Command::Sweep { jobs, gap_tol } => sweep_run(cli, jobs, *gap_tol, exec),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce(Exec) -> R + Send) -> Result<R> {
    match threads {
        Some(0) => Err(Error::InvalidParameter(
            "--threads must be at least 1".into(),
        )),
        Some(1) => Ok(f(Exec::Sequential)),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
            .map(|pool| pool.install(|| f(Exec::Parallel))),
        None => Ok(f(Exec::Parallel)),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce(Exec) -> R + Send) -> Result<R> {
    match threads {
        Some(0) => Err(Error::InvalidParameter(
            "--threads must be at least 1".into(),
        )),
        _ => Ok(f(Exec::Sequential)),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    let mut buf = Vec::new();
    output::write(&mut buf, &outcome.report, cli.format)?;
    match &cli.output {
        Some(path) => std::fs::write(path, &buf),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&buf)?;
            stdout.flush()
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = with_threads(cli.threads, |exec| dispatch(&cli, exec)).and_then(|r| r);
    let (outcome, errors) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Err(e) = emit(&cli, &outcome) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_ERROR;
    }
    if let Some(note) = &outcome.note {
        eprintln!("{note}");
    }
    if errors > 0 {
        EXIT_ERROR
    } else if outcome.holds {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
