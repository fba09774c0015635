//! Command-line surface: `decompose`, `select` and `verify` over CSV or
//! generated instances, with deterministic text/JSON reports.
//!
//! Exit codes: 0 success (and all identities pass for `verify`), 1
//! identity failure, 2 i/o, 3 unparseable or invalid input data, 4 usage,
//! 5 rank deficiency, 6 enumeration blowup.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::generators::{generate, InstanceSpec};
use crate::io::load_function;
use crate::measure::{total_l2_norm_squared, DiscretizedFunction};
use crate::report::{IdentityCheck, KAnalytics, RunReport};
use crate::samplers::{
    binomial_capped, enumerate_distribution_capped, substream_rng, SamplerConfig, SamplerMethod,
    DEFAULT_ENUM_CAP,
};
use crate::schmidt::{schmidt_decompose_default, tail_width, SchmidtDecomposition};
use crate::selection::{certify_selection, projection_error, run_strategy, Strategy};
use crate::volumes::{expected_projection_error, expected_volume, log_det_gram, residual_volume};

const IDENTITY_TOL: f64 = 1e-9;
/// Number of random (subset, extra column) pairs per k in `verify`.
const SCHUR_PAIRS: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "volsample",
    version,
    about = "Volume sampling and weighted subspace approximation for discretized functions"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted Schmidt decomposition: singular values, rank, tail widths.
    Decompose(DecomposeArgs),
    /// Select a k-subset of sample points and certify its error bound.
    Select(SelectArgs),
    /// Check the determinant and expectation identities on an instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Values matrix CSV: rows are coordinates, columns are sample points.
    #[arg(long, value_name = "PATH")]
    values: Option<PathBuf>,

    /// Single-column CSV of positive weights; defaults to uniform 1.
    #[arg(long, value_name = "PATH")]
    weights: Option<PathBuf>,

    /// JSON instance description (alternative to --values).
    #[arg(long, value_name = "PATH", conflicts_with = "values")]
    spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Approximation orders, comma separated.
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,

    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Number of sample points to select.
    #[arg(long)]
    k: usize,

    /// Selection strategy: exhaustive, volume-best-of, greedy-residual or
    /// greedy-volume.
    #[arg(long, value_name = "ID", default_value = "volume-best-of")]
    strategy: String,

    /// Draws for volume-best-of.
    #[arg(long, value_name = "N", default_value_t = 16)]
    draws: usize,

    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sampler backing volume-best-of: enumerate, kdpp or mcmc.
    #[arg(long, value_name = "ID", default_value = "kdpp")]
    method: String,

    /// Cap on exhaustively enumerated subsets.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_ENUM_CAP)]
    max_enum: u64,

    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Approximation orders, comma separated.
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,

    /// Random seed for the subset/column spot checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap on exhaustively enumerated subsets.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_ENUM_CAP)]
    max_enum: u64,

    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,

    /// Negative control: corrupt one accumulated determinant sum.
    #[arg(long, hide = true)]
    inject_error: bool,
}

/// Parses arguments and runs the selected command, returning the process
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Select(args) => cmd_select(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        Error::Parse(_)
        | Error::NonPositiveWeight { .. }
        | Error::ShapeMismatch(_)
        | Error::NonFiniteEntry { .. }
        | Error::InvalidSpectrum(_)
        | Error::InvalidGrid(_)
        | Error::SpectrumTooLong { .. } => 3,
        Error::Usage(_) | Error::UnknownStrategy(_) => 4,
        Error::RankDeficient { .. } | Error::NoNonzeroStart { .. } => 5,
        Error::CombinatorialBlowup { .. } => 6,
        _ => 1,
    }
}

fn resolve_input(input: &InputArgs) -> Result<(DiscretizedFunction, String)> {
    match (&input.values, &input.spec) {
        (Some(values), None) => {
            let f = load_function(values, input.weights.as_deref())?;
            let weights = match &input.weights {
                Some(path) => path.display().to_string(),
                None => "uniform".to_string(),
            };
            Ok((
                f,
                format!("csv values={} weights={}", values.display(), weights),
            ))
        }
        (None, Some(spec_path)) => {
            if input.weights.is_some() {
                return Err(Error::Usage(
                    "--weights only applies to --values input".to_string(),
                ));
            }
            let text = fs::read_to_string(spec_path)?;
            let spec: InstanceSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", spec_path.display())))?;
            let f = generate(&spec)?;
            Ok((f, spec.describe()))
        }
        (None, None) => Err(Error::Usage(
            "provide exactly one of --values or --spec".to_string(),
        )),
        (Some(_), Some(_)) => Err(Error::Usage(
            "--values and --spec are mutually exclusive".to_string(),
        )),
    }
}

fn build_analytics(d: &SchmidtDecomposition, k: usize) -> KAnalytics {
    let expected_error = if k <= d.rank() {
        expected_projection_error(d, k).ok()
    } else {
        None
    };
    KAnalytics {
        k,
        tail_width: tail_width(d, k),
        expected_error,
        expected_volume: expected_volume(d, k),
    }
}

fn emit(report: &RunReport, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    eprintln!("wall_time_ms: {:.1}", report.wall_time_ms);
}

fn cmd_decompose(args: DecomposeArgs) -> Result<i32> {
    let started = Instant::now();
    let (f, instance) = resolve_input(&args.input)?;
    let d = schmidt_decompose_default(&f)?;
    let mut report = RunReport::new("decompose", instance, 0);
    report.sigma = Some(d.sigma().to_vec());
    report.rank = Some(d.rank());
    for &k in &args.k {
        report.analytics.push(build_analytics(&d, k));
    }
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    emit(&report, args.json);
    Ok(0)
}

fn cmd_select(args: SelectArgs) -> Result<i32> {
    let started = Instant::now();
    let (f, instance) = resolve_input(&args.input)?;
    let strategy = args.strategy.parse::<Strategy>()?.with_draws(args.draws);
    let method = args.method.parse::<SamplerMethod>()?;
    if matches!(strategy, Strategy::VolumeBestOf { .. }) && args.draws == 0 {
        return Err(Error::Usage(
            "--draws must be at least 1 for volume-best-of".to_string(),
        ));
    }
    let config = SamplerConfig {
        seed: args.seed,
        method,
        mcmc_steps: None,
    };
    let d = schmidt_decompose_default(&f)?;
    let selection = run_strategy(&f, args.k, strategy, &config, args.max_enum)?;
    let certificate = certify_selection(&f, args.k, &selection)?;
    let mut report = RunReport::new("select", instance, args.seed);
    report.sigma = Some(d.sigma().to_vec());
    report.rank = Some(d.rank());
    report.analytics.push(build_analytics(&d, args.k));
    report.selections.push(selection);
    report.certificate = Some(certificate);
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    emit(&report, args.json);
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let started = Instant::now();
    let (f, instance) = resolve_input(&args.input)?;
    let d = schmidt_decompose_default(&f)?;
    let mut report = RunReport::new("verify", instance, args.seed);
    report.sigma = Some(d.sigma().to_vec());
    report.rank = Some(d.rank());
    for &k in &args.k {
        if k > d.rank() {
            return Err(Error::RankDeficient { k });
        }
        report.analytics.push(build_analytics(&d, k));
        report.identities.push(check_expected_volume(
            &f,
            &d,
            k,
            args.max_enum,
            args.inject_error,
        )?);
        report.identities.push(check_schur_ratio(&f, k, args.seed)?);
        report
            .identities
            .push(check_expected_error(&f, &d, k, args.max_enum)?);
        report.identities.push(check_sandwich(&f, &d, k));
    }
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    emit(&report, args.json);
    Ok(if report.all_identities_pass() { 0 } else { 1 })
}

fn ensure_enumerable(n: usize, k: usize, cap: u64) -> Result<()> {
    match binomial_capped(n, k, cap as u128) {
        Some(count) if count <= cap as u128 => Ok(()),
        _ => Err(Error::CombinatorialBlowup {
            subsets: binomial_capped(n, k, u128::MAX / 2).unwrap_or(u128::MAX),
            k,
            cap,
        }),
    }
}

/// The weighted sum of Gram volumes over all ordered k-tuples equals
/// k! times the k-th elementary symmetric polynomial of the squared
/// singular values. Tuples with repeats carry zero volume, so the sum
/// runs over subsets and picks up the k! ordering factor.
fn check_expected_volume(
    f: &DiscretizedFunction,
    d: &SchmidtDecomposition,
    k: usize,
    cap: u64,
    inject_error: bool,
) -> Result<IdentityCheck> {
    let n = f.num_points();
    ensure_enumerable(n, k, cap)?;
    let mut subset_sum = 0.0;
    for combo in (0..n).combinations(k) {
        let volume = log_det_gram(f, &combo)?;
        if volume.is_zero() {
            continue;
        }
        let weight: f64 = combo.iter().map(|&j| f.weights()[j]).product();
        subset_sum += volume.value() * weight;
    }
    if inject_error {
        subset_sum *= 1.0 + 1e-3;
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let tuple_sum = factorial * subset_sum;
    let reference = expected_volume(d, k);
    let deviation = (tuple_sum - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
    Ok(IdentityCheck::new(
        &format!("expected-volume[k={k}]"),
        deviation,
        IDENTITY_TOL,
    ))
}

/// Extending a subset by one column multiplies its Gram volume by the
/// squared residual of that column. Checked on random pairs; volumes at
/// the determinant noise floor count as zero on both sides.
fn check_schur_ratio(f: &DiscretizedFunction, k: usize, seed: u64) -> Result<IdentityCheck> {
    let name = format!("schur-ratio[k={k}]");
    let n = f.num_points();
    if k + 1 > n {
        return Ok(IdentityCheck::new(&name, 0.0, IDENTITY_TOL));
    }
    let mut rng = substream_rng(seed, 1_000 + k as u64);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut max_deviation = 0.0f64;
    for _ in 0..SCHUR_PAIRS {
        for i in 0..=k {
            let pick = rng.random_range(i..n);
            pool.swap(i, pick);
        }
        let mut subset = pool[..k].to_vec();
        subset.sort_unstable();
        let extra = pool[k];
        let small = log_det_gram(f, &subset)?;
        let mut extended = subset.clone();
        extended.push(extra);
        let big = log_det_gram(f, &extended)?;
        if small.is_zero() {
            if !big.is_zero() {
                max_deviation = max_deviation.max(1.0);
            }
            continue;
        }
        let lhs = big.value();
        let rhs = small.value() * residual_volume(f, &subset, extra)?;
        let floor = 1e-12 * small.value() * f.column(extra).norm_squared();
        if lhs <= floor && rhs <= floor {
            continue;
        }
        max_deviation = max_deviation.max((lhs - rhs).abs() / lhs.max(rhs));
    }
    Ok(IdentityCheck::new(&name, max_deviation, IDENTITY_TOL))
}

/// The enumeration average of projection errors equals
/// (k+1) e_{k+1} / e_k of the squared singular values.
fn check_expected_error(
    f: &DiscretizedFunction,
    d: &SchmidtDecomposition,
    k: usize,
    cap: u64,
) -> Result<IdentityCheck> {
    let dist = enumerate_distribution_capped(f, k, cap)?;
    let mut average = 0.0;
    for (subset, &p) in dist.subsets().iter().zip(dist.probabilities()) {
        if p > 0.0 {
            average += p * projection_error(f, subset)?;
        }
    }
    let expected = expected_projection_error(d, k)?;
    let denom = expected
        .abs()
        .max(average.abs())
        .max(1e-12 * total_l2_norm_squared(f));
    let deviation = (average - expected).abs() / denom;
    Ok(IdentityCheck::new(
        &format!("expected-error[k={k}]"),
        deviation,
        IDENTITY_TOL,
    ))
}

/// The expected error is sandwiched between the squared tail width and
/// k+1 times it.
fn check_sandwich(f: &DiscretizedFunction, d: &SchmidtDecomposition, k: usize) -> IdentityCheck {
    let name = format!("sandwich[k={k}]");
    let t = tail_width(d, k);
    let lower = t * t;
    let upper = (k as f64 + 1.0) * lower;
    let expected = match expected_projection_error(d, k) {
        Ok(value) => value,
        Err(_) => return IdentityCheck::new(&name, f64::INFINITY, IDENTITY_TOL),
    };
    let denom = lower.max(expected).max(1e-12 * total_l2_norm_squared(f));
    let violation = (lower - expected).max(expected - upper).max(0.0);
    IdentityCheck::new(&name, violation / denom, IDENTITY_TOL)
}
