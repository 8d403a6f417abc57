//! `qwalk` — build, evolve, and verify stationary measures of discrete-time
//! quantum walks on the integer line.
//!
//! Exit status: 0 success, 1 verification failure, 2 configuration error,
//! 3 precondition violation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use qwalk::azero::{azero_lambda, azero_measure, build_stationary_azero, AZeroConfig, AZeroSpec};
use qwalk::bzero::{
    counterexample_bounded, counterexample_unbounded, diag_evolve_measure,
    uniformity_certificate_with_tol, CertificateVerdict, DiagonalStateConfig, DiagonalWalkState,
};
use qwalk::coin::{CoinCase, CoinConfig, UnitaryCoin, UNITARITY_TOL, UNITARITY_TOL_STRICT};
use qwalk::lattice::{
    evolve, to_measure, write_field_csv, write_measure_csv, ChiralPair, Measure, StateGenerator,
};
use qwalk::nstate::{uniform_stationary_check, NStateCoin, NStateConfig};
use qwalk::spectral::EigenSolution;
use qwalk::verify::{
    algebraic_checks, decay_classify, eigen_residual, membership_check, DecayClass, VerifyReport,
    EIGEN_RESIDUAL_TOL, IDENTITY_TOL, MEMBERSHIP_TOL,
};

/// Simulate two-state and N-state quantum walks and verify their
/// stationary measures.
#[derive(Parser)]
#[command(name = "qwalk", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a family state and emit the measure at requested times.
    Evolve(EvolveArgs),
    /// Build a stationary family; emit amplitudes, measure, and a report.
    Stationary(StationaryArgs),
    /// Run residual, identity, membership, and decay checks on a family.
    Verify(VerifyArgs),
    /// Run the diagonal-coin uniformity certificate on a state file.
    Certificate(CertificateArgs),
    /// Emit one of the diagonal-coin counterexample tables.
    Counterexample(CounterexampleArgs),
    /// Verify a grid of full-support coins; one summary row per point.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// Coin preset (`hadamard`, `u-theta:<rad>`, `h-sigma:<rad>`,
    /// `azero:<eta>:<xi>`, `bzero:<eta>:<xi>`) or a coin JSON file.
    #[arg(long)]
    coin: Option<String>,
    /// Eigenvalue index 1..=4 of the full-support family.
    #[arg(short = 'k', long, default_value_t = 1)]
    k: usize,
    /// Constant coefficient of the full-support family, as `re,im`.
    #[arg(short = 'A', long = "A", default_value = "1,0", allow_hyphen_values = true)]
    a_coef: String,
    /// Linear coefficient of the full-support family, as `re,im`.
    #[arg(short = 'B', long = "B", default_value = "0,0", allow_hyphen_values = true)]
    b_coef: String,
    /// Anti-diagonal family spec (JSON file); selects that family.
    #[arg(long, conflicts_with_all = ["k", "a_coef", "b_coef", "phi"])]
    azero_spec: Option<PathBuf>,
    /// Position-independent chirality vector `re,im[;re,im...]`; selects
    /// the uniform family.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Validate coins at 1e-12 instead of 1e-9.
    #[arg(long)]
    strict: bool,
    /// Project an almost-unitary coin onto the nearest unitary first.
    #[arg(long)]
    repair: bool,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Window `lo:hi`.
    #[arg(long, default_value = "-32:32", allow_hyphen_values = true)]
    window: String,
    /// Comma-separated step counts, e.g. `0,1,64`.
    #[arg(long, default_value = "0")]
    steps: String,
    /// Output file (or stem when several steps are requested); stdout if
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StationaryArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "-32:32", allow_hyphen_values = true)]
    window: String,
    /// Rescale the free parameters so the measure at the origin is 1.
    #[arg(long)]
    rescale: bool,
    /// Steps for the membership check in the attached report.
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    /// Output prefix: writes `<prefix>.amplitudes.csv`,
    /// `<prefix>.measure.csv`, `<prefix>.report.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "-20:20", allow_hyphen_values = true)]
    window: String,
    /// Steps for the membership check.
    #[arg(long, default_value_t = 100)]
    n_max: usize,
    /// Measure-comparison tolerance for the membership check.
    #[arg(long, default_value_t = MEMBERSHIP_TOL)]
    tol: f64,
    /// Report file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertificateArgs {
    /// Diagonal-walk state JSON file.
    #[arg(long)]
    state: PathBuf,
    /// Largest time level to check (>= 2).
    #[arg(long, default_value_t = 2)]
    max_n: usize,
    /// Constraint tolerance (0 demands exact equality).
    #[arg(long, default_value_t = qwalk::bzero::CERTIFICATE_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum WhichCounterexample {
    Unbounded,
    Bounded,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Which one-step-stationary example to emit.
    #[arg(long, value_enum)]
    which: WhichCounterexample,
    #[arg(long, default_value = "-10:10", allow_hyphen_values = true)]
    window: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Rotation-angle grid: `lin:<count>` (interior points of (0, π/2))
    /// or `list:<rad>,<rad>,...`.
    #[arg(long, default_value = "lin:23")]
    theta: String,
    /// Eigenvalue indices to sweep.
    #[arg(long, default_value = "1,2,3,4")]
    k: String,
    /// Constant coefficients, `re,im` pairs separated by `;`.
    #[arg(long = "A", default_value = "1,0", allow_hyphen_values = true)]
    a_coef: String,
    /// Linear coefficients, `re,im` pairs separated by `;`.
    #[arg(long = "B", default_value = "0,0;1,0", allow_hyphen_values = true)]
    b_coef: String,
    /// Also sweep this many seeded random full-support coins.
    #[arg(long, default_value_t = 0)]
    random_coins: usize,
    /// Seed for the random coins (the QW_SEED environment variable
    /// overrides this).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "-20:20", allow_hyphen_values = true)]
    window: String,
    /// Steps for the per-point membership check.
    #[arg(long, default_value_t = 25)]
    n_max: usize,
    /// Summary CSV file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the exit status contract.
enum CliError {
    /// Unreadable files, malformed JSON, unknown presets: exit 2.
    Config(String),
    /// Valid config asking for something the operation forbids: exit 3.
    Precondition(String),
    /// Checks ran and failed: exit 1.
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Failure(m) | CliError::Config(m) | CliError::Precondition(m) => m,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Config(err.to_string())
}

fn precondition<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Precondition(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Evolve(args) => run_evolve(args),
        Command::Stationary(args) => run_stationary(args),
        Command::Verify(args) => run_verify(args),
        Command::Certificate(args) => run_certificate(args),
        Command::Counterexample(args) => run_counterexample(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qwalk: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

// ---------------------------------------------------------------------
// shared parsing

fn parse_window(text: &str) -> CliResult<(i64, i64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("window {text:?} is not of the form lo:hi")))?;
    let lo = lo
        .trim()
        .parse::<i64>()
        .map_err(|_| CliError::Config(format!("bad window bound {lo:?}")))?;
    let hi = hi
        .trim()
        .parse::<i64>()
        .map_err(|_| CliError::Config(format!("bad window bound {hi:?}")))?;
    if hi < lo {
        return Err(CliError::Config(format!("window [{lo}, {hi}] is inverted")));
    }
    Ok((lo, hi))
}

fn parse_complex(text: &str) -> CliResult<Complex64> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| CliError::Config(format!("complex value {text:?} is not of the form re,im")))?;
    let re = re
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bad real part {re:?}")))?;
    let im = im
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bad imaginary part {im:?}")))?;
    Ok(Complex64::new(re, im))
}

fn parse_complex_list(text: &str) -> CliResult<Vec<Complex64>> {
    text.split(';').map(parse_complex).collect()
}

fn parse_steps(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad step count {part:?}")))
        })
        .collect()
}

enum CoinSource {
    TwoState(UnitaryCoin),
    NState(NStateCoin),
}

fn load_coin(args: &FamilyArgs) -> CliResult<CoinSource> {
    let text = args
        .coin
        .as_deref()
        .ok_or_else(|| CliError::Config("--coin is required for this family".into()))?;
    let path = Path::new(text);
    if path.exists() {
        let raw = fs::read_to_string(path).map_err(config)?;
        let value: serde_json::Value = serde_json::from_str(&raw).map_err(config)?;
        if value.get("entries").is_some() {
            let parsed: NStateConfig = serde_json::from_value(value).map_err(config)?;
            return Ok(CoinSource::NState(parsed.into_coin().map_err(precondition)?));
        }
        let parsed: CoinConfig = serde_json::from_value(value).map_err(config)?;
        let tol = if args.strict {
            UNITARITY_TOL_STRICT
        } else {
            UNITARITY_TOL
        };
        let coin = if args.repair {
            let [a, b, c, d] = [parsed.a, parsed.b, parsed.c, parsed.d]
                .map(|[re, im]| Complex64::new(re, im));
            UnitaryCoin::repaired(a, b, c, d).map_err(precondition)?
        } else {
            parsed.into_coin(tol).map_err(precondition)?
        };
        return Ok(CoinSource::TwoState(coin));
    }
    UnitaryCoin::from_preset(text)
        .map(CoinSource::TwoState)
        .map_err(config)
}

/// A fully-resolved family: a coin plus the initial state it evolves.
#[allow(clippy::large_enum_variant)]
enum Family {
    TwoState {
        coin: UnitaryCoin,
        gen: StateGenerator,
        lambda: Option<Complex64>,
        solution: Option<EigenSolution>,
        azero: Option<Box<AZeroSpec>>,
    },
    NStateUniform {
        coin: NStateCoin,
        phi: Vec<Complex64>,
    },
}

fn resolve_family(args: &FamilyArgs, rescale: bool) -> CliResult<Family> {
    if let Some(path) = &args.azero_spec {
        let raw = fs::read_to_string(path).map_err(config)?;
        let parsed: AZeroConfig = serde_json::from_str(&raw).map_err(config)?;
        let spec = parsed.into_spec().map_err(precondition)?;
        if spec.max_modulus() > 1e6 {
            eprintln!(
                "qwalk: warning: sequence moduli exceed 1e6; squared moduli lose precision"
            );
        }
        if let Some(coin_text) = &args.coin {
            let CoinSource::TwoState(coin) = load_coin(args)? else {
                return Err(CliError::Precondition(
                    "anti-diagonal family needs a 2x2 coin".into(),
                ));
            };
            let derived = spec.coin();
            let distance = (coin.a() - derived.a()).norm()
                + (coin.b() - derived.b()).norm()
                + (coin.c() - derived.c()).norm()
                + (coin.d() - derived.d()).norm();
            if distance > 1e-9 {
                return Err(CliError::Precondition(format!(
                    "--coin {coin_text} does not match the coin implied by the spec (distance {distance:.3e})"
                )));
            }
        }
        let gen = build_stationary_azero(&spec).map_err(precondition)?;
        return Ok(Family::TwoState {
            coin: spec.coin(),
            gen,
            lambda: Some(azero_lambda(&spec)),
            solution: None,
            azero: Some(Box::new(spec)),
        });
    }

    if let Some(phi_text) = &args.phi {
        let phi = parse_complex_list(phi_text)?;
        match load_coin(args)? {
            CoinSource::NState(coin) => {
                if phi.len() != coin.n() {
                    return Err(CliError::Precondition(format!(
                        "phi has {} components but the coin is {}x{}",
                        phi.len(),
                        coin.n(),
                        coin.n()
                    )));
                }
                Ok(Family::NStateUniform { coin, phi })
            }
            CoinSource::TwoState(coin) => {
                if phi.len() != 2 {
                    return Err(CliError::Precondition(format!(
                        "phi has {} components but the coin is 2x2",
                        phi.len()
                    )));
                }
                if phi[0].norm_sqr() + phi[1].norm_sqr() == 0.0 {
                    return Err(CliError::Precondition("phi must not be the zero vector".into()));
                }
                let pair = ChiralPair::new(phi[0], phi[1]);
                Ok(Family::TwoState {
                    coin,
                    gen: StateGenerator::uniform(pair),
                    lambda: None,
                    solution: None,
                    azero: None,
                })
            }
        }
    } else {
        let CoinSource::TwoState(coin) = load_coin(args)? else {
            return Err(CliError::Precondition(
                "the full-support family needs a 2x2 coin; use --phi for N-state coins".into(),
            ));
        };
        let mut a_coef = parse_complex(&args.a_coef)?;
        let mut b_coef = parse_complex(&args.b_coef)?;
        if !(1..=4).contains(&args.k) {
            return Err(CliError::Config(format!(
                "eigenvalue index k must be 1..=4, got {}",
                args.k
            )));
        }
        if rescale {
            let probe =
                EigenSolution::from_index(coin, args.k, a_coef, b_coef).map_err(precondition)?;
            let origin = probe.measure_generator_direct().eval(0);
            if origin <= 0.0 {
                return Err(CliError::Precondition(
                    "cannot rescale: the measure vanishes at the origin".into(),
                ));
            }
            let scale = 1.0 / origin.sqrt();
            a_coef *= scale;
            b_coef *= scale;
        }
        let solution =
            EigenSolution::from_index(coin, args.k, a_coef, b_coef).map_err(precondition)?;
        Ok(Family::TwoState {
            coin,
            gen: solution.state_generator(),
            lambda: Some(solution.lambda()),
            solution: Some(solution),
            azero: None,
        })
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, contents).map_err(config),
        None => {
            io::stdout()
                .write_all(contents.as_bytes())
                .map_err(config)?;
            Ok(())
        }
    }
}

fn measure_csv(measure: &Measure) -> String {
    let mut buf = Vec::new();
    write_measure_csv(&mut buf, measure).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

// ---------------------------------------------------------------------
// evolve

fn run_evolve(args: EvolveArgs) -> CliResult<()> {
    let (lo, hi) = parse_window(&args.window)?;
    let steps = parse_steps(&args.steps)?;
    let family = resolve_family(&args.family, false)?;
    let mut blocks: Vec<(usize, String)> = Vec::new();
    match &family {
        Family::TwoState { coin, gen, .. } => {
            for &n in &steps {
                let field = evolve(coin, gen, n, lo, hi).map_err(precondition)?;
                blocks.push((n, measure_csv(&to_measure(&field))));
            }
        }
        Family::NStateUniform { coin, phi } => {
            // constant states stay constant sitewise; evolve by matrix power
            let mut vec = phi.clone();
            let mut at = 0usize;
            for &n in &steps {
                if n < at {
                    vec = phi.clone();
                    at = 0;
                }
                for _ in at..n {
                    vec = coin.apply(&vec).map_err(precondition)?;
                }
                at = n;
                let mu: f64 = vec.iter().map(|v| v.norm_sqr()).sum();
                let measure = Measure::from_values(lo, vec![mu; (hi - lo + 1) as usize])
                    .map_err(precondition)?;
                blocks.push((n, measure_csv(&measure)));
            }
        }
    }
    if blocks.len() == 1 {
        return write_output(args.out.as_deref(), &blocks[0].1);
    }
    match &args.out {
        Some(stem) => {
            for (n, block) in &blocks {
                let path = step_file_name(stem, *n);
                fs::write(&path, block).map_err(config)?;
            }
            Ok(())
        }
        None => {
            let mut all = String::new();
            for (n, block) in &blocks {
                let _ = writeln!(all, "# n={n}");
                all.push_str(block);
            }
            write_output(None, &all)
        }
    }
}

fn step_file_name(stem: &Path, n: usize) -> PathBuf {
    match (stem.file_stem(), stem.extension()) {
        (Some(name), Some(ext)) => stem.with_file_name(format!(
            "{}.n{}.{}",
            name.to_string_lossy(),
            n,
            ext.to_string_lossy()
        )),
        _ => stem.with_file_name(format!("{}.n{}", stem.to_string_lossy(), n)),
    }
}

// ---------------------------------------------------------------------
// stationary

fn run_stationary(args: StationaryArgs) -> CliResult<()> {
    let (lo, hi) = parse_window(&args.window)?;
    let family = resolve_family(&args.family, args.rescale)?;
    let Family::TwoState {
        coin,
        gen,
        lambda,
        solution,
        azero,
    } = &family
    else {
        return Err(CliError::Precondition(
            "stationary emits two-state amplitude files; for N-state coins use `verify --phi`"
                .into(),
        ));
    };

    let field = qwalk::lattice::sample_window(gen, lo, hi).map_err(precondition)?;
    let measure = to_measure(&field);

    // cross-check the printed closed form against the direct measure
    if let Some(solution) = solution {
        let printed = solution.measure_generator();
        let worst = (lo..=hi)
            .map(|x| (printed.eval(x) - measure.get(x).unwrap()).abs())
            .fold(0.0f64, f64::max);
        if worst > 1e-10 {
            eprintln!(
                "qwalk: diagnostic: closed-form measure deviates from direct |psi|^2 by {worst:.3e}; \
                 the direct values are emitted"
            );
        }
    }
    if let Some(spec) = azero {
        let analytic = azero_measure(spec).map_err(precondition)?;
        let worst = (lo..=hi)
            .map(|x| (analytic.eval(x) - measure.get(x).unwrap()).abs())
            .fold(0.0f64, f64::max);
        if worst > 1e-10 {
            eprintln!(
                "qwalk: diagnostic: analytic measure deviates from direct |psi|^2 by {worst:.3e}"
            );
        }
    }

    let report = two_state_report(
        coin,
        gen,
        *lambda,
        solution.as_ref(),
        CheckParams {
            n_max: args.n_max,
            lo,
            hi,
            tol: MEMBERSHIP_TOL,
        },
    )?;

    let prefix = args.out.to_string_lossy();
    let mut amp_buf = Vec::new();
    write_field_csv(&mut amp_buf, &field).expect("vec write");
    fs::write(format!("{prefix}.amplitudes.csv"), amp_buf).map_err(config)?;
    fs::write(format!("{prefix}.measure.csv"), measure_csv(&measure)).map_err(config)?;
    let json = serde_json::to_string_pretty(&report).map_err(config)?;
    fs::write(format!("{prefix}.report.json"), json + "\n").map_err(config)?;
    Ok(())
}

/// Window, step count, and tolerance of one verification run.
#[derive(Clone, Copy)]
struct CheckParams {
    n_max: usize,
    lo: i64,
    hi: i64,
    tol: f64,
}

fn two_state_report(
    coin: &UnitaryCoin,
    gen: &StateGenerator,
    lambda: Option<Complex64>,
    solution: Option<&EigenSolution>,
    params: CheckParams,
) -> CliResult<VerifyReport> {
    let CheckParams { n_max, lo, hi, tol } = params;
    let mut identities = BTreeMap::new();
    if coin.classify().map_err(precondition)? == CoinCase::FullSupport {
        let checks = algebraic_checks(coin).map_err(precondition)?;
        identities.extend(checks.identities);
    }
    if let (Some(lambda), None) = (lambda, solution) {
        // anti-diagonal family: record the defining eigenvalue identity
        let residual = (lambda * lambda + coin.det()).norm();
        identities.insert("lambda-squared".to_string(), residual);
    }

    let max_eigen_residual = match lambda {
        Some(lambda) => {
            let field = qwalk::lattice::sample_window(gen, lo, hi).map_err(precondition)?;
            eigen_residual(coin, lambda, &field)
                .map_err(precondition)?
                .max_eigen_residual
        }
        None => {
            // uniform family: residual = worst deviation from the flat measure
            let pair = gen.eval(0);
            let coin2 = NStateCoin::new(2, vec![coin.a(), coin.b(), coin.c(), coin.d()])
                .map_err(precondition)?;
            uniform_stationary_check(&coin2, &[pair.left, pair.right], n_max, lo, hi)
                .map_err(precondition)?
                .max_deviation
        }
    };

    let membership_level =
        membership_check(coin, gen, n_max, lo, hi, tol).map_err(precondition)?;

    let decay = symmetric_decay(gen, lo, hi);

    Ok(VerifyReport {
        max_eigen_residual,
        identities,
        membership_level,
        decay: decay.tag().to_string(),
        decay_estimate: decay.estimate(),
    })
}

/// Decay classification needs a window symmetric about 0; shrink to the
/// largest symmetric sub-window and fall back to `other` when impossible.
fn symmetric_decay(gen: &StateGenerator, lo: i64, hi: i64) -> DecayClass {
    let half = (-lo).min(hi).max(0);
    if half < 4 {
        return DecayClass::Other;
    }
    let field = match qwalk::lattice::sample_window(gen, -half, half) {
        Ok(f) => f,
        Err(_) => return DecayClass::Other,
    };
    decay_classify(&to_measure(&field)).unwrap_or(DecayClass::Other)
}

// ---------------------------------------------------------------------
// verify

fn run_verify(args: VerifyArgs) -> CliResult<()> {
    let (lo, hi) = parse_window(&args.window)?;
    let family = resolve_family(&args.family, false)?;
    let report = match &family {
        Family::TwoState {
            coin,
            gen,
            lambda,
            solution,
            ..
        } => two_state_report(
            coin,
            gen,
            *lambda,
            solution.as_ref(),
            CheckParams {
                n_max: args.n_max,
                lo,
                hi,
                tol: args.tol,
            },
        )?,
        Family::NStateUniform { coin, phi } => {
            let check = uniform_stationary_check(coin, phi, args.n_max, lo, hi)
                .map_err(precondition)?;
            VerifyReport {
                max_eigen_residual: check.max_deviation,
                identities: BTreeMap::new(),
                membership_level: if check.passed { args.n_max } else { 0 },
                decay: "uniform".to_string(),
                decay_estimate: None,
            }
        }
    };
    let json = serde_json::to_string_pretty(&report).map_err(config)?;
    write_output(args.out.as_deref(), &(json + "\n"))?;
    if report.passes(args.n_max) {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "verification failed: eigen residual {:.3e} (limit {EIGEN_RESIDUAL_TOL:.0e}), \
             worst identity {:.3e} (limit {IDENTITY_TOL:.0e}), membership level {} of {}",
            report.max_eigen_residual,
            report
                .identities
                .values()
                .copied()
                .fold(0.0f64, f64::max),
            report.membership_level,
            args.n_max
        )))
    }
}

// ---------------------------------------------------------------------
// certificate

fn run_certificate(args: CertificateArgs) -> CliResult<()> {
    let raw = fs::read_to_string(&args.state).map_err(config)?;
    let parsed: DiagonalStateConfig = serde_json::from_str(&raw).map_err(config)?;
    let state: DiagonalWalkState = parsed.into_state().map_err(precondition)?;
    let certificate =
        uniformity_certificate_with_tol(&state, args.max_n, args.tol).map_err(precondition)?;

    let mut value = serde_json::to_value(&certificate).map_err(config)?;
    if certificate.is_uniform() {
        // the verdict only speaks for the window interior the checks covered
        let label_lo = state.lo() + 2 * args.max_n as i64;
        let label_hi = state.hi() - 2 * args.max_n as i64;
        value.as_object_mut().expect("certificate is an object").insert(
            "label".to_string(),
            serde_json::Value::String(format!("uniform on [{label_lo}, {label_hi}]")),
        );
    }
    let json = serde_json::to_string_pretty(&value).map_err(config)?;
    write_output(args.out.as_deref(), &(json + "\n"))?;

    match certificate.verdict {
        CertificateVerdict::Uniform => Ok(()),
        CertificateVerdict::NonStationary { level, site } => Err(CliError::Failure(format!(
            "measure is not reproduced at time {level} (witness site {site})"
        ))),
        CertificateVerdict::Inconclusive { reason } => Err(CliError::Failure(reason)),
    }
}

// ---------------------------------------------------------------------
// counterexample

fn run_counterexample(args: CounterexampleArgs) -> CliResult<()> {
    let (lo, hi) = parse_window(&args.window)?;
    let state = match args.which {
        WhichCounterexample::Unbounded => counterexample_unbounded(lo, hi),
        WhichCounterexample::Bounded => counterexample_bounded(lo, hi),
    }
    .map_err(precondition)?;
    let tables: Vec<Option<Measure>> = (0..=2)
        .map(|n| diag_evolve_measure(&state, n).ok())
        .collect();

    let text = match args.format {
        OutputFormat::Csv => {
            let mut text = String::from("x,a,b,mu0,mu1,mu2\n");
            for x in lo..=hi {
                let _ = write!(
                    text,
                    "{x},{:.16e},{:.16e}",
                    state.a_at(x).unwrap(),
                    state.b_at(x).unwrap()
                );
                for table in &tables {
                    match table.as_ref().and_then(|m| m.get(x)) {
                        Some(v) => {
                            let _ = write!(text, ",{v:.16e}");
                        }
                        None => text.push(','),
                    }
                }
                text.push('\n');
            }
            text
        }
        OutputFormat::Json => {
            let sites: Vec<i64> = (lo..=hi).collect();
            let grab = |f: &dyn Fn(i64) -> Option<f64>| -> Vec<serde_json::Value> {
                sites
                    .iter()
                    .map(|&x| match f(x) {
                        Some(v) => serde_json::json!(v),
                        None => serde_json::Value::Null,
                    })
                    .collect()
            };
            let value = serde_json::json!({
                "which": match args.which {
                    WhichCounterexample::Unbounded => "unbounded",
                    WhichCounterexample::Bounded => "bounded",
                },
                "window": [lo, hi],
                "x": sites,
                "a": grab(&|x| state.a_at(x)),
                "b": grab(&|x| state.b_at(x)),
                "mu0": grab(&|x| tables[0].as_ref().and_then(|m| m.get(x))),
                "mu1": grab(&|x| tables[1].as_ref().and_then(|m| m.get(x))),
                "mu2": grab(&|x| tables[2].as_ref().and_then(|m| m.get(x))),
            });
            serde_json::to_string_pretty(&value).map_err(config)? + "\n"
        }
    };
    write_output(args.out.as_deref(), &text)
}

// ---------------------------------------------------------------------
// sweep

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let (lo, hi) = parse_window(&args.window)?;
    let seed = match std::env::var("QW_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Config(format!("QW_SEED={text:?} is not an integer")))?,
        Err(_) => args.seed,
    };

    let mut coins: Vec<(String, UnitaryCoin)> = Vec::new();
    if let Some(count_text) = args.theta.strip_prefix("lin:") {
        let count: usize = count_text
            .parse()
            .map_err(|_| CliError::Config(format!("bad theta grid {:?}", args.theta)))?;
        for j in 1..=count {
            // interior points only: the family degenerates at 0 and π/2
            let theta = j as f64 * std::f64::consts::FRAC_PI_2 / (count + 1) as f64;
            coins.push((format!("u-theta:{theta:.17}"), UnitaryCoin::rotation(theta)));
        }
    } else if let Some(list) = args.theta.strip_prefix("list:") {
        for part in list.split(',') {
            let theta: f64 = part
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad theta value {part:?}")))?;
            coins.push((format!("u-theta:{theta:.17}"), UnitaryCoin::rotation(theta)));
        }
    } else {
        return Err(CliError::Config(format!(
            "theta grid {:?} must be lin:<count> or list:<values>",
            args.theta
        )));
    }
    for index in 0..args.random_coins {
        let coin = qwalk::nstate::random_full_support_coin(seed.wrapping_add(index as u64));
        coins.push((format!("random:{index}"), coin));
    }

    let ks: Vec<usize> = args
        .k
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|k| (1..=4).contains(k))
                .ok_or_else(|| CliError::Config(format!("bad eigenvalue index {part:?}")))
        })
        .collect::<CliResult<_>>()?;
    let a_coefs = parse_complex_list(&args.a_coef)?;
    let b_coefs = parse_complex_list(&args.b_coef)?;

    let mut text = String::from(
        "idx,coin,k,A_re,A_im,B_re,B_im,max_identity,max_eigen_residual,membership,decay,pass,note\n",
    );
    let mut first_failure: Option<(usize, String)> = None;
    let mut idx = 0usize;
    for (label, coin) in &coins {
        for &k in &ks {
            for &a_coef in &a_coefs {
                for &b_coef in &b_coefs {
                    let (row, pass) =
                        sweep_point(coin, k, a_coef, b_coef, lo, hi, args.n_max);
                    let _ = writeln!(
                        text,
                        "{idx},{label},{k},{:.16e},{:.16e},{:.16e},{:.16e},{row}",
                        a_coef.re, a_coef.im, b_coef.re, b_coef.im
                    );
                    if !pass && first_failure.is_none() {
                        first_failure = Some((idx, format!("{label} k={k} A={a_coef} B={b_coef}")));
                    }
                    idx += 1;
                }
            }
        }
    }
    if let Some((failed_idx, description)) = &first_failure {
        let _ = writeln!(text, "# first_failure idx={failed_idx} {description}");
    }
    write_output(args.out.as_deref(), &text)?;
    match first_failure {
        None => Ok(()),
        Some((failed_idx, description)) => Err(CliError::Failure(format!(
            "sweep point {failed_idx} failed: {description}"
        ))),
    }
}

fn sweep_point(
    coin: &UnitaryCoin,
    k: usize,
    a_coef: Complex64,
    b_coef: Complex64,
    lo: i64,
    hi: i64,
    n_max: usize,
) -> (String, bool) {
    let run = || -> Result<(f64, f64, usize, DecayClass), String> {
        let identities = algebraic_checks(coin).map_err(|e| e.to_string())?;
        let max_identity = identities.identities.values().copied().fold(0.0f64, f64::max);
        let solution =
            EigenSolution::from_index(*coin, k, a_coef, b_coef).map_err(|e| e.to_string())?;
        let gen = solution.state_generator();
        let field =
            qwalk::lattice::sample_window(&gen, lo, hi).map_err(|e| e.to_string())?;
        let residual = eigen_residual(coin, solution.lambda(), &field)
            .map_err(|e| e.to_string())?
            .max_eigen_residual;
        let level = membership_check(coin, &gen, n_max, lo, hi, MEMBERSHIP_TOL)
            .map_err(|e| e.to_string())?;
        let decay = symmetric_decay(&gen, lo, hi);
        Ok((max_identity, residual, level, decay))
    };
    match run() {
        Ok((max_identity, residual, level, decay)) => {
            let pass =
                max_identity <= IDENTITY_TOL && residual <= EIGEN_RESIDUAL_TOL && level == n_max;
            (
                format!(
                    "{max_identity:.16e},{residual:.16e},{level},{},{pass},",
                    decay.tag()
                ),
                pass,
            )
        }
        Err(note) => (format!(",,,,false,{}", note.replace(',', ";")), false),
    }
}
