//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for I/O, parse and usage errors, 2 when an
//! input or a computed result violates a mathematical invariant.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::instruments::{
    covariant_instrument, reconstruct_measure, standard_instrument, verify_covariance,
    CovariantMeasure, Instrument,
};
use crate::observables::{
    cpso_from_state, effect_span_rank, group_outcomes, is_informationally_complete, Outcome, Povm, ProbVector,
    State,
};
use crate::random::{random_state, rng, DEFAULT_SEED};
use crate::sequential::{check_map, SequentialResult};
use crate::spin::{bloch_vector, kronecker_factorization_check, tradeoff_check, unsharp_spin, SpinFrame};
use crate::verify::{run_suite, Suite, VerifyConfig};
use crate::weyl::WeylSystem;

#[derive(Debug, Parser)]
#[command(
    name = "seqconj",
    version,
    about = "Sequential measurements of conjugate observables on finite abelian groups"
)]
pub struct Cli {
    /// Group as moduli joined by 'x', e.g. 3 or 2x2.
    #[arg(long, global = true)]
    group: Option<String>,

    /// Validation tolerance for JSON inputs.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint observable pipeline for a covariant measure.
    Sequential {
        #[command(subcommand)]
        action: SequentialAction,
    },
    /// Build, check or invert covariant instruments.
    Instrument {
        #[command(subcommand)]
        action: InstrumentAction,
    },
    /// Covariant phase-space observable of a generating state.
    Cpso(CpsoArgs),
    /// Worked examples.
    Demo {
        #[command(subcommand)]
        action: DemoAction,
    },
    /// Run numerical verification suites.
    Verify(VerifyArgs),
    /// Print the Weyl system of the group.
    DumpWeyl,
}

#[derive(Debug, Subcommand)]
enum SequentialAction {
    Run(SequentialRunArgs),
}

#[derive(Debug, Args)]
struct SequentialRunArgs {
    /// Covariant measure JSON.
    #[arg(long)]
    measure: PathBuf,
    /// Input state for outcome distributions.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Directory for CSV exports of sigma, tau and, with --state, the
    /// joint and marginal distributions.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum InstrumentAction {
    /// Covariant instrument of a measure, or the standard instrument of a probe.
    Build(BuildArgs),
    /// Covariance residual of an instrument.
    Verify(InstrumentInput),
    /// Measure of a covariant instrument.
    Reconstruct(InstrumentInput),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, conflicts_with = "probe", required_unless_present = "probe")]
    measure: Option<PathBuf>,
    /// Probe state for the standard instrument; needs --group.
    #[arg(long)]
    probe: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InstrumentInput {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct CpsoArgs {
    /// Generating state JSON.
    #[arg(long)]
    state: PathBuf,
}

#[derive(Debug, Subcommand)]
enum DemoAction {
    Spin(SpinArgs),
}

#[derive(Debug, Args)]
struct SpinArgs {
    /// First axis, comma separated.
    #[arg(long, default_value = "0,0,1")]
    a: String,
    /// Second axis, orthogonal to the first.
    #[arg(long, default_value = "1,0,0")]
    b: String,
    /// Probe state JSON; |0><0| when omitted.
    #[arg(long)]
    probe: Option<PathBuf>,
    /// Input state for the factorization check; seeded random when omitted.
    #[arg(long)]
    rho: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// weyl, theorem41, prop42, prop43, corollary44, spin or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Random samples per randomized check.
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Sequential {
            action: SequentialAction::Run(args),
        } => cmd_sequential(&ctx, args),
        Command::Instrument { action } => match action {
            InstrumentAction::Build(args) => cmd_instrument_build(&ctx, args),
            InstrumentAction::Verify(args) => cmd_instrument_verify(&ctx, args),
            InstrumentAction::Reconstruct(args) => cmd_instrument_reconstruct(&ctx, args),
        },
        Command::Cpso(args) => cmd_cpso(&ctx, args),
        Command::Demo {
            action: DemoAction::Spin(args),
        } => cmd_demo_spin(&ctx, args),
        Command::Verify(args) => cmd_verify(&ctx, args),
        Command::DumpWeyl => {
            let ws = WeylSystem::<f64>::new(ctx.require_group()?);
            ctx.emit(&ws.dump())?;
            Ok(0)
        }
    }
}

/// Resolved global options.
struct Context {
    group: Option<Group>,
    tol: Tolerance<f64>,
    seed: u64,
    out: Option<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let group = cli.group.as_deref().map(str::parse).transpose()?;
        let tol = match cli.tol {
            Some(t) => Tolerance::uniform(t)?,
            None => Tolerance::default(),
        };
        Ok(Self {
            group,
            tol,
            seed: cli.seed,
            out: cli.out.clone(),
        })
    }

    fn require_group(&self) -> Result<Group> {
        self.group
            .clone()
            .ok_or_else(|| Error::Usage("this command needs --group".into()))
    }

    /// Uses the group of an input, rejecting a conflicting --group.
    fn agree(&self, found: &Group) -> Result<()> {
        match &self.group {
            Some(g) if g != found => Err(Error::Dimension(format!(
                "--group {g} does not match the input's group {found}"
            ))),
            _ => Ok(()),
        }
    }

    fn emit<S: Serialize>(&self, value: &S) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        match &self.out {
            Some(path) => write_file(path, &text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|source| Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })
            }
        }
    }

    fn load_state(&self, path: &Path) -> Result<State<f64>> {
        let m: CMatrix<f64> = read_json(path)?;
        State::new(m, self.tol)
    }

    fn load_measure(&self, path: &Path) -> Result<CovariantMeasure<f64>> {
        let raw: RawMeasure = read_json(path)?;
        self.agree(&raw.group)?;
        CovariantMeasure::new(raw.group, raw.m, self.tol)
    }

    fn load_instrument(&self, path: &Path) -> Result<Instrument<f64>> {
        let raw: RawInstrument = read_json(path)?;
        let group = match (raw.group, &self.group) {
            (Some(g), _) => {
                self.agree(&g)?;
                Some(g)
            }
            (None, g) => g.clone(),
        };
        let outcomes = match (raw.outcomes, &group) {
            (Some(o), _) => o,
            (None, Some(g)) => group_outcomes(g),
            (None, None) => (0..raw.maps.len()).map(|k| Outcome::Name(k.to_string())).collect(),
        };
        let chois = raw.maps.into_iter().map(|m| m.choi).collect();
        Instrument::from_chois(group, outcomes, chois, self.tol)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    group: Group,
    m: Vec<CMatrix<f64>>,
}

#[derive(Deserialize)]
struct RawMap {
    choi: CMatrix<f64>,
}

#[derive(Deserialize)]
struct RawInstrument {
    #[serde(default)]
    group: Option<Group>,
    #[serde(default)]
    outcomes: Option<Vec<Outcome>>,
    maps: Vec<RawMap>,
}

fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Distribution as CSV with a header row.
pub fn distribution_csv(p: &ProbVector<f64>) -> String {
    let mut s = String::from("outcome,probability\n");
    for (o, w) in p.outcomes.iter().zip(&p.weights) {
        s.push_str(&format!("{o},{w}\n"));
    }
    s
}

#[derive(Serialize)]
struct SequentialReport<'a> {
    seed: u64,
    #[serde(flatten)]
    result: &'a SequentialResult<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distributions: Option<crate::sequential::Distributions<f64>>,
}

fn cmd_sequential(ctx: &Context, args: &SequentialRunArgs) -> Result<i32> {
    let mm = ctx.load_measure(&args.measure)?;
    let ws = WeylSystem::new(mm.group().clone());
    let result = SequentialResult::run(&ws, &mm)?;
    let distributions = match &args.state {
        Some(path) => Some(result.distributions(&ctx.load_state(path)?)?),
        None => None,
    };
    if let Some(dir) = &args.csv {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        write_file(&dir.join("sigma.csv"), &distribution_csv(&result.sigma))?;
        write_file(&dir.join("tau.csv"), &distribution_csv(&result.tau))?;
        if let Some(d) = &distributions {
            write_file(&dir.join("joint.csv"), &distribution_csv(&d.joint))?;
            write_file(&dir.join("position.csv"), &distribution_csv(&d.position))?;
            write_file(&dir.join("momentum.csv"), &distribution_csv(&d.momentum))?;
        }
    }
    ctx.emit(&SequentialReport {
        seed: ctx.seed,
        result: &result,
        distributions,
    })?;
    let worst = result.residuals.max();
    if worst > ctx.tol.abs_eps {
        eprintln!("error: pipeline residual {worst:e} exceeds tolerance {:e}", ctx.tol.abs_eps);
        return Ok(2);
    }
    Ok(0)
}

fn cmd_instrument_build(ctx: &Context, args: &BuildArgs) -> Result<i32> {
    let inst = match (&args.measure, &args.probe) {
        (Some(path), _) => {
            let mm = ctx.load_measure(path)?;
            covariant_instrument(&WeylSystem::new(mm.group().clone()), &mm)?
        }
        (None, Some(path)) => {
            let ws = WeylSystem::new(ctx.require_group()?);
            standard_instrument(&ws, &ctx.load_state(path)?)?
        }
        (None, None) => return Err(Error::Usage("pass --measure or --probe".into())),
    };
    ctx.emit(&inst)?;
    Ok(0)
}

#[derive(Serialize)]
struct CovarianceReport {
    group: Group,
    covariance_residual: f64,
    tolerance: f64,
    covariant: bool,
}

fn instrument_system(ctx: &Context, inst: &Instrument<f64>) -> Result<WeylSystem<f64>> {
    let group = inst
        .group()
        .cloned()
        .or_else(|| ctx.group.clone())
        .ok_or_else(|| Error::Usage("instrument has no group; pass --group".into()))?;
    Ok(WeylSystem::new(group))
}

fn cmd_instrument_verify(ctx: &Context, args: &InstrumentInput) -> Result<i32> {
    let inst = ctx.load_instrument(&args.input)?;
    let ws = instrument_system(ctx, &inst)?;
    let residual = verify_covariance(&ws, &inst)?;
    let report = CovarianceReport {
        group: ws.group().clone(),
        covariance_residual: residual,
        tolerance: ctx.tol.abs_eps,
        covariant: residual <= ctx.tol.abs_eps,
    };
    ctx.emit(&report)?;
    Ok(if report.covariant { 0 } else { 2 })
}

fn cmd_instrument_reconstruct(ctx: &Context, args: &InstrumentInput) -> Result<i32> {
    let inst = ctx.load_instrument(&args.input)?;
    let ws = instrument_system(ctx, &inst)?;
    let mm = reconstruct_measure(&ws, &inst)?;
    ctx.emit(&mm)?;
    Ok(0)
}

#[derive(Serialize)]
struct CpsoReport {
    group: Group,
    generating_state: State<f64>,
    /// Probe state of the sequential implementation.
    probe: State<f64>,
    povm: Povm<f64>,
    span_rank: usize,
    informationally_complete: bool,
}

fn cmd_cpso(ctx: &Context, args: &CpsoArgs) -> Result<i32> {
    let s = ctx.load_state(&args.state)?;
    let group = match &ctx.group {
        Some(g) => g.clone(),
        None => Group::cyclic(s.dim())?,
    };
    let ws = WeylSystem::new(group);
    let povm = cpso_from_state(&ws, &s)?;
    let probe = State::new(check_map(&ws, s.matrix())?, ctx.tol)?;
    let report = CpsoReport {
        group: ws.group().clone(),
        span_rank: effect_span_rank(&povm),
        informationally_complete: is_informationally_complete(&povm, ctx.tol),
        generating_state: s,
        probe,
        povm,
    };
    ctx.emit(&report)?;
    Ok(0)
}

fn parse_axis(name: &str, text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Usage(format!("--{name} '{text}': {e}")))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| Error::Usage(format!("--{name} needs three comma-separated components")))
}

#[derive(Serialize)]
struct SpinReport {
    a: [f64; 3],
    b: [f64; 3],
    probe_bloch: [f64; 3],
    s: f64,
    t: f64,
    tradeoff: f64,
    a_povm: Povm<f64>,
    b_povm: Povm<f64>,
    factorization_residual: f64,
    seed: u64,
}

fn cmd_demo_spin(ctx: &Context, args: &SpinArgs) -> Result<i32> {
    let frame = SpinFrame::new(parse_axis("a", &args.a)?, parse_axis("b", &args.b)?)?;
    let omega = match &args.probe {
        Some(path) => ctx.load_state(path)?,
        None => State::basis(2, 0),
    };
    let rho = match &args.rho {
        Some(path) => ctx.load_state(path)?,
        None => random_state(&mut rng(ctx.seed), 2),
    };
    let u = unsharp_spin(&frame, &omega)?;
    let report = SpinReport {
        a: frame.a(),
        b: frame.b(),
        probe_bloch: bloch_vector(&omega)?,
        s: u.s,
        t: u.t,
        tradeoff: tradeoff_check(&frame, &omega)?,
        a_povm: u.a_povm,
        b_povm: u.b_povm,
        factorization_residual: kronecker_factorization_check(&frame, &omega, &rho)?,
        seed: ctx.seed,
    };
    ctx.emit(&report)?;
    Ok(if report.factorization_residual <= 1e-10 { 0 } else { 2 })
}

fn cmd_verify(ctx: &Context, args: &VerifyArgs) -> Result<i32> {
    let suite: Suite = args.suite.parse()?;
    let group = match &ctx.group {
        Some(g) => g.clone(),
        None => Group::cyclic(2)?,
    };
    let cfg = VerifyConfig {
        group,
        seed: ctx.seed,
        samples: args.samples,
    };
    let reports = run_suite(suite, &cfg)?;
    let mut all_passed = true;
    for r in &reports {
        for c in &r.checks {
            eprintln!(
                "{} [{}] {}: residual {:.3e} (tol {:.0e}) {}",
                r.suite,
                r.group,
                c.name,
                c.residual,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        all_passed &= r.passed();
    }
    ctx.emit(&reports)?;
    Ok(if all_passed { 0 } else { 2 })
}

