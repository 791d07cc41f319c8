//! The `sunny` command line: check, homotopy, verify, gen.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sunny_core::bundle::{parse_bundle, verify_bundle, Bundle};
use sunny_core::fixtures::{generate, ProblemFile};
use sunny_core::homotopy::{dims_of, pipeline, HomotopyMode, RunConfig};
use sunny_core::maps::check_general_position;
use sunny_core::rational::parse_rational;
use sunny_core::{Error, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sunny",
    version,
    about = "Link concordance to link homotopy, with certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Link,
    Doodle,
    Eps,
}

#[derive(clap::Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Components that may not meet at once (doodle mode).
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, value_parser = rational_arg)]
    pub eps: Option<Rational>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = rational_arg)]
    pub magnitude: Option<Rational>,
    /// Shift constant of the lagging subdivision.
    #[arg(long, value_parser = rational_arg)]
    pub shift: Option<Rational>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// JSON run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// General position report for a problem file.
    Check {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole pipeline and write a bundle.
    Homotopy {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every certificate in a bundle.
    Verify { bundle: PathBuf },
    /// Write a built-in example problem.
    Gen {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s)
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::UnknownExample(_)
        | Error::DegenerateSimplex(_)
        | Error::OverlappingInteriors(..)
        | Error::VertexOutOfRange { .. }
        | Error::NotSimplicial(_)
        | Error::PartitionMixesComponents(_)
        | Error::NotSubcomplex(_)
        | Error::NotSubcomplexPair(_) => EXIT_INPUT,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_FAILED,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(fs::read_to_string(path)?)
}

fn read_problem(path: &Path) -> Result<ProblemFile, Error> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str, sink: &mut dyn Write) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => writeln!(sink, "{text}")?,
    }
    Ok(())
}

/// Resolves flags, config file and problem defaults into one configuration.
pub fn resolve_config(run: &RunArgs, problem: &ProblemFile) -> Result<RunConfig, Error> {
    let mut cfg = match &run.config {
        Some(p) => {
            serde_json::from_str(&read(p)?).map_err(|e| Error::Parse(format!("config: {e}")))?
        }
        None => RunConfig::new(problem.mode.clone().unwrap_or(HomotopyMode::Link), 0),
    };
    if let Some(m) = run.mode {
        cfg.mode = match m {
            ModeArg::Link => HomotopyMode::Link,
            ModeArg::Doodle => HomotopyMode::Doodle {
                l: run.l.unwrap_or(3),
            },
            ModeArg::Eps => HomotopyMode::Eps {
                eps: run
                    .eps
                    .clone()
                    .ok_or_else(|| Error::InvalidInput("--mode eps needs --eps".into()))?,
            },
        };
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(m) = &run.magnitude {
        cfg.perturb_magnitude = m.clone();
    }
    if let Some(s) = &run.shift {
        cfg.shift_constant = s.clone();
    }
    if let Some(n) = run.samples {
        cfg.verify_samples = n;
    }
    if let Some(b) = run.budget {
        cfg.retry_budget = b;
    }
    let zero = Rational::from_integer(0.into());
    if cfg.shift_constant <= zero || cfg.perturb_magnitude < zero {
        return Err(Error::InvalidInput(
            "shift must be positive and magnitude nonnegative".into(),
        ));
    }
    if let HomotopyMode::Eps { eps } = &cfg.mode {
        if eps <= &zero {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
    }
    Ok(cfg)
}

fn check(input: &Path, out: &Option<PathBuf>, sink: &mut dyn Write) -> Result<i32, Error> {
    let inp = read_problem(input)?.to_input()?;
    let rep = check_general_position(&inp.f, dims_of(&inp));
    let json = serde_json::json!({
        "codim_ok": rep.codim_ok,
        "nondegenerate_ok": rep.nondegenerate_ok,
        "singular_facets": rep.singular_set.facets(),
        "offending": rep.offending_simplexes,
    });
    writeln!(sink, "{}", rep.summary())?;
    if let Some(p) = out {
        fs::write(p, serde_json::to_string_pretty(&json).expect("json"))?;
    }
    Ok(if rep.ok() { EXIT_OK } else { EXIT_FAILED })
}

fn homotopy(
    input: &Path,
    run: &RunArgs,
    out: &Option<PathBuf>,
    sink: &mut dyn Write,
) -> Result<i32, Error> {
    let problem = read_problem(input)?;
    let cfg = resolve_config(run, &problem)?;
    let inp = problem.to_input()?;
    let res = pipeline(&inp, &cfg)?;
    let bundle = Bundle::new(&inp, &cfg, &res);
    let text = serde_json::to_string_pretty(&bundle).expect("bundle serializes");
    if let Some(p) = out {
        fs::write(p, &text)?;
    }
    writeln!(
        sink,
        "mode={} blisters={} sunny_steps={} stable_steps={} verification={}",
        cfg.mode.shadow_mode().name(),
        res.sunny.blisters.len(),
        res.sunny.seq.steps.len(),
        res.stable.seq.steps.len(),
        if res.report.passed() {
            "pass".to_string()
        } else {
            res.report.failures.join("; ")
        }
    )?;
    Ok(if res.report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn verify(path: &Path, sink: &mut dyn Write) -> Result<i32, Error> {
    let b = parse_bundle(&read(path)?)?;
    match verify_bundle(&b) {
        Ok(()) => {
            writeln!(sink, "ok")?;
            Ok(EXIT_OK)
        }
        Err(r) => {
            writeln!(sink, "rejected at {r}")?;
            Ok(EXIT_FAILED)
        }
    }
}

fn gen(name: &str, seed: u64, out: &Option<PathBuf>, sink: &mut dyn Write) -> Result<i32, Error> {
    let (inp, mode) = generate(name, seed)?;
    let pf = ProblemFile::from_input(&inp, Some(mode));
    emit(
        out,
        &serde_json::to_string_pretty(&pf).expect("problem serializes"),
        sink,
    )?;
    Ok(EXIT_OK)
}

/// Runs one invocation; messages go to `sink`, diagnostics to `err`.
pub fn run<I, T>(args: I, sink: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let res = match &cli.command {
        Command::Check { input, out } => check(input, out, sink),
        Command::Homotopy { input, run, out } => homotopy(input, run, out, sink),
        Command::Verify { bundle } => verify(bundle, sink),
        Command::Gen { name, seed, out } => gen(name, *seed, out, sink),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
