use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use nangle_core::error::Error;
use nangle_core::exec::with_jobs;
use nangle_core::report::{self, Report};
use nangle_core::{Matrix, NSigmaSequence, RingSpec, SequenceMorphism};

#[derive(Parser, Debug)]
#[command(name = "nangle", version, about = "Checks and searches for exotic n-angulated categories over Z/p² and F_p[ε]/(ε²)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ring short name: z4, z9, z25, z49, f2eps, f3eps, f5eps or f7eps.
    /// For file inputs it replaces the ring named in the file.
    #[arg(long)]
    ring: Option<String>,
    /// Expected number of objects; a file with a different n is rejected.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    rank_bound: usize,
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; the report does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Membership of an n-Σ-sequence, with its decomposition.
    Check { input: PathBuf, #[command(flatten)] common: Common },
    /// Mapping cone of a morphism and whether the morphism is good.
    Cone { input: PathBuf, #[command(flatten)] common: Common },
    /// Whether a morphism between n-angles is good.
    Good { input: PathBuf, #[command(flatten)] common: Common },
    /// Fill-ins of a commuting square `{source, target, phi1, phi2}`.
    Fillin { input: PathBuf, #[command(flatten)] common: Common },
    /// Bounded search for a middling diagram extending a morphism.
    Middling { input: PathBuf, #[command(flatten)] common: Common },
    /// Search for a Verdier-style factorization of a morphism.
    Verdier { input: PathBuf, #[command(flatten)] common: Common },
    /// Octahedron on `{top, link}`.
    Octa { input: PathBuf, #[command(flatten)] common: Common },
    /// The morphism of F(p) angles that is zero except for p at the last object.
    Counterexample { #[command(flatten)] common: Common },
    /// The seeded property suite.
    Props {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check { common, .. }
            | Command::Cone { common, .. }
            | Command::Good { common, .. }
            | Command::Fillin { common, .. }
            | Command::Middling { common, .. }
            | Command::Verdier { common, .. }
            | Command::Octa { common, .. }
            | Command::Counterexample { common }
            | Command::Props { common, .. } => common,
        }
    }
}

/// Failures before or during a run, mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Budget(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn ring_arg(common: &Common) -> Result<Option<RingSpec>, Failure> {
    common.ring.as_deref().map(RingSpec::parse_short).transpose().map_err(Failure::from)
}

/// Replaces every `ring` field in the input with the override.
fn override_ring(v: &mut Value, ring: RingSpec) {
    match v {
        Value::Object(map) => {
            if map.contains_key("ring") {
                map.insert("ring".into(), serde_json::to_value(ring).expect("plain data"));
            }
            map.values_mut().for_each(|x| override_ring(x, ring));
        }
        Value::Array(items) => items.iter_mut().for_each(|x| override_ring(x, ring)),
        _ => {}
    }
}

fn load(path: &Path, common: &Common) -> Result<Value, Failure> {
    let mut v = read_json(path)?;
    if let Some(ring) = ring_arg(common)? {
        override_ring(&mut v, ring);
    }
    Ok(v)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key).ok_or_else(|| Failure::Invalid(format!("input is missing `{key}`")))
}

fn check_n(actual: usize, common: &Common) -> Result<(), Failure> {
    match common.n {
        Some(n) if n != actual => Err(Failure::Invalid(format!("--n {n} does not match the input's n = {actual}"))),
        _ => Ok(()),
    }
}

fn sequence(v: &Value, common: &Common) -> Result<NSigmaSequence, Failure> {
    let a = NSigmaSequence::from_json(v)?;
    check_n(a.n(), common)?;
    Ok(a)
}

fn morphism(v: &Value, common: &Common) -> Result<SequenceMorphism, Failure> {
    let phi = SequenceMorphism::from_json(v)?;
    check_n(phi.n(), common)?;
    Ok(phi)
}

fn run(command: &Command) -> Result<Report, Failure> {
    match command {
        Command::Check { input, common } => Ok(report::check(&sequence(&load(input, common)?, common)?)?),
        Command::Cone { input, common } => Ok(report::cone(&morphism(&load(input, common)?, common)?)?),
        Command::Good { input, common } => Ok(report::good(&morphism(&load(input, common)?, common)?)?),
        Command::Middling { input, common } => {
            Ok(report::middling(&morphism(&load(input, common)?, common)?, common.rank_bound, common.budget)?)
        }
        Command::Verdier { input, common } => Ok(report::verdier(&morphism(&load(input, common)?, common)?, common.budget)?),
        Command::Fillin { input, common } => {
            let v = load(input, common)?;
            let a = sequence(field(&v, "source")?, common)?;
            let b = sequence(field(&v, "target")?, common)?;
            let phi1 = Matrix::from_json(a.ring(), field(&v, "phi1")?)?;
            let phi2 = Matrix::from_json(a.ring(), field(&v, "phi2")?)?;
            Ok(report::fill_in(&a, &b, &phi1, &phi2, common.budget)?)
        }
        Command::Octa { input, common } => {
            let v = load(input, common)?;
            let top = sequence(field(&v, "top")?, common)?;
            let link = Matrix::from_json(top.ring(), field(&v, "link")?)?;
            Ok(report::octahedron(&top, &link, common.budget)?)
        }
        Command::Counterexample { common } => {
            let ring = ring_arg(common)?.unwrap_or(RingSpec::z_mod_p2(2)?);
            Ok(report::counterexample(common.n.unwrap_or(4), ring, common.rank_bound, common.budget)?)
        }
        Command::Props { cases, common } => Ok(report::property_runs(common.seed, *cases)),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common().clone();
    let outcome = with_jobs(common.jobs, || run(&cli.command)).and_then(|r| {
        emit(&r.render(), common.out.as_deref())?;
        Ok(r.verdict.exit_code())
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Budget(msg)) => {
            eprintln!("nangle: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("nangle: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("nangle: {msg}");
            ExitCode::from(2)
        }
    }
}
