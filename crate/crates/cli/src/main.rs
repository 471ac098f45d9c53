//! `msmi`: runs micro-state convergence studies from JSON configs.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use msmi_core::harness::{emit_report, run_study, write_csv, StudyConfig, StudyKind};
use msmi_core::Error;

const EXIT_BREACH: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "msmi", version, about = "Permutation micro-state studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typical-set counts against the Shannon entropy.
    TypesCount(Common),
    /// Certified upper and lower brackets of the discrete micro-state count.
    MsymBounds(Common),
    /// Monte Carlo rate of the discrete micro-state set.
    MsymMc(Common),
    /// Exhaustive count of the discrete micro-state set, small N only.
    MsymBrute(Common),
    /// Monte Carlo rate of the moment band on approximating sequences.
    ContMc(Common),
    /// Lebesgue-volume rate of the moment band.
    BgvolMc(Common),
    /// Runs the study kind named in the config.
    Study(Common),
    /// Built-in oracle and property checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// JSON study config.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional JSON config; only `id`, `seed` and `out` are read.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path, overriding the config; defaults to `<id>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; `MSMI_THREADS` takes precedence.
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let n = match std::env::var("MSMI_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Failure::config(format!(
                "MSMI_THREADS must be a positive integer, got {v:?}"
            ))
        })?),
        Err(std::env::VarError::NotPresent) => flag,
        Err(e) => return Err(Failure::config(format!("MSMI_THREADS: {e}"))),
    };
    match n {
        Some(0) => Err(Failure::config("thread count must be at least 1")),
        n => Ok(n),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (kind, config_path, args) = match cli.command {
        Command::TypesCount(c) => (Some(StudyKind::TypicalCount), Some(c.config), c.run),
        Command::MsymBounds(c) => (Some(StudyKind::DiscreteBounds), Some(c.config), c.run),
        Command::MsymMc(c) => (Some(StudyKind::DiscreteMc), Some(c.config), c.run),
        Command::MsymBrute(c) => (Some(StudyKind::DiscreteBrute), Some(c.config), c.run),
        Command::ContMc(c) => (Some(StudyKind::ContinuousMc), Some(c.config), c.run),
        Command::BgvolMc(c) => (Some(StudyKind::BgVolume), Some(c.config), c.run),
        Command::Study(c) => (None, Some(c.config), c.run),
        Command::Verify(v) => (Some(StudyKind::VerifySuite), v.config, v.run),
    };

    let mut config = match &config_path {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::from_json(r#"{"id": "verify"}"#)?,
    };
    let kind = match (kind, config.study) {
        (None, None) => {
            return Err(Failure::config(
                "`study` needs a `study` kind in the config",
            ))
        }
        (None, Some(k)) => k,
        (Some(k), Some(declared)) if k != declared && k != StudyKind::VerifySuite => {
            return Err(Failure::config(format!(
                "config declares study `{}` but the subcommand runs `{}`",
                declared.name(),
                k.name()
            )))
        }
        (Some(k), _) => k,
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.id)));

    let threads = thread_count(args.threads)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::config(format!("cannot start worker pool: {e}")))?;

    let outcome = pool.install(|| run_study(&config, kind))?;
    let file = File::create(&out)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", out.display())))?;
    write_csv(&outcome.rows, BufWriter::new(file))?;

    let report = emit_report(&outcome, &config);
    print!("{}", report.text);
    println!("wrote {} rows to {}", outcome.rows.len(), out.display());

    if !report.passed() {
        return Err(Failure {
            code: EXIT_BREACH,
            message: format!("{} acceptance breach(es)", report.breaches.len()),
        });
    }
    if outcome.budget_refusals > 0 {
        return Err(Failure {
            code: EXIT_BUDGET,
            message: format!(
                "{} grid point(s) refused: enumeration budget exceeded",
                outcome.budget_refusals
            ),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("msmi: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
