use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod output;
mod run;

use config::{Analysis, Format, RunConfig};
use run::RunError;

/// Damped-polariton dispersion, sum rules, transients and emission rates.
#[derive(Parser)]
#[command(name = "polariton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complex dispersion branches with phase and group velocities.
    Dispersion(Opts),
    /// Velocity sum rules evaluated over the k grid.
    Sumrules(Opts),
    /// Transient coefficient matrices M(t) over the k and t grids.
    Coeffs(Opts),
    /// Time-dependent spontaneous emission rate.
    Emission(Opts),
    /// Run every consistency check and fail if any exceeds the tolerance.
    Validate(Opts),
}

#[derive(Args)]
struct Opts {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Tolerance used by `validate`.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (analysis, opts) = match cli.command {
        Command::Dispersion(o) => (Analysis::Dispersion, o),
        Command::Sumrules(o) => (Analysis::Sumrules, o),
        Command::Coeffs(o) => (Analysis::Coeffs, o),
        Command::Emission(o) => (Analysis::Emission, o),
        Command::Validate(o) => (Analysis::Validate, o),
    };

    let config = match RunConfig::from_path(&opts.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(t) = opts.tolerance {
        if !(t > 0.0) {
            eprintln!("error: --tolerance must be > 0");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match pool.install(|| run::run(analysis, &config, opts.tolerance)) {
        Ok(o) => o,
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(RunError::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }

    let format = opts.format.or(config.output.format).unwrap_or_default();
    let written = match opts.out.as_ref().or(config.output.path.as_ref()) {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.table.write(format, &mut w)?;
            w.flush()
        }),
        None => outcome.table.write(format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    if outcome.failed {
        eprintln!("validation failed: some checks exceed the tolerance");
        return ExitCode::from(EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}
