use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pivchol::experiments::commands::{self, exit_code_for, Outcome, EXIT_INPUT, EXIT_SUCCESS};
use pivchol::experiments::ExperimentConfig;
use pivchol::{Error, PivotStrategy};

#[derive(Parser)]
#[command(name = "pivchol", version, about = "Pivoted Cholesky experiments with a-priori error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// complete | delta:<δ> | uniform:<m> | random:<seed> | maxvol:<sweeps>
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a factorisation and fit its convergence rate.
    Convergence(RunArgs),
    /// Run a factorisation and check every applicable bound; exit 2 on any violation.
    Bounds(RunArgs),
    /// Factorise a matrix file and check the discrete bound.
    Matrix {
        /// Text file: order m, then m rows of m numbers.
        path: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a GP at complete-pivoting sites and tabulate mean and sd.
    GpDemo(RunArgs),
    /// List the built-in kernels and their constants.
    Catalog {
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

fn load(args: &RunArgs) -> pivchol::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &args.strategy {
        cfg.strategy = s.parse::<PivotStrategy>()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        if let PivotStrategy::Random { seed: s } = &mut cfg.strategy {
            *s = seed;
        }
    }
    Ok(cfg)
}

fn open(path: Option<&Path>) -> pivchol::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Summary stream: stdout when the CSV goes to a file, stderr otherwise.
fn log_stream(out: Option<&Path>) -> Box<dyn Write> {
    match out {
        Some(_) => Box::new(io::stdout()),
        None => Box::new(io::stderr()),
    }
}

fn dispatch(cli: Cli) -> pivchol::Result<Outcome> {
    match cli.command {
        Command::Convergence(args) => {
            let cfg = load(&args)?;
            let mut csv = open(args.out.as_deref())?;
            let exp = commands::cmd_convergence(&cfg, &mut csv, &mut log_stream(args.out.as_deref()))?;
            csv.flush()?;
            Ok(exp.outcome)
        }
        Command::Bounds(args) => {
            let cfg = load(&args)?;
            let mut csv = open(args.out.as_deref())?;
            let exp = commands::cmd_bounds(&cfg, &mut csv, &mut log_stream(args.out.as_deref()))?;
            csv.flush()?;
            Ok(exp.outcome)
        }
        Command::Matrix { path, n_max, out } => {
            let mut csv = open(out.as_deref())?;
            let outcome = commands::cmd_matrix(&path, n_max, &mut csv, &mut log_stream(out.as_deref()))?;
            csv.flush()?;
            Ok(outcome)
        }
        Command::GpDemo(args) => {
            let cfg = load(&args)?;
            let mut csv = open(args.out.as_deref())?;
            commands::cmd_gp_demo(&cfg, &mut csv, &mut log_stream(args.out.as_deref()))?;
            csv.flush()?;
            Ok(Outcome::Success)
        }
        Command::Catalog { dim } => {
            commands::cmd_catalog(dim, &mut io::stdout())?;
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { EXIT_SUCCESS as u8 });
        }
    };
    let code = match dispatch(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
