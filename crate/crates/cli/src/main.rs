//! Command-line driver: every subcommand is a thin veneer over one
//! library operation.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Numeric
//! parameters are echoed to stderr so runs can be reproduced; the log
//! level comes from `PARAMKL_LOG` (error, warn, info, debug).

mod commands;
mod logging;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "paramkl",
    version,
    about = "Analyze, reduce, and re-parametrize sampled parametric models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral decomposition of a snapshot set into a model directory.
    Decompose {
        /// Snapshot-set directory.
        #[arg(long)]
        input: PathBuf,
        /// Output model directory.
        #[arg(long)]
        out: PathBuf,
        /// Relative eigenvalue cutoff for the numerical rank.
        #[arg(long, default_value_t = 1e-12)]
        cutoff: f64,
    },
    /// Truncate a model to fewer terms, by rank or by tail energy.
    #[command(group(ArgGroup::new("rule").required(true).args(["rank", "tol"])))]
    Truncate {
        #[arg(long)]
        model: PathBuf,
        /// Keep this many modes.
        #[arg(long)]
        rank: Option<usize>,
        /// Relative tail-energy target τ.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a reduced model at a grid index.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Grid index (0-based).
        #[arg(long)]
        index: usize,
        /// Write the vector to this CSV instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nyström eigensolve of a kernel on a grid.
    KernelEig {
        /// Kernel name: brownian, exp, gauss, or snapshot.
        #[arg(long)]
        kernel: String,
        /// Kernel scale parameter (exp, gauss).
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Snapshot-set directory: supplies the grid, and the kernel for
        /// `--kernel snapshot`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Midpoint-rule grid size on [0,1] when no snapshot set is given.
        #[arg(long)]
        points: Option<usize>,
        /// Number of eigenpairs.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factorize a kernel through feature-map samples.
    Feature {
        /// Feature samples stored in the snapshot-set convention.
        #[arg(long)]
        features: PathBuf,
        /// Snapshot set supplying the parameter grid and the KL table.
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a stationary kernel and write its spectral density.
    Stationary {
        /// Kernel name: exp, gauss, or const.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Periodic domain length.
        #[arg(long)]
        length: f64,
        /// Grid points.
        #[arg(long)]
        points: usize,
        /// Output density CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize stationary realizations from a spectral density.
    Synthesize {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Output samples CSV (count × points).
        #[arg(long)]
        out: PathBuf,
    },
    /// Tensor-train compression and evaluation.
    #[command(subcommand)]
    Tt(TtCommand),
    /// Reduce an SPD matrix field in log space.
    SpdField {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Skip centering on the log-Euclidean mean.
        #[arg(long)]
        no_center: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectrum decay report (CSV, optional SVG plot).
    Report {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TtCommand {
    /// Compress a full tensor directory into tensor-train form.
    Compress {
        #[arg(long)]
        input: PathBuf,
        /// Relative Frobenius tolerance.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        max_rank: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one entry of a tensor train.
    Eval {
        #[arg(long)]
        tt: PathBuf,
        /// Comma-separated 0-based index, e.g. 1,2,3.
        #[arg(long)]
        index: String,
    },
    /// Expand a tensor train back into a full tensor directory.
    Reconstruct {
        #[arg(long)]
        tt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> paramkl::Result<()> {
    match cli.command {
        Command::Decompose { input, out, cutoff } => commands::decompose(&input, &out, cutoff),
        Command::Truncate { model, rank, tol, out } => commands::truncate(&model, rank, tol, &out),
        Command::Eval { model, index, out } => commands::eval(&model, index, out.as_deref()),
        Command::KernelEig {
            kernel,
            scale,
            input,
            points,
            count,
            out,
        } => commands::kernel_eig(&kernel, scale, input.as_deref(), points, count, &out),
        Command::Feature {
            features,
            snapshots,
            out,
        } => commands::feature(&features, &snapshots, &out),
        Command::Stationary {
            kernel,
            scale,
            length,
            points,
            out,
        } => commands::stationary(&kernel, scale, length, points, &out),
        Command::Synthesize {
            density,
            count,
            seed,
            out,
        } => commands::synthesize(&density, count, seed, &out),
        Command::Tt(tt) => match tt {
            TtCommand::Compress {
                input,
                tol,
                max_rank,
                out,
            } => commands::tt_compress(&input, tol, max_rank, &out),
            TtCommand::Eval { tt, index } => commands::tt_eval(&tt, &index),
            TtCommand::Reconstruct { tt, out } => commands::tt_reconstruct(&tt, &out),
        },
        Command::SpdField {
            input,
            rank,
            no_center,
            out,
        } => commands::spd_field(&input, rank, !no_center, &out),
        Command::Report { model, out, svg } => commands::report(&model, &out, svg.as_deref()),
    }
}
