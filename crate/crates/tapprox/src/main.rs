use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tapprox::commands::{self, BstaArgs, FlrtaArgs, Output, DEFAULT_SEED};
use tapprox::io::{read_tensor, write_text};
use tapprox::{parse_triple, CliResult};
use tapprox_core::bsta::{BstaOptions, Init};
use tapprox_core::flrta::DEFAULT_TRIALS;

#[derive(Parser)]
#[command(name = "tapprox", version, about = "Low multilinear-rank approximation of 3-tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Hosvd,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Print dimensions, norm and multilinear rank of a tensor file.
    Info {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded tensor of given multilinear rank plus Gaussian noise.
    Gen {
        /// Dimensions `m1,m2,m3`.
        #[arg(value_parser = parse_triple)]
        dims: [usize; 3],
        /// Multilinear rank `r1,r2,r3`.
        #[arg(value_parser = parse_triple)]
        mlrank: [usize; 3],
        /// Standard deviation of the additive noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, env = "TAPPROX_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Best subspace approximation by alternating relaxation.
    Bsta {
        file: PathBuf,
        p: usize,
        q: usize,
        r: usize,
        /// Relative objective gain below which iteration stops.
        #[arg(long, default_value_t = BstaOptions::DEFAULT_REL_TOL)]
        tol: f64,
        #[arg(long, default_value_t = BstaOptions::DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        #[arg(long, value_enum, default_value = "hosvd")]
        init: InitArg,
        #[arg(long, env = "TAPPROX_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = BstaOptions::DEFAULT_CRIT_TOL)]
        crit_tol: f64,
        /// Prefix for the frame, core and report files.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Include wall time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Fast cross approximation from sampled sections.
    Flrta {
        file: PathBuf,
        p: usize,
        q: usize,
        r: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, env = "TAPPROX_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Relative singular value cutoff for the pseudoinverses.
        #[arg(long)]
        pinv_tol: Option<f64>,
        /// Prefix for the factor, core and report files.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Compare both methods over a list of rank triples `p,q,r`.
    Bench {
        file: PathBuf,
        #[arg(required = true, value_parser = parse_triple)]
        ranks: Vec<[usize; 3]>,
        #[arg(long, env = "TAPPROX_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timing: bool,
    },
}

fn run(cmd: Command) -> CliResult<(Output, Option<PathBuf>, Option<PathBuf>)> {
    // (output, file prefix for artifacts, path for stdout text)
    Ok(match cmd {
        Command::Info { file, json } => (commands::info(&read_tensor(&file)?, json)?, None, None),
        Command::Gen {
            dims,
            mlrank,
            noise,
            seed,
            out,
        } => (commands::gen(dims, mlrank, noise, seed)?, None, out),
        Command::Bsta {
            file,
            p,
            q,
            r,
            tol,
            max_sweeps,
            init,
            seed,
            crit_tol,
            out,
            json,
            timing,
        } => {
            let args = BstaArgs {
                ranks: [p, q, r],
                rel_tol: tol,
                max_sweeps,
                init: match init {
                    InitArg::Hosvd => Init::Hosvd,
                    InitArg::Random => Init::Random,
                },
                seed,
                crit_tol,
                timing,
            };
            (commands::bsta(&read_tensor(&file)?, &args, json)?, out, None)
        }
        Command::Flrta {
            file,
            p,
            q,
            r,
            trials,
            seed,
            pinv_tol,
            out,
            json,
            timing,
        } => {
            let args = FlrtaArgs {
                ranks: [p, q, r],
                trials,
                seed,
                pinv_tol,
                timing,
            };
            (commands::flrta(&read_tensor(&file)?, &args, json)?, out, None)
        }
        Command::Bench {
            file,
            ranks,
            seed,
            json,
            timing,
        } => (
            commands::bench(&read_tensor(&file)?, &ranks, seed, timing, json)?,
            None,
            None,
        ),
    })
}

fn emit(out: &Output, prefix: Option<&Path>, stdout_file: Option<&Path>) -> CliResult<()> {
    if let Some(prefix) = prefix {
        out.write_files(prefix)?;
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    match stdout_file {
        Some(path) => write_text(path, &out.stdout),
        None => {
            print!("{}", out.stdout);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|(out, prefix, dest)| emit(&out, prefix.as_deref(), dest.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tapprox: {e}");
            ExitCode::FAILURE
        }
    }
}
