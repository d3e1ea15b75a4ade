use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use triwave::cli::{self, OutputFile};
use triwave::config::ExperimentConfig;
use triwave::Result;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Verb {
    Simulate,
    Convergence,
    SquareDemo,
    OnedDemo,
    EigenDemo,
    Poincare,
}

/// Wave-equation observability experiments on triangles.
#[derive(Debug, Parser)]
#[command(name = "triwave", version)]
struct Args {
    verb: Verb,
    /// Experiment configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random data; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<Vec<PathBuf>> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    let files: Vec<OutputFile> = match args.verb {
        Verb::Simulate => cli::cmd_simulate(&cfg)?,
        Verb::Convergence => cli::cmd_convergence(&cfg)?,
        Verb::SquareDemo => cli::cmd_square_demo(&cfg)?,
        Verb::OnedDemo => cli::cmd_oned_demo(&cfg)?,
        Verb::EigenDemo => cli::cmd_eigen_demo(&cfg)?,
        Verb::Poincare => cli::cmd_poincare(&cfg)?,
    };
    cli::write_outputs(&cfg.output, &files)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
