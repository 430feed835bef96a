use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pe_assim::cli::{resolve_config, run, Command, Log, Overrides, OUTPUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "pe-assim", version, about = "Primitive-equation simulator and discrete data assimilation driver")]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration and the environment).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run seed (overrides the configuration).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Spin-up and free run; writes norms and checkpoints.
    Simulate,
    /// Twin experiment; writes the error report and summary.
    Assimilate,
    /// Completeness defects and operator norms over shell counts.
    Defect,
    /// Squeezing factors over shell counts and times.
    Squeeze,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Sub::Simulate => Command::Simulate,
        Sub::Assimilate => Command::Assimilate,
        Sub::Defect => Command::Defect,
        Sub::Squeeze => Command::Squeeze,
    };
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        quiet: args.quiet,
    };
    let env_out = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    let result = resolve_config(args.config.as_deref(), &overrides, env_out)
        .and_then(|config| run(command, &config, &Log::new(overrides.quiet)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
