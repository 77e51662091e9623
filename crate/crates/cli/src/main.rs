// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rydberg_oct_cli::{run, Command, Invocation};

#[derive(Parser)]
#[command(name = "rydberg-oct", version, about = "Optimal control of Rydberg wave-packet registers")]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Run manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory; overrides the manifest's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Build the essential-state basis and write the Hamiltonian file.
    Basis(Common),
    /// Propagate the register under the manifest's pulse.
    Propagate(Common),
    /// Optimize a field for the marked bit.
    Optimize(Common),
    /// Optimize one field for several marked bits at once.
    OptimizeUniversal(Common),
    /// Spectrum and Husimi map of a field file.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Field CSV; overrides analyze.field.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Read out every single-flip register after a field file.
    DecodeTest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, common, field) = match args.command {
        Sub::Basis(c) => (Command::Basis, c, None),
        Sub::Propagate(c) => (Command::Propagate, c, None),
        Sub::Optimize(c) => (Command::Optimize, c, None),
        Sub::OptimizeUniversal(c) => (Command::OptimizeUniversal, c, None),
        Sub::Analyze { common, field } => (Command::Analyze, common, field),
        Sub::DecodeTest { common, field } => (Command::DecodeTest, common, field),
    };
    let level = if common.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let inv = Invocation { command, manifest: common.manifest, out: common.out, field };
    match run(&inv) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary["metrics"]).unwrap_or_default();
            // A closed pipe on stdout is not a failure of the run.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json(command.name()));
            ExitCode::FAILURE
        }
    }
}
