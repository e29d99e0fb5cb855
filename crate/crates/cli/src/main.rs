//! Command line driver: solve a configuration, run diagnostics, or sweep a
//! set of configurations into per-run output directories.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ductflow",
    about = "Characteristics-based solver for steady supersonic flow in a divergent duct",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the output directory from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration: validate, solve, export artifacts.
    Solve { config: PathBuf },
    /// Run a configuration with diagnostics forced on.
    Diagnose { config: PathBuf },
    /// Run every configuration matching a glob, each into its own
    /// subdirectory of the output directory.
    Sweep { pattern: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config } => run_one(&config, cli.out.as_deref(), cli.quiet, false),
        Command::Diagnose { config } => run_one(&config, cli.out.as_deref(), cli.quiet, true),
        Command::Sweep { pattern } => {
            let paths = match glob::glob(&pattern) {
                Ok(paths) => paths,
                Err(e) => {
                    eprintln!("bad glob pattern '{pattern}': {e}");
                    return ExitCode::from(2);
                }
            };
            let mut worst = 0;
            let mut count = 0;
            for entry in paths {
                let path = match entry {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("glob error: {e}");
                        worst = worst.max(2);
                        continue;
                    }
                };
                count += 1;
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| format!("run{count}"));
                let out = cli
                    .out
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("out"))
                    .join(&stem);
                if !cli.quiet {
                    println!("== {} -> {}", path.display(), out.display());
                }
                worst = worst.max(run_one(&path, Some(&out), cli.quiet, false));
            }
            if count == 0 {
                eprintln!("no configurations match '{pattern}'");
                worst = worst.max(2);
            }
            worst
        }
    };
    ExitCode::from(code)
}

fn run_one(config: &Path, out: Option<&Path>, quiet: bool, force_diagnostics: bool) -> u8 {
    ductflow_core::io::run_opts(config, out, quiet, force_diagnostics).exit_code as u8
}
