use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ffqd::scenario::Scenario;
use ffqd::verify::{all_passed, render, verify};

#[derive(Parser)]
#[command(name = "ffqd", about = "Fast-forward quantum driving: costs, fidelities and presets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the requested outputs and write CSV files.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// `key=value` overrides applied after the file.
        overrides: Vec<String>,
    },
    /// Run the numerical checks and print a pass/fail table.
    Verify {
        config: PathBuf,
        overrides: Vec<String>,
    },
    /// Run one of the figure presets.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf, overrides: &[String]) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::parse(&text)?.with_overrides(overrides)
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FFQD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("FFQD_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<()> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Run { config, out, overrides } => {
            let sc = load(&config, &overrides)?;
            for f in ffqd::run(&sc, &out)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Verify { config, overrides } => {
            let checks = verify(&load(&config, &overrides)?)?;
            print!("{}", render(&checks));
            Ok(all_passed(&checks))
        }
        Command::Preset { name, out } => {
            let sc = ffqd::preset(&name)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("{name}.conf"));
            std::fs::write(&path, sc.to_string())?;
            println!("{}", path.display());
            for f in ffqd::run(&sc, &out)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
