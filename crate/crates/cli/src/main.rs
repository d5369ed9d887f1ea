mod args;
mod commands;
mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command};
use commands::Output;

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("ANNULUS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("ANNULUS_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let here = PathBuf::from(".");
    let out_or_here = cli.out.as_deref().unwrap_or(Path::new(&here));
    match &cli.command {
        Command::Check(a) => commands::check::run(a, cli.out.as_deref()),
        Command::Spectra(a) => commands::spectra::run(a, cli.out.as_deref()),
        Command::Solve(a) => commands::solve::run(a, out_or_here),
        Command::Decompose(a) => commands::profile::decompose_cmd(a, out_or_here),
        Command::Mollify(a) => commands::profile::mollify_cmd(a, out_or_here),
        Command::Constants(a) => commands::constants::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(output) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&output.json).expect("JSON values serialise"));
            } else {
                print!("{}", output.text);
            }
            if output.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
