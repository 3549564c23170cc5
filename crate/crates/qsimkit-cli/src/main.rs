//! `qsimkit` batch runner.
//!
//! Exit codes: 0 success, 2 config or argument error, 3 numerical
//! non-convergence, 1 anything else.

mod cli;
mod commands;
mod config;
mod error;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command};
use error::CliError;

fn write_artifacts(cmd: &Command, out: &Path, artifacts: &[commands::Artifact], secs: f64) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", out.display()));
    std::fs::create_dir_all(out).map_err(io)?;
    for a in artifacts {
        std::fs::write(out.join(&a.name), &a.contents).map_err(io)?;
        println!("{}", out.join(&a.name).display());
    }
    let manifest = json!({
        "command": cmd.name(),
        "parameters": cmd.parameters(),
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": qsimkit::VERSION,
        "files": artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        "wall_time_s": secs,
    });
    let path = out.join(format!("{}.manifest.json", cmd.name()));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("plain data serialises") + "\n").map_err(io)?;
    println!("{}", path.display());
    Ok(())
}

fn dispatch(cmd: &Command, out: &Path, dry_run: bool) -> Result<(), CliError> {
    if dry_run {
        let plan = json!({
            "command": cmd.name(),
            "parameters": cmd.parameters(),
            "output_dir": out.display().to_string(),
            "outputs": commands::outputs(cmd),
            "violations": commands::check(cmd),
        });
        println!("{}", serde_json::to_string_pretty(&plan).expect("plain data serialises"));
        return Ok(());
    }
    let start = Instant::now();
    let artifacts = commands::execute(cmd)?;
    write_artifacts(cmd, out, &artifacts, start.elapsed().as_secs_f64())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::ValidateConfig(p) => {
            let report = config::validate(&p.config)?;
            for v in &report {
                println!("{v}");
            }
            if report.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Config(format!("{} violation(s)", report.len())))
            }
        }
        Command::Run(p) => {
            let loaded = config::load(&p.config)?;
            let out = loaded.output.unwrap_or(cli.out);
            dispatch(&loaded.command, &out, cli.dry_run || loaded.dry_run)
        }
        cmd => dispatch(cmd, &cli.out, cli.dry_run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
