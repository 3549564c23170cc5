//! Run configs. A config names a subcommand and gives its parameters under
//! `params`; parameters go through the same parser as the command line, so
//! defaults, ranges and unknown-key rejection are shared.
//!
//! ```toml
//! command = "xy-purity"
//! output = "results/xy"
//!
//! [params]
//! gamma = 1.0
//! n = 400
//! ```

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::cli::{Cli, Command};
use crate::commands;
use crate::error::CliError;

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: String,
    output: Option<PathBuf>,
    #[serde(default)]
    dry_run: bool,
    #[serde(default)]
    params: Map<String, Value>,
}

/// A parsed config: the command, its output directory and dry-run flag.
#[derive(Debug)]
pub struct Loaded {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub dry_run: bool,
}

fn read(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Turn `params` into command-line arguments.
fn to_argv(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    if matches!(cfg.command.as_str(), "run" | "validate-config") {
        return Err(CliError::Config(format!("'{}' cannot be used inside a config", cfg.command)));
    }
    let mut argv = vec!["qsimkit".to_string(), cfg.command.clone()];
    for (key, value) in &cfg.params {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) => {}
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| CliError::Config(format!("params.{key}: arrays must hold numbers or strings")))?;
                argv.push(flag);
                argv.push(parts.join(","));
            }
            other => match scalar(other) {
                Some(s) => {
                    argv.push(flag);
                    argv.push(s);
                }
                None => return Err(CliError::Config(format!("params.{key}: unsupported value"))),
            },
        }
    }
    Ok(argv)
}

fn summary(e: &clap::Error) -> String {
    let text = e.to_string();
    let parts: Vec<&str> = text
        .lines()
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    parts.join(" ").trim_start_matches("error: ").to_string()
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let cfg = read(path)?;
    let argv = to_argv(&cfg)?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Config(summary(&e)))?;
    Ok(Loaded {
        command: cli.command,
        output: cfg.output,
        dry_run: cfg.dry_run,
    })
}

/// Every violation found in the config; empty when it is runnable.
pub fn validate(path: &Path) -> Result<Vec<String>, CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!("cannot read {}", path.display())));
    }
    match load(path) {
        Ok(l) => Ok(commands::check(&l.command)),
        Err(CliError::Config(msg)) => Ok(vec![msg]),
        Err(e) => Err(e),
    }
}
