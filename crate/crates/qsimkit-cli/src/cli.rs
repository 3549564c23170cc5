//! Command-line surface. Every subcommand's arguments also serve as its
//! config-file schema: config keys are the long flag names in snake case.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qsimkit", version, about = "Batch runner for qsimkit experiments")]
pub struct Cli {
    /// Print the resolved plan and exit without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Spectrum of the Fano-Anderson model from the ancilla protocol.
    FanoSpectrum(FanoSpectrumArgs),
    /// Impurity Green function G(t) of the two-level Fano-Anderson model.
    FanoGreen(FanoGreenArgs),
    /// u(N) purity of the XY chain ground state over a sweep of g.
    XyPurity(XyPurityArgs),
    /// LMG ground-state purity over a sweep of V at fixed W.
    LmgPurity(LmgPurityArgs),
    /// Spectrum of the 2D Hubbard model from a mean-field initial state.
    HubbardSpectrum(HubbardSpectrumArgs),
    /// Jacobi-type diagonalization of a mean-field Hamiltonian.
    MeanfieldDiag(MeanfieldArgs),
    /// Correlation function <W^p ... W^1> in a generalized coherent state.
    GcsCorrelation(GcsArgs),
    /// Entanglement measures of a pure state read from CSV.
    Entanglement(EntanglementArgs),
    /// Check a config file and list every violation found.
    ValidateConfig(ConfigPath),
    /// Run the subcommand described by a config file.
    Run(ConfigPath),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FanoSpectrum(_) => "fano-spectrum",
            Command::FanoGreen(_) => "fano-green",
            Command::XyPurity(_) => "xy-purity",
            Command::LmgPurity(_) => "lmg-purity",
            Command::HubbardSpectrum(_) => "hubbard-spectrum",
            Command::MeanfieldDiag(_) => "meanfield-diag",
            Command::GcsCorrelation(_) => "gcs-correlation",
            Command::Entanglement(_) => "entanglement",
            Command::ValidateConfig(_) => "validate-config",
            Command::Run(_) => "run",
        }
    }

    /// Resolved parameters as JSON.
    pub fn parameters(&self) -> serde_json::Value {
        let v = match self {
            Command::FanoSpectrum(a) => serde_json::to_value(a),
            Command::FanoGreen(a) => serde_json::to_value(a),
            Command::XyPurity(a) => serde_json::to_value(a),
            Command::LmgPurity(a) => serde_json::to_value(a),
            Command::HubbardSpectrum(a) => serde_json::to_value(a),
            Command::MeanfieldDiag(a) => serde_json::to_value(a),
            Command::GcsCorrelation(a) => serde_json::to_value(a),
            Command::Entanglement(a) => serde_json::to_value(a),
            Command::ValidateConfig(a) | Command::Run(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialise")
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn finite(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be positive".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must be non-negative".into())
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err("must lie in (0, 1]".into())
    }
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct Sampling {
    /// Estimate each point from this many shots instead of exactly.
    #[arg(long, requires = "seed", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: Option<u64>,
    /// Seed for shot sampling; required with --shots.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct FanoSpectrumArgs {
    /// Ring sites (the register has n + 1 qubits).
    #[arg(long, default_value_t = 1, visible_alias = "N", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(1..=25))]
    pub n: u64,
    /// Band energy of the coupled mode k_0.
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub ek0: f64,
    /// Impurity level.
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub eps: f64,
    /// Impurity-band coupling.
    #[arg(long, visible_alias = "V", allow_hyphen_values = true, value_parser = finite)]
    pub v: f64,
    /// Number of time samples.
    #[arg(long, visible_alias = "M", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    pub dt: f64,
    /// Peak threshold relative to the largest DFT amplitude.
    #[arg(long, default_value_t = 0.003, allow_hyphen_values = true, value_parser = fraction)]
    pub threshold: f64,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct FanoGreenArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub ek0: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub eps: f64,
    #[arg(long, visible_alias = "V", allow_hyphen_values = true, value_parser = finite)]
    pub v: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true, value_parser = positive)]
    pub t_max: f64,
    /// Grid points on [0, t_max].
    #[arg(long, default_value_t = 201, allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
    /// Use a first-order Trotter circuit with this step instead of exact evolution.
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    pub trotter_dt: Option<f64>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct XyPurityArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = fraction)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = non_negative)]
    pub g_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = non_negative)]
    pub g_max: f64,
    #[arg(long, default_value_t = 101, allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
    /// Chain length (even).
    #[arg(long, default_value_t = 400, visible_alias = "N", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct LmgPurityArgs {
    /// Particle number.
    #[arg(long, default_value_t = 2000, visible_alias = "N", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(1..=4000))]
    pub n: u64,
    #[arg(long, visible_alias = "W", allow_hyphen_values = true, value_parser = finite)]
    pub w: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true, value_parser = finite)]
    pub v_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = finite)]
    pub v_max: f64,
    #[arg(long, default_value_t = 101, allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct HubbardSpectrumArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub nx: u64,
    #[arg(long, allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub ny: u64,
    /// Hopping in both directions.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = finite)]
    pub t: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true, value_parser = finite)]
    pub u: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub n_up: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub n_down: u64,
    #[arg(long, visible_alias = "M", allow_hyphen_values = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.008, allow_hyphen_values = true, value_parser = fraction)]
    pub threshold: f64,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct MeanfieldArgs {
    /// Built-in algebra name (e.g. `su:4`, `u:8`) or path to an algebra JSON file.
    #[arg(long)]
    pub algebra: String,
    /// Coefficients: a JSON file holding an array, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,
    /// Target d_C.
    #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true, value_parser = positive)]
    pub epsilon: f64,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct GcsArgs {
    /// Built-in algebra name or path to an algebra JSON file.
    #[arg(long)]
    pub algebra: String,
    /// Group parameters: a JSON file holding an array, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: String,
    /// JSON file with the operator list W^1..W^p; each operator is an array of
    /// real coefficients or of `[re, im]` pairs.
    #[arg(long)]
    pub ops: PathBuf,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct EntanglementArgs {
    /// CSV of amplitudes, one `re,im` row per basis state.
    #[arg(long)]
    pub state: PathBuf,
    /// Subsystem dimensions, comma separated (default: all qubits). The
    /// bipartite cut separates the first subsystem from the rest.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct ConfigPath {
    /// TOML or JSON config file.
    #[arg(long)]
    pub config: PathBuf,
}
