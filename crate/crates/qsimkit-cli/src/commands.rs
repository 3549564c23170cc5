//! Subcommand implementations. Each produces named artifacts; writing them
//! out is left to the caller.

use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use qsimkit::entanglement::{concurrence, local_purity, schmidt_entropy, un_purity, BipartiteState, DensityMatrix};
use qsimkit::gcs::{gcs_expectation_higher, GcsState};
use qsimkit::liecore::AlgebraSpec;
use qsimkit::meanfield::{diagonalize, AlgebraElement};
use qsimkit::models::{xy_purity_limit, xy_shifted_purity_limit, FanoAnderson, Hubbard2D, Lmg, XYChain};
use qsimkit::opalgebra::{Pauli, PauliSum};
use qsimkit::qprotocol::{
    spectrum_series, time_correlation, time_correlation_circuit, trotter_evolve, Circuit, Readout, SpectrumCircuit, SystemOp, TimeGrid,
};
use qsimkit::spectral::{dft, find_peaks, fmt_sci, peaks_json, Peak, DEFAULT_DENOM_TOL};
use qsimkit::statevector::{StateVector, MAX_QUBITS};

use crate::cli::*;
use crate::error::CliError;

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.to_string(),
        contents,
    }
}

/// Output files a command writes, in order.
pub fn outputs(cmd: &Command) -> Vec<&'static str> {
    match cmd {
        Command::FanoSpectrum(_) => vec!["fano_series.csv", "fano_spectrum.csv", "fano_peaks.csv", "fano_peaks.json"],
        Command::FanoGreen(_) => vec!["fano_green.csv"],
        Command::XyPurity(_) => vec!["xy_purity.csv"],
        Command::LmgPurity(_) => vec!["lmg_purity.csv"],
        Command::HubbardSpectrum(_) => vec!["hubbard_series.csv", "hubbard_spectrum.csv", "hubbard_peaks.csv", "hubbard_peaks.json"],
        Command::MeanfieldDiag(_) => vec!["meanfield.json"],
        Command::GcsCorrelation(_) => vec!["gcs_correlation.json"],
        Command::Entanglement(_) => vec!["entanglement.json"],
        Command::ValidateConfig(_) | Command::Run(_) => vec![],
    }
}

/// Violations not caught by argument parsing.
pub fn check(cmd: &Command) -> Vec<String> {
    let mut v = Vec::new();
    match cmd {
        Command::XyPurity(a) => {
            if a.n % 2 != 0 {
                v.push(format!("n: chain length must be even, got {}", a.n));
            }
            if a.g_max < a.g_min {
                v.push("g_max: must not be below g_min".into());
            }
        }
        Command::LmgPurity(a) => {
            if a.v_max < a.v_min {
                v.push("v_max: must not be below v_min".into());
            }
        }
        Command::HubbardSpectrum(a) => {
            let sites = a.nx * a.ny;
            if 2 * sites as usize + 1 > MAX_QUBITS {
                v.push(format!("nx, ny: {} spin orbitals plus an ancilla exceed {MAX_QUBITS} qubits", 2 * sites));
            }
            for (name, k) in [("n_up", a.n_up), ("n_down", a.n_down)] {
                if k > sites {
                    v.push(format!("{name}: {k} particles do not fit on {sites} sites"));
                }
            }
        }
        Command::Entanglement(a) => {
            if let Some(d) = &a.dims {
                if d.is_empty() || d.contains(&0) {
                    v.push("dims: every subsystem dimension must be positive".into());
                }
            }
        }
        _ => {}
    }
    v
}

fn readout(s: &Sampling) -> Readout {
    match (s.shots, s.seed) {
        (Some(shots), Some(seed)) => Readout::Sampled { shots: shots as usize, seed },
        _ => Readout::Exact,
    }
}

fn grid(lo: f64, hi: f64, steps: u64) -> Vec<f64> {
    let n = steps as usize;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| fmt_sci(x))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

fn peak_table(peaks: &[Peak]) -> Result<String, CliError> {
    let rows: Vec<Vec<f64>> = peaks.iter().map(|p| vec![p.lambda, p.weight, p.err_freq, p.err_amp]).collect();
    csv_table(&["lambda", "weight", "err_freq", "err_amp"], &rows)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serialises");
    s.push('\n');
    s
}

fn spectrum_artifacts(prefix: &str, q: &PauliSum, prep: &Circuit, m: u64, dt: f64, threshold: f64, s: &Sampling) -> Result<Vec<Artifact>, CliError> {
    let grid = TimeGrid::new(dt, m as usize)?;
    let series = spectrum_series(q, prep, &grid, SpectrumCircuit::HalfAngle, readout(s))?;
    let spec = dft(&series)?;
    let peaks = find_peaks(&spec, threshold, DEFAULT_DENOM_TOL)?;
    let mut json = peaks_json(&peaks);
    json.push('\n');
    Ok(vec![
        artifact(&format!("{prefix}_series.csv"), series.to_csv()),
        artifact(&format!("{prefix}_spectrum.csv"), spec.to_csv()),
        artifact(&format!("{prefix}_peaks.csv"), peak_table(&peaks)?),
        artifact(&format!("{prefix}_peaks.json"), json),
    ])
}

fn fano_spectrum(a: &FanoSpectrumArgs) -> Result<Vec<Artifact>, CliError> {
    // eps_{k_0} = -2 tau
    let model = FanoAnderson::new(a.n as usize, -a.ek0 / 2.0, a.v, a.eps)?;
    let prep = Circuit::new(model.n_qubits(), None)?.with_initial(model.reference_state())?;
    spectrum_artifacts("fano", &model.hamiltonian()?, &prep, a.m, a.dt, a.threshold, &a.sampling)
}

fn hubbard_spectrum(a: &HubbardSpectrumArgs) -> Result<Vec<Artifact>, CliError> {
    let model = Hubbard2D::new(a.nx as usize, a.ny as usize, a.t, a.t, a.u)?;
    let prep = model.mean_field_circuit(a.n_up as usize, a.n_down as usize)?;
    spectrum_artifacts("hubbard", &model.hamiltonian()?, &prep, a.m, a.dt, a.threshold, &a.sampling)
}

fn fano_green(a: &FanoGreenArgs) -> Result<Vec<Artifact>, CliError> {
    let model = FanoAnderson::two_level(a.ek0, a.eps, a.v)?;
    let prep = Circuit::new(model.n_qubits(), None)?.with_initial(model.reference_state())?;
    let h = model.reduced_hamiltonian()?;
    let spec = model.hamiltonian_spec()?;
    let x = SystemOp::Operator(PauliSum::single(C64::new(1.0, 0.0), &[(0, Pauli::X)])?);
    let rows = grid(0.0, a.t_max, a.steps)
        .into_par_iter()
        .map(|t| {
            let g = match a.trotter_dt {
                None => time_correlation(&prep, &x, &x, &h, t, Readout::Exact)?,
                Some(dt) => time_correlation_circuit(&prep, &x, &x, &trotter_evolve(&spec, model.n_qubits(), t, dt)?, Readout::Exact)?,
            };
            let want = model.green_closed_form(t);
            Ok(vec![t, g.re, g.im, want.re, want.im])
        })
        .collect::<Result<Vec<_>, qsimkit::QsimError>>()?;
    Ok(vec![artifact("fano_green.csv", csv_table(&["t", "re", "im", "closed_re", "closed_im"], &rows)?)])
}

fn xy_purity(a: &XyPurityArgs) -> Result<Vec<Artifact>, CliError> {
    let chain = XYChain::new(a.n as usize, a.gamma)?;
    let rows = grid(a.g_min, a.g_max, a.steps)
        .into_par_iter()
        .map(|g| {
            let ex = chain.exact(g)?;
            Ok(vec![g, ex.purity, ex.shifted, xy_purity_limit(a.gamma, g), xy_shifted_purity_limit(a.gamma, g)])
        })
        .collect::<Result<Vec<_>, qsimkit::QsimError>>()?;
    let header = ["g", "purity", "shifted", "purity_limit", "shifted_limit"];
    Ok(vec![artifact("xy_purity.csv", csv_table(&header, &rows)?)])
}

fn lmg_purity(a: &LmgPurityArgs) -> Result<Vec<Artifact>, CliError> {
    let rows = grid(a.v_min, a.v_max, a.steps)
        .into_par_iter()
        .map(|v| {
            let model = Lmg::new(a.n as usize, v, a.w)?;
            let sol = model.exact()?;
            Ok(vec![v, model.delta(), sol.energy_per_particle, sol.purity, sol.classical.purity])
        })
        .collect::<Result<Vec<_>, qsimkit::QsimError>>()?;
    let header = ["v", "delta", "energy_per_particle", "purity", "classical_purity"];
    Ok(vec![artifact("lmg_purity.csv", csv_table(&header, &rows)?)])
}

fn load_algebra(name: &str) -> Result<AlgebraSpec, CliError> {
    let path = Path::new(name);
    let spec = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {name}: {e}")))?;
        AlgebraSpec::from_json(&text)?
    } else {
        AlgebraSpec::builtin(name)?
    };
    Ok(spec.killing_orthonormalize()?)
}

fn load_vector(arg: &str) -> Result<Vec<f64>, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {arg}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{arg}: {e}")));
    }
    arg.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("'{s}' is not a number (and {arg} is not a file)"))))
        .collect()
}

fn meanfield_diag(a: &MeanfieldArgs) -> Result<Vec<Artifact>, CliError> {
    let spec = load_algebra(&a.algebra)?;
    let el = AlgebraElement::new(&spec, load_vector(&a.coeffs)?)?;
    let res = diagonalize(&spec, &el, a.epsilon)?;
    let out = json!({
        "epsilon_k": res.epsilon,
        "iterations": res.iterations,
        "residual": res.residual,
    });
    Ok(vec![artifact("meanfield.json", pretty(&out))])
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

fn gcs_correlation(a: &GcsArgs) -> Result<Vec<Artifact>, CliError> {
    let spec = load_algebra(&a.algebra)?;
    let zeta = load_vector(&a.zeta)?;
    let text = std::fs::read_to_string(&a.ops).map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.ops.display())))?;
    let raw: Vec<Vec<Coefficient>> = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", a.ops.display())))?;
    if raw.is_empty() {
        return Err(CliError::Config("ops: at least one operator is needed".into()));
    }
    let ops: Vec<Vec<C64>> = raw
        .iter()
        .map(|op| {
            op.iter()
                .map(|c| match *c {
                    Coefficient::Real(x) => C64::new(x, 0.0),
                    Coefficient::Complex([re, im]) => C64::new(re, im),
                })
                .collect()
        })
        .collect();
    let state = GcsState::new(&spec, &zeta)?;
    let value = gcs_expectation_higher(&state, &ops)?;
    let out = json!({ "value_re": value.re, "value_im": value.im, "order": ops.len() });
    Ok(vec![artifact("gcs_correlation.json", pretty(&out))])
}

fn read_amplitudes(path: &Path) -> Result<Vec<C64>, CliError> {
    let cfg = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| cfg(e.to_string()))?;
    let mut amps = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| cfg(e.to_string()))?;
        let nums: Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        match nums {
            Ok(v) if v.len() == 2 => amps.push(C64::new(v[0], v[1])),
            Ok(v) if v.len() == 1 => amps.push(C64::new(v[0], 0.0)),
            Err(_) if i == 0 => continue,
            _ => return Err(cfg(format!("row {}: expected `re,im`", i + 1))),
        }
    }
    Ok(amps)
}

fn entanglement(a: &EntanglementArgs) -> Result<Vec<Artifact>, CliError> {
    let amps = read_amplitudes(&a.state)?;
    let len = amps.len();
    let dims = match &a.dims {
        Some(d) => d.clone(),
        None if len >= 2 && len.is_power_of_two() => vec![2; len.trailing_zeros() as usize],
        None => return Err(CliError::Config(format!("{len} amplitudes are not a qubit register; pass --dims"))),
    };
    if dims.iter().product::<usize>() != len {
        return Err(CliError::Config(format!("dims {dims:?} do not multiply to {len} amplitudes")));
    }
    let da = dims[0];
    let bip = BipartiteState::new(amps.clone(), da, len / da)?;
    let mut out = json!({
        "dims": dims,
        "cut": [da, len / da],
        "schmidt_coefficients": bip.schmidt_coefficients(),
        "schmidt_entropy": schmidt_entropy(&bip),
        "local_purity": local_purity(&amps, &dims)?,
    });
    if len == 4 {
        out["concurrence"] = json!(concurrence(&DensityMatrix::from_pure(&amps)?)?);
    }
    if dims.iter().all(|&d| d == 2) {
        out["un_purity"] = json!(un_purity(&StateVector::from_amplitudes(amps)?)?);
    }
    Ok(vec![artifact("entanglement.json", pretty(&out))])
}

pub fn execute(cmd: &Command) -> Result<Vec<Artifact>, CliError> {
    let problems = check(cmd);
    if !problems.is_empty() {
        return Err(CliError::Config(problems.join("; ")));
    }
    match cmd {
        Command::FanoSpectrum(a) => fano_spectrum(a),
        Command::FanoGreen(a) => fano_green(a),
        Command::XyPurity(a) => xy_purity(a),
        Command::LmgPurity(a) => lmg_purity(a),
        Command::HubbardSpectrum(a) => hubbard_spectrum(a),
        Command::MeanfieldDiag(a) => meanfield_diag(a),
        Command::GcsCorrelation(a) => gcs_correlation(a),
        Command::Entanglement(a) => entanglement(a),
        Command::ValidateConfig(_) | Command::Run(_) => Err(CliError::Config("not a computing subcommand".into())),
    }
}
