//! Deterministic quantum algorithms emulated on the statevector register:
//! one-ancilla correlation estimates, spectrum series, Trotterised
//! evolution and fermionic state preparation.
//!
//! Ancillas are appended after the system qubits, so a system operator keeps
//! its qubit indices inside the larger register.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::MAX_DENSE_QUBITS;
use crate::opalgebra::{jordan_wigner, FermionExpr, Pauli, PauliString, PauliSum};
use crate::spectral::TimeSeries;
use crate::statevector::{dense_matrix, pauli_exp_ladder, Axis, Gate, Polarity, StateVector, MAX_QUBITS};

const HERM_TOL: f64 = 1e-12;
/// Largest number of branches in a linear-combination preparation.
pub const MAX_BRANCHES: usize = 64;

/// Ordered gate list on `n_qubits`, started from the basis state `initial`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ancilla: Option<usize>,
    initial: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, ancilla: Option<usize>) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("a circuit needs at least one qubit");
        }
        if n_qubits > MAX_QUBITS {
            return Err(QsimError::TooLarge(n_qubits, MAX_QUBITS));
        }
        if let Some(a) = ancilla {
            if a >= n_qubits {
                return Err(QsimError::OutOfRange { index: a, limit: n_qubits });
            }
        }
        Ok(Circuit {
            n_qubits,
            ancilla,
            initial: 0,
            gates: Vec::new(),
        })
    }

    pub fn with_initial(mut self, label: usize) -> Result<Self> {
        if label >> self.n_qubits != 0 {
            return Err(QsimError::OutOfRange {
                index: label,
                limit: 1 << self.n_qubits,
            });
        }
        self.initial = label;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ancilla(&self) -> Option<usize> {
        self.ancilla
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        check_gate(&g, self.n_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn apply(&self, sv: &mut StateVector) -> Result<()> {
        if sv.n_qubits() != self.n_qubits {
            return invalid("register size does not match the circuit");
        }
        for g in &self.gates {
            g.apply(sv)?;
        }
        Ok(())
    }

    /// Output state from the circuit's initial basis state.
    pub fn run(&self) -> Result<StateVector> {
        let mut sv = StateVector::new_register(self.n_qubits, self.initial)?;
        self.apply(&mut sv)?;
        Ok(sv)
    }

    /// Dense unitary of the gate list (the initial state is not included).
    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.n_qubits;
        if n > MAX_DENSE_QUBITS {
            return Err(QsimError::TooLarge(n, MAX_DENSE_QUBITS));
        }
        let dim = 1usize << n;
        let mut m = DMatrix::<C64>::identity(dim, dim);
        for g in &self.gates {
            m = dense_matrix(g, n)? * m;
        }
        Ok(m)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            ancilla: self.ancilla,
            initial: self.initial,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Text form: `QUBITS n`, optional `ANCILLA a` and `INIT bits`, then one
    /// gate per line. Qubit labels are one-based.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n_qubits);
        if let Some(a) = self.ancilla {
            s.push_str(&format!("ANCILLA {}\n", a + 1));
        }
        if self.initial != 0 {
            let bits: String = (0..self.n_qubits)
                .map(|q| if self.initial >> (self.n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' })
                .collect();
            s.push_str(&format!("INIT {bits}\n"));
        }
        for g in &self.gates {
            s.push_str(&g.to_line());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, first) = lines.next().ok_or_else(|| QsimError::Parse("empty circuit".into()))?;
        let n: usize = first
            .strip_prefix("QUBITS")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| QsimError::Parse("circuit must start with `QUBITS n`".into()))?;
        let mut c = Circuit::new(n, None)?;
        for (i, line) in lines {
            if let Some(r) = line.strip_prefix("ANCILLA") {
                let a: usize = r.trim().parse().map_err(|_| QsimError::Parse(format!("line {}: bad ancilla", i + 1)))?;
                if a == 0 || a > n {
                    return Err(QsimError::Parse(format!("line {}: ancilla out of range", i + 1)));
                }
                c.ancilla = Some(a - 1);
            } else if let Some(r) = line.strip_prefix("INIT") {
                let bits = r.trim();
                if bits.len() != n || !bits.chars().all(|ch| ch == '0' || ch == '1') {
                    return Err(QsimError::Parse(format!("line {}: INIT needs {n} binary digits", i + 1)));
                }
                c.initial = usize::from_str_radix(bits, 2).expect("validated digits");
            } else {
                let g = Gate::parse_line(line).map_err(|e| QsimError::Parse(format!("line {}: {e}", i + 1)))?;
                c.push(g)?;
            }
        }
        Ok(c)
    }

    /// Rewrite into single-qubit rotations and Ising gates. Controlled gates
    /// use `CU = U(t/2) U(t/2)^{-sigma_z^a}`, Pauli exponentials use the
    /// conjugation ladders, and non-commuting `Evolve` generators need a
    /// Trotter step. Equal to the original up to a global phase.
    pub fn compile_elementary(&self, trotter_dt: Option<f64>) -> Result<Circuit> {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            ancilla: self.ancilla,
            initial: self.initial,
            gates: Vec::new(),
        };
        for g in &self.gates {
            compile_gate(g, trotter_dt, &mut out.gates)?;
        }
        Ok(out)
    }
}

fn check_gate(g: &Gate, n: usize) -> Result<()> {
    for t in g.targets() {
        if t >= n {
            return Err(QsimError::OutOfRange { index: t, limit: n });
        }
    }
    if let Gate::Controlled { ancilla, gate, .. } = g {
        if gate.targets().contains(ancilla) {
            return invalid("controlled gate acts on its own ancilla");
        }
        check_gate(gate, n)?;
    }
    Ok(())
}

/// Pauli string and rotation angle of a gate of the form `exp(-i theta/2 P)`.
fn as_string_rotation(g: &Gate) -> Option<(PauliString, f64)> {
    match g {
        Gate::Rot { axis, qubit, theta } => Some((PauliString::single(*qubit, axis.pauli()), *theta)),
        Gate::Ising { j, k, omega } => PauliString::new([(*j, Pauli::Z), (*k, Pauli::Z)]).ok().map(|s| (s, *omega)),
        Gate::PauliExp { string, theta } => Some((string.clone(), *theta)),
        _ => None,
    }
}

/// Gate for `exp(-i theta/2 P)`: a rotation or Ising gate when `P` allows it.
pub fn string_gate(p: &PauliString, theta: f64) -> Gate {
    let f = p.factors();
    if f.len() == 1 {
        let axis = match f[0].1 {
            Pauli::X => Axis::X,
            Pauli::Y => Axis::Y,
            Pauli::Z => Axis::Z,
        };
        return Gate::rot(axis, f[0].0, theta);
    }
    if f.len() == 2 && f[0].1 == Pauli::Z && f[1].1 == Pauli::Z {
        return Gate::Ising {
            j: f[0].0,
            k: f[1].0,
            omega: theta,
        };
    }
    Gate::PauliExp {
        string: p.clone(),
        theta,
    }
}

/// `exp(-i G t)` as string exponentials: exact for commuting `G`, otherwise
/// first-order Trotter steps of at most `dt` over the commuting layers.
fn evolve_strings(g: &PauliSum, t: f64, dt: Option<f64>) -> Result<Vec<(PauliString, f64)>> {
    let spec = HamiltonianSpec::from_sum(g)?;
    let (steps, tau) = if spec.layers.len() <= 1 {
        (1usize, t)
    } else {
        let dt = dt.ok_or_else(|| {
            QsimError::InvalidArgument("non-commuting generator needs a Trotter step to compile".into())
        })?;
        if !(dt > 0.0) {
            return invalid("Trotter step must be positive");
        }
        let s = (t.abs() / dt).ceil().max(1.0) as usize;
        (s, t / s as f64)
    };
    let mut out = Vec::new();
    for _ in 0..steps {
        for layer in &spec.layers {
            for (s, c) in layer.iter() {
                if !s.is_identity() {
                    out.push((s.clone(), 2.0 * c.re * tau));
                }
            }
        }
    }
    Ok(out)
}

fn push_string_elementary(p: &PauliString, theta: f64, out: &mut Vec<Gate>) -> Result<()> {
    match string_gate(p, theta) {
        g @ (Gate::Rot { .. } | Gate::Ising { .. }) => out.push(g),
        _ => out.extend(pauli_exp_ladder(p, theta)?),
    }
    Ok(())
}

fn compile_gate(g: &Gate, dt: Option<f64>, out: &mut Vec<Gate>) -> Result<()> {
    match g {
        Gate::Rot { .. } | Gate::Ising { .. } => out.push(g.clone()),
        Gate::PauliExp { string, theta } => push_string_elementary(string, *theta, out)?,
        Gate::Evolve { generator, t } => {
            for (s, th) in evolve_strings(generator, *t, dt)? {
                push_string_elementary(&s, th, out)?;
            }
        }
        Gate::Controlled { ancilla, polarity, gate } => {
            let za = PauliSum::single(C64::new(1.0, 0.0), &[(*ancilla, Pauli::Z)])?;
            let sign = if *polarity == Polarity::OnOne { -1.0 } else { 1.0 };
            if let Some((s, theta)) = as_string_rotation(gate) {
                let (ph, sz) = s.mul(&PauliString::single(*ancilla, Pauli::Z));
                debug_assert!((ph - C64::new(1.0, 0.0)).norm() < 1e-15);
                push_string_elementary(&s, theta / 2.0, out)?;
                push_string_elementary(&sz, sign * theta / 2.0, out)?;
            } else if let Gate::Evolve { generator, t } = gate.as_ref() {
                for (s, th) in evolve_strings(generator, t / 2.0, dt)? {
                    push_string_elementary(&s, th, out)?;
                }
                for (s, th) in evolve_strings(&generator.mul(&za), sign * t / 2.0, dt)? {
                    push_string_elementary(&s, th, out)?;
                }
            } else {
                return invalid("nested controlled gates cannot be compiled");
            }
        }
    }
    Ok(())
}

/// Hamiltonian as mutually commuting layers whose union is the full sum.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    layers: Vec<PauliSum>,
}

impl HamiltonianSpec {
    /// Greedy grouping: each term joins the first layer it commutes with.
    pub fn from_sum(h: &PauliSum) -> Result<Self> {
        if !h.is_hermitian(HERM_TOL) {
            return Err(QsimError::NotHermitian("Hamiltonian".into()));
        }
        let mut layers: Vec<PauliSum> = Vec::new();
        for (s, c) in h.iter() {
            let slot = layers
                .iter()
                .position(|l| l.iter().all(|(o, _)| o.commutes_with(s)));
            match slot {
                Some(i) => layers[i].add_term(*c, s.clone()),
                None => {
                    let mut l = PauliSum::zero();
                    l.add_term(*c, s.clone());
                    layers.push(l);
                }
            }
        }
        Ok(HamiltonianSpec { layers })
    }

    pub fn from_layers(layers: Vec<PauliSum>) -> Result<Self> {
        for (i, l) in layers.iter().enumerate() {
            if !l.is_hermitian(HERM_TOL) {
                return Err(QsimError::NotHermitian(format!("layer {}", i + 1)));
            }
            if !l.is_commuting() {
                return invalid(format!("terms of layer {} do not commute", i + 1));
            }
        }
        Ok(HamiltonianSpec { layers })
    }

    pub fn layers(&self) -> &[PauliSum] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(PauliSum::len).collect()
    }

    pub fn total(&self) -> PauliSum {
        self.layers.iter().fold(PauliSum::zero(), |a, l| a.add(l))
    }

    pub fn min_qubits(&self) -> usize {
        self.layers.iter().map(PauliSum::min_qubits).max().unwrap_or(0)
    }

    /// Pauli-sum text with `LAYER` separator lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l in &self.layers {
            s.push_str("LAYER\n");
            s.push_str(&l.to_text());
        }
        s
    }

    /// Accepts explicit `LAYER` blocks, or a plain Pauli sum to be grouped.
    pub fn from_text(text: &str) -> Result<Self> {
        if !text.lines().any(|l| l.trim() == "LAYER") {
            return HamiltonianSpec::from_sum(&PauliSum::from_text(text)?);
        }
        let mut blocks: Vec<String> = Vec::new();
        for line in text.lines() {
            if line.trim() == "LAYER" {
                blocks.push(String::new());
            } else if let Some(b) = blocks.last_mut() {
                b.push_str(line);
                b.push('\n');
            } else if !line.trim().is_empty() && !line.trim().starts_with('#') {
                return Err(QsimError::Parse("terms before the first LAYER line".into()));
            }
        }
        let layers = blocks.iter().map(|b| PauliSum::from_text(b)).collect::<Result<Vec<_>>>()?;
        HamiltonianSpec::from_layers(layers)
    }
}

/// First-order Trotter circuit for `exp(-i H t)` with `t / dt` steps, each the
/// product of the layer exponentials in order. Identity terms are dropped.
pub fn trotter_evolve(h: &HamiltonianSpec, n: usize, t: f64, dt: f64) -> Result<Circuit> {
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid("Trotter step must be positive");
    }
    let steps_f = (t / dt).round();
    if (steps_f * dt - t).abs() > 1e-9 * t.abs().max(1.0) || steps_f < 0.0 {
        return invalid(format!("step {dt} does not divide t = {t}"));
    }
    if h.min_qubits() > n {
        return Err(QsimError::OutOfRange {
            index: h.min_qubits() - 1,
            limit: n,
        });
    }
    let mut c = Circuit::new(n, None)?;
    for _ in 0..steps_f as usize {
        for layer in &h.layers {
            for (s, coeff) in layer.iter() {
                if !s.is_identity() {
                    c.push(string_gate(s, 2.0 * coeff.re * dt))?;
                }
            }
        }
    }
    Ok(c)
}

/// A unitary on the system register.
#[derive(Clone, Debug)]
pub enum SystemOp {
    Identity,
    /// A Pauli sum that is itself unitary, e.g. a single Pauli string.
    Operator(PauliSum),
    /// `exp(-i G t)` for Hermitian `G`.
    Exp { generator: PauliSum, t: f64 },
    Gates(Vec<Gate>),
}

impl SystemOp {
    pub fn validate(&self) -> Result<()> {
        match self {
            SystemOp::Identity | SystemOp::Gates(_) => Ok(()),
            SystemOp::Operator(u) => {
                let uu = u.adjoint().mul(u);
                if !uu.approx_eq(&PauliSum::identity(C64::new(1.0, 0.0)), 1e-10) {
                    return Err(QsimError::NotUnitary("operator".into()));
                }
                Ok(())
            }
            SystemOp::Exp { generator, .. } => {
                if generator.is_hermitian(HERM_TOL) {
                    Ok(())
                } else {
                    Err(QsimError::NotHermitian("generator".into()))
                }
            }
        }
    }

    fn apply_controlled(&self, sv: &mut StateVector, ancilla: usize, pol: Polarity) -> Result<()> {
        match self {
            SystemOp::Identity => Ok(()),
            SystemOp::Operator(u) => sv.apply_operator_controlled(u, ancilla, pol),
            SystemOp::Exp { generator, t } => Gate::controlled(
                ancilla,
                pol,
                Gate::Evolve {
                    generator: generator.clone(),
                    t: *t,
                },
            )
            .apply(sv),
            SystemOp::Gates(gs) => {
                for g in gs {
                    Gate::controlled(ancilla, pol, g.clone()).apply(sv)?;
                }
                Ok(())
            }
        }
    }

    /// Dense matrix on `n` qubits.
    pub fn dense(&self, n: usize) -> Result<DMatrix<C64>> {
        let dim = 1usize << n;
        match self {
            SystemOp::Identity => Ok(DMatrix::identity(dim, dim)),
            SystemOp::Operator(u) => crate::linalg::dense_pauli_sum(u, n),
            SystemOp::Exp { generator, t } => Ok(crate::linalg::unitary_evolution(
                &crate::linalg::dense_pauli_sum(generator, n)?,
                *t,
            )),
            SystemOp::Gates(gs) => {
                let mut m = DMatrix::identity(dim, dim);
                for g in gs {
                    m = dense_matrix(g, n)? * m;
                }
                Ok(m)
            }
        }
    }
}

/// How the ancilla observable `2 sigma_+ = sigma_x + i sigma_y` is read out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Readout {
    Exact,
    Sampled { shots: usize, seed: u64 },
}

impl Readout {
    /// Standard error of the complex estimate per point (zero when exact).
    pub fn point_error(&self) -> f64 {
        match self {
            Readout::Exact => 0.0,
            Readout::Sampled { shots, .. } => (2.0 / *shots as f64).sqrt(),
        }
    }
}

fn read_ancilla(sv: &StateVector, a: usize, readout: Readout, salt: u64) -> Result<C64> {
    match readout {
        Readout::Exact => {
            let mut op = PauliSum::single(C64::new(1.0, 0.0), &[(a, Pauli::X)])?;
            op = op.add(&PauliSum::single(C64::new(0.0, 1.0), &[(a, Pauli::Y)])?);
            sv.expectation(&op)
        }
        Readout::Sampled { shots, seed } => {
            let s = seed.wrapping_add(salt.wrapping_mul(2));
            let x = sv.sampled_expectation(&PauliString::single(a, Pauli::X), shots, s)?;
            let y = sv.sampled_expectation(&PauliString::single(a, Pauli::Y), shots, s.wrapping_add(1))?;
            Ok(C64::new(x, y))
        }
    }
}

/// System state from `prep` with one extra ancilla (last qubit) in `|+>`.
fn with_plus_ancilla(prep: &Circuit) -> Result<(StateVector, usize)> {
    if prep.ancilla.is_some() {
        return invalid("preparation circuit must act on the system only");
    }
    let n = prep.n_qubits;
    let mut sv = StateVector::new_register(n + 1, prep.initial << 1)?;
    sv.apply_rotation(Axis::Y, n, FRAC_PI_2)?;
    for g in &prep.gates {
        g.apply(&mut sv)?;
    }
    Ok((sv, n))
}

/// `<phi| U^dag V |phi>` from `<2 sigma_+^a>` after controlled-`V` (ancilla
/// `|1>`) and controlled-`U` (ancilla `|0>`) with the ancilla in `|+>`.
pub fn one_ancilla_correlation(prep: &Circuit, u: &SystemOp, v: &SystemOp, readout: Readout) -> Result<C64> {
    u.validate()?;
    v.validate()?;
    let (mut sv, a) = with_plus_ancilla(prep)?;
    v.apply_controlled(&mut sv, a, Polarity::OnOne)?;
    u.apply_controlled(&mut sv, a, Polarity::OnZero)?;
    read_ancilla(&sv, a, readout, 0)
}

/// `<phi| T^dag A^dag T B |phi>` with `T = exp(-i H t)` left uncontrolled:
/// controlled-`B` on `|1>`, free `T`, controlled-`A` on `|0>`.
pub fn time_correlation(
    prep: &Circuit,
    a_op: &SystemOp,
    b_op: &SystemOp,
    h: &PauliSum,
    t: f64,
    readout: Readout,
) -> Result<C64> {
    if !h.is_hermitian(HERM_TOL) {
        return Err(QsimError::NotHermitian("Hamiltonian".into()));
    }
    a_op.validate()?;
    b_op.validate()?;
    let (mut sv, a) = with_plus_ancilla(prep)?;
    b_op.apply_controlled(&mut sv, a, Polarity::OnOne)?;
    Gate::Evolve {
        generator: h.clone(),
        t,
    }
    .apply(&mut sv)?;
    a_op.apply_controlled(&mut sv, a, Polarity::OnZero)?;
    read_ancilla(&sv, a, readout, 0)
}

/// As [`time_correlation`] with the free evolution given as a circuit on the
/// system register, e.g. a Trotter product.
pub fn time_correlation_circuit(
    prep: &Circuit,
    a_op: &SystemOp,
    b_op: &SystemOp,
    evolution: &Circuit,
    readout: Readout,
) -> Result<C64> {
    a_op.validate()?;
    b_op.validate()?;
    if evolution.ancilla.is_some() || evolution.n_qubits != prep.n_qubits {
        return invalid("evolution circuit must act on the system register only");
    }
    let (mut sv, a) = with_plus_ancilla(prep)?;
    b_op.apply_controlled(&mut sv, a, Polarity::OnOne)?;
    for g in &evolution.gates {
        g.apply(&mut sv)?;
    }
    a_op.apply_controlled(&mut sv, a, Polarity::OnZero)?;
    read_ancilla(&sv, a, readout, 0)
}

/// Circuit form used to imprint `exp(-i Q t)` on the ancilla coherence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumCircuit {
    /// `exp(+i Q sigma_z^a t / 2)` on system and ancilla.
    HalfAngle,
    /// `exp(-i Q t)` controlled on ancilla `|1>`.
    ControlledOnOne,
}

/// Uniform grid `t_j = j dt`, `j = first .. first + m - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub first: usize,
    pub m: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, m: usize) -> Result<Self> {
        TimeGrid::with_first(dt, 1, m)
    }

    pub fn with_first(dt: f64, first: usize, m: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid("time step must be positive");
        }
        if m == 0 {
            return invalid("time grid is empty");
        }
        Ok(TimeGrid { dt, first, m })
    }

    /// Validate that explicit times are of the form `t_j = j dt`.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return invalid("need at least two times");
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return invalid("times must increase");
        }
        let first = (times[0] / dt).round();
        if first < 0.0 || (first * dt - times[0]).abs() > 1e-9 * dt.max(times[0].abs()) {
            return invalid("time grid is not of the form t_j = j dt");
        }
        for (k, t) in times.iter().enumerate() {
            let want = (first + k as f64) * dt;
            if (t - want).abs() > 1e-9 * want.abs().max(dt) {
                return invalid(format!("non-uniform time grid at index {k}"));
            }
        }
        TimeGrid::with_first(dt, first as usize, times.len())
    }

    pub fn time(&self, k: usize) -> f64 {
        (self.first + k) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.time(k)).collect()
    }
}

fn spectrum_point(base: &StateVector, a: usize, q: &PauliSum, qz: &PauliSum, t: f64, form: SpectrumCircuit, readout: Readout, salt: u64) -> Result<C64> {
    let mut sv = base.clone();
    match form {
        SpectrumCircuit::HalfAngle => Gate::Evolve {
            generator: qz.clone(),
            t: -t / 2.0,
        }
        .apply(&mut sv)?,
        SpectrumCircuit::ControlledOnOne => Gate::controlled(
            a,
            Polarity::OnOne,
            Gate::Evolve {
                generator: q.clone(),
                t,
            },
        )
        .apply(&mut sv)?,
    }
    read_ancilla(&sv, a, readout, salt)
}

/// `S(t_j) = <phi| exp(-i Q t_j) |phi>` read from the ancilla, one
/// independent register per grid point.
pub fn spectrum_series(q: &PauliSum, prep: &Circuit, grid: &TimeGrid, form: SpectrumCircuit, readout: Readout) -> Result<TimeSeries> {
    if !q.is_hermitian(HERM_TOL) {
        return Err(QsimError::NotHermitian("observable".into()));
    }
    if let Readout::Sampled { shots: 0, .. } = readout {
        return invalid("shot count must be positive");
    }
    let (base, a) = with_plus_ancilla(prep)?;
    let qz = q.mul(&PauliSum::single(C64::new(1.0, 0.0), &[(a, Pauli::Z)])?);
    let values = (0..grid.m)
        .into_par_iter()
        .map(|k| spectrum_point(&base, a, q, &qz, grid.time(k), form, readout, k as u64))
        .collect::<Result<Vec<C64>>>()?;
    let mut ts = TimeSeries::with_first(grid.dt, grid.first, values)?;
    if let Readout::Sampled { .. } = readout {
        ts = ts.with_error(readout.point_error());
    }
    Ok(ts)
}

/// `exp(-i Q t)` on the system when `ancilla` has the selected value, as a
/// single exact conditioned evolution.
pub fn controlled_exponential(q: &PauliSum, t: f64, n: usize, ancilla: usize, polarity: Polarity) -> Result<Circuit> {
    if !q.is_hermitian(HERM_TOL) {
        return Err(QsimError::NotHermitian("generator".into()));
    }
    let mut c = Circuit::new(n, Some(ancilla))?;
    c.push(Gate::controlled(
        ancilla,
        polarity,
        Gate::Evolve {
            generator: q.clone(),
            t,
        },
    ))?;
    Ok(c)
}

/// Same operation as `U(t/2) U(t/2)^{-+sigma_z^a}`: two uncontrolled
/// evolutions, ready for [`Circuit::compile_elementary`].
pub fn controlled_exponential_split(q: &PauliSum, t: f64, n: usize, ancilla: usize, polarity: Polarity) -> Result<Circuit> {
    if !q.is_hermitian(HERM_TOL) {
        return Err(QsimError::NotHermitian("generator".into()));
    }
    let za = PauliSum::single(C64::new(1.0, 0.0), &[(ancilla, Pauli::Z)])?;
    let sign = if polarity == Polarity::OnOne { -1.0 } else { 1.0 };
    let mut c = Circuit::new(n, Some(ancilla))?;
    c.push(Gate::Evolve {
        generator: q.clone(),
        t: t / 2.0,
    })?;
    c.push(Gate::Evolve {
        generator: q.mul(&za),
        t: sign * t / 2.0,
    })?;
    Ok(c)
}

/// `exp(i pi/2 sigma_x^m prod_{j<m} (-sigma_z^j))`, which equals
/// `i (c_m + c_m^dag)` under the Jordan-Wigner map.
pub fn mode_creation_gate(m: usize) -> Gate {
    let mut f: Vec<(usize, Pauli)> = (0..m).map(|j| (j, Pauli::Z)).collect();
    f.push((m, Pauli::X));
    let s = if m % 2 == 0 { 1.0 } else { -1.0 };
    Gate::PauliExp {
        string: PauliString::new(f).expect("distinct qubits"),
        theta: -PI * s,
    }
}

fn check_modes(modes: &[usize], n: usize) -> Result<()> {
    for (i, &m) in modes.iter().enumerate() {
        if m >= n {
            return Err(QsimError::OutOfRange { index: m, limit: n });
        }
        if modes[..i].contains(&m) {
            return invalid(format!("mode {} occupied twice", m + 1));
        }
    }
    Ok(())
}

/// Circuit from the vacuum `|1...1>` giving `i^k c_{m_1}^dag ... c_{m_k}^dag |vac>`.
pub fn prepare_slater(modes: &[usize], n: usize) -> Result<Circuit> {
    check_modes(modes, n)?;
    let mut c = Circuit::new(n, None)?.with_initial((1usize << n) - 1)?;
    for &m in modes.iter().rev() {
        c.push(mode_creation_gate(m))?;
    }
    Ok(c)
}

/// Circuit for `exp(-i c^dag M c)`. Exact as one evolution without a Trotter
/// step; with one, first-order layers over a unit time (exact when the
/// Jordan-Wigner image commutes, e.g. for diagonal `M`).
pub fn thouless_rotate(m: &DMatrix<C64>, trotter_dt: Option<f64>) -> Result<Circuit> {
    if !m.is_square() || !crate::linalg::is_hermitian(m, 1e-12) {
        return Err(QsimError::NotHermitian("rotation matrix".into()));
    }
    let n = m.nrows();
    let g = jordan_wigner(&FermionExpr::quadratic(m)?, n)?;
    let spec = HamiltonianSpec::from_sum(&g)?;
    if spec.layers.len() <= 1 {
        return trotter_evolve(&spec, n, 1.0, 1.0);
    }
    match trotter_dt {
        Some(dt) => {
            let steps = (1.0 / dt).ceil().max(1.0);
            trotter_evolve(&spec, n, 1.0, 1.0 / steps)
        }
        None => {
            let mut c = Circuit::new(n, None)?;
            c.push(Gate::Evolve { generator: g, t: 1.0 })?;
            Ok(c)
        }
    }
}

/// Circuit preparing the Slater determinant whose occupied orbitals are the
/// (real, orthonormal) columns of `orbitals`, up to a global phase. The
/// orbital matrix is reduced to `[D; 0]` by adjacent Givens rotations, and
/// each rotation becomes one exact quadratic exponential.
pub fn prepare_orbital_slater(orbitals: &DMatrix<f64>) -> Result<Circuit> {
    let (n, m) = orbitals.shape();
    if m > n || n == 0 {
        return invalid("orbital matrix must have at most as many columns as rows");
    }
    let gram = orbitals.transpose() * orbitals;
    if (gram - DMatrix::<f64>::identity(m, m)).amax() > 1e-10 {
        return invalid("orbitals are not orthonormal");
    }
    let mut phi = orbitals.clone();
    let mut angles = Vec::new();
    for c in 0..m {
        for r in (c + 1..n).rev() {
            let (a, b) = (phi[(r - 1, c)], phi[(r, c)]);
            if b.abs() < 1e-15 {
                continue;
            }
            let rho = a.hypot(b);
            let (cs, sn) = (a / rho, b / rho);
            for k in 0..m {
                let (x, y) = (phi[(r - 1, k)], phi[(r, k)]);
                phi[(r - 1, k)] = cs * x + sn * y;
                phi[(r, k)] = -sn * x + cs * y;
            }
            angles.push((r - 1, sn.atan2(cs)));
        }
    }
    let occupied: Vec<usize> = (0..m).collect();
    let mut circ = prepare_slater(&occupied, n)?;
    for &(p, ang) in angles.iter().rev() {
        let mut gen = DMatrix::<C64>::zeros(n, n);
        gen[(p, p + 1)] = C64::new(0.0, -ang);
        gen[(p + 1, p)] = C64::new(0.0, ang);
        circ.extend(&thouless_rotate(&gen, None)?)?;
    }
    Ok(circ)
}

/// Post-selected linear combination of Slater determinants.
#[derive(Clone, Debug)]
pub struct Superposition {
    /// Normalised system state proportional to `sum_a g_a |phi_a>`.
    pub state: StateVector,
    /// Probability that the ancilla register is found in the loaded state.
    pub probability: f64,
    /// Branch-selection circuit (controlled mode-creation gates).
    pub select: Circuit,
}

/// Prepare `sum_a g_a c^dag_{a,1} ... c^dag_{a,k} |vac>`: an ancilla register
/// holds `sum_a sqrt(p_a) |a>` with `p_a = |g_a| / sum |g|`, each branch is
/// built by ancilla-controlled creation gates (with the phase of `g_a`), and
/// the ancillas are projected back onto the loaded state. With distinct
/// determinants of equal weight the success probability is `1/L`.
pub fn prepare_superposition(branches: &[(C64, Vec<usize>)], n: usize) -> Result<Superposition> {
    let l = branches.len();
    if l == 0 || l > MAX_BRANCHES {
        return invalid(format!("number of branches must lie in 1..={MAX_BRANCHES}"));
    }
    for (_, modes) in branches {
        check_modes(modes, n)?;
    }
    let k = (usize::BITS - (l - 1).leading_zeros()).max(1) as usize;
    let total = n + k;
    if total > MAX_QUBITS {
        return Err(QsimError::TooLarge(total, MAX_QUBITS));
    }
    let norm1: f64 = branches.iter().map(|(g, _)| g.norm()).sum();
    if norm1 == 0.0 {
        return invalid("all branch weights are zero");
    }
    let p: Vec<f64> = branches.iter().map(|(g, _)| g.norm() / norm1).collect();
    let vac = (1usize << n) - 1;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << total];
    for (a, pa) in p.iter().enumerate() {
        amps[(vac << k) | a] = C64::new(pa.sqrt(), 0.0);
    }
    let mut sv = StateVector::from_raw(amps)?;
    let mut select = Circuit::new(total, Some(n))?.with_initial(vac << k)?;
    for (a, (g, modes)) in branches.iter().enumerate() {
        let wrap = |inner: Gate| -> Gate {
            (0..k).fold(inner, |acc, b| {
                let bit = (a >> (k - 1 - b)) & 1 == 1;
                Gate::controlled(n + b, if bit { Polarity::OnOne } else { Polarity::OnZero }, acc)
            })
        };
        // the gates give i^len times the determinant; fold the rest into a phase
        let phase = if g.norm() > 0.0 { g / g.norm() } else { C64::new(1.0, 0.0) }
            * C64::new(0.0, -1.0).powu(modes.len() as u32);
        if (phase - C64::new(1.0, 0.0)).norm() > 1e-15 {
            let arg = phase.arg();
            // branch phase as a conditioned constant evolution
            select.push(wrap(Gate::Evolve {
                generator: PauliSum::identity(C64::new(-arg, 0.0)),
                t: 1.0,
            }))?;
        }
        for &m in modes.iter().rev() {
            select.push(wrap(mode_creation_gate(m)))?;
        }
    }
    select.apply(&mut sv)?;
    let dim_sys = 1usize << n;
    let amps = sv.amplitudes();
    let mut sys = vec![C64::new(0.0, 0.0); dim_sys];
    for (s, out) in sys.iter_mut().enumerate() {
        for (a, pa) in p.iter().enumerate() {
            *out += amps[(s << k) | a] * pa.sqrt();
        }
    }
    let probability: f64 = sys.iter().map(|x| x.norm_sqr()).sum();
    Ok(Superposition {
        state: StateVector::from_amplitudes(sys)?,
        probability,
        select,
    })
}
