//! Dense statevector register, elementary gates and expectation values.
//!
//! Basis labels put qubit 0 in the most significant bit, so for two qubits
//! the order is `|00>, |01>, |10>, |11>`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::{self, expm_krylov, i_pow, LinearOp, MAX_DENSE_QUBITS};
use crate::opalgebra::{Pauli, PauliString, PauliSum};

pub const MAX_QUBITS: usize = 26;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const IM: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Which ancilla value switches a controlled gate on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    OnZero,
    OnOne,
}

/// Restricts an operation to basis states with `b & mask == value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
struct Cond {
    mask: usize,
    value: usize,
}

impl Cond {
    #[inline]
    fn ok(&self, b: usize) -> bool {
        b & self.mask == self.value
    }
}

/// 2x2 matrix of `R_mu(theta) = exp(-i theta/2 sigma_mu)`.
pub fn rotation_matrix(axis: Axis, theta: f64) -> [[C64; 2]; 2] {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    match axis {
        Axis::X => [[c, C64::new(0.0, -s)], [C64::new(0.0, -s), c]],
        Axis::Y => [[c, C64::new(-s, 0.0)], [C64::new(s, 0.0), c]],
        Axis::Z => [[C64::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, C64::from_polar(1.0, theta / 2.0)]],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Basis state `|basis_label>` on `n` qubits.
    pub fn new_register(n: usize, basis_label: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge(n, MAX_QUBITS));
        }
        let dim = 1usize << n;
        if basis_label >= dim {
            return Err(QsimError::OutOfRange {
                index: basis_label,
                limit: dim,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[basis_label] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Wrap amplitudes (length must be a power of two). The vector is normalised.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return invalid(format!("amplitude count {dim} is not a power of two"));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge(n, MAX_QUBITS));
        }
        let nrm = linalg::norm(&amps);
        if nrm == 0.0 || !nrm.is_finite() {
            return invalid("amplitudes have zero or non-finite norm");
        }
        Ok(StateVector {
            n,
            amps: amps.into_iter().map(|a| a / nrm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        linalg::inner(&self.amps, &other.amps)
    }

    #[inline]
    fn bit(&self, q: usize) -> usize {
        1usize << (self.n - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(QsimError::OutOfRange { index: q, limit: self.n })
        } else {
            Ok(())
        }
    }

    fn cond_for(&self, ancilla: usize, pol: Polarity) -> Result<Cond> {
        self.check_qubit(ancilla)?;
        let mask = self.bit(ancilla);
        Ok(Cond {
            mask,
            value: if pol == Polarity::OnOne { mask } else { 0 },
        })
    }

    fn apply_1q(&mut self, q: usize, u: [[C64; 2]; 2], cond: Cond) {
        let bit = self.bit(q);
        for b in 0..self.amps.len() {
            if b & bit != 0 || !cond.ok(b) {
                continue;
            }
            let a0 = self.amps[b];
            let a1 = self.amps[b | bit];
            self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[b | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    /// Apply an arbitrary 2x2 matrix to qubit `q`.
    pub fn apply_single_qubit(&mut self, q: usize, u: [[C64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_1q(q, u, Cond::default());
        Ok(())
    }

    /// `R_mu(theta) = exp(-i theta/2 sigma_mu)` on qubit `q`.
    pub fn apply_rotation(&mut self, axis: Axis, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_1q(q, rotation_matrix(axis, theta), Cond::default());
        Ok(())
    }

    fn ising(&mut self, j: usize, k: usize, omega: f64, cond: Cond) {
        let m = self.bit(j) | self.bit(k);
        let even = C64::from_polar(1.0, -omega / 2.0);
        let odd = C64::from_polar(1.0, omega / 2.0);
        for (b, a) in self.amps.iter_mut().enumerate() {
            if cond.ok(b) {
                *a *= if (b & m).count_ones() % 2 == 0 { even } else { odd };
            }
        }
    }

    /// Ising gate `exp(-i omega/2 Z_j Z_k)`.
    pub fn apply_ising(&mut self, j: usize, k: usize, omega: f64) -> Result<()> {
        self.check_qubit(j)?;
        self.check_qubit(k)?;
        if j == k {
            return invalid("Ising gate needs two distinct qubits");
        }
        self.ising(j, k, omega, Cond::default());
        Ok(())
    }

    fn check_string(&self, s: &PauliString) -> Result<()> {
        if s.min_qubits() > self.n {
            return Err(QsimError::OutOfRange {
                index: s.min_qubits() - 1,
                limit: self.n,
            });
        }
        Ok(())
    }

    /// `exp(-i phi P)` for a Pauli string, paired amplitudes updated with
    /// `cos(phi) - i sin(phi) P` (the diagonal phase of `P`'s eigenbasis).
    fn string_exp(&mut self, s: &PauliString, phi: f64, cond: Cond) {
        let (x, z, ny) = s.masks(self.n);
        let (c, sn) = (phi.cos(), phi.sin());
        if x == 0 {
            let even = C64::from_polar(1.0, -phi);
            let odd = C64::from_polar(1.0, phi);
            for (b, a) in self.amps.iter_mut().enumerate() {
                if cond.ok(b) {
                    *a *= if (b & z).count_ones() % 2 == 0 { even } else { odd };
                }
            }
            return;
        }
        let f = -IM * sn * i_pow(ny);
        for b in 0..self.amps.len() {
            let bp = b ^ x;
            if bp < b || !cond.ok(b) {
                continue;
            }
            let sb = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let sbp = if (bp & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let a = self.amps[b];
            let d = self.amps[bp];
            // (P psi)[b] = i^ny (-1)^{|bp & z|} psi[bp]
            self.amps[b] = c * a + f * sbp * d;
            self.amps[bp] = c * d + f * sb * a;
        }
    }

    /// `exp(-i theta/2 P)` by the direct rotated-basis formula. `term` must
    /// carry a real coefficient, which scales the angle.
    pub fn apply_pauli_string_exp(&mut self, term: &PauliString, coeff: f64, theta: f64) -> Result<()> {
        if term.is_identity() {
            return invalid("empty Pauli string");
        }
        self.check_string(term)?;
        self.string_exp(term, coeff * theta / 2.0, Cond::default());
        Ok(())
    }

    /// Same operation realised as the conjugation ladder of single-qubit
    /// rotations and Ising gates around a single `R_z` core.
    pub fn apply_pauli_string_exp_ladder(&mut self, term: &PauliString, coeff: f64, theta: f64) -> Result<()> {
        self.check_string(term)?;
        for g in pauli_exp_ladder(term, coeff * theta)? {
            g.apply(self)?;
        }
        Ok(())
    }

    /// `op |psi>` as a raw vector.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<Vec<C64>> {
        if op.min_qubits() > self.n {
            return Err(QsimError::OutOfRange {
                index: op.min_qubits() - 1,
                limit: self.n,
            });
        }
        let compiled = CompiledSum::new(op, self.n, Cond::default());
        let mut out = vec![ZERO; self.amps.len()];
        compiled.apply(&self.amps, &mut out);
        Ok(out)
    }

    /// Replace `psi` by `op psi` on the subspace where `control` has the
    /// selected value. `op` must not act on `control`.
    pub fn apply_operator_controlled(&mut self, op: &PauliSum, control: usize, polarity: Polarity) -> Result<()> {
        let cond = self.cond_for(control, polarity)?;
        for (s, _) in op.iter() {
            let (x, z, _) = s.masks(self.n);
            if (x | z) & cond.mask != 0 {
                return invalid("controlled operator acts on its own control");
            }
        }
        let image = self.apply_pauli_sum(op)?;
        for (b, (a, v)) in self.amps.iter_mut().zip(image).enumerate() {
            if cond.ok(b) {
                *a = v;
            }
        }
        Ok(())
    }

    /// Amplitudes without normalisation (zero vectors allowed).
    pub fn from_raw(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return invalid(format!("amplitude count {dim} is not a power of two"));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge(n, MAX_QUBITS));
        }
        Ok(StateVector { n, amps })
    }

    /// `<psi| op |psi>`.
    pub fn expectation(&self, op: &PauliSum) -> Result<C64> {
        let v = self.apply_pauli_sum(op)?;
        Ok(linalg::inner(&self.amps, &v))
    }

    /// Expectation of a single string without building the image vector.
    pub fn expectation_string(&self, s: &PauliString) -> Result<C64> {
        self.check_string(s)?;
        let (x, z, ny) = s.masks(self.n);
        let ph = i_pow(ny);
        let mut acc = ZERO;
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[b ^ x].conj() * a * sign;
        }
        Ok(acc * ph)
    }

    /// Exact `exp(-i Q t)` (matrix-free Lanczos), optionally restricted to the
    /// subspace where `ancilla` has the given value. `Q` must be Hermitian and
    /// must not act on the ancilla.
    fn evolve(&mut self, q: &PauliSum, t: f64, cond: Cond) -> Result<()> {
        if !q.is_hermitian(1e-12) {
            return Err(QsimError::NotHermitian("evolution generator".into()));
        }
        if q.min_qubits() > self.n {
            return Err(QsimError::OutOfRange {
                index: q.min_qubits() - 1,
                limit: self.n,
            });
        }
        if cond.mask != 0 {
            for (s, _) in q.iter() {
                let (x, z, _) = s.masks(self.n);
                if (x | z) & cond.mask != 0 {
                    return invalid("controlled generator acts on its own ancilla");
                }
            }
        }
        let op = CompiledSum::new(q, self.n, cond);
        let mut inside = self.amps.clone();
        for (b, a) in inside.iter_mut().enumerate() {
            if !cond.ok(b) {
                *a = ZERO;
            }
        }
        let evolved = expm_krylov(&op, &inside, t);
        for (b, a) in self.amps.iter_mut().enumerate() {
            if cond.ok(b) {
                *a = evolved[b];
            }
        }
        Ok(())
    }

    /// Exact `exp(-i Q t)` on the whole register.
    pub fn evolve_exact(&mut self, q: &PauliSum, t: f64) -> Result<()> {
        self.evolve(q, t, Cond::default())
    }

    /// Project onto `qubit = value` without renormalising; returns the probability.
    pub fn project(&mut self, qubit: usize, value: bool) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = self.bit(qubit);
        let mut p = 0.0;
        for (b, a) in self.amps.iter_mut().enumerate() {
            if (b & bit != 0) != value {
                *a = ZERO;
            } else {
                p += a.norm_sqr();
            }
        }
        Ok(p)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return invalid("cannot normalise a zero vector");
        }
        for a in &mut self.amps {
            *a /= nrm;
        }
        Ok(())
    }

    /// Basis-state counts from `shots` draws with probabilities `|a_n|^2`.
    pub fn sample_counts(&self, shots: usize, seed: u64) -> BTreeMap<usize, usize> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= r).min(self.amps.len() - 1);
            *counts.entry(k).or_insert(0) += 1;
        }
        counts
    }

    /// Shot estimate of `<P>` for a Pauli string: rotate each factor to the
    /// `Z` basis, sample, and average the parity.
    pub fn sampled_expectation(&self, s: &PauliString, shots: usize, seed: u64) -> Result<f64> {
        self.check_string(s)?;
        if shots == 0 {
            return invalid("shot count must be positive");
        }
        let mut rotated = self.clone();
        for &(q, p) in s.factors() {
            match p {
                Pauli::X => rotated.apply_rotation(Axis::Y, q, -FRAC_PI_2)?,
                Pauli::Y => rotated.apply_rotation(Axis::X, q, FRAC_PI_2)?,
                Pauli::Z => {}
            }
        }
        let mask = s.factors().iter().fold(0usize, |m, &(q, _)| m | self.bit(q));
        let counts = rotated.sample_counts(shots, seed);
        let total: i64 = counts
            .iter()
            .map(|(&b, &c)| if (b & mask).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum();
        Ok(total as f64 / shots as f64)
    }
}

/// Pauli sum compiled to bit masks for repeated application.
struct CompiledSum {
    n: usize,
    terms: Vec<(usize, usize, C64)>,
    cond: Cond,
    bound: f64,
}

impl CompiledSum {
    fn new(op: &PauliSum, n: usize, cond: Cond) -> Self {
        let terms = op
            .iter()
            .map(|(s, c)| {
                let (x, z, ny) = s.masks(n);
                (x, z, c * i_pow(ny))
            })
            .collect();
        CompiledSum {
            n,
            terms,
            cond,
            bound: op.one_norm(),
        }
    }
}

impl LinearOp for CompiledSum {
    fn dim(&self) -> usize {
        1usize << self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for v in y.iter_mut() {
            *v = ZERO;
        }
        for &(xm, zm, c) in &self.terms {
            for (b, a) in x.iter().enumerate() {
                if !self.cond.ok(b) {
                    continue;
                }
                let sign = if (b & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                y[b ^ xm] += c * a * sign;
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }
}

/// Elementary and composite operations on a register.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// `exp(-i theta/2 sigma_axis)` on one qubit.
    Rot { axis: Axis, qubit: usize, theta: f64 },
    /// `exp(-i omega/2 Z_j Z_k)`.
    Ising { j: usize, k: usize, omega: f64 },
    /// `exp(-i theta/2 P)` for a Pauli string `P`.
    PauliExp { string: PauliString, theta: f64 },
    /// Exact `exp(-i Q t)` for a Hermitian Pauli sum.
    Evolve { generator: PauliSum, t: f64 },
    /// `gate` applied only where the ancilla has the selected value.
    Controlled {
        ancilla: usize,
        polarity: Polarity,
        gate: Box<Gate>,
    },
}

impl Gate {
    pub fn rot(axis: Axis, qubit: usize, theta: f64) -> Gate {
        Gate::Rot { axis, qubit, theta }
    }

    pub fn controlled(ancilla: usize, polarity: Polarity, gate: Gate) -> Gate {
        Gate::Controlled {
            ancilla,
            polarity,
            gate: Box::new(gate),
        }
    }

    /// Qubits touched by the gate (for `Evolve`, the support of the generator).
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Rot { qubit, .. } => vec![*qubit],
            Gate::Ising { j, k, .. } => vec![*j, *k],
            Gate::PauliExp { string, .. } => string.factors().iter().map(|f| f.0).collect(),
            Gate::Evolve { generator, .. } => {
                let mut v: Vec<usize> = generator
                    .iter()
                    .flat_map(|(s, _)| s.factors().iter().map(|f| f.0).collect::<Vec<_>>())
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            Gate::Controlled { ancilla, gate, .. } => {
                let mut v = gate.targets();
                v.push(*ancilla);
                v
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Rot { axis, qubit, theta } => Gate::Rot {
                axis: *axis,
                qubit: *qubit,
                theta: -theta,
            },
            Gate::Ising { j, k, omega } => Gate::Ising {
                j: *j,
                k: *k,
                omega: -omega,
            },
            Gate::PauliExp { string, theta } => Gate::PauliExp {
                string: string.clone(),
                theta: -theta,
            },
            Gate::Evolve { generator, t } => Gate::Evolve {
                generator: generator.clone(),
                t: -t,
            },
            Gate::Controlled { ancilla, polarity, gate } => Gate::Controlled {
                ancilla: *ancilla,
                polarity: *polarity,
                gate: Box::new(gate.inverse()),
            },
        }
    }

    fn apply_cond(&self, sv: &mut StateVector, cond: Cond) -> Result<()> {
        match self {
            Gate::Rot { axis, qubit, theta } => {
                sv.check_qubit(*qubit)?;
                if sv.bit(*qubit) & cond.mask != 0 {
                    return invalid("gate acts on its own control");
                }
                sv.apply_1q(*qubit, rotation_matrix(*axis, *theta), cond);
            }
            Gate::Ising { j, k, omega } => {
                sv.check_qubit(*j)?;
                sv.check_qubit(*k)?;
                if j == k {
                    return invalid("Ising gate needs two distinct qubits");
                }
                sv.ising(*j, *k, *omega, cond);
            }
            Gate::PauliExp { string, theta } => {
                if string.is_identity() {
                    return invalid("empty Pauli string");
                }
                sv.check_string(string)?;
                let (x, _, _) = string.masks(sv.n);
                if x & cond.mask != 0 {
                    return invalid("gate flips its own control");
                }
                sv.string_exp(string, theta / 2.0, cond);
            }
            Gate::Evolve { generator, t } => sv.evolve(generator, *t, cond)?,
            Gate::Controlled { ancilla, polarity, gate } => {
                let c = sv.cond_for(*ancilla, *polarity)?;
                if c.mask & cond.mask != 0 {
                    return invalid("nested control on the same ancilla");
                }
                let merged = Cond {
                    mask: cond.mask | c.mask,
                    value: cond.value | c.value,
                };
                gate.apply_cond(sv, merged)?;
            }
        }
        Ok(())
    }

    pub fn apply(&self, sv: &mut StateVector) -> Result<()> {
        self.apply_cond(sv, Cond::default())
    }

    /// Dense matrix of the gate on `n` qubits.
    pub fn dense_matrix(&self, n: usize) -> Result<DMatrix<C64>> {
        dense_matrix(self, n)
    }

    /// One-line text form with one-based qubit labels.
    pub fn to_line(&self) -> String {
        match self {
            Gate::Rot { axis, qubit, theta } => {
                let name = match axis {
                    Axis::X => "RX",
                    Axis::Y => "RY",
                    Axis::Z => "RZ",
                };
                format!("{name} {} {:e}", qubit + 1, theta)
            }
            Gate::Ising { j, k, omega } => format!("ZZ {} {} {:e}", j + 1, k + 1, omega),
            Gate::PauliExp { string, theta } => format!("PEXP {:e} {}", theta, string.label()),
            Gate::Evolve { generator, t } => {
                let mut s = format!("EVOLVE {:e}", t);
                for (p, c) in generator.iter() {
                    s.push_str(&format!(" | {:e} {:e} {}", c.re, c.im, p.label()));
                }
                s
            }
            Gate::Controlled { ancilla, polarity, gate } => {
                let pol = if *polarity == Polarity::OnOne { 1 } else { 0 };
                format!("CTRL {} {} {}", ancilla + 1, pol, gate.to_line())
            }
        }
    }

    pub fn parse_line(line: &str) -> Result<Gate> {
        let line = line.trim();
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let err = |m: &str| QsimError::Parse(format!("{m}: `{line}`"));
        let qubit = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err("bad qubit"))?;
            if v == 0 {
                return Err(err("qubit labels start at 1"));
            }
            Ok(v - 1)
        };
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| err("bad number")) };
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match head {
            "RX" | "RY" | "RZ" => {
                if toks.len() != 2 {
                    return Err(err("expected qubit and angle"));
                }
                let axis = match head {
                    "RX" => Axis::X,
                    "RY" => Axis::Y,
                    _ => Axis::Z,
                };
                Ok(Gate::Rot {
                    axis,
                    qubit: qubit(toks[0])?,
                    theta: num(toks[1])?,
                })
            }
            "ZZ" => {
                if toks.len() != 3 {
                    return Err(err("expected two qubits and an angle"));
                }
                Ok(Gate::Ising {
                    j: qubit(toks[0])?,
                    k: qubit(toks[1])?,
                    omega: num(toks[2])?,
                })
            }
            "PEXP" => {
                let (th, label) = rest.split_once(char::is_whitespace).ok_or_else(|| err("missing string"))?;
                Ok(Gate::PauliExp {
                    theta: num(th)?,
                    string: PauliString::parse(label)?,
                })
            }
            "EVOLVE" => {
                let mut parts = rest.split('|');
                let t = num(parts.next().unwrap_or("").trim())?;
                let mut text = String::new();
                for p in parts {
                    text.push_str(p.trim());
                    text.push('\n');
                }
                Ok(Gate::Evolve {
                    generator: PauliSum::from_text(&text)?,
                    t,
                })
            }
            "CTRL" => {
                if toks.len() < 3 {
                    return Err(err("expected ancilla, polarity and gate"));
                }
                let polarity = match toks[1] {
                    "1" => Polarity::OnOne,
                    "0" => Polarity::OnZero,
                    _ => return Err(err("polarity must be 0 or 1")),
                };
                let inner_start = rest
                    .match_indices(toks[2])
                    .map(|(i, _)| i)
                    .find(|&i| i >= toks[0].len() + toks[1].len() + 1)
                    .ok_or_else(|| err("missing inner gate"))?;
                Ok(Gate::Controlled {
                    ancilla: qubit(toks[0])?,
                    polarity,
                    gate: Box::new(Gate::parse_line(&rest[inner_start..])?),
                })
            }
            _ => Err(err("unknown gate")),
        }
    }
}

/// Gates realising `exp(-i theta/2 P)` from rotations by `+-pi/2`, Ising
/// gates and one `R_z` core. Each Clifford `W = exp(-i pi/4 Q)` maps an
/// anticommuting string `S` to `-i Q S`; the ladder reduces `P` to a single
/// `Z` and the circuit is `W_1..W_K, R_z, W_K^dag..W_1^dag`.
pub fn pauli_exp_ladder(p: &PauliString, theta: f64) -> Result<Vec<Gate>> {
    if p.is_identity() {
        return invalid("empty Pauli string");
    }
    let mut cur = p.clone();
    let mut sign = 1.0f64;
    let mut ws: Vec<Gate> = Vec::new();

    fn conj(cur: &mut PauliString, sign: &mut f64, q: &PauliString) {
        if cur.commutes_with(q) {
            return;
        }
        let (ph, r) = q.mul(cur);
        let f = C64::new(0.0, -1.0) * ph;
        debug_assert!(f.im.abs() < 1e-12);
        *sign *= f.re;
        *cur = r;
    }
    let push_rot = |cur: &mut PauliString, sign: &mut f64, axis: Axis, q: usize, ws: &mut Vec<Gate>| {
        conj(cur, sign, &PauliString::single(q, axis.pauli()));
        ws.push(Gate::rot(axis, q, FRAC_PI_2));
    };

    let factors: Vec<(usize, Pauli)> = cur.factors().to_vec();
    for &(q, pa) in &factors {
        match pa {
            Pauli::X => push_rot(&mut cur, &mut sign, Axis::Y, q, &mut ws),
            Pauli::Y => push_rot(&mut cur, &mut sign, Axis::X, q, &mut ws),
            Pauli::Z => {}
        }
    }
    let q1 = factors[0].0;
    if factors.len() > 1 {
        push_rot(&mut cur, &mut sign, Axis::Y, q1, &mut ws);
        for &(qk, _) in &factors[1..] {
            let zz = PauliString::new([(q1, Pauli::Z), (qk, Pauli::Z)])?;
            conj(&mut cur, &mut sign, &zz);
            ws.push(Gate::Ising {
                j: q1,
                k: qk,
                omega: FRAC_PI_2,
            });
        }
        match cur.get(q1) {
            Some(Pauli::X) => push_rot(&mut cur, &mut sign, Axis::Y, q1, &mut ws),
            Some(Pauli::Y) => push_rot(&mut cur, &mut sign, Axis::X, q1, &mut ws),
            _ => {}
        }
    }
    debug_assert_eq!(cur, PauliString::single(q1, Pauli::Z));
    let mut gates = ws.clone();
    gates.push(Gate::rot(Axis::Z, q1, sign * theta));
    gates.extend(ws.iter().rev().map(Gate::inverse));
    Ok(gates)
}

/// Dense `2^n x 2^n` matrix of a gate (n <= 12).
pub fn dense_matrix(g: &Gate, n: usize) -> Result<DMatrix<C64>> {
    if n > MAX_DENSE_QUBITS {
        return Err(QsimError::TooLarge(n, MAX_DENSE_QUBITS));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut sv = StateVector::new_register(n, col)?;
        g.apply(&mut sv)?;
        for (r, a) in sv.amps.iter().enumerate() {
            m[(r, col)] = *a;
        }
    }
    Ok(m)
}

/// Dense matrix of a Pauli sum (n <= 12).
pub fn dense_operator(op: &PauliSum, n: usize) -> Result<DMatrix<C64>> {
    linalg::dense_pauli_sum(op, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn register_limits() {
        assert!(StateVector::new_register(27, 0).is_err());
        assert!(StateVector::new_register(2, 4).is_err());
        let s = StateVector::new_register(1, 1).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
    }

    #[test]
    fn rotation_examples() {
        let mut s = StateVector::new_register(1, 0).unwrap();
        s.apply_rotation(Axis::X, 0, PI).unwrap();
        assert!(close(s.amplitudes()[0], ZERO));
        assert!(close(s.amplitudes()[1], -IM));

        let mut s = StateVector::new_register(1, 0).unwrap();
        s.apply_rotation(Axis::Z, 0, 0.37).unwrap();
        assert!(close(s.amplitudes()[0], C64::from_polar(1.0, -0.185)));

        let mut s = StateVector::new_register(1, 0).unwrap();
        s.apply_rotation(Axis::Y, 0, PI / 2.0).unwrap();
        let h = C64::new(0.5f64.sqrt(), 0.0);
        assert!(close(s.amplitudes()[0], h) && close(s.amplitudes()[1], h));
    }

    #[test]
    fn ising_parity() {
        let mut s = StateVector::new_register(2, 0).unwrap();
        s.apply_ising(0, 1, 0.8).unwrap();
        assert!(close(s.amplitudes()[0], C64::from_polar(1.0, -0.4)));
        assert!(s.apply_ising(1, 1, 0.1).is_err());
    }

    #[test]
    fn cnot_decomposition_phase() {
        let n = 2;
        let seq = [
            Gate::rot(Axis::Y, 1, FRAC_PI_2),
            Gate::Ising { j: 0, k: 1, omega: FRAC_PI_2 },
            Gate::rot(Axis::Y, 1, -FRAC_PI_2),
            Gate::rot(Axis::X, 1, FRAC_PI_2),
            Gate::rot(Axis::Z, 0, FRAC_PI_2),
        ];
        let mut u = DMatrix::<C64>::identity(4, 4);
        for g in &seq {
            u = dense_matrix(g, n).unwrap() * u;
        }
        let mut cnot = DMatrix::<C64>::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(r, c)] = ONE;
        }
        let phased = cnot * C64::from_polar(1.0, -FRAC_PI_4);
        assert!(linalg::max_abs(&(u - phased)) < 1e-12);
    }

    #[test]
    fn y_rotation_conjugates_z_to_x() {
        let u = dense_matrix(&Gate::rot(Axis::Y, 0, -FRAC_PI_2), 1).unwrap();
        let z = linalg::dense_pauli_sum(&PauliSum::single(ONE, &[(0, Pauli::Z)]).unwrap(), 1).unwrap();
        let x = linalg::dense_pauli_sum(&PauliSum::single(ONE, &[(0, Pauli::X)]).unwrap(), 1).unwrap();
        // U_1 = exp(i pi/4 sigma_y) = R_y(-pi/2); U_1^dag Z U_1 = X
        assert!(linalg::max_abs(&(u.adjoint() * z * &u - x)) < 1e-12);
    }

    #[test]
    fn bell_expectations() {
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let s = StateVector::from_amplitudes(vec![h, ZERO, ZERO, h]).unwrap();
        let z1 = PauliSum::single(ONE, &[(0, Pauli::Z)]).unwrap();
        let xx = PauliSum::single(ONE, &[(0, Pauli::X), (1, Pauli::X)]).unwrap();
        assert!(close(s.expectation(&z1).unwrap(), ZERO));
        assert!(close(s.expectation(&xx).unwrap(), ONE));
        assert!(close(s.expectation(&PauliSum::identity(ONE)).unwrap(), ONE));
    }

    #[test]
    fn string_exp_single_qubit_matches_rotation() {
        let mut a = StateVector::from_amplitudes(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.9)]).unwrap();
        let mut b = a.clone();
        a.apply_pauli_string_exp(&PauliString::single(0, Pauli::Z), 1.0, 0.77).unwrap();
        b.apply_rotation(Axis::Z, 0, 0.77).unwrap();
        assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| close(*x, *y)));
    }

    #[test]
    fn ladder_and_direct_agree() {
        let p = PauliString::parse("X1 Z2 X3").unwrap();
        let amps: Vec<C64> = (0..8).map(|i| C64::new((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos())).collect();
        let mut a = StateVector::from_amplitudes(amps).unwrap();
        let mut b = a.clone();
        a.apply_pauli_string_exp(&p, 1.0, 0.9).unwrap();
        b.apply_pauli_string_exp_ladder(&p, 1.0, 0.9).unwrap();
        assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| close(*x, *y)));
    }

    #[test]
    fn sampled_expectation_is_seeded() {
        let mut s = StateVector::new_register(2, 0).unwrap();
        s.apply_rotation(Axis::Y, 0, 1.0).unwrap();
        let z = PauliString::single(0, Pauli::Z);
        let a = s.sampled_expectation(&z, 20000, 7).unwrap();
        let b = s.sampled_expectation(&z, 20000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a - 1.0f64.cos()).abs() < 0.03);
    }

    #[test]
    fn gate_text_round_trip() {
        let gates = vec![
            Gate::rot(Axis::X, 2, 0.1),
            Gate::Ising { j: 0, k: 3, omega: -1.0 / 3.0 },
            Gate::PauliExp { string: PauliString::parse("X1 Y3").unwrap(), theta: 2.5e-7 },
            Gate::controlled(
                4,
                Polarity::OnOne,
                Gate::Evolve {
                    generator: PauliSum::single(C64::new(0.5, 0.0), &[(0, Pauli::X), (1, Pauli::X)]).unwrap(),
                    t: 1.25,
                },
            ),
            Gate::controlled(0, Polarity::OnZero, Gate::rot(Axis::Z, 1, 3.0)),
        ];
        for g in gates {
            assert_eq!(Gate::parse_line(&g.to_line()).unwrap(), g);
        }
    }
}
