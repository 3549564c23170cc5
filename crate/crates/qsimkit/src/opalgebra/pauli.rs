//! Weighted Pauli strings and their sums.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{QsimError, Result};

/// Coefficients smaller than this are dropped from sums.
pub const PRUNE_TOL: f64 = 1e-14;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product of two single-qubit Paulis as `phase * result` (`None` is the identity).
    pub fn mul(self, other: Pauli) -> (C64, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (X, X) | (Y, Y) | (Z, Z) => (C64::new(1.0, 0.0), None),
            (X, Y) => (I, Some(Z)),
            (Y, X) => (-I, Some(Z)),
            (Y, Z) => (I, Some(X)),
            (Z, Y) => (-I, Some(X)),
            (Z, X) => (I, Some(Y)),
            (X, Z) => (-I, Some(Y)),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A tensor product of non-identity Pauli factors, sorted by qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString(Vec<(usize, Pauli)>);

impl PauliString {
    pub fn identity() -> Self {
        PauliString(Vec::new())
    }

    /// Build from factors in any order. Repeated qubits are an error.
    pub fn new(factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut v: Vec<(usize, Pauli)> = factors.into_iter().collect();
        v.sort_by_key(|f| f.0);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(QsimError::InvalidArgument(format!(
                    "qubit {} appears twice in a Pauli string",
                    w[0].0
                )));
            }
        }
        Ok(PauliString(v))
    }

    pub fn single(q: usize, p: Pauli) -> Self {
        PauliString(vec![(q, p)])
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, q: usize) -> Option<Pauli> {
        self.0
            .binary_search_by_key(&q, |f| f.0)
            .ok()
            .map(|i| self.0[i].1)
    }

    /// Number of qubits needed to hold this string.
    pub fn min_qubits(&self) -> usize {
        self.0.last().map_or(0, |f| f.0 + 1)
    }

    /// Product `self * other = phase * string`.
    pub fn mul(&self, other: &PauliString) -> (C64, PauliString) {
        let mut phase = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let (ph, p) = a[i].1.mul(b[j].1);
                phase *= ph;
                if let Some(p) = p {
                    out.push((a[i].0, p));
                }
                i += 1;
                j += 1;
            }
        }
        (phase, PauliString(out))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut anti = 0usize;
        for &(q, p) in &self.0 {
            if let Some(r) = other.get(q) {
                if r != p {
                    anti += 1;
                }
            }
        }
        anti % 2 == 0
    }

    /// Bit masks over an `n`-qubit register: (flip mask, phase mask, number of Y factors).
    /// Qubit 0 is the most significant bit.
    pub fn masks(&self, n: usize) -> (usize, usize, usize) {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
        for &(q, p) in &self.0 {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// Label such as `X1 Z2` (one-based qubits); the identity is `I`.
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            return "I".to_string();
        }
        self.0
            .iter()
            .map(|(q, p)| format!("{}{}", p.letter(), q + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse(label: &str) -> Result<Self> {
        let label = label.trim();
        if label.is_empty() || label == "I" {
            return Ok(PauliString::identity());
        }
        let mut factors = Vec::new();
        for tok in label.split_whitespace() {
            let mut chars = tok.chars();
            let p = chars
                .next()
                .and_then(Pauli::from_letter)
                .ok_or_else(|| QsimError::Parse(format!("bad Pauli factor `{tok}`")))?;
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| QsimError::Parse(format!("bad qubit label in `{tok}`")))?;
            if q == 0 {
                return Err(QsimError::Parse(format!("qubit labels start at 1: `{tok}`")));
            }
            factors.push((q - 1, p));
        }
        PauliString::new(factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A single weighted Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: C64, string: PauliString) -> Self {
        PauliTerm { coeff, string }
    }

    pub fn real(coeff: f64, factors: &[(usize, Pauli)]) -> Result<Self> {
        Ok(PauliTerm {
            coeff: C64::new(coeff, 0.0),
            string: PauliString::new(factors.iter().copied())?,
        })
    }
}

/// Sum of Pauli strings with merged like terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero() -> Self {
        PauliSum::default()
    }

    pub fn identity(c: C64) -> Self {
        let mut s = PauliSum::zero();
        s.add_term(c, PauliString::identity());
        s
    }

    pub fn from_term(t: PauliTerm) -> Self {
        let mut s = PauliSum::zero();
        s.add_term(t.coeff, t.string);
        s
    }

    pub fn single(coeff: C64, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = PauliSum::zero();
        s.add_term(coeff, PauliString::new(factors.iter().copied())?);
        Ok(s)
    }

    /// `sigma_+ = (X + iY)/2 = |0><1|` on qubit `q`.
    pub fn sigma_plus(q: usize) -> Self {
        let mut s = PauliSum::zero();
        s.add_term(C64::new(0.5, 0.0), PauliString::single(q, Pauli::X));
        s.add_term(C64::new(0.0, 0.5), PauliString::single(q, Pauli::Y));
        s
    }

    /// `sigma_- = (X - iY)/2 = |1><0|` on qubit `q`.
    pub fn sigma_minus(q: usize) -> Self {
        let mut s = PauliSum::zero();
        s.add_term(C64::new(0.5, 0.0), PauliString::single(q, Pauli::X));
        s.add_term(C64::new(0.0, -0.5), PauliString::single(q, Pauli::Y));
        s
    }

    /// `(1 + Z)/2 = |0><0|` on qubit `q`.
    pub fn projector_zero(q: usize) -> Self {
        let mut s = PauliSum::identity(C64::new(0.5, 0.0));
        s.add_term(C64::new(0.5, 0.0), PauliString::single(q, Pauli::Z));
        s
    }

    /// Add without pruning; exact zeros are removed.
    pub fn add_term(&mut self, c: C64, s: PauliString) {
        let e = self.terms.entry(s.clone()).or_default();
        *e += c;
        if *e == C64::new(0.0, 0.0) {
            self.terms.remove(&s);
        }
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    fn pruned(mut self) -> Self {
        self.prune(PRUNE_TOL);
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<PauliTerm> {
        self.terms
            .iter()
            .map(|(s, c)| PauliTerm::new(*c, s.clone()))
            .collect()
    }

    pub fn coeff(&self, s: &PauliString) -> C64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> C64 {
        self.coeff(&PauliString::identity())
    }

    pub fn without_constant(&self) -> PauliSum {
        let mut s = self.clone();
        s.terms.remove(&PauliString::identity());
        s
    }

    pub fn min_qubits(&self) -> usize {
        self.terms.keys().map(|s| s.min_qubits()).max().unwrap_or(0)
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, a: C64) -> PauliSum {
        PauliSum {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * a)).collect(),
        }
        .pruned()
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            *out.terms.entry(s.clone()).or_default() += c;
        }
        out.pruned()
    }

    pub fn sub(&self, other: &PauliSum) -> PauliSum {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::zero();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (ph, s) = sa.mul(sb);
                *out.terms.entry(s).or_default() += ca * cb * ph;
            }
        }
        out.pruned()
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// All strings pairwise commute.
    pub fn is_commuting(&self) -> bool {
        let keys: Vec<&PauliString> = self.terms.keys().collect();
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                if !keys[i].commutes_with(keys[j]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn approx_eq(&self, other: &PauliSum, tol: f64) -> bool {
        let d = self.sub(other);
        d.terms.values().all(|c| c.norm() <= tol)
    }

    /// One term per line: `coeff_re coeff_im label`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.terms {
            out.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, s.label()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut out = PauliSum::zero();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, char::is_whitespace);
            let re = parts.next().unwrap_or("");
            let im = parts.next().unwrap_or("");
            let label = parts.next().unwrap_or("").trim();
            let parse = |v: &str| {
                v.parse::<f64>().map_err(|_| {
                    QsimError::Parse(format!("line {}: bad coefficient `{v}`", lineno + 1))
                })
            };
            let c = C64::new(parse(re)?, parse(im)?);
            let s = PauliString::parse(label)?;
            *out.terms.entry(s).or_default() += c;
        }
        Ok(out)
    }
}

pub fn pauli_mul(a: &PauliSum, b: &PauliSum) -> PauliSum {
    a.mul(b)
}

pub fn pauli_add(a: &PauliSum, b: &PauliSum) -> PauliSum {
    a.add(b)
}

pub fn pauli_commutator(a: &PauliSum, b: &PauliSum) -> PauliSum {
    a.commutator(b)
}
