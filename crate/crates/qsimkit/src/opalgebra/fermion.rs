//! Fermionic and anyonic ladder-operator expressions and their qubit images.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::pauli::{Pauli, PauliString, PauliSum, PRUNE_TOL};
use crate::error::{QsimError, Result};

/// One creation (`dagger = true`) or annihilation operator on a zero-based mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

pub fn cr(mode: usize) -> Ladder {
    Ladder { mode, dagger: true }
}

pub fn an(mode: usize) -> Ladder {
    Ladder { mode, dagger: false }
}

/// Ordered operator products kept exactly as written (no reordering).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawExpr {
    pub terms: Vec<(C64, Vec<Ladder>)>,
}

impl RawExpr {
    pub fn new() -> Self {
        RawExpr::default()
    }

    pub fn term(coeff: C64, ops: Vec<Ladder>) -> Self {
        RawExpr {
            terms: vec![(coeff, ops)],
        }
    }

    pub fn push(&mut self, coeff: C64, ops: Vec<Ladder>) -> &mut Self {
        self.terms.push((coeff, ops));
        self
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|(_, ops)| ops.iter().map(|o| o.mode))
            .max()
    }
}

fn order_key(l: &Ladder) -> (u8, usize) {
    if l.dagger {
        (0, l.mode)
    } else {
        (1, l.mode)
    }
}

/// Normal-ordered fermionic expression over `n_modes` modes. Monomials keep
/// creators first (ascending mode) followed by annihilators (ascending mode).
#[derive(Clone, Debug, PartialEq)]
pub struct FermionExpr {
    n_modes: usize,
    terms: BTreeMap<Vec<Ladder>, C64>,
}

impl FermionExpr {
    pub fn zero(n_modes: usize) -> Self {
        FermionExpr {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_raw(n_modes: usize, raw: &RawExpr) -> Result<Self> {
        let mut out = FermionExpr::zero(n_modes);
        for (c, ops) in &raw.terms {
            if let Some(op) = ops.iter().find(|o| o.mode >= n_modes) {
                return Err(QsimError::OutOfRange {
                    index: op.mode,
                    limit: n_modes,
                });
            }
            normal_order_into(*c, ops.clone(), &mut out.terms);
        }
        out.prune();
        Ok(out)
    }

    pub fn monomial(n_modes: usize, coeff: C64, ops: Vec<Ladder>) -> Result<Self> {
        FermionExpr::from_raw(n_modes, &RawExpr::term(coeff, ops))
    }

    /// `t (c_i^dag c_j + c_j^dag c_i)`.
    pub fn hopping(n_modes: usize, i: usize, j: usize, t: f64) -> Result<Self> {
        let mut raw = RawExpr::new();
        raw.push(C64::new(t, 0.0), vec![cr(i), an(j)]);
        raw.push(C64::new(t, 0.0), vec![cr(j), an(i)]);
        FermionExpr::from_raw(n_modes, &raw)
    }

    pub fn number(n_modes: usize, j: usize) -> Result<Self> {
        FermionExpr::monomial(n_modes, C64::new(1.0, 0.0), vec![cr(j), an(j)])
    }

    /// `sum_{ij} m_ij c_i^dag c_j`.
    pub fn quadratic(m: &DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        let mut raw = RawExpr::new();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    raw.push(m[(i, j)], vec![cr(i), an(j)]);
                }
            }
        }
        FermionExpr::from_raw(n, &raw)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Ladder>, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn to_raw(&self) -> RawExpr {
        RawExpr {
            terms: self.terms.iter().map(|(k, c)| (*c, k.clone())).collect(),
        }
    }

    pub fn add(&self, other: &FermionExpr) -> FermionExpr {
        let mut out = self.clone();
        out.n_modes = self.n_modes.max(other.n_modes);
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_default() += c;
        }
        out.prune();
        out
    }

    pub fn scale(&self, a: C64) -> FermionExpr {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= a;
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &FermionExpr) -> FermionExpr {
        let mut terms = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut ops = ka.clone();
                ops.extend_from_slice(kb);
                normal_order_into(ca * cb, ops, &mut terms);
            }
        }
        let mut out = FermionExpr {
            n_modes: self.n_modes.max(other.n_modes),
            terms,
        };
        out.prune();
        out
    }

    pub fn adjoint(&self) -> FermionExpr {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let ops: Vec<Ladder> = k
                .iter()
                .rev()
                .map(|l| Ladder {
                    mode: l.mode,
                    dagger: !l.dagger,
                })
                .collect();
            normal_order_into(c.conj(), ops, &mut terms);
        }
        let mut out = FermionExpr {
            n_modes: self.n_modes,
            terms,
        };
        out.prune();
        out
    }

    pub fn anticommutator(&self, other: &FermionExpr) -> FermionExpr {
        self.mul(other).add(&other.mul(self))
    }

    pub fn approx_eq(&self, other: &FermionExpr, tol: f64) -> bool {
        let d = self.add(&other.scale(C64::new(-1.0, 0.0)));
        d.terms.values().all(|c| c.norm() <= tol)
    }
}

/// Bubble the product into normal order using `{c_i, c_j^dag} = delta_ij`.
fn normal_order_into(coeff: C64, ops: Vec<Ladder>, out: &mut BTreeMap<Vec<Ladder>, C64>) {
    let mut stack = vec![(coeff, ops)];
    while let Some((c, mut ops)) = stack.pop() {
        let mut sign = 1.0;
        let mut done = false;
        let mut zero = false;
        while !done {
            done = true;
            for i in 0..ops.len().saturating_sub(1) {
                let (a, b) = (ops[i], ops[i + 1]);
                if a == b {
                    zero = true;
                    break;
                }
                if order_key(&a) > order_key(&b) {
                    if !a.dagger && b.dagger && a.mode == b.mode {
                        let mut contracted = ops[..i].to_vec();
                        contracted.extend_from_slice(&ops[i + 2..]);
                        stack.push((c * sign, contracted));
                    }
                    ops.swap(i, i + 1);
                    sign = -sign;
                    done = false;
                }
            }
            if zero {
                break;
            }
        }
        if !zero {
            *out.entry(ops).or_default() += c * sign;
        }
    }
}

fn jw_ladder(l: Ladder) -> PauliSum {
    let mut string = Vec::with_capacity(l.mode);
    for q in 0..l.mode {
        string.push((q, Pauli::Z));
    }
    let sign = if l.mode % 2 == 0 { 1.0 } else { -1.0 };
    let tail = PauliSum::identity(C64::new(sign, 0.0))
        .mul(&PauliSum::from_term(super::pauli::PauliTerm::new(
            C64::new(1.0, 0.0),
            PauliString::new(string).expect("distinct qubits"),
        )));
    let local = if l.dagger {
        PauliSum::sigma_plus(l.mode)
    } else {
        PauliSum::sigma_minus(l.mode)
    };
    tail.mul(&local)
}

/// Jordan-Wigner image with `c_j -> (prod_{l<j} -Z_l) sigma_-^j`.
/// Occupied modes map to `|0>`, the vacuum to `|1...1>`.
pub fn jordan_wigner(expr: &FermionExpr, n: usize) -> Result<PauliSum> {
    jordan_wigner_raw(&expr.to_raw(), n)
}

/// Jordan-Wigner image of an ordered operator product list.
pub fn jordan_wigner_raw(expr: &RawExpr, n: usize) -> Result<PauliSum> {
    if let Some(m) = expr.max_mode() {
        if m >= n {
            return Err(QsimError::OutOfRange { index: m, limit: n });
        }
    }
    let mut out = PauliSum::zero();
    for (c, ops) in &expr.terms {
        let mut acc = PauliSum::identity(*c);
        for &l in ops {
            acc = acc.mul(&jw_ladder(l));
        }
        out = out.add(&acc);
    }
    Ok(out)
}

fn pauli2(p: Option<Pauli>) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match p {
        None => [[o, z], [z, o]],
        Some(Pauli::X) => [[z, o], [o, z]],
        Some(Pauli::Y) => [[z, -i], [i, z]],
        Some(Pauli::Z) => [[o, z], [z, -o]],
    }
}

fn kron_chain(factors: &[[[C64; 2]; 2]]) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        let d = m.nrows();
        let mut next = DMatrix::zeros(2 * d, 2 * d);
        for r in 0..d {
            for c in 0..d {
                let v = m[(r, c)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..2 {
                    for b in 0..2 {
                        next[(2 * r + a, 2 * c + b)] = v * f[a][b];
                    }
                }
            }
        }
        m = next;
    }
    m
}

/// Dense matrix of a single hard-core anyon operator with statistical angle `theta`.
pub fn anyon_ladder_matrix(l: Ladder, theta: f64, n: usize) -> Result<DMatrix<C64>> {
    if l.mode >= n {
        return Err(QsimError::OutOfRange {
            index: l.mode,
            limit: n,
        });
    }
    let ph = if l.dagger {
        C64::from_polar(1.0, -theta)
    } else {
        C64::from_polar(1.0, theta)
    };
    let one = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    // (ph+1)/2 + (ph-1)/2 Z = diag(ph, 1)
    let pref = [[ph, z], [z, one]];
    let local = if l.dagger {
        [[z, one], [z, z]]
    } else {
        [[z, z], [one, z]]
    };
    let mut factors = Vec::with_capacity(n);
    for q in 0..n {
        factors.push(if q < l.mode {
            pref
        } else if q == l.mode {
            local
        } else {
            pauli2(None)
        });
    }
    Ok(kron_chain(&factors))
}

/// Dense image of an ordered anyonic expression (`theta = pi` gives fermions,
/// `theta = 0` hard-core bosons).
pub fn anyon_map(expr: &RawExpr, theta: f64, n: usize) -> Result<DMatrix<C64>> {
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for (c, ops) in &expr.terms {
        let mut acc = DMatrix::identity(dim, dim) * *c;
        for &l in ops {
            acc *= anyon_ladder_matrix(l, theta, n)?;
        }
        out += acc;
    }
    Ok(out)
}

/// Number operator `(1 + Z_j)/2` for the anyon map.
pub fn anyon_number_matrix(j: usize, n: usize) -> Result<DMatrix<C64>> {
    if j >= n {
        return Err(QsimError::OutOfRange { index: j, limit: n });
    }
    let z = C64::new(0.0, 0.0);
    let mut factors = vec![pauli2(None); n];
    factors[j] = [[C64::new(1.0, 0.0), z], [z, z]];
    Ok(kron_chain(&factors))
}

/// Linear mode index `j = m + (l-1) N_x` for row `l` and column `m` (both one-based).
pub fn mode_reindex_2d(l: usize, m: usize, nx: usize, ny: usize) -> Result<usize> {
    if l == 0 || l > ny {
        return Err(QsimError::OutOfRange { index: l, limit: ny });
    }
    if m == 0 || m > nx {
        return Err(QsimError::OutOfRange { index: m, limit: nx });
    }
    Ok(m + (l - 1) * nx)
}
