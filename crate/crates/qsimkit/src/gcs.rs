//! Generalized coherent states `|phi> = U |HW>` of a Lie algebra and the
//! classical evaluation of their correlation functions.
//!
//! Operators are coefficient vectors over the (orthonormal) basis; complex
//! coefficients are allowed so that ladder operators can be passed directly.
//! Higher-order correlations normal-order the lowering words produced by the
//! raising parts against `|HW>`, the Lie-algebraic analogue of Wick's theorem.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::eigh;
use crate::liecore::{AlgebraSpec, CartanWeyl, GroupElement};
use crate::meanfield::{adjoint_rotation, diagonalize, AlgebraElement};

/// Largest correlation order accepted by [`gcs_expectation_higher`].
pub const MAX_ORDER: usize = 6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Normalisations `K` for `P = K sum <O_j>^2`, each for the basis the paper
/// uses in that context (Pauli matrices, unshifted fermion bilinears, ...).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PurityNorm {
    /// `1/2`: su(2) + su(2) on two qubits, basis `sigma^a_mu`.
    TwoQubitLocal,
    /// `1/N`: one su(2) per qubit, basis `sigma^a_mu`.
    QubitLocal(usize),
    /// `2/N`: u(N) on `N` fermionic modes.
    FermionUn(usize),
    /// `3/4`: local su(2) on a spin-1 particle.
    SpinOneLocal,
    /// `4/N^2`: the LMG pseudospin algebra.
    Lmg(usize),
}

impl PurityNorm {
    pub fn k(self) -> f64 {
        match self {
            PurityNorm::TwoQubitLocal => 0.5,
            PurityNorm::QubitLocal(n) => 1.0 / n as f64,
            PurityNorm::FermionUn(n) => 2.0 / n as f64,
            PurityNorm::SpinOneLocal => 0.75,
            PurityNorm::Lmg(n) => 4.0 / (n as f64 * n as f64),
        }
    }
}

/// `P = K sum_j <O_j>^2`.
pub fn h_purity(expectations: &[f64], k: f64) -> f64 {
    k * expectations.iter().map(|x| x * x).sum::<f64>()
}

fn cartan_of(spec: &AlgebraSpec) -> Result<&CartanWeyl> {
    spec.cartan()
        .ok_or_else(|| QsimError::Algebra("no Cartan-Weyl decomposition".into()))
}

fn require_orthonormal(spec: &AlgebraSpec) -> Result<()> {
    let g = spec.gram()?;
    let m = spec.dim();
    if (g - DMatrix::<f64>::identity(m, m)).abs().max() > 1e-8 {
        return invalid("basis is not orthonormal; call killing_orthonormalize first");
    }
    Ok(())
}

/// Highest-weight vector of the stored representation (lexicographically
/// largest weight of a generic Cartan element's eigenvectors).
pub fn highest_weight_vector(spec: &AlgebraSpec) -> Result<DVector<C64>> {
    let cw = cartan_of(spec)?;
    let rep = spec
        .representation()
        .ok_or_else(|| QsimError::Algebra("no representation stored".into()))?;
    let e = spec
        .highest_weight()
        .ok_or_else(|| QsimError::Algebra("highest weight not known".into()))?;
    let p = rep[0].nrows();
    let mut hg = DMatrix::<C64>::zeros(p, p);
    for (k, &c) in cw.csa.iter().enumerate() {
        hg += &rep[c] * C64::new(1.0 + 0.1 * (k as f64 + 2.0).sqrt(), 0.0);
    }
    let (_, vecs) = eigh(&hg);
    for i in 0..p {
        let v = vecs.column(i).into_owned();
        let w: Vec<f64> = cw.csa.iter().map(|&c| (v.adjoint() * &rep[c] * &v)[(0, 0)].re).collect();
        if w.iter().zip(e).all(|(a, b)| (a - b).abs() < 1e-8) {
            return Ok(v);
        }
    }
    Err(QsimError::Algebra("no eigenvector carries the highest weight".into()))
}

/// Dimension of the module generated from `v` by the lowering operators.
fn cyclic_dimension(spec: &AlgebraSpec, v: &DVector<C64>) -> Result<usize> {
    let l = cartan_of(spec)?.n_roots();
    let lower: Vec<DMatrix<C64>> = (0..l).map(|j| spec.lowering_matrix(j)).collect::<Result<_>>()?;
    let p = v.len();
    let mut basis: Vec<DVector<C64>> = vec![v.normalize()];
    let mut next = 0;
    while next < basis.len() && basis.len() < p {
        let cur = basis[next].clone();
        next += 1;
        for lm in &lower {
            let mut w = lm * &cur;
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
            let nw = w.norm();
            if nw > 1e-9 {
                basis.push(w / C64::new(nw, 0.0));
            }
        }
    }
    Ok(basis.len())
}

/// Whether the stored representation is irreducible: the highest-weight
/// vector must generate the whole space.
pub fn is_irreducible(spec: &AlgebraSpec) -> Result<bool> {
    let v = highest_weight_vector(spec)?;
    Ok(cyclic_dimension(spec, &v)? == v.len())
}

/// Cartan-Weyl parts of a complex coefficient vector:
/// `W = sum h_k h_k + sum_j (up_j E_j + down_j E_-j)`.
#[derive(Clone, Debug)]
struct Ladder {
    h: Vec<C64>,
    up: Vec<C64>,
    down: Vec<C64>,
}

fn decompose(cw: &CartanWeyl, v: &[C64]) -> Result<Ladder> {
    let h: Vec<C64> = cw.csa.iter().map(|&c| v[c]).collect();
    let mut up = Vec::with_capacity(cw.n_roots());
    let mut down = Vec::with_capacity(cw.n_roots());
    for r in &cw.raising {
        let nn: f64 = r.iter().map(|x| x.norm_sqr()).sum();
        up.push(r.iter().zip(v).map(|(a, x)| a.conj() * x).sum::<C64>() / nn);
        down.push(r.iter().zip(v).map(|(a, x)| a * x).sum::<C64>() / nn);
    }
    let mut back = vec![ZERO; v.len()];
    for (x, &c) in h.iter().zip(&cw.csa) {
        back[c] += x;
    }
    for ((u, d), r) in up.iter().zip(&down).zip(&cw.raising) {
        for (b, a) in back.iter_mut().zip(r.iter()) {
            *b += u * a + d * a.conj();
        }
    }
    let scale = v.iter().fold(1.0f64, |s, x| s.max(x.norm()));
    let err = back.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if err > 1e-10 * scale {
        return Err(QsimError::Algebra(format!("operator lies outside the algebra (error {err:.2e})")));
    }
    Ok(Ladder { h, up, down })
}

/// A generalized coherent state `U |HW>`, `U = e^{iF_n} ... e^{iF_1}` with
/// `F_i = sum_j zeta^i_j O_j`.
#[derive(Clone, Debug)]
pub struct GcsState<'a> {
    spec: &'a AlgebraSpec,
    factors: Vec<Vec<f64>>,
    weight: Vec<f64>,
    /// Coefficient map `W -> U^dag W U`.
    nu: DMatrix<f64>,
}

impl<'a> GcsState<'a> {
    /// `e^{i zeta.O} |HW>` for the stored highest weight. A stored
    /// representation must be irreducible.
    pub fn new(spec: &'a AlgebraSpec, zeta: &[f64]) -> Result<Self> {
        Self::from_factors(spec, vec![zeta.to_vec()])
    }

    pub fn from_factors(spec: &'a AlgebraSpec, factors: Vec<Vec<f64>>) -> Result<Self> {
        let e = spec
            .highest_weight()
            .ok_or_else(|| QsimError::Algebra("highest weight not known".into()))?
            .to_vec();
        if spec.representation().is_some() && !is_irreducible(spec)? {
            return Err(QsimError::Algebra(
                "representation is reducible; pass a highest-weight vector of one irreducible component".into(),
            ));
        }
        Self::build(spec, factors, e)
    }

    /// State built on a given highest-weight vector of the stored
    /// representation, which may then be reducible.
    pub fn from_highest_weight_vector(spec: &'a AlgebraSpec, factors: Vec<Vec<f64>>, v: &DVector<C64>) -> Result<Self> {
        let cw = cartan_of(spec)?;
        let rep = spec
            .representation()
            .ok_or_else(|| QsimError::Algebra("no representation stored".into()))?;
        if v.len() != rep[0].nrows() || v.norm() == 0.0 {
            return invalid("vector does not match the representation");
        }
        let v = v.normalize();
        let mut e = Vec::with_capacity(cw.rank());
        for &c in &cw.csa {
            let hv = &rep[c] * &v;
            let ek = v.dotc(&hv).re;
            if (hv - &v * C64::new(ek, 0.0)).norm() > 1e-9 {
                return Err(QsimError::Algebra("vector is not a weight state".into()));
            }
            e.push(ek);
        }
        for j in 0..cw.n_roots() {
            if (spec.raising_matrix(j)? * &v).norm() > 1e-9 {
                return Err(QsimError::Algebra("vector is not annihilated by every raising operator".into()));
            }
        }
        Self::build(spec, factors, e)
    }

    fn build(spec: &'a AlgebraSpec, factors: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self> {
        require_orthonormal(spec)?;
        cartan_of(spec)?;
        let m = spec.dim();
        let mut nu = DMatrix::<f64>::identity(m, m);
        for z in &factors {
            if z.len() != m {
                return invalid("group coefficients must match the algebra dimension");
            }
            if z.iter().any(|x| !x.is_finite()) {
                return invalid("group coefficients must be finite");
            }
            nu *= adjoint_rotation(spec, &z.iter().map(|x| -x).collect::<Vec<_>>())?;
        }
        Ok(GcsState { spec, factors, weight, nu })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        self.spec
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    /// `U` in the stored representation.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        let p = self.spec.element_matrix(&vec![0.0; self.spec.dim()])?.nrows();
        let mut u = DMatrix::<C64>::identity(p, p);
        for z in &self.factors {
            u = GroupElement::new(self.spec, z)?.matrix * u;
        }
        Ok(u)
    }

    fn transformed(&self, w: &[C64]) -> Result<Ladder> {
        if w.len() != self.spec.dim() {
            return invalid("operator length must equal the algebra dimension");
        }
        let m = w.len();
        let v: Vec<C64> = (0..m)
            .map(|i| (0..m).map(|j| w[j] * self.nu[(i, j)]).sum())
            .collect();
        decompose(cartan_of(self.spec)?, &v)
    }

    fn h_value(&self, l: &Ladder, shift: &[f64]) -> C64 {
        l.h.iter()
            .zip(&self.weight)
            .zip(shift)
            .map(|((x, e), s)| x * (e - s))
            .sum()
    }

    /// `<O_j>` for every basis element.
    pub fn expectations(&self) -> Result<Vec<f64>> {
        let m = self.spec.dim();
        (0..m)
            .map(|j| {
                let mut w = vec![0.0; m];
                w[j] = 1.0;
                gcs_expectation_linear(self, &AlgebraElement { coeffs: w })
            })
            .collect()
    }
}

fn to_complex(w: &AlgebraElement) -> Vec<C64> {
    w.coeffs.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `<phi|W|phi> = sum_k gamma_k e_k` after rotating `W` by `U`.
pub fn gcs_expectation_linear(state: &GcsState, w: &AlgebraElement) -> Result<f64> {
    Ok(gcs_expectation_linear_complex(state, &to_complex(w))?.re)
}

pub fn gcs_expectation_linear_complex(state: &GcsState, w: &[C64]) -> Result<C64> {
    let l = state.transformed(w)?;
    Ok(state.h_value(&l, &vec![0.0; l.h.len()]))
}

/// `<phi|W1 W2|phi>`: Cartan-Cartan products plus `E_a E_-a` contractions.
pub fn gcs_expectation_quadratic(state: &GcsState, w1: &[C64], w2: &[C64]) -> Result<C64> {
    let cw = cartan_of(state.spec)?;
    let a = state.transformed(w1)?;
    let b = state.transformed(w2)?;
    let zero = vec![0.0; a.h.len()];
    let mut v = state.h_value(&a, &zero) * state.h_value(&b, &zero);
    for (j, root) in cw.roots.iter().enumerate() {
        let ae: f64 = root.iter().zip(&state.weight).map(|(x, e)| x * e).sum();
        v += a.up[j] * b.down[j] * ae;
    }
    Ok(v)
}

/// Decomposition of `[E_b, E_-a]` over the Cartan-Weyl basis.
#[derive(Clone, Debug, Default)]
struct Bracket {
    h: Vec<(usize, C64)>,
    up: Vec<(usize, C64)>,
    down: Vec<(usize, C64)>,
}

type Word = Vec<u8>;
type Terms = Vec<(Word, C64)>;

/// Normal ordering of `E_b E_-s1 ... E_-sq |HW>` into lowering words.
struct Normalizer<'c> {
    cw: &'c CartanWeyl,
    weight: Vec<f64>,
    brackets: Vec<Vec<Bracket>>,
    memo: HashMap<(u8, Word), Terms>,
}

impl<'c> Normalizer<'c> {
    fn new(spec: &AlgebraSpec, cw: &'c CartanWeyl, weight: Vec<f64>) -> Result<Self> {
        let l = cw.n_roots();
        if l > u8::MAX as usize {
            return invalid("too many roots for the correlation engine");
        }
        let tol = 1e-12;
        let mut brackets = vec![vec![Bracket::default(); l]; l];
        for b in 0..l {
            for a in 0..l {
                let c = spec.bracket_coeffs(&cw.raising[b], &cw.lowering(a));
                let d = decompose(cw, c.as_slice())?;
                let keep = |v: &[C64]| -> Vec<(usize, C64)> {
                    v.iter().enumerate().filter(|(_, x)| x.norm() > tol).map(|(i, x)| (i, *x)).collect()
                };
                brackets[b][a] = Bracket {
                    h: keep(&d.h),
                    up: keep(&d.up),
                    down: keep(&d.down),
                };
            }
        }
        Ok(Normalizer {
            cw,
            weight,
            brackets,
            memo: HashMap::new(),
        })
    }

    /// Weight of `E_-s1 ... E_-sq |HW>`.
    fn word_weight(&self, w: &[u8]) -> Vec<f64> {
        let mut e = self.weight.clone();
        for &s in w {
            for (x, a) in e.iter_mut().zip(&self.cw.roots[s as usize]) {
                *x -= a;
            }
        }
        e
    }

    fn raise(&mut self, beta: u8, word: &[u8]) -> Terms {
        if word.is_empty() {
            return Vec::new();
        }
        let key = (beta, word.to_vec());
        if let Some(t) = self.memo.get(&key) {
            return t.clone();
        }
        let s1 = word[0];
        let rest = &word[1..];
        let mut acc: HashMap<Word, C64> = HashMap::new();
        // E_b E_-s1 Y = E_-s1 (E_b Y) + [E_b, E_-s1] Y
        for (w, c) in self.raise(beta, rest) {
            let mut nw = Vec::with_capacity(w.len() + 1);
            nw.push(s1);
            nw.extend_from_slice(&w);
            *acc.entry(nw).or_insert(ZERO) += c;
        }
        let br = self.brackets[beta as usize][s1 as usize].clone();
        if !br.h.is_empty() {
            let e = self.word_weight(rest);
            let v: C64 = br.h.iter().map(|(k, c)| c * e[*k]).sum();
            *acc.entry(rest.to_vec()).or_insert(ZERO) += v;
        }
        for (j, c) in br.up {
            for (w, d) in self.raise(j as u8, rest) {
                *acc.entry(w).or_insert(ZERO) += c * d;
            }
        }
        for (j, c) in br.down {
            let mut nw = Vec::with_capacity(rest.len() + 1);
            nw.push(j as u8);
            nw.extend_from_slice(rest);
            *acc.entry(nw).or_insert(ZERO) += c;
        }
        let out: Terms = acc.into_iter().filter(|(_, c)| *c != ZERO).collect();
        self.memo.insert(key, out.clone());
        out
    }
}

/// `<phi| W^p ... W^1 |phi>` with `ops = [W^1, ..., W^p]` (`W^1` acts first).
pub fn gcs_expectation_higher(state: &GcsState, ops: &[Vec<C64>]) -> Result<C64> {
    if ops.is_empty() {
        return invalid("correlation order must be at least 1");
    }
    if ops.len() > MAX_ORDER {
        return invalid(format!("correlation order {} exceeds the limit of {MAX_ORDER}", ops.len()));
    }
    let cw = cartan_of(state.spec)?;
    let mut norm = Normalizer::new(state.spec, cw, state.weight.clone())?;
    let mut z: HashMap<Word, C64> = HashMap::from([(Vec::new(), C64::new(1.0, 0.0))]);
    for w in ops {
        let l = state.transformed(w)?;
        let mut next: HashMap<Word, C64> = HashMap::new();
        for (word, c) in &z {
            let e = norm.word_weight(word);
            let hv: C64 = l.h.iter().zip(&e).map(|(x, ek)| x * ek).sum();
            if hv != ZERO {
                *next.entry(word.clone()).or_insert(ZERO) += hv * c;
            }
            for (j, d) in l.down.iter().enumerate() {
                if *d != ZERO {
                    let mut nw = Vec::with_capacity(word.len() + 1);
                    nw.push(j as u8);
                    nw.extend_from_slice(word);
                    *next.entry(nw).or_insert(ZERO) += d * c;
                }
            }
            for (j, u) in l.up.iter().enumerate() {
                if *u != ZERO {
                    for (nw, x) in norm.raise(j as u8, word) {
                        *next.entry(nw).or_insert(ZERO) += u * x * c;
                    }
                }
            }
        }
        z = next;
    }
    Ok(z.get(&Vec::new()).copied().unwrap_or(ZERO))
}

/// The coherent state with the given expectations `<O_j>`: the ground state
/// of `H_F = -sum <O_j> O_j`, reached by diagonalizing `H_F`. Inputs whose
/// squared length falls short of the coherent-state value `|e|^2` are
/// rejected.
pub fn gcs_prepare_from_expectations<'a>(spec: &'a AlgebraSpec, expectations: &[f64]) -> Result<GcsState<'a>> {
    let e = spec
        .highest_weight()
        .ok_or_else(|| QsimError::Algebra("highest weight not known".into()))?
        .to_vec();
    prepare_with_weight(spec, expectations, e, true)
}

/// As [`gcs_prepare_from_expectations`] for the irreducible component with
/// highest weight `e` of a possibly reducible representation.
pub fn gcs_prepare_with_weight<'a>(spec: &'a AlgebraSpec, expectations: &[f64], e: &[f64]) -> Result<GcsState<'a>> {
    prepare_with_weight(spec, expectations, e.to_vec(), false)
}

fn prepare_with_weight<'a>(
    spec: &'a AlgebraSpec,
    expectations: &[f64],
    e: Vec<f64>,
    check_irreducible: bool,
) -> Result<GcsState<'a>> {
    if expectations.len() != spec.dim() {
        return invalid("one expectation per basis element is required");
    }
    if check_irreducible && spec.representation().is_some() && !is_irreducible(spec)? {
        return Err(QsimError::Algebra("representation is reducible".into()));
    }
    let len2: f64 = expectations.iter().map(|x| x * x).sum();
    let e2: f64 = e.iter().map(|x| x * x).sum();
    if e2 == 0.0 || (len2 - e2).abs() > 1e-8 * e2.max(1.0) {
        return Err(QsimError::InvalidArgument(format!(
            "expectations have squared length {len2:.6e}, not the coherent-state value {e2:.6e}"
        )));
    }
    let hf = AlgebraElement::new(spec, expectations.iter().map(|x| -x).collect())?;
    let res = diagonalize(spec, &hf, 1e-24 * len2.max(1.0))?;
    // H_D = U H_F U^dag, ground state U^dag |HW>
    let factors: Vec<Vec<f64>> = res
        .rotations
        .iter()
        .rev()
        .map(|z| z.iter().map(|x| -x).collect())
        .collect();
    GcsState::build(spec, factors, e)
}
