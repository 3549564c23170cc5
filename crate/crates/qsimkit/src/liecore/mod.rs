//! Finite Lie algebras: structure constants, representations, Cartan-Weyl
//! data and group actions.
//!
//! Convention: `[O_j, O_k] = i sum_m f_{jk}^m O_m` with Hermitian `O_j`.

mod builtin;
mod cartan;
mod expm;
mod json;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::{eigh, is_hermitian, is_unitary, max_abs};

pub use cartan::{is_positive, lex_cmp, CartanWeyl};
pub use expm::{expm, norm1, pade_backward_bound, Expm, DEFAULT_PADE_ORDER};
pub use json::AlgebraFile;

/// Tolerance for bracket, Jacobi and antisymmetry checks.
pub const ALGEBRA_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    labels: Vec<String>,
    /// `f[(j*M + k)*M + m] = f_{jk}^m`.
    f: Vec<f64>,
    rep: Option<Vec<DMatrix<C64>>>,
    cartan: Option<CartanWeyl>,
    highest_weight: Option<Vec<f64>>,
}

fn tr_prod(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

fn comm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

impl AlgebraSpec {
    /// Validate antisymmetry, the Jacobi identity and, when given, that the
    /// representation is Hermitian and reproduces the brackets.
    pub fn new(labels: Vec<String>, f: Vec<f64>, rep: Option<Vec<DMatrix<C64>>>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return invalid("algebra must have at least one generator");
        }
        if f.len() != m * m * m {
            return invalid(format!("structure tensor must have {} entries", m * m * m));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return invalid("structure constants must be finite");
        }
        let spec = AlgebraSpec {
            labels,
            f,
            rep: None,
            cartan: None,
            highest_weight: None,
        };
        spec.check_antisymmetry()?;
        spec.check_jacobi()?;
        match rep {
            Some(r) => spec.with_representation(r),
            None => Ok(spec),
        }
    }

    /// Build from Hermitian matrices, deriving the structure constants.
    pub fn from_representation(labels: Vec<String>, rep: Vec<DMatrix<C64>>) -> Result<Self> {
        let m = labels.len();
        if rep.len() != m {
            return invalid("one matrix per generator is required");
        }
        check_rep_shape(&rep)?;
        let gram = rep_gram(&rep);
        let (vals, _) = eigh(&gram.map(|x| C64::new(x, 0.0)));
        if vals[0] <= 1e-12 * vals[m - 1].max(1e-300) {
            return invalid("representation matrices are linearly dependent");
        }
        let ginv = gram.try_inverse().ok_or_else(|| QsimError::Algebra("singular Gram matrix".into()))?;
        let mut f = vec![0.0; m * m * m];
        for j in 0..m {
            for k in 0..m {
                let c = comm(&rep[j], &rep[k]);
                // Tr([O_j,O_k] O_n) = i sum_m f^m G_mn
                let t: Vec<f64> = (0..m).map(|nn| (tr_prod(&c, &rep[nn]) / C64::new(0.0, 1.0)).re).collect();
                for mm in 0..m {
                    f[(j * m + k) * m + mm] = (0..m).map(|nn| t[nn] * ginv[(nn, mm)]).sum();
                }
            }
        }
        AlgebraSpec::new(labels, f, Some(rep))
    }

    pub fn with_representation(mut self, rep: Vec<DMatrix<C64>>) -> Result<Self> {
        let m = self.dim();
        if rep.len() != m {
            return invalid("one matrix per generator is required");
        }
        check_rep_shape(&rep)?;
        let scale = rep.iter().map(max_abs).fold(0.0, f64::max).max(1.0);
        for j in 0..m {
            for k in j + 1..m {
                let mut want = DMatrix::<C64>::zeros(rep[0].nrows(), rep[0].nrows());
                for mm in 0..m {
                    let v = self.structure(j, k, mm);
                    if v != 0.0 {
                        want += &rep[mm] * C64::new(0.0, v);
                    }
                }
                let err = max_abs(&(comm(&rep[j], &rep[k]) - want));
                if err > ALGEBRA_TOL * scale * scale {
                    return Err(QsimError::Algebra(format!(
                        "representation violates [{}, {}] by {err:.3e}",
                        self.labels[j], self.labels[k]
                    )));
                }
            }
        }
        self.rep = Some(rep);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `f_{jk}^m`.
    pub fn structure(&self, j: usize, k: usize, m: usize) -> f64 {
        let n = self.dim();
        self.f[(j * n + k) * n + m]
    }

    pub fn structure_tensor(&self) -> &[f64] {
        &self.f
    }

    pub fn representation(&self) -> Option<&[DMatrix<C64>]> {
        self.rep.as_deref()
    }

    pub fn cartan(&self) -> Option<&CartanWeyl> {
        self.cartan.as_ref()
    }

    pub fn highest_weight(&self) -> Option<&[f64]> {
        self.highest_weight.as_deref()
    }

    pub fn set_highest_weight(&mut self, e: Vec<f64>) -> Result<()> {
        match &self.cartan {
            Some(cw) if cw.rank() == e.len() => {
                self.highest_weight = Some(e);
                Ok(())
            }
            Some(_) => invalid("highest weight length must equal the rank"),
            None => invalid("a Cartan-Weyl decomposition is needed first"),
        }
    }

    fn check_antisymmetry(&self) -> Result<()> {
        let m = self.dim();
        for j in 0..m {
            for k in 0..m {
                for n in 0..m {
                    if (self.structure(j, k, n) + self.structure(k, j, n)).abs() > ALGEBRA_TOL {
                        return Err(QsimError::Algebra(format!("f not antisymmetric at ({j},{k},{n})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nonzero `(m, f_{ab}^m)` for each pair.
    fn sparse(&self) -> Vec<Vec<(usize, f64)>> {
        let m = self.dim();
        (0..m * m)
            .map(|ab| (0..m).filter_map(|n| {
                let v = self.f[ab * m + n];
                (v != 0.0).then_some((n, v))
            }).collect())
            .collect()
    }

    /// Max violation of `f_ab^m f_mc^n + f_bc^m f_ma^n + f_ca^m f_mb^n = 0`.
    pub fn jacobi_violation(&self) -> f64 {
        let m = self.dim();
        let sp = self.sparse();
        let mut worst: f64 = 0.0;
        let mut acc = vec![0.0; m];
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    acc.iter_mut().for_each(|x| *x = 0.0);
                    for &(x, y, z) in &[(a, b, c), (b, c, a), (c, a, b)] {
                        for &(mm, v) in &sp[x * m + y] {
                            for &(n, w) in &sp[mm * m + z] {
                                acc[n] += v * w;
                            }
                        }
                    }
                    worst = acc.iter().fold(worst, |w, x| w.max(x.abs()));
                }
            }
        }
        worst
    }

    fn check_jacobi(&self) -> Result<()> {
        let v = self.jacobi_violation();
        let scale = self.f.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        if v > ALGEBRA_TOL * scale * scale {
            return Err(QsimError::Algebra(format!("Jacobi identity violated by {v:.3e}")));
        }
        Ok(())
    }

    /// Adjoint matrices `||O_j||_{kl} = -i f_{jk}^l`.
    pub fn adjoint_rep(&self) -> Result<Vec<DMatrix<C64>>> {
        self.check_jacobi()?;
        let m = self.dim();
        Ok((0..m)
            .map(|j| DMatrix::from_fn(m, m, |k, l| C64::new(0.0, -self.structure(j, k, l))))
            .collect())
    }

    /// `K(O_j, O_k) = Tr[ad_j ad_k]`.
    pub fn killing_form(&self) -> Result<DMatrix<f64>> {
        let ad = self.adjoint_rep()?;
        Ok(rep_gram(&ad))
    }

    /// The metric used for orthonormalisation: the trace form of the stored
    /// representation, or the Killing form without one.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        match &self.rep {
            Some(r) => Ok(rep_gram(r)),
            None => self.killing_form(),
        }
    }

    /// Löwdin-orthonormalised copy: `O'_a = sum_j (G^{-1/2})_{aj} O_j`, so that
    /// the chosen representation satisfies `Tr[O'_a O'_b] = delta_ab`.
    pub fn killing_orthonormalize(&self) -> Result<AlgebraSpec> {
        let m = self.dim();
        let g = self.gram()?;
        let sym = g.map(|x| C64::new(x, 0.0));
        let (vals, vecs) = eigh(&sym);
        let top = vals[m - 1].abs().max(1e-300);
        if vals[0] <= 1e-10 * top {
            return Err(QsimError::Algebra(
                "degenerate invariant form: algebra is not compact semi-simple in this representation".into(),
            ));
        }
        let t = (&vecs
            * DMatrix::from_diagonal(&DVector::from_iterator(m, vals.iter().map(|v| C64::new(v.powf(-0.5), 0.0))))
            * vecs.adjoint())
        .map(|x| x.re);
        let tinv = (&vecs
            * DMatrix::from_diagonal(&DVector::from_iterator(m, vals.iter().map(|v| C64::new(v.sqrt(), 0.0)))))
            * vecs.adjoint();
        let tinv = tinv.map(|x| x.re);
        let mut f = vec![0.0; m * m * m];
        // f'_{ab}^c = T_aj T_bk f_jk^l Tinv_lc
        let mut tmp = vec![0.0; m * m * m];
        for a in 0..m {
            for k in 0..m {
                for l in 0..m {
                    tmp[(a * m + k) * m + l] = (0..m).map(|j| t[(a, j)] * self.structure(j, k, l)).sum();
                }
            }
        }
        let mut tmp2 = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for l in 0..m {
                    tmp2[(a * m + b) * m + l] = (0..m).map(|k| t[(b, k)] * tmp[(a * m + k) * m + l]).sum();
                }
            }
        }
        for ab in 0..m * m {
            for c in 0..m {
                f[ab * m + c] = (0..m).map(|l| tmp2[ab * m + l] * tinv[(l, c)]).sum();
            }
        }
        for x in f.iter_mut() {
            if x.abs() < 1e-14 {
                *x = 0.0;
            }
        }
        let rep = self.rep.as_ref().map(|r| {
            (0..m)
                .map(|a| {
                    let mut o = DMatrix::<C64>::zeros(r[0].nrows(), r[0].ncols());
                    for j in 0..m {
                        if t[(a, j)] != 0.0 {
                            o += &r[j] * C64::new(t[(a, j)], 0.0);
                        }
                    }
                    o
                })
                .collect()
        });
        let mut out = AlgebraSpec::new(self.labels.clone(), f, rep)?;
        if let Some(cw) = &self.cartan {
            out = out.with_cartan(&cw.csa)?;
            if out.rep.is_none() {
                out.highest_weight = None;
            }
        }
        Ok(out)
    }

    /// Matrix of the element `sum_j zeta_j O_j` in the stored representation
    /// (adjoint representation if none is stored).
    pub fn element_matrix(&self, zeta: &[f64]) -> Result<DMatrix<C64>> {
        if zeta.len() != self.dim() {
            return invalid("coefficient vector length must equal the algebra dimension");
        }
        let ad;
        let rep: &[DMatrix<C64>] = match &self.rep {
            Some(r) => r,
            None => {
                ad = self.adjoint_rep()?;
                &ad
            }
        };
        let p = rep[0].nrows();
        let mut h = DMatrix::<C64>::zeros(p, p);
        for (z, o) in zeta.iter().zip(rep) {
            if *z != 0.0 {
                h += o * C64::new(*z, 0.0);
            }
        }
        Ok(h)
    }

    fn rep_or_adjoint(&self) -> Result<Vec<DMatrix<C64>>> {
        match &self.rep {
            Some(r) => Ok(r.clone()),
            None => self.adjoint_rep(),
        }
    }

    fn require_orthonormal(&self) -> Result<Vec<DMatrix<C64>>> {
        let rep = self.rep_or_adjoint()?;
        let g = rep_gram(&rep);
        let m = self.dim();
        let dev = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| (g[(a, b)] - if a == b { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        if dev > 1e-8 {
            return invalid("basis is not orthonormal; call killing_orthonormalize first");
        }
        Ok(rep)
    }

    /// Row `nu_j` with `U^dag O_j U = sum_k nu_jk O_k`, `nu_jk = Tr[O'_j O_k]`.
    pub fn adjoint_action(&self, u: &GroupElement, j: usize) -> Result<Vec<f64>> {
        let m = self.dim();
        if j >= m {
            return Err(QsimError::OutOfRange { index: j, limit: m });
        }
        let rep = self.require_orthonormal()?;
        if rep[0].nrows() != u.matrix.nrows() {
            return invalid("group element is not in this representation");
        }
        let rotated = u.matrix.adjoint() * &rep[j] * &u.matrix;
        Ok(rep.iter().map(|o| tr_prod(&rotated, o).re).collect())
    }

    /// Full matrix `nu` by traces.
    pub fn adjoint_action_matrix(&self, u: &GroupElement) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let mut nu = DMatrix::zeros(m, m);
        for j in 0..m {
            let row = self.adjoint_action(u, j)?;
            for (k, v) in row.into_iter().enumerate() {
                nu[(j, k)] = v;
            }
        }
        Ok(nu)
    }

    /// `nu = exp(i H_ad)` from the adjoint representation of `H = sum zeta_j O_j`.
    pub fn adjoint_action_exp(&self, zeta: &[f64]) -> Result<DMatrix<f64>> {
        if zeta.len() != self.dim() {
            return invalid("coefficient vector length must equal the algebra dimension");
        }
        let ad = self.adjoint_rep()?;
        let m = self.dim();
        let mut h = DMatrix::<C64>::zeros(m, m);
        for (z, o) in zeta.iter().zip(&ad) {
            h += o * C64::new(*z, 0.0);
        }
        let e = expm(&(h * C64::new(0.0, 1.0)), 1e-16)?;
        Ok(e.matrix.map(|x| x.re))
    }

    /// `e - sum_j n_j alpha_j` for lowering counts `n_j` (an empty slice means none).
    pub fn weight_of(&self, counts: &[usize]) -> Result<Vec<f64>> {
        let cw = self
            .cartan
            .as_ref()
            .ok_or_else(|| QsimError::Algebra("no Cartan-Weyl decomposition".into()))?;
        let e = self
            .highest_weight
            .as_ref()
            .ok_or_else(|| QsimError::Algebra("highest weight not known".into()))?;
        cw.descend(e, counts)
    }
}

fn check_rep_shape(rep: &[DMatrix<C64>]) -> Result<()> {
    let p = rep.first().map(|r| r.nrows()).unwrap_or(0);
    if p == 0 {
        return invalid("empty representation");
    }
    for (j, r) in rep.iter().enumerate() {
        if r.nrows() != p || r.ncols() != p {
            return invalid(format!("representation matrix {j} has the wrong shape"));
        }
        if !is_hermitian(r, ALGEBRA_TOL * max_abs(r).max(1.0)) {
            return Err(QsimError::NotHermitian(format!("representation matrix {j}")));
        }
    }
    Ok(())
}

/// `Re Tr[O_j O_k]`.
fn rep_gram(rep: &[DMatrix<C64>]) -> DMatrix<f64> {
    let m = rep.len();
    DMatrix::from_fn(m, m, |j, k| tr_prod(&rep[j], &rep[k]).re)
}

/// `U = exp(i sum_j zeta_j O_j)` with its matrix in the stored representation.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub zeta: Vec<f64>,
    pub matrix: DMatrix<C64>,
}

impl GroupElement {
    pub fn new(spec: &AlgebraSpec, zeta: &[f64]) -> Result<Self> {
        if zeta.iter().any(|z| !z.is_finite()) {
            return invalid("group coefficients must be finite");
        }
        let h = spec.element_matrix(zeta)?;
        let e = expm(&(h * C64::new(0.0, 1.0)), 1e-16)?;
        if !is_unitary(&e.matrix, 1e-10) {
            return Err(QsimError::NotUnitary("group element".into()));
        }
        Ok(GroupElement {
            zeta: zeta.to_vec(),
            matrix: e.matrix,
        })
    }

    pub fn identity(spec: &AlgebraSpec) -> Result<Self> {
        GroupElement::new(spec, &vec![0.0; spec.dim()])
    }
}
