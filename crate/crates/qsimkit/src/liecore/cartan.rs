//! Cartan-Weyl decomposition from a chosen Cartan subalgebra.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{AlgebraSpec, ALGEBRA_TOL};
use crate::error::{invalid, QsimError, Result};
use crate::linalg::{eigh, max_abs};

const ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CartanWeyl {
    /// Basis indices spanning the Cartan subalgebra.
    pub csa: Vec<usize>,
    /// Positive roots in increasing lexicographic order.
    pub roots: Vec<Vec<f64>>,
    /// Coefficients of `E_alpha` in the basis; `E_{-alpha}` has the conjugates.
    pub raising: Vec<DVector<C64>>,
    /// `(j, k, target, N_jk)` with `[E_j, E_k] = N_jk E_target`.
    pub root_sums: Vec<(usize, usize, usize, C64)>,
}

/// Lexicographic comparison with tolerance.
pub fn lex_cmp(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// True when the first component larger than `tol` in modulus is positive.
pub fn is_positive(v: &[f64], tol: f64) -> bool {
    v.iter().find(|x| x.abs() > tol).is_some_and(|x| *x > 0.0)
}

fn sym_pow(g: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let (vals, vecs) = eigh(&g.map(|x| C64::new(x, 0.0)));
    let n = vals.len();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|v| C64::new(v.powf(p), 0.0))));
    (&vecs * d * vecs.adjoint()).map(|x| x.re)
}

impl CartanWeyl {
    pub fn rank(&self) -> usize {
        self.csa.len()
    }

    pub fn n_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn lowering(&self, j: usize) -> DVector<C64> {
        self.raising[j].map(|x| x.conj())
    }

    pub(crate) fn descend(&self, e: &[f64], counts: &[usize]) -> Result<Vec<f64>> {
        if !counts.is_empty() && counts.len() != self.roots.len() {
            return invalid(format!("expected {} lowering counts", self.roots.len()));
        }
        let mut w = e.to_vec();
        for (n, a) in counts.iter().zip(&self.roots) {
            for (wk, ak) in w.iter_mut().zip(a) {
                *wk -= *n as f64 * ak;
            }
        }
        Ok(w)
    }

    /// Compare supplied positive roots against the computed ones as sets.
    pub fn check_roots(&self, supplied: &[Vec<f64>]) -> Result<()> {
        let mut s: Vec<Vec<f64>> = supplied.to_vec();
        s.sort_by(|a, b| lex_cmp(a, b, ROOT_TOL));
        let ok = s.len() == self.roots.len()
            && s.iter().zip(&self.roots).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6 * (1.0 + y.abs()))
            });
        if ok {
            Ok(())
        } else {
            Err(QsimError::Algebra(format!(
                "supplied roots {s:?} do not match the structure constants (computed {:?})",
                self.roots
            )))
        }
    }
}

impl AlgebraSpec {
    /// Copy with the Cartan-Weyl data for the given Cartan subalgebra. Roots
    /// are the joint eigenvalues of `ad h_k`; raising operators are scaled so
    /// that `[E_a, E_{-a}] = sum_k a^k h_k`.
    pub fn with_cartan(&self, csa: &[usize]) -> Result<AlgebraSpec> {
        let m = self.dim();
        let r = csa.len();
        if r == 0 {
            return invalid("Cartan subalgebra must be non-empty");
        }
        for (i, &a) in csa.iter().enumerate() {
            if a >= m {
                return Err(QsimError::OutOfRange { index: a, limit: m });
            }
            if csa[..i].contains(&a) {
                return invalid("repeated Cartan index");
            }
            for &b in csa {
                if (0..m).any(|k| self.structure(a, b, k).abs() > ALGEBRA_TOL) {
                    return Err(QsimError::Algebra(format!(
                        "{} and {} do not commute",
                        self.labels[a], self.labels[b]
                    )));
                }
            }
        }
        if (m - r) % 2 != 0 {
            return Err(QsimError::Algebra("r + 2l = M cannot hold".into()));
        }
        let l = (m - r) / 2;
        let g = self.gram()?;
        let gmin = g.symmetric_eigenvalues().min();
        if gmin <= 1e-10 * g.abs().max() {
            return Err(QsimError::Algebra("invariant form is not positive definite".into()));
        }
        let gh = sym_pow(&g, 0.5).map(|x| C64::new(x, 0.0));
        let gih = sym_pow(&g, -0.5).map(|x| C64::new(x, 0.0));
        let b_mats: Vec<DMatrix<C64>> = csa
            .iter()
            .map(|&k| {
                let a = DMatrix::from_fn(m, m, |mm, j| C64::new(0.0, self.structure(k, j, mm)));
                &gh * a * &gih
            })
            .collect();
        for b in &b_mats {
            if max_abs(&(b - b.adjoint())) > 1e-8 * max_abs(b).max(1.0) {
                return Err(QsimError::Algebra("ad h is not self-adjoint for the invariant form".into()));
            }
        }
        let scale = b_mats.iter().map(max_abs).fold(0.0, f64::max).max(1.0);
        let mut found = None;
        for attempt in 0..6 {
            let gv: Vec<f64> = (0..r)
                .map(|k| 1.0 + ((k + 2) as f64 * (1.0 + attempt as f64 * 0.37)).sqrt().fract() * 0.9 + 0.1 * k as f64)
                .collect();
            let mut bg = DMatrix::<C64>::zeros(m, m);
            for (gk, b) in gv.iter().zip(&b_mats) {
                bg += b * C64::new(*gk, 0.0);
            }
            let (vals, vecs) = eigh(&bg);
            let zero = vals.iter().filter(|v| v.abs() < 1e-9 * scale).count();
            let nonzero: Vec<usize> = (0..m).filter(|&i| vals[i].abs() >= 1e-9 * scale).collect();
            let simple = nonzero.iter().all(|&i| {
                (i == 0 || (vals[i] - vals[i - 1]).abs() > 1e-7 * scale)
                    && (i + 1 == m || (vals[i + 1] - vals[i]).abs() > 1e-7 * scale)
            });
            if zero != r {
                return Err(QsimError::Algebra(format!(
                    "Cartan subalgebra is not maximal: {zero} zero modes for rank {r}"
                )));
            }
            if simple {
                found = Some((nonzero, vecs));
                break;
            }
        }
        let (nonzero, vecs) = found.ok_or_else(|| QsimError::Algebra("degenerate root spaces".into()))?;
        let mut pairs: Vec<(Vec<f64>, DVector<C64>)> = Vec::new();
        for i in nonzero {
            let w = vecs.column(i).into_owned();
            let alpha: Vec<f64> = b_mats.iter().map(|b| (w.adjoint() * b * &w)[(0, 0)].re).collect();
            if !is_positive(&alpha, ROOT_TOL) {
                continue;
            }
            let c = &gih * &w;
            pairs.push((alpha, c));
        }
        if pairs.len() != l {
            return Err(QsimError::Algebra(format!("found {} positive roots, expected {l}", pairs.len())));
        }
        pairs.sort_by(|a, b| lex_cmp(&a.0, &b.0, ROOT_TOL));
        let mut roots = Vec::with_capacity(l);
        let mut raising = Vec::with_capacity(l);
        for (alpha, mut c) in pairs {
            let v = self.bracket_coeffs(&c, &c.map(|x| x.conj()));
            let off = (0..m).filter(|k| !csa.contains(k)).map(|k| v[k].norm()).fold(0.0, f64::max);
            let vc: Vec<f64> = csa.iter().map(|&k| v[k].re).collect();
            let aa: f64 = alpha.iter().map(|x| x * x).sum();
            let kappa = vc.iter().zip(&alpha).map(|(x, y)| x * y).sum::<f64>() / aa;
            let resid = vc.iter().zip(&alpha).map(|(x, y)| (x - kappa * y).abs()).fold(0.0, f64::max);
            if off > 1e-8 * kappa.abs().max(1e-300) || resid > 1e-8 * kappa.abs().max(1e-300) || kappa <= 0.0 {
                return Err(QsimError::Algebra(format!(
                    "[E_a, E_-a] is not proportional to a.h for root {alpha:?}; orthonormalize first"
                )));
            }
            c /= C64::new(kappa.sqrt(), 0.0);
            let big = c.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
            c *= big.conj() / big.norm();
            roots.push(alpha);
            raising.push(c);
        }
        let mut root_sums = Vec::new();
        for j in 0..l {
            for k in 0..l {
                if j == k {
                    continue;
                }
                let sum: Vec<f64> = roots[j].iter().zip(&roots[k]).map(|(a, b)| a + b).collect();
                if let Some(t) = roots.iter().position(|x| lex_cmp(x, &sum, 1e-6) == Ordering::Equal) {
                    let v = self.bracket_coeffs(&raising[j], &raising[k]);
                    let gc = g.map(|x| C64::new(x, 0.0));
                    let num = (raising[t].adjoint() * &gc * &v)[(0, 0)];
                    let den = (raising[t].adjoint() * &gc * &raising[t])[(0, 0)];
                    root_sums.push((j, k, t, num / den));
                }
            }
        }
        let cw = CartanWeyl {
            csa: csa.to_vec(),
            roots,
            raising,
            root_sums,
        };
        let mut out = self.clone();
        out.cartan = Some(cw);
        out.highest_weight = None;
        if out.rep.is_some() {
            out.highest_weight = Some(out.highest_weight_from_rep()?);
        }
        Ok(out)
    }

    /// Coefficients of `[sum a_j O_j, sum b_k O_k] = i sum a_j b_k f_jk^n O_n`.
    pub fn bracket_coeffs(&self, a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
        let m = self.dim();
        let mut v = DVector::<C64>::zeros(m);
        for j in 0..m {
            if a[j] == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..m {
                let ab = a[j] * b[k];
                if ab == C64::new(0.0, 0.0) {
                    continue;
                }
                for n in 0..m {
                    let f = self.structure(j, k, n);
                    if f != 0.0 {
                        v[n] += ab * C64::new(0.0, f);
                    }
                }
            }
        }
        v
    }

    fn coeff_matrix(&self, c: &DVector<C64>) -> Result<DMatrix<C64>> {
        let rep = self.rep_or_adjoint()?;
        let p = rep[0].nrows();
        let mut out = DMatrix::<C64>::zeros(p, p);
        for (cj, o) in c.iter().zip(&rep) {
            if *cj != C64::new(0.0, 0.0) {
                out += o * *cj;
            }
        }
        Ok(out)
    }

    /// `E_{alpha_j}` in the stored (or adjoint) representation.
    pub fn raising_matrix(&self, j: usize) -> Result<DMatrix<C64>> {
        let cw = self.cartan.as_ref().ok_or_else(|| QsimError::Algebra("no Cartan-Weyl data".into()))?;
        if j >= cw.n_roots() {
            return Err(QsimError::OutOfRange { index: j, limit: cw.n_roots() });
        }
        self.coeff_matrix(&cw.raising[j])
    }

    pub fn lowering_matrix(&self, j: usize) -> Result<DMatrix<C64>> {
        Ok(self.raising_matrix(j)?.adjoint())
    }

    /// Weight of each Cartan generator on the representation's highest weight
    /// state, found by diagonalising a generic Cartan element.
    pub fn highest_weight_from_rep(&self) -> Result<Vec<f64>> {
        let cw = self.cartan.as_ref().ok_or_else(|| QsimError::Algebra("no Cartan-Weyl data".into()))?;
        let rep = self.rep.as_ref().ok_or_else(|| QsimError::Algebra("no representation".into()))?;
        let p = rep[0].nrows();
        let mut hg = DMatrix::<C64>::zeros(p, p);
        for (k, &c) in cw.csa.iter().enumerate() {
            hg += &rep[c] * C64::new(1.0 + 0.1 * (k as f64 + 2.0).sqrt(), 0.0);
        }
        let (_, vecs) = eigh(&hg);
        let mut best: Option<Vec<f64>> = None;
        for i in 0..p {
            let v = vecs.column(i);
            let w: Vec<f64> = cw.csa.iter().map(|&c| (v.adjoint() * &rep[c] * v)[(0, 0)].re).collect();
            if best.as_ref().is_none_or(|b| lex_cmp(&w, b, ROOT_TOL) == Ordering::Greater) {
                best = Some(w);
            }
        }
        Ok(best.expect("non-empty representation"))
    }
}
