//! Dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{QsimError, Result};
use crate::opalgebra::PauliSum;

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 12;

/// `i^k` for `k mod 4`.
pub fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Dense `2^n x 2^n` matrix of a Pauli sum, qubit 0 most significant.
pub fn dense_pauli_sum(op: &PauliSum, n: usize) -> Result<DMatrix<C64>> {
    if n > MAX_DENSE_QUBITS {
        return Err(QsimError::TooLarge(n, MAX_DENSE_QUBITS));
    }
    if op.min_qubits() > n {
        return Err(QsimError::OutOfRange {
            index: op.min_qubits() - 1,
            limit: n,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (s, c) in op.iter() {
        let (x, z, ny) = s.masks(n);
        let base = c * i_pow(ny);
        for b in 0..dim {
            let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(b ^ x, b)] += base * sign;
        }
    }
    Ok(m)
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_unitary(m: &DMatrix<C64>, tol: f64) -> bool {
    m.is_square() && max_abs(&(m * m.adjoint() - DMatrix::identity(m.nrows(), m.nrows()))) <= tol
}

/// Ascending eigenvalues and matching eigenvector columns of a Hermitian matrix.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(m.nrows(), idx.len());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `f(H)` for Hermitian `H` via its eigendecomposition.
pub fn hermitian_fn(m: &DMatrix<C64>, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&x| f(x))));
    &vecs * d * vecs.adjoint()
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_evolution(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    hermitian_fn(h, |x| C64::from_polar(1.0, -x * t))
}

/// `<a|b>`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `|<A,B>| / (|A| |B|)`: one exactly when the two agree up to a global phase.
pub fn phase_insensitive_fidelity(a: &[C64], b: &[C64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 1.0 } else { 0.0 };
    }
    inner(a, b).norm() / (na * nb)
}

/// Maximum entrywise distance between `a` and `e^{i phi} b` with the best phase.
pub fn phase_aligned_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let ov: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    max_abs(&(a - b * ph))
}

/// Action of a Hermitian operator on a vector, used by Krylov routines.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    /// An upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

/// `exp(-i A t) v` for Hermitian `A` by restarted Lanczos with full
/// reorthogonalisation. Substeps keep `|A| tau <= 6` with a 36-dimensional
/// Krylov space, which puts the truncation error near machine precision.
pub fn expm_krylov(op: &dyn LinearOp, v: &[C64], t: f64) -> Vec<C64> {
    const KDIM: usize = 36;
    const RHO_TAU: f64 = 6.0;
    let n = op.dim();
    let bound = op.norm_bound();
    let steps = if bound * t.abs() <= RHO_TAU {
        1
    } else {
        (bound * t.abs() / RHO_TAU).ceil() as usize
    };
    let tau = t / steps as f64;
    let mut cur = v.to_vec();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(KDIM + 1);
    let mut w = vec![C64::new(0.0, 0.0); n];
    for _ in 0..steps {
        let beta0 = norm(&cur);
        if beta0 == 0.0 {
            return cur;
        }
        basis.clear();
        basis.push(cur.iter().map(|x| x / beta0).collect());
        let mut alpha = Vec::with_capacity(KDIM);
        let mut beta = Vec::with_capacity(KDIM);
        for k in 0..KDIM {
            op.apply(&basis[k], &mut w);
            let a = inner(&basis[k], &w).re;
            alpha.push(a);
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
            let b = norm(&w);
            if b < 1e-13 * (1.0 + a.abs()) || k + 1 == KDIM {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            tri[(k, k)] = alpha[k];
            if k + 1 < m {
                tri[(k, k + 1)] = beta[k];
                tri[(k + 1, k)] = beta[k];
            }
        }
        let eig = tri.symmetric_eigen();
        let mut coef = vec![C64::new(0.0, 0.0); m];
        for (e, lam) in eig.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, -lam * tau) * eig.eigenvectors[(0, e)];
            for (k, c) in coef.iter_mut().enumerate() {
                *c += ph * eig.eigenvectors[(k, e)];
            }
        }
        for x in cur.iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        for (k, q) in basis.iter().take(m).enumerate() {
            let c = coef[k] * beta0;
            for (x, qi) in cur.iter_mut().zip(q) {
                *x += c * qi;
            }
        }
    }
    cur
}
