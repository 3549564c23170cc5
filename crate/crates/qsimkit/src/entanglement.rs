//! Entanglement measures for small pure and mixed states: Schmidt entropy,
//! concurrence, local and u(N) purities, Bell correlations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::{eigh, is_hermitian, MAX_DENSE_QUBITS};
use crate::opalgebra::{an, cr, jordan_wigner, FermionExpr};
use crate::statevector::StateVector;

const STATE_TOL: f64 = 1e-12;
const EIG_CLAMP: f64 = 1e-10;

fn check_normalized(amps: &[C64]) -> Result<()> {
    let n = crate::linalg::norm(amps);
    if (n - 1.0).abs() > 1e-10 {
        return invalid(format!("state is not normalised (norm {n})"));
    }
    Ok(())
}

/// Pure state with a cut into `d_a x d_b` (first factor most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    amps: Vec<C64>,
    da: usize,
    db: usize,
}

impl BipartiteState {
    pub fn new(amps: Vec<C64>, da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 || da * db != amps.len() {
            return invalid(format!("cut {da} x {db} does not match {} amplitudes", amps.len()));
        }
        check_normalized(&amps)?;
        Ok(BipartiteState { amps, da, db })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    /// Coefficient matrix `psi_{ab}`.
    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.da, self.db, |a, b| self.amps[a * self.db + b])
    }

    /// Schmidt coefficients `c_j`, descending.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.matrix().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// `-sum c_j^2 log2 c_j^2` over the Schmidt coefficients.
pub fn schmidt_entropy(state: &BipartiteState) -> f64 {
    entropy_bits(state.schmidt_coefficients().iter().map(|c| c * c))
}

fn entropy_bits(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum::<f64>().max(0.0)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !is_hermitian(&m, STATE_TOL) {
            return Err(QsimError::NotHermitian("density matrix".into()));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return invalid(format!("density matrix trace {tr} is not 1"));
        }
        if eigh(&m).0.first().is_some_and(|&e| e < -EIG_CLAMP) {
            return invalid("density matrix has a negative eigenvalue");
        }
        Ok(DensityMatrix(m))
    }

    pub fn from_pure(amps: &[C64]) -> Result<Self> {
        check_normalized(amps)?;
        let v = DMatrix::from_column_slice(amps.len(), 1, amps);
        Ok(DensityMatrix(&v * v.adjoint()))
    }

    /// Convex mixture `sum p_i |psi_i><psi_i|`.
    pub fn mixture(parts: &[(f64, Vec<C64>)]) -> Result<Self> {
        let d = parts.first().map(|p| p.1.len()).ok_or_else(|| QsimError::InvalidArgument("empty mixture".into()))?;
        let mut m = DMatrix::zeros(d, d);
        for (p, amps) in parts {
            if amps.len() != d || *p < 0.0 {
                return invalid("mixture components must share a dimension and have p >= 0");
            }
            m += DensityMatrix::from_pure(amps)?.0 * C64::new(*p, 0.0);
        }
        DensityMatrix::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    /// von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(eigh(&self.0).0.into_iter())
    }
}

/// Two-qubit concurrence `max(0, l1 - l2 - l3 - l4)` with `l_i` the
/// descending square roots of the eigenvalues of `sqrt(rho) rho~ sqrt(rho)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return invalid(format!("concurrence needs a 4 x 4 density matrix, got {}", rho.dim()));
    }
    let y = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
    let yy = y.kronecker(&y);
    let tilde = &yy * rho.matrix().map(|x| x.conj()) * &yy;
    let sqrt_rho = crate::linalg::hermitian_fn(rho.matrix(), |x| C64::new(x.max(0.0).sqrt(), 0.0));
    let mut r = &sqrt_rho * tilde * &sqrt_rho;
    r = (&r + r.adjoint()) * C64::new(0.5, 0.0);
    let mut l: Vec<f64> = eigh(&r).0.into_iter().map(|x| if x < EIG_CLAMP { 0.0 } else { x.sqrt() }).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Reduced density matrix of subsystem `j` of a pure state on `dims`.
pub fn reduced_density(amps: &[C64], dims: &[usize], j: usize) -> Result<DMatrix<C64>> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != amps.len() {
        return invalid("subsystem dimensions do not match the state");
    }
    if j >= dims.len() {
        return Err(QsimError::OutOfRange { index: j, limit: dims.len() });
    }
    let d = dims[j];
    let right: usize = dims[j + 1..].iter().product();
    let left = total / (d * right);
    let mut rho = DMatrix::zeros(d, d);
    for l in 0..left {
        for r in 0..right {
            for a in 0..d {
                let xa = amps[(l * d + a) * right + r];
                for b in 0..d {
                    rho[(a, b)] += xa * amps[(l * d + b) * right + r].conj();
                }
            }
        }
    }
    Ok(rho)
}

/// `K' sum_j [Tr rho_j^2 - 1/d_j]` with `K' = 1 / (N - sum 1/d_j)`; one
/// exactly for product states.
pub fn local_purity(amps: &[C64], dims: &[usize]) -> Result<f64> {
    check_normalized(amps)?;
    let mut sum = 0.0;
    let mut norm = 0.0;
    for (j, &d) in dims.iter().enumerate() {
        if d < 2 {
            return invalid("local subsystems need dimension at least 2");
        }
        let rho = reduced_density(amps, dims, j)?;
        sum += (&rho * &rho).trace().re - 1.0 / d as f64;
        norm += 1.0 - 1.0 / d as f64;
    }
    Ok(sum / norm)
}

/// One-body matrix `C_ij = <c_i^dag c_j>` of a Fock-space state
/// (Jordan-Wigner convention, occupied mode = qubit `|0>`).
pub fn one_body_matrix(sv: &StateVector) -> Result<DMatrix<C64>> {
    let n = sv.n_qubits();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let op = jordan_wigner(&FermionExpr::monomial(n, C64::new(1.0, 0.0), vec![cr(i), an(j)])?, n)?;
            c[(i, j)] = sv.expectation(&op)?;
        }
    }
    Ok(c)
}

/// Purity relative to `u(N)` with `K = 2/N`, summed over the Hermitian
/// basis `c_j^dag c_k + h.c.`, `i(c_j^dag c_k - h.c.)` and `sqrt2 (n_j - 1/2)`.
pub fn un_purity(sv: &StateVector) -> Result<f64> {
    let n = sv.n_qubits();
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(QsimError::TooLarge(n, MAX_DENSE_QUBITS));
    }
    check_normalized(sv.amplitudes())?;
    let one = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    let mut sum = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let mut herm = crate::opalgebra::RawExpr::new();
            herm.push(one, vec![cr(j), an(k)]);
            herm.push(one, vec![cr(k), an(j)]);
            let mut anti = crate::opalgebra::RawExpr::new();
            anti.push(im, vec![cr(j), an(k)]);
            anti.push(-im, vec![cr(k), an(j)]);
            for raw in [herm, anti] {
                let op = crate::opalgebra::jordan_wigner_raw(&raw, n)?;
                sum += sv.expectation(&op)?.re.powi(2);
            }
        }
        let nj = jordan_wigner(&FermionExpr::number(n, j)?, n)?;
        let x = std::f64::consts::SQRT_2 * (sv.expectation(&nj)?.re - 0.5);
        sum += x * x;
    }
    Ok(2.0 / n as f64 * sum)
}

fn unit(r: [f64; 3]) -> Result<[f64; 3]> {
    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return invalid(format!("direction vector has length {n}, not 1"));
    }
    Ok(r)
}

fn spin_along(r: [f64; 3]) -> DMatrix<C64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(r[2], 0.0), C64::new(r[0], -r[1]), C64::new(r[0], r[1]), C64::new(-r[2], 0.0)],
    )
}

/// `<(r1 . sigma^A)(r2 . sigma^B)>` for a two-qubit pure state.
pub fn bell_correlation(amps: &[C64], r1: [f64; 3], r2: [f64; 3]) -> Result<f64> {
    if amps.len() != 4 {
        return invalid("Bell correlation needs a two-qubit state");
    }
    check_normalized(amps)?;
    let op = spin_along(unit(r1)?).kronecker(&spin_along(unit(r2)?));
    let v = DMatrix::from_column_slice(4, 1, amps);
    Ok((v.adjoint() * op * v)[(0, 0)].re)
}

/// Both sides of `|A(r1,r2) - A(r1,r2')| <= 1 + A(r2,r2')`.
pub fn bell_inequality(amps: &[C64], r1: [f64; 3], r2: [f64; 3], r2p: [f64; 3]) -> Result<(f64, f64)> {
    let lhs = (bell_correlation(amps, r1, r2)? - bell_correlation(amps, r1, r2p)?).abs();
    let rhs = 1.0 + bell_correlation(amps, r2, r2p)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bell() -> Vec<C64> {
        vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]
    }

    fn singlet() -> Vec<C64> {
        vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)]
    }

    #[test]
    fn schmidt_cases() {
        let prod = BipartiteState::new(vec![c(1.0), c(0.0), c(0.0), c(0.0)], 2, 2).unwrap();
        assert!(schmidt_entropy(&prod).abs() < 1e-12);
        assert!((schmidt_entropy(&BipartiteState::new(bell(), 2, 2).unwrap()) - 1.0).abs() < 1e-12);
        let s = BipartiteState::new(vec![c(0.8f64.sqrt()), c(0.0), c(0.0), c(0.2f64.sqrt())], 2, 2).unwrap();
        let want = -0.8 * 0.8f64.log2() - 0.2 * 0.2f64.log2();
        assert!((schmidt_entropy(&s) - want).abs() < 1e-12);
        assert!(BipartiteState::new(bell(), 2, 3).is_err());
    }

    #[test]
    fn concurrence_cases() {
        let rho = DensityMatrix::from_pure(&bell()).unwrap();
        assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-9);
        let prod = DensityMatrix::from_pure(&[c(0.6), c(0.8), c(0.0), c(0.0)]).unwrap();
        assert!(concurrence(&prod).unwrap().abs() < 1e-9);
        let b2 = vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(-FRAC_1_SQRT_2)];
        let mix = DensityMatrix::mixture(&[(0.5, bell()), (0.5, b2)]).unwrap();
        assert!(concurrence(&mix).unwrap().abs() < 1e-9);
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn local_purity_cases() {
        let n = 4;
        let mut ghz = vec![c(0.0); 16];
        ghz[0] = c(FRAC_1_SQRT_2);
        ghz[15] = c(FRAC_1_SQRT_2);
        assert!(local_purity(&ghz, &[2; 4]).unwrap().abs() < 1e-12);
        let mut w = vec![c(0.0); 16];
        for q in 0..n {
            w[1 << q] = c(0.5);
        }
        assert!((local_purity(&w, &[2; 4]).unwrap() - 0.25).abs() < 1e-12);
        // spin-1 x qubit product state
        let a = [c(0.6), c(0.0), c(0.8)];
        let b = [c(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2)];
        let prod: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        assert!((local_purity(&prod, &[3, 2]).unwrap() - 1.0).abs() < 1e-12);
        assert!(local_purity(&prod, &[2, 3, 1]).is_err());
    }

    #[test]
    fn un_purity_cases() {
        let vac = StateVector::new_register(4, 0b1111).unwrap();
        let build = |terms: &[(usize, usize)]| {
            let mut raw = crate::opalgebra::RawExpr::new();
            for &(a, b) in terms {
                raw.push(c(FRAC_1_SQRT_2), vec![cr(a), cr(b)]);
            }
            let op = crate::opalgebra::jordan_wigner_raw(&raw, 4).unwrap();
            StateVector::from_amplitudes(vac.apply_pauli_sum(&op).unwrap()).unwrap()
        };
        let ent = build(&[(0, 1), (2, 3)]);
        assert!(un_purity(&ent).unwrap().abs() < 1e-12);
        let sl = build(&[(0, 1), (0, 3)]);
        assert!((un_purity(&sl).unwrap() - 1.0).abs() < 1e-12);
        // (4/N) |C - 1/2|_F^2 form
        let cm = one_body_matrix(&ent).unwrap() - DMatrix::identity(4, 4) * c(0.5);
        let alt: f64 = cm.iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!((alt - un_purity(&ent).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bell_violation() {
        let s = singlet();
        let r1 = [1.0, 0.0, 0.0];
        let r2 = [0.0, 1.0, 0.0];
        let r3 = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
        assert!((bell_correlation(&s, r1, r1).unwrap() + 1.0).abs() < 1e-12);
        assert!(bell_correlation(&s, r1, r2).unwrap().abs() < 1e-12);
        assert!((bell_correlation(&s, r1, r3).unwrap() + FRAC_1_SQRT_2).abs() < 1e-12);
        let (lhs, rhs) = bell_inequality(&s, r1, r2, r3).unwrap();
        assert!(lhs > rhs);
        let zz = [0.0, 0.0, 1.0];
        assert!((bell_correlation(&[c(1.0), c(0.0), c(0.0), c(0.0)], zz, zz).unwrap() - 1.0).abs() < 1e-12);
        assert!(bell_correlation(&s, [1.0, 1.0, 0.0], r1).is_err());
    }
}
