//! Property checks. Each returns the largest deviation found, so the same
//! check can be driven by proptest or by a fixed sample.

use super::{c, evolve_dense, expm_double_double, max_abs};
use nalgebra::DMatrix;
use qsimkit::entanglement::{local_purity, un_purity};
use qsimkit::linalg::dense_pauli_sum;
use qsimkit::liecore::expm;
use qsimkit::opalgebra::{anyon_ladder_matrix, an, cr, jordan_wigner_raw, BosonEncoding, Pauli, PauliString, RawExpr};
use qsimkit::qprotocol::thouless_rotate;
use qsimkit::statevector::{dense_matrix, pauli_exp_ladder, Axis, Gate, StateVector};
use qsimkit::C64;

fn ladder(n: usize, mode: usize, dagger: bool) -> DMatrix<C64> {
    let l = if dagger { cr(mode) } else { an(mode) };
    dense_pauli_sum(&jordan_wigner_raw(&RawExpr::term(c(1.0, 0.0), vec![l]), n).unwrap(), n).unwrap()
}

/// `{c_i, c_j^dag} = delta_ij` and `{c_i, c_j} = 0` for the Jordan-Wigner images.
pub fn jw_anticommutators(n: usize) -> f64 {
    let dim = 1 << n;
    let id = DMatrix::<C64>::identity(dim, dim);
    let a: Vec<DMatrix<C64>> = (0..n).map(|j| ladder(n, j, false)).collect();
    let ad: Vec<DMatrix<C64>> = (0..n).map(|j| ladder(n, j, true)).collect();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut mixed = &a[i] * &ad[j] + &ad[j] * &a[i];
            if i == j {
                mixed -= &id;
            }
            err = err.max(max_abs(&mixed));
            err = err.max(max_abs(&(&a[i] * &a[j] + &a[j] * &a[i])));
        }
    }
    err
}

/// Hard-core anyon exchange relations for `i < j`,
/// `a_i a_j^dag = e^{-i theta} a_j^dag a_i` and `a_i a_j = e^{i theta} a_j a_i`,
/// plus the on-site bracket `a_j a_j^dag - e^{-i theta} a_j^dag a_j = 1 - (1 + e^{-i theta}) n_j`.
pub fn anyon_relations(n: usize, theta: f64) -> f64 {
    let dim = 1 << n;
    let a: Vec<DMatrix<C64>> = (0..n).map(|j| anyon_ladder_matrix(an(j), theta, n).unwrap()).collect();
    let ad: Vec<DMatrix<C64>> = (0..n).map(|j| anyon_ladder_matrix(cr(j), theta, n).unwrap()).collect();
    let em = C64::from_polar(1.0, -theta);
    let ep = C64::from_polar(1.0, theta);
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            err = err.max(max_abs(&(&a[i] * &ad[j] - &ad[j] * &a[i] * em)));
            err = err.max(max_abs(&(&a[i] * &a[j] - &a[j] * &a[i] * ep)));
        }
        let nj = &ad[i] * &a[i];
        let lhs = &a[i] * &ad[i] - &nj * em;
        let rhs = DMatrix::<C64>::identity(dim, dim) - nj * (em + 1.0);
        err = err.max(max_abs(&(lhs - rhs)));
    }
    err
}

/// Truncated boson algebra on the physical (one-hot) states:
/// `[b_i, b_j^dag] = delta_ij (1 - (N_P + 1) [n_i = N_P])` and `[b_i, b_j] = 0`.
pub fn boson_commutators(modes: usize, n_max: usize) -> f64 {
    let enc = BosonEncoding::new(modes, n_max).unwrap();
    let nq = enc.n_qubits();
    let b: Vec<DMatrix<C64>> = (0..modes).map(|j| dense_pauli_sum(&enc.annihilation(j).unwrap(), nq).unwrap()).collect();
    let bd: Vec<DMatrix<C64>> = (0..modes).map(|j| dense_pauli_sum(&enc.creation(j).unwrap(), nq).unwrap()).collect();
    let mut err: f64 = 0.0;
    let total = (n_max + 1).pow(modes as u32);
    for idx in 0..total {
        let occ: Vec<usize> = (0..modes).map(|j| idx / (n_max + 1).pow(j as u32) % (n_max + 1)).collect();
        let label = enc.fock_label(&occ).unwrap();
        for i in 0..modes {
            for j in 0..modes {
                let comm = &b[i] * &bd[j] - &bd[j] * &b[i];
                let col = comm.column(label);
                for (r, v) in col.iter().enumerate() {
                    let want = if i == j && r == label {
                        if occ[i] == n_max {
                            -(n_max as f64)
                        } else {
                            1.0
                        }
                    } else {
                        0.0
                    };
                    err = err.max((v - c(want, 0.0)).norm());
                }
                let cc = &b[i] * &b[j] - &b[j] * &b[i];
                err = err.max(cc.column(label).iter().map(|v| v.norm()).fold(0.0, f64::max));
            }
        }
    }
    err
}

fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let ov: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0, 0.0) };
    max_abs(&(a - b * ph))
}

/// CNOT from `R_y(pi/2)`, an Ising gate, `R_y(-pi/2)`, `R_x(pi/2)` and `R_z(pi/2)`,
/// compared with the permutation matrix up to a global phase.
pub fn cnot_decomposition(n: usize, control: usize, target: usize) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let seq = [
        Gate::rot(Axis::Y, target, FRAC_PI_2),
        Gate::Ising { j: control, k: target, omega: FRAC_PI_2 },
        Gate::rot(Axis::Y, target, -FRAC_PI_2),
        Gate::rot(Axis::X, target, FRAC_PI_2),
        Gate::rot(Axis::Z, control, FRAC_PI_2),
    ];
    let dim = 1usize << n;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for g in &seq {
        u = dense_matrix(g, n).unwrap() * u;
    }
    let mut cnot = DMatrix::<C64>::zeros(dim, dim);
    let cb = 1usize << (n - 1 - control);
    let tb = 1usize << (n - 1 - target);
    for b in 0..dim {
        let to = if b & cb != 0 { b ^ tb } else { b };
        cnot[(to, b)] = c(1.0, 0.0);
    }
    phase_distance(&u, &cnot)
}

fn pauli_dense(p: Pauli) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// The ladder circuit for `exp(-i theta/2 P)` against the dense exponential.
pub fn pauli_ladder(n: usize, letters: &[Option<Pauli>], theta: f64) -> f64 {
    let factors: Vec<(usize, Pauli)> = letters.iter().enumerate().filter_map(|(q, p)| p.map(|p| (q, p))).collect();
    if factors.is_empty() {
        return 0.0;
    }
    let s = PauliString::new(factors).unwrap();
    let mut dense = DMatrix::<C64>::identity(1, 1);
    for q in 0..n {
        let f = letters[q].map(pauli_dense).unwrap_or_else(|| DMatrix::identity(2, 2));
        dense = dense.kronecker(&f);
    }
    let want = evolve_dense(&dense, theta / 2.0);
    let mut u = DMatrix::<C64>::identity(1 << n, 1 << n);
    for g in pauli_exp_ladder(&s, theta).unwrap() {
        u = dense_matrix(&g, n).unwrap() * u;
    }
    max_abs(&(u - want))
}

/// Relative deviation of the Padé exponential from the double-double oracle.
pub fn pade_vs_extended(a: &DMatrix<C64>) -> f64 {
    let got = expm(a, 1e-16).unwrap().matrix;
    let want = expm_double_double(a);
    max_abs(&(got - &want)) / max_abs(&want).max(1.0)
}

/// `u(N)` purity of `psi` and of `exp(-i c^dag M c) psi`.
pub fn un_purity_invariance(amps: &[C64], m: &DMatrix<C64>) -> f64 {
    let sv = StateVector::from_amplitudes(amps.to_vec()).unwrap();
    let mut rotated = sv.clone();
    thouless_rotate(m, None).unwrap().apply(&mut rotated).unwrap();
    (un_purity(&sv).unwrap() - un_purity(&rotated).unwrap()).abs()
}

/// Local qubit purity of `psi` and of `(u_1 x ... x u_n) psi`.
pub fn local_purity_invariance(amps: &[C64], angles: &[[f64; 3]]) -> f64 {
    let n = angles.len();
    let sv = StateVector::from_amplitudes(amps.to_vec()).unwrap();
    let mut rotated = sv.clone();
    for (q, a) in angles.iter().enumerate() {
        rotated.apply_rotation(Axis::Z, q, a[0]).unwrap();
        rotated.apply_rotation(Axis::Y, q, a[1]).unwrap();
        rotated.apply_rotation(Axis::Z, q, a[2]).unwrap();
    }
    let dims = vec![2; n];
    (local_purity(sv.amplitudes(), &dims).unwrap() - local_purity(rotated.amplitudes(), &dims).unwrap()).abs()
}

pub fn normalized(v: &[(f64, f64)]) -> Vec<C64> {
    let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
    v.iter().map(|&(a, b)| c(a / norm, b / norm)).collect()
}

pub fn hermitian(n: usize, entries: &[(f64, f64)]) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let (a, b) = entries[k % entries.len()];
            k += 1;
            if i == j {
                m[(i, i)] = c(a, 0.0);
            } else {
                m[(i, j)] = c(a, b);
                m[(j, i)] = c(a, -b);
            }
        }
    }
    m
}
