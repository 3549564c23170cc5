//! Randomized invariants over the whole library.

mod common;

use common::{c, fock_quadratic, max_abs, props};
use nalgebra::DMatrix;
use proptest::prelude::*;
use qsimkit::entanglement::{concurrence, schmidt_entropy, BipartiteState, DensityMatrix};
use qsimkit::gcs::{gcs_prepare_from_expectations, h_purity, GcsState};
use qsimkit::linalg::{dense_pauli_sum, eigvalsh, is_unitary};
use qsimkit::liecore::{AlgebraSpec, GroupElement};
use qsimkit::opalgebra::{jordan_wigner, FermionExpr, Pauli, PauliString, PauliSum};
use qsimkit::spectral::{dft, refine_peak, TimeSeries};
use qsimkit::statevector::{dense_matrix, Axis, Gate, StateVector};
use qsimkit::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn pairs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

fn pauli() -> impl Strategy<Value = Option<Pauli>> {
    prop_oneof![Just(None), Just(Some(Pauli::X)), Just(Some(Pauli::Y)), Just(Some(Pauli::Z))]
}

fn pauli_sum(n: usize, terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((prop::collection::vec(pauli(), n), -1.0..1.0f64, -1.0..1.0f64), 1..=terms).prop_map(|ts| {
        let mut s = PauliSum::zero();
        for (letters, re, im) in ts {
            let f = letters.iter().enumerate().filter_map(|(q, p)| p.map(|p| (q, p)));
            s.add_term(c(re, im), PauliString::new(f).unwrap());
        }
        s
    })
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let rot = (0..3usize, 0..n, -PI..PI).prop_map(|(a, q, th)| Gate::rot([Axis::X, Axis::Y, Axis::Z][a], q, th));
    let ising = (0..n, 1..n, -PI..PI).prop_map(move |(j, d, om)| Gate::Ising { j, k: (j + d) % n, omega: om });
    prop_oneof![rot, ising]
}

fn ortho(name: &str) -> AlgebraSpec {
    AlgebraSpec::builtin(name).unwrap().killing_orthonormalize().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jw_anticommutation(n in 1usize..=6) {
        prop_assert!(props::jw_anticommutators(n) <= 1e-12);
    }

    #[test]
    fn jw_quadratic_spectrum(n in 1usize..=4, entries in pairs(10)) {
        let h = props::hermitian(n, &entries).map(|z| c(z.re, 0.0));
        let expr = FermionExpr::quadratic(&h).unwrap();
        let got = eigvalsh(&dense_pauli_sum(&jordan_wigner(&expr, n).unwrap(), n).unwrap());
        let want = eigvalsh(&fock_quadratic(&h.map(|z| z.re)));
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn anyon_exchange(n in 2usize..=4, theta in -PI..PI) {
        prop_assert!(props::anyon_relations(n, theta) <= 1e-12);
    }

    #[test]
    fn boson_truncated_algebra(modes in 1usize..=2, n_max in 1usize..=3) {
        prop_assert!(props::boson_commutators(modes, n_max) <= 1e-12);
    }

    #[test]
    fn cnot_from_rotations(n in 2usize..=4, a in 0usize..4, d in 1usize..4) {
        let control = a % n;
        let target = (control + d) % n;
        prop_assume!(control != target);
        prop_assert!(props::cnot_decomposition(n, control, target) <= 1e-12);
    }

    #[test]
    fn string_exponential_ladder(letters in prop::collection::vec(pauli(), 1..=4), theta in -2.0 * PI..2.0 * PI) {
        prop_assert!(props::pauli_ladder(letters.len(), &letters, theta) <= 1e-12);
    }

    #[test]
    fn pade_matches_extended_precision(dim in 1usize..=6, scale in 0.01..30.0f64, entries in pairs(36)) {
        let a = DMatrix::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[i * 6 + j];
            c(re, im) * (scale / dim as f64)
        });
        prop_assert!(props::pade_vs_extended(&a) <= 1e-10);
    }

    #[test]
    fn un_purity_is_rotation_invariant(amps in pairs(16), gen in pairs(10)) {
        let m = props::hermitian(4, &gen);
        prop_assert!(props::un_purity_invariance(&props::normalized(&amps), &m) <= 1e-10);
    }

    #[test]
    fn local_purity_is_rotation_invariant(amps in pairs(8), angles in prop::collection::vec(prop::array::uniform3(-PI..PI), 3)) {
        prop_assert!(props::local_purity_invariance(&props::normalized(&amps), &angles) <= 1e-10);
    }

    #[test]
    fn norm_preserved_by_gates(label in 0usize..16, gates in prop::collection::vec(gate(4), 1..40)) {
        let mut sv = StateVector::new_register(4, label).unwrap();
        for g in &gates {
            g.apply(&mut sv).unwrap();
        }
        prop_assert!((sv.norm() - 1.0).abs() <= 1e-10 * gates.len() as f64);
    }

    #[test]
    fn gates_are_unitary_and_match_dense(g in gate(3), amps in pairs(8)) {
        let u = dense_matrix(&g, 3).unwrap();
        prop_assert!(is_unitary(&u, 1e-12));
        let psi = props::normalized(&amps);
        let mut sv = StateVector::from_amplitudes(psi.clone()).unwrap();
        g.apply(&mut sv).unwrap();
        let want = &u * nalgebra::DVector::from_vec(psi);
        let err = sv.amplitudes().iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn hermitian_expectations_are_real(h in pauli_sum(3, 6), amps in pairs(8)) {
        let herm = h.add(&h.adjoint()).scale(c(0.5, 0.0));
        let sv = StateVector::from_amplitudes(props::normalized(&amps)).unwrap();
        prop_assert!(sv.expectation(&herm).unwrap().im.abs() <= 1e-12);
    }

    #[test]
    fn pauli_product_associative(a in pauli_sum(3, 4), b in pauli_sum(3, 4), d in pauli_sum(3, 4)) {
        prop_assert!(a.mul(&b).mul(&d).approx_eq(&a.mul(&b.mul(&d)), 1e-12));
    }

    #[test]
    fn pauli_commutator_jacobi(a in pauli_sum(3, 4), b in pauli_sum(3, 4), d in pauli_sum(3, 4)) {
        let j = a.commutator(&b.commutator(&d)).add(&b.commutator(&d.commutator(&a))).add(&d.commutator(&a.commutator(&b)));
        prop_assert!(j.approx_eq(&PauliSum::zero(), 1e-12));
    }

    #[test]
    fn pauli_sum_matches_dense_product(a in pauli_sum(3, 4), b in pauli_sum(3, 4)) {
        let want = dense_pauli_sum(&a, 3).unwrap() * dense_pauli_sum(&b, 3).unwrap();
        prop_assert!(max_abs(&(dense_pauli_sum(&a.mul(&b), 3).unwrap() - want)) <= 1e-12);
    }

    #[test]
    fn dft_is_linear(x in pairs(32), y in pairs(32), alpha in (-2.0..2.0f64, -2.0..2.0f64), beta in (-2.0..2.0f64, -2.0..2.0f64)) {
        let (al, be) = (c(alpha.0, alpha.1), c(beta.0, beta.1));
        let xs: Vec<C64> = x.iter().map(|&(a, b)| c(a, b)).collect();
        let ys: Vec<C64> = y.iter().map(|&(a, b)| c(a, b)).collect();
        let mix: Vec<C64> = xs.iter().zip(&ys).map(|(a, b)| al * a + be * b).collect();
        let fx = dft(&TimeSeries::new(0.1, xs).unwrap()).unwrap();
        let fy = dft(&TimeSeries::new(0.1, ys).unwrap()).unwrap();
        let fm = dft(&TimeSeries::new(0.1, mix).unwrap()).unwrap();
        for l in 0..32 {
            let want = al * fx.amplitudes[l] + be * fy.amplitudes[l];
            prop_assert!((fm.amplitudes[l] - want).norm() <= 1e-12);
        }
    }

    #[test]
    fn mixtures_are_valid_density_matrices(parts in prop::collection::vec((0.0..1.0f64, pairs(4)), 1..5)) {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        prop_assume!(total > 1e-3);
        let mix: Vec<(f64, Vec<C64>)> = parts.iter().map(|(p, a)| (p / total, props::normalized(a))).collect();
        let rho = DensityMatrix::mixture(&mix).unwrap();
        let m = rho.matrix();
        prop_assert!(max_abs(&(m - m.adjoint())) <= 1e-12);
        prop_assert!((m.trace() - c(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(eigvalsh(m).iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn bipartite_cut_must_match(da in 1usize..6, db in 1usize..6, extra in 0usize..3) {
        let amps = props::normalized(&vec![(1.0, 0.0); da * db + extra]);
        prop_assert_eq!(BipartiteState::new(amps, da, db).is_ok(), extra == 0);
    }

    #[test]
    fn entropy_invariant_under_local_rotations(amps in pairs(16), angles in prop::collection::vec(prop::array::uniform3(-PI..PI), 4)) {
        let psi = props::normalized(&amps);
        let mut sv = StateVector::from_amplitudes(psi.clone()).unwrap();
        for (q, a) in angles.iter().enumerate() {
            sv.apply_rotation(Axis::Z, q, a[0]).unwrap();
            sv.apply_rotation(Axis::Y, q, a[1]).unwrap();
            sv.apply_rotation(Axis::X, q, a[2]).unwrap();
        }
        let before = schmidt_entropy(&BipartiteState::new(psi, 4, 4).unwrap());
        let after = schmidt_entropy(&BipartiteState::new(sv.into_amplitudes(), 4, 4).unwrap());
        prop_assert!((before - after).abs() <= 1e-10);
    }

    #[test]
    fn concurrence_orders_like_entropy(a in pairs(4), b in pairs(4)) {
        let (pa, pb) = (props::normalized(&a), props::normalized(&b));
        let ca = concurrence(&DensityMatrix::from_pure(&pa).unwrap()).unwrap();
        let cb = concurrence(&DensityMatrix::from_pure(&pb).unwrap()).unwrap();
        let sa = schmidt_entropy(&BipartiteState::new(pa, 2, 2).unwrap());
        let sb = schmidt_entropy(&BipartiteState::new(pb, 2, 2).unwrap());
        prop_assume!((ca - cb).abs() > 1e-6);
        prop_assert_eq!(ca > cb, sa > sb);
    }

    #[test]
    fn adjoint_action_preserves_purity(zeta in prop::collection::vec(-1.5..1.5f64, 8), rot in prop::collection::vec(-2.0..2.0f64, 8)) {
        let s = ortho("su3");
        let e = GcsState::new(&s, &zeta).unwrap().expectations().unwrap();
        let u = GroupElement::new(&s, &rot).unwrap();
        let ad = s.adjoint_action_matrix(&u).unwrap();
        let moved: Vec<f64> = (0..8).map(|i| (0..8).map(|j| ad[(i, j)] * e[j]).sum()).collect();
        prop_assert!((h_purity(&e, 1.0) - h_purity(&moved, 1.0)).abs() <= 1e-10);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((norm(&rot) - norm(&(0..8).map(|i| (0..8).map(|j| ad[(i, j)] * rot[j]).sum()).collect::<Vec<f64>>())).abs() <= 1e-10);
    }

    #[test]
    fn gcs_prepare_round_trip(zeta in prop::collection::vec(-1.5..1.5f64, 8)) {
        let s = ortho("su3");
        let e = GcsState::new(&s, &zeta).unwrap().expectations().unwrap();
        let back = gcs_prepare_from_expectations(&s, &e).unwrap().expectations().unwrap();
        for (a, b) in e.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }
}

#[test]
fn coherent_states_maximize_purity() {
    let s = ortho("su2:2");
    let rep = s.representation().unwrap();
    let top = h_purity(&GcsState::new(&s, &[0.0; 3]).unwrap().expectations().unwrap(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let raw: Vec<(f64, f64)> = (0..3).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi = nalgebra::DVector::from_vec(props::normalized(&raw));
        let e: Vec<f64> = rep.iter().map(|o| psi.dotc(&(o * &psi)).re).collect();
        assert!(h_purity(&e, 1.0) <= top + 1e-12);
    }
}

#[test]
fn refinement_beats_raw_bins() {
    let (m, dt) = (64, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut better = 0;
    for _ in 0..100 {
        let lam: f64 = rng.random_range(-10.0..10.0);
        let values = (1..=m).map(|j| C64::from_polar(1.0, -lam * j as f64 * dt)).collect();
        let sp = dft(&TimeSeries::new(dt, values).unwrap()).unwrap();
        let l = (0..m).max_by(|&a, &b| sp.amplitudes[a].norm().total_cmp(&sp.amplitudes[b].norm())).unwrap();
        let raw = (sp.frequency(l) - lam).abs();
        let refined = (refine_peak(&sp, l, 1e-9).unwrap().lambda - lam).abs();
        if refined < raw {
            better += 1;
        }
    }
    assert!(better >= 95, "{better}/100");
}
