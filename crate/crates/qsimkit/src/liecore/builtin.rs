//! Built-in algebras and their standard representations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::AlgebraSpec;
use crate::error::{invalid, Result};
use crate::linalg::dense_pauli_sum;
use crate::opalgebra::{an, cr, jordan_wigner_raw, PauliSum, RawExpr};

/// Largest spin (as `2S`) for the built-in su(2) representations.
pub const MAX_TWO_S: usize = 100;
/// Largest mode count for the Fock-space representations.
pub const MAX_FOCK_MODES: usize = 6;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn levi_civita_tensor(scale: f64) -> Vec<f64> {
    let mut f = vec![0.0; 27];
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        f[(a * 3 + b) * 3 + c] = scale;
        f[(b * 3 + a) * 3 + c] = -scale;
    }
    f
}

/// Spin matrices `(S_x, S_y, S_z)` for spin `two_s / 2`, basis `m = S, S-1, ..., -S`.
pub fn spin_matrices(two_s: usize) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let d = two_s + 1;
    let s = two_s as f64 / 2.0;
    let mut sp = DMatrix::<C64>::zeros(d, d);
    let mut sz = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        let m = s - i as f64;
        sz[(i, i)] = C64::new(m, 0.0);
        if i > 0 {
            // S_+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>
            sp[(i - 1, i)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * C64::new(0.5, 0.0);
    let sy = (&sp - &sm) * C64::new(0.0, -0.5);
    (sx, sy, sz)
}

fn fock_matrix(raw: &RawExpr, n: usize) -> Result<DMatrix<C64>> {
    let p: PauliSum = jordan_wigner_raw(raw, n)?;
    dense_pauli_sum(&p, n)
}

/// Generators of u(N) as ordered products: hopping, current, then shifted number.
fn un_generators(n: usize) -> Vec<(String, RawExpr, f64)> {
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut r = RawExpr::new();
            r.push(ONE, vec![cr(j), an(k)]).push(ONE, vec![cr(k), an(j)]);
            out.push((format!("hop{}_{}", j + 1, k + 1), r, 0.0));
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut r = RawExpr::new();
            r.push(I, vec![cr(j), an(k)]).push(-I, vec![cr(k), an(j)]);
            out.push((format!("cur{}_{}", j + 1, k + 1), r, 0.0));
        }
    }
    let s2 = std::f64::consts::SQRT_2;
    for j in 0..n {
        out.push((
            format!("num{}", j + 1),
            RawExpr::term(C64::new(s2, 0.0), vec![cr(j), an(j)]),
            -s2 / 2.0,
        ));
    }
    out
}

fn pairing_generators(n: usize) -> Vec<(String, RawExpr, f64)> {
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut r = RawExpr::new();
            r.push(ONE, vec![cr(j), cr(k)]).push(ONE, vec![an(k), an(j)]);
            out.push((format!("pair{}_{}", j + 1, k + 1), r, 0.0));
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut r = RawExpr::new();
            r.push(I, vec![cr(j), cr(k)]).push(-I, vec![an(k), an(j)]);
            out.push((format!("ipair{}_{}", j + 1, k + 1), r, 0.0));
        }
    }
    out
}

fn fock_spec(n: usize, gens: Vec<(String, RawExpr, f64)>) -> Result<AlgebraSpec> {
    if n == 0 || n > MAX_FOCK_MODES {
        return invalid(format!("Fock representations need 1..={MAX_FOCK_MODES} modes"));
    }
    let dim = 1usize << n;
    let mut labels = Vec::new();
    let mut rep = Vec::new();
    for (lab, raw, shift) in gens {
        let mut m = fock_matrix(&raw, n)?;
        if shift != 0.0 {
            m += DMatrix::<C64>::identity(dim, dim) * C64::new(shift, 0.0);
        }
        labels.push(lab);
        rep.push(m);
    }
    AlgebraSpec::from_representation(labels, rep)
}

fn number_csa(n: usize, offset: usize) -> Vec<usize> {
    (0..n).map(|j| offset + j).collect()
}

impl AlgebraSpec {
    /// su(2) with `O = 2 S_mu` (Pauli matrices for spin 1/2), `f = 2 eps`.
    pub fn su2(two_s: usize) -> Result<AlgebraSpec> {
        if two_s == 0 || two_s > MAX_TWO_S {
            return invalid(format!("2S must lie in 1..={MAX_TWO_S}"));
        }
        let (sx, sy, sz) = spin_matrices(two_s);
        let two = C64::new(2.0, 0.0);
        AlgebraSpec::new(
            vec!["X".into(), "Y".into(), "Z".into()],
            levi_civita_tensor(2.0),
            Some(vec![sx * two, sy * two, sz * two]),
        )?
        .with_cartan(&[2])
    }

    /// su(3) spanned by the Gell-Mann matrices.
    pub fn su3() -> Result<AlgebraSpec> {
        let z = C64::new(0.0, 0.0);
        let mk = |e: [(usize, usize, C64); 3]| {
            let mut m = DMatrix::<C64>::zeros(3, 3);
            for (r, c, v) in e {
                m[(r, c)] += v;
            }
            m
        };
        let s3 = 1.0 / 3f64.sqrt();
        let lam = vec![
            mk([(0, 1, ONE), (1, 0, ONE), (0, 0, z)]),
            mk([(0, 1, -I), (1, 0, I), (0, 0, z)]),
            mk([(0, 0, ONE), (1, 1, -ONE), (2, 2, z)]),
            mk([(0, 2, ONE), (2, 0, ONE), (0, 0, z)]),
            mk([(0, 2, -I), (2, 0, I), (0, 0, z)]),
            mk([(1, 2, ONE), (2, 1, ONE), (0, 0, z)]),
            mk([(1, 2, -I), (2, 1, I), (0, 0, z)]),
            mk([(0, 0, C64::new(s3, 0.0)), (1, 1, C64::new(s3, 0.0)), (2, 2, C64::new(-2.0 * s3, 0.0))]),
        ];
        let labels = (1..=8).map(|k| format!("L{k}")).collect();
        AlgebraSpec::from_representation(labels, lam)?.with_cartan(&[2, 7])
    }

    /// su(N) spanned by the generalized Gell-Mann matrices: symmetric and
    /// antisymmetric off-diagonal pairs, then `N - 1` diagonal generators.
    pub fn su_n(n: usize) -> Result<AlgebraSpec> {
        if !(2..=8).contains(&n) {
            return invalid("su(N) needs 2 <= N <= 8");
        }
        let mut labels = Vec::new();
        let mut rep = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                let mut s = DMatrix::<C64>::zeros(n, n);
                s[(j, k)] = ONE;
                s[(k, j)] = ONE;
                let mut a = DMatrix::<C64>::zeros(n, n);
                a[(j, k)] = -I;
                a[(k, j)] = I;
                labels.push(format!("S{}_{}", j + 1, k + 1));
                rep.push(s);
                labels.push(format!("A{}_{}", j + 1, k + 1));
                rep.push(a);
            }
        }
        let first = rep.len();
        for l in 1..n {
            let c = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut d = DMatrix::<C64>::zeros(n, n);
            for i in 0..l {
                d[(i, i)] = C64::new(c, 0.0);
            }
            d[(l, l)] = C64::new(-c * l as f64, 0.0);
            labels.push(format!("D{l}"));
            rep.push(d);
        }
        let csa: Vec<usize> = (first..first + n - 1).collect();
        AlgebraSpec::from_representation(labels, rep)?.with_cartan(&csa)
    }

    /// u(N) on single-particle space: `c_j^dag c_k -> E_jk`, with the number
    /// generators `sqrt2 (E_jj - 1/2)`.
    pub fn u_n(n: usize) -> Result<AlgebraSpec> {
        if n < 2 {
            return invalid("u(N) needs N >= 2");
        }
        let mut labels = Vec::new();
        let mut rep = Vec::new();
        for (lab, raw, shift) in un_generators(n) {
            let mut m = DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
            for (c, ops) in &raw.terms {
                // single-particle image of c_a^dag c_b
                m[(ops[0].mode, ops[1].mode)] += *c;
            }
            labels.push(lab);
            rep.push(m);
        }
        let csa = number_csa(n, n * (n - 1));
        AlgebraSpec::from_representation(labels, rep)?.with_cartan(&csa)
    }

    /// u(N) on the `2^N`-dimensional Fock space (Jordan-Wigner images).
    pub fn u_n_fock(n: usize) -> Result<AlgebraSpec> {
        if n < 2 {
            return invalid("u(N) needs N >= 2");
        }
        fock_spec(n, un_generators(n))?.with_cartan(&number_csa(n, n * (n - 1)))
    }

    /// so(2N): u(N) plus pairing generators, on Fock space.
    pub fn so_2n_fock(n: usize) -> Result<AlgebraSpec> {
        if n < 2 {
            return invalid("so(2N) needs N >= 2");
        }
        let mut g = un_generators(n);
        g.extend(pairing_generators(n));
        fock_spec(n, g)?.with_cartan(&number_csa(n, n * (n - 1)))
    }

    /// Direct sum of one su(2) per qubit, Pauli matrices on `k` qubits.
    pub fn local_su2(k: usize) -> Result<AlgebraSpec> {
        if k == 0 || k > MAX_FOCK_MODES {
            return invalid(format!("local su(2) needs 1..={MAX_FOCK_MODES} qubits"));
        }
        use crate::opalgebra::Pauli;
        let mut labels = Vec::new();
        let mut rep = Vec::new();
        for q in 0..k {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                labels.push(format!("{}{}", p.letter(), q + 1));
                rep.push(dense_pauli_sum(&PauliSum::single(ONE, &[(q, p)])?, k)?);
            }
        }
        let m = 3 * k;
        let mut f = vec![0.0; m * m * m];
        for q in 0..k {
            let o = 3 * q;
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                f[((o + a) * m + o + b) * m + o + c] = 2.0;
                f[((o + b) * m + o + a) * m + o + c] = -2.0;
            }
        }
        let csa: Vec<usize> = (0..k).map(|q| 3 * q + 2).collect();
        AlgebraSpec::new(labels, f, Some(rep))?.with_cartan(&csa)
    }

    /// Look up a built-in by name: `su2:<2S>`, `su3`, `su:<N>`, `u:<N>`, `u-fock:<N>`,
    /// `so2n-fock:<N>`, `local-su2:<k>`.
    pub fn builtin(name: &str) -> Result<AlgebraSpec> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let num = || -> Result<usize> {
            arg.and_then(|a| a.trim().parse().ok())
                .ok_or_else(|| crate::QsimError::InvalidArgument(format!("algebra '{name}' needs an integer argument")))
        };
        match head {
            "su2" => AlgebraSpec::su2(arg.map_or(Ok(1), |_| num())?),
            "su3" => AlgebraSpec::su3(),
            "su" => AlgebraSpec::su_n(num()?),
            "u" => AlgebraSpec::u_n(num()?),
            "u-fock" => AlgebraSpec::u_n_fock(num()?),
            "so2n-fock" => AlgebraSpec::so_2n_fock(num()?),
            "local-su2" => AlgebraSpec::local_su2(num()?),
            _ => invalid(format!("unknown algebra '{name}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn su2_spin_one_brackets_and_roots() {
        let s = AlgebraSpec::su2(2).unwrap();
        let cw = s.cartan().unwrap();
        assert_eq!(cw.roots.len(), 1);
        assert!((cw.roots[0][0] - 2.0).abs() < 1e-12);
        assert!((s.highest_weight().unwrap()[0] - 2.0).abs() < 1e-12);
        let e = s.raising_matrix(0).unwrap();
        let f = s.lowering_matrix(0).unwrap();
        let h = &s.representation().unwrap()[2];
        assert!(max_abs(&(&e * &f - &f * &e - h * C64::new(2.0, 0.0))) < 1e-12);
        assert!(max_abs(&(h * &e - &e * h - &e * C64::new(2.0, 0.0))) < 1e-12);
    }

    #[test]
    fn su3_structure() {
        let s = AlgebraSpec::su3().unwrap();
        assert!((s.structure(0, 1, 2) - 2.0).abs() < 1e-12);
        assert!((s.structure(3, 4, 7) - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.cartan().unwrap().roots.len(), 3);
        assert!(!s.cartan().unwrap().root_sums.is_empty());
    }

    #[test]
    fn u4_basis_is_uniformly_orthogonal() {
        let s = AlgebraSpec::u_n(4).unwrap();
        let g = s.gram().unwrap();
        assert!((g - DMatrix::<f64>::identity(16, 16) * 2.0).abs().max() < 1e-12);
        let o = s.killing_orthonormalize().unwrap();
        assert!((o.gram().unwrap() - DMatrix::<f64>::identity(16, 16)).abs().max() < 1e-12);
        for (a, b) in o.representation().unwrap().iter().zip(s.representation().unwrap()) {
            assert!(max_abs(&(a - b * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))) < 1e-13);
        }
    }

    #[test]
    fn fock_algebras_build() {
        let u = AlgebraSpec::u_n_fock(3).unwrap();
        assert_eq!(u.dim(), 9);
        assert_eq!(u.cartan().unwrap().roots.len(), 3);
        let so = AlgebraSpec::so_2n_fock(3).unwrap();
        assert_eq!(so.dim(), 15);
        assert_eq!(so.cartan().unwrap().roots.len(), 6);
        let l = AlgebraSpec::local_su2(2).unwrap();
        assert_eq!(l.cartan().unwrap().roots.len(), 2);
        assert!(AlgebraSpec::builtin("so2n-fock:7").is_err());
        let su4 = AlgebraSpec::builtin("su:4").unwrap();
        assert_eq!(su4.dim(), 15);
        assert_eq!(su4.cartan().unwrap().roots.len(), 6);
        assert!((su4.gram().unwrap() - DMatrix::<f64>::identity(15, 15) * 2.0).abs().max() < 1e-12);
    }
}
