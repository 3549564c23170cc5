//! Mean-field Hamiltonians: elements of a Lie algebra diagonalized by a
//! generalized Jacobi sweep over su(2) subalgebras, one root at a time.
//!
//! The algebra basis must be orthonormal in its representation (call
//! `killing_orthonormalize` first). With raising operators scaled so that
//! `[E_a, E_-a] = sum_k a^k h_k`, each `E_a` then has unit norm and
//! `d_C = sum_j |iota_j|^2` is half the squared norm of the ladder part.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::{eigh, eigvalsh, is_hermitian, max_abs};
use crate::liecore::{expm, AlgebraSpec, CartanWeyl, GroupElement};

/// Default target for the residual `d_C`.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// `H = sum_j kappa_j O_j` over the algebra's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: Vec<f64>,
}

/// Cartan-Weyl coefficients: `H = sum gamma_k h_k + sum (iota_j E_j + h.c.)`.
#[derive(Clone, Debug)]
pub struct CwProjection {
    pub gamma: Vec<f64>,
    pub iota: Vec<C64>,
}

impl CwProjection {
    /// `d_C = sum_j |iota_j|^2`.
    pub fn distance(&self) -> f64 {
        self.iota.iter().map(|x| x.norm_sqr()).sum()
    }
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

impl AlgebraElement {
    pub fn new(spec: &AlgebraSpec, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != spec.dim() {
            return invalid("coefficient vector length must equal the algebra dimension");
        }
        if coeffs.iter().any(|x| !x.is_finite()) {
            return invalid("coefficients must be finite");
        }
        Ok(AlgebraElement { coeffs })
    }

    /// Project a Hermitian matrix in the stored representation onto the
    /// (orthonormal) basis. Fails when the matrix is not in the span.
    pub fn from_matrix(spec: &AlgebraSpec, m: &DMatrix<C64>) -> Result<Self> {
        require_orthonormal(spec)?;
        let rep = spec
            .representation()
            .ok_or_else(|| QsimError::Algebra("no representation stored".into()))?;
        if m.shape() != rep[0].shape() {
            return invalid("matrix does not match the representation dimension");
        }
        if !is_hermitian(m, 1e-10 * max_abs(m).max(1.0)) {
            return Err(QsimError::NotHermitian("algebra element".into()));
        }
        let coeffs: Vec<f64> = rep.iter().map(|o| (o * m).trace().re).collect();
        let el = AlgebraElement { coeffs };
        let back = spec.element_matrix(&el.coeffs)?;
        if max_abs(&(back - m)) > 1e-10 * max_abs(m).max(1.0) {
            return invalid("matrix lies outside the algebra");
        }
        Ok(el)
    }

    pub fn is_cartan(&self, spec: &AlgebraSpec, tol: f64) -> Result<bool> {
        Ok(self.cw_project(spec)?.distance() <= tol)
    }

    /// Trace-product projection onto the Cartan subalgebra and the raising
    /// operators. Reconstruction is checked to `1e-12` relative.
    pub fn cw_project(&self, spec: &AlgebraSpec) -> Result<CwProjection> {
        if self.coeffs.len() != spec.dim() {
            return invalid("coefficient vector length must equal the algebra dimension");
        }
        let cw = cartan_of(spec)?;
        let gamma: Vec<f64> = cw.csa.iter().map(|&c| self.coeffs[c]).collect();
        let iota: Vec<C64> = cw
            .raising
            .iter()
            .map(|r| {
                let nn: f64 = r.iter().map(|x| x.norm_sqr()).sum();
                r.iter().zip(&self.coeffs).map(|(a, k)| a.conj() * *k).sum::<C64>() / nn
            })
            .collect();
        let mut back = vec![0.0; spec.dim()];
        for (g, &c) in gamma.iter().zip(&cw.csa) {
            back[c] += g;
        }
        for (i, r) in iota.iter().zip(&cw.raising) {
            for (b, a) in back.iter_mut().zip(r.iter()) {
                *b += 2.0 * (i * a).re;
            }
        }
        let scale = self.coeffs.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let err = back.iter().zip(&self.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-12 * scale {
            return Err(QsimError::Algebra(format!(
                "element is not spanned by the Cartan-Weyl basis (error {err:.2e})"
            )));
        }
        Ok(CwProjection { gamma, iota })
    }
}

/// `kappa -> exp(B) kappa` with `B_{mj} = -sum_k zeta_k f_{kj}^m`, the
/// coefficient map of `e^{iF} (.) e^{-iF}` for `F = sum zeta_k O_k`.
pub fn adjoint_rotation(spec: &AlgebraSpec, zeta: &[f64]) -> Result<DMatrix<f64>> {
    let b = rotation_generator(spec, zeta).map(|x| C64::new(x, 0.0));
    Ok(expm(&b, 1e-16)?.matrix.map(|x| x.re))
}

fn rotation_generator(spec: &AlgebraSpec, zeta: &[f64]) -> DMatrix<f64> {
    let m = spec.dim();
    let mut b = DMatrix::<f64>::zeros(m, m);
    for (k, z) in zeta.iter().enumerate() {
        if *z == 0.0 {
            continue;
        }
        for j in 0..m {
            for mm in 0..m {
                let f = spec.structure(k, j, mm);
                if f != 0.0 {
                    b[(mm, j)] -= z * f;
                }
            }
        }
    }
    b
}

/// `exp(B) kappa` without forming `exp(B)`: Taylor series over substeps
/// with `|B|_1 tau <= 1`.
fn rotate(spec: &AlgebraSpec, zeta: &[f64], kappa: &[f64]) -> Vec<f64> {
    let b = rotation_generator(spec, zeta);
    let nrm = (0..b.ncols()).map(|j| b.column(j).abs().sum()).fold(0.0, f64::max);
    let steps = nrm.ceil().max(1.0);
    let bs = b / steps;
    let mut v = DVector::from_column_slice(kappa);
    for _ in 0..steps as usize {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..60 {
            term = &bs * term / k as f64;
            acc += &term;
            if term.amax() <= 1e-18 * acc.amax() {
                break;
            }
        }
        v = acc;
    }
    v.iter().copied().collect()
}

/// Generator `zeta` of `U = exp(i zeta.O)` rotating the Bloch vector
/// `(nx, ny, nz)` of root `t`'s su(2) onto `+S_z`.
fn su2_rotation(cw: &CartanWeyl, t: usize, m: usize, n: [f64; 3]) -> Vec<f64> {
    let alpha = &cw.roots[t];
    let a2: f64 = alpha.iter().map(|x| x * x).sum();
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let perp = (n[0] * n[0] + n[1] * n[1]).sqrt();
    let mut zeta = vec![0.0; m];
    if perp == 0.0 || len == 0.0 {
        return zeta;
    }
    let theta = (n[2] / len).clamp(-1.0, 1.0).acos();
    // axis n x z
    let (ux, uy) = (n[1] / perp, -n[0] / perp);
    let s = -theta * std::f64::consts::SQRT_2 / a2.sqrt();
    for (z, r) in zeta.iter_mut().zip(cw.raising[t].iter()) {
        *z = s * (ux * r.re + uy * r.im);
    }
    zeta
}

/// Generator of `exp(i pi S_x)` in root `t`'s su(2): a Weyl reflection.
fn weyl_reflection(cw: &CartanWeyl, t: usize, m: usize) -> Vec<f64> {
    let a2: f64 = cw.roots[t].iter().map(|x| x * x).sum();
    let s = std::f64::consts::PI * std::f64::consts::SQRT_2 / a2.sqrt();
    let mut zeta = vec![0.0; m];
    for (z, r) in zeta.iter_mut().zip(cw.raising[t].iter()) {
        *z = s * r.re;
    }
    zeta
}

/// Bloch vector of the su(2) component of root `t`: `H_t = n.S` with
/// `S_z = Z / |a|^2`, `S_+ = sqrt2 E / |a|`.
fn bloch(cw: &CartanWeyl, t: usize, p: &CwProjection) -> [f64; 3] {
    let alpha = &cw.roots[t];
    let a2: f64 = alpha.iter().map(|x| x * x).sum();
    let a = (a2 / 2.0).sqrt();
    let iota = p.iota[t];
    let c: f64 = alpha.iter().zip(&p.gamma).map(|(x, g)| x * g).sum();
    [2.0 * a * iota.re, -2.0 * a * iota.im, c]
}

/// One Jacobi step: rotate the largest ladder coefficient away (ties to the
/// lowest root index). Returns the new element and the rotation generator, or
/// `None` when every `iota` vanishes.
pub fn jacobi_step(spec: &AlgebraSpec, h: &AlgebraElement) -> Result<Option<(AlgebraElement, Vec<f64>)>> {
    let cw = cartan_of(spec)?;
    if cw.n_roots() == 0 {
        return invalid("the algebra has no roots");
    }
    let p = h.cw_project(spec)?;
    let mut t = 0;
    for (j, x) in p.iota.iter().enumerate() {
        if x.norm() > p.iota[t].norm() {
            t = j;
        }
    }
    if p.iota[t].norm() == 0.0 {
        return Ok(None);
    }
    let zeta = su2_rotation(cw, t, spec.dim(), bloch(cw, t, &p));
    let coeffs = rotate(spec, &zeta, &h.coeffs);
    Ok(Some((AlgebraElement { coeffs }, zeta)))
}

#[derive(Clone, Debug)]
pub struct DiagonalizationResult {
    /// Cartan coefficients of the diagonal form `H_D = U H U^dag`.
    pub epsilon: Vec<f64>,
    /// Generators of `U = U_P ... U_1`, in the order they were applied.
    pub rotations: Vec<Vec<f64>>,
    /// Final `d_C`.
    pub residual: f64,
    /// Number of Jacobi steps (Weyl reflections not included).
    pub iterations: usize,
    /// `d_C` before each step and after the last.
    pub history: Vec<f64>,
    /// Weyl reflections applied after the sweep.
    pub reflections: usize,
}

impl DiagonalizationResult {
    /// Energy of the weight `w` under `H_D`.
    pub fn energy(&self, w: &[f64]) -> f64 {
        self.epsilon.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// `U` in the stored representation.
    pub fn unitary(&self, spec: &AlgebraSpec) -> Result<DMatrix<C64>> {
        let p = spec.element_matrix(&vec![0.0; spec.dim()])?.nrows();
        let mut u = DMatrix::<C64>::identity(p, p);
        for z in &self.rotations {
            u = GroupElement::new(spec, z)?.matrix * u;
        }
        Ok(u)
    }
}

/// Step cap: `10 ceil(l [ln M - ln(eps / d0)])`, `d0 = d_C(H) / M`.
pub fn iteration_cap(l: usize, m: usize, d_c: f64, eps: f64) -> usize {
    let d0 = d_c / m as f64;
    let bound = l as f64 * ((m as f64).ln() - (eps / d0).ln());
    10 * bound.ceil().max(1.0) as usize
}

/// Diagonalize `H` to `d_C <= eps`, then reflect `H_D` into the chamber
/// where the highest weight has the lowest energy (`epsilon . a <= 0` for every
/// positive root).
pub fn diagonalize(spec: &AlgebraSpec, h: &AlgebraElement, eps: f64) -> Result<DiagonalizationResult> {
    if !(eps > 0.0) {
        return invalid("tolerance must be positive");
    }
    require_orthonormal(spec)?;
    let cw = cartan_of(spec)?;
    let l = cw.n_roots();
    let m = spec.dim();
    let mut cur = h.clone();
    let d_first = cur.cw_project(spec)?.distance();
    let cap = iteration_cap(l, m, d_first, eps);
    let ratio = if l == 0 { 0.0 } else { (l as f64 - 1.0) / l as f64 };
    let mut history = vec![d_first];
    let mut rotations = Vec::new();
    let mut d = d_first;
    while d > eps {
        if rotations.len() >= cap {
            return Err(QsimError::NotConverged {
                iterations: rotations.len(),
                residual: d,
            });
        }
        let Some((next, zeta)) = jacobi_step(spec, &cur)? else {
            break;
        };
        let dn = next.cw_project(spec)?.distance();
        // rounding floor: the rotation is orthogonal to ~1e-15 relative
        let floor = 1e-13 * cur.coeffs.iter().map(|x| x * x).sum::<f64>();
        if dn > ratio * d + floor {
            return Err(QsimError::Algebra(format!(
                "d_C rose from {d:.3e} to {dn:.3e}, above the ({}/{l}) contraction",
                l - 1
            )));
        }
        cur = next;
        d = dn;
        history.push(d);
        rotations.push(zeta);
    }
    let iterations = rotations.len();
    let mut reflections = 0;
    let max_reflections = 4 * l * l + 4;
    loop {
        let p = cur.cw_project(spec)?;
        let scale = p.gamma.iter().fold(1e-300f64, |s, x| s.max(x.abs()));
        let bad = cw.roots.iter().position(|a| {
            let dot: f64 = a.iter().zip(&p.gamma).map(|(x, g)| x * g).sum();
            dot > 1e-12 * scale
        });
        let Some(t) = bad else { break };
        if reflections >= max_reflections {
            return Err(QsimError::Algebra("Weyl reflections did not terminate".into()));
        }
        let zeta = weyl_reflection(cw, t, m);
        cur = AlgebraElement { coeffs: rotate(spec, &zeta, &cur.coeffs) };
        rotations.push(zeta);
        reflections += 1;
    }
    let p = cur.cw_project(spec)?;
    Ok(DiagonalizationResult {
        epsilon: p.gamma.clone(),
        rotations,
        residual: p.distance(),
        iterations,
        history,
        reflections,
    })
}

/// Weights of every state of the stored representation, read off from the
/// eigenvectors of a generic Cartan element.
pub fn representation_weights(spec: &AlgebraSpec) -> Result<Vec<Vec<f64>>> {
    let cw = cartan_of(spec)?;
    let rep = spec
        .representation()
        .ok_or_else(|| QsimError::Algebra("no representation stored".into()))?;
    let p = rep[0].nrows();
    let mut hg = DMatrix::<C64>::zeros(p, p);
    for (k, &c) in cw.csa.iter().enumerate() {
        hg += &rep[c] * C64::new(1.0 + 0.1 * (k as f64 + 2.0).sqrt(), 0.0);
    }
    let (_, vecs) = eigh(&hg);
    Ok((0..p)
        .map(|i| {
            let v = vecs.column(i);
            cw.csa.iter().map(|&c| (v.adjoint() * &rep[c] * v)[(0, 0)].re).collect()
        })
        .collect())
}

/// Spectrum of `H` in the stored representation from the weight formula,
/// ascending.
pub fn weight_spectrum(spec: &AlgebraSpec, res: &DiagonalizationResult) -> Result<Vec<f64>> {
    let mut e: Vec<f64> = representation_weights(spec)?.iter().map(|w| res.energy(w)).collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Single-particle energies of `sum lambda_jk c_j^dag c_k`: the eigenvalues
/// of `lambda`, ascending.
pub fn bogolubov_quadratic(lambda: &DMatrix<C64>) -> Result<Vec<f64>> {
    if !lambda.is_square() || lambda.nrows() == 0 {
        return invalid("lambda must be a non-empty square matrix");
    }
    if !is_hermitian(lambda, 1e-12 * max_abs(lambda).max(1.0)) {
        return Err(QsimError::NotHermitian("lambda".into()));
    }
    Ok(eigvalsh(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ortho(name: &str) -> AlgebraSpec {
        AlgebraSpec::builtin(name).unwrap().killing_orthonormalize().unwrap()
    }

    fn random_element(spec: &AlgebraSpec, rng: &mut ChaCha8Rng) -> AlgebraElement {
        let c = (0..spec.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        AlgebraElement::new(spec, c).unwrap()
    }

    #[test]
    fn projection_of_sigma_x() {
        let s = ortho("su2");
        // sigma_x = sqrt2 O_x in the orthonormal basis
        let el = AlgebraElement::new(&s, vec![2f64.sqrt(), 0.0, 0.0]).unwrap();
        let p = el.cw_project(&s).unwrap();
        assert!(p.gamma[0].abs() < 1e-14);
        assert_eq!(p.iota.len(), 1);
        // sigma_x = sigma_+ + sigma_- and E = sigma_+ here
        let e = s.raising_matrix(0).unwrap();
        let sx = s.element_matrix(&el.coeffs).unwrap();
        let back = &e * p.iota[0] + e.adjoint() * p.iota[0].conj();
        assert!(max_abs(&(back - sx)) < 1e-14);
        let h = AlgebraElement::new(&s, vec![0.0, 0.0, 0.7]).unwrap();
        assert!(h.is_cartan(&s, 0.0).unwrap());
    }

    #[test]
    fn projection_round_trip_u4() {
        let s = ortho("u:4");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let el = random_element(&s, &mut rng);
        let p = el.cw_project(&s).unwrap();
        let cw = s.cartan().unwrap();
        let mut m = DMatrix::<C64>::zeros(4, 4);
        let rep = s.representation().unwrap();
        for (g, &c) in p.gamma.iter().zip(&cw.csa) {
            m += &rep[c] * C64::new(*g, 0.0);
        }
        for (j, i) in p.iota.iter().enumerate() {
            let e = s.raising_matrix(j).unwrap();
            m += &e * *i + e.adjoint() * i.conj();
        }
        assert!(max_abs(&(m - s.element_matrix(&el.coeffs).unwrap())) < 1e-12);
    }

    #[test]
    fn spin_half_single_step() {
        let s = ortho("su2");
        let (a, b) = (0.6, -1.3);
        let sq = 2f64.sqrt();
        // a sigma_z + b sigma_x
        let el = AlgebraElement::new(&s, vec![b * sq, 0.0, a * sq]).unwrap();
        let res = diagonalize(&s, &el, DEFAULT_EPSILON).unwrap();
        assert_eq!(res.iterations, 1);
        let spec = weight_spectrum(&s, &res).unwrap();
        let r = (a * a + b * b).sqrt();
        assert!((spec[0] + r).abs() < 1e-12 && (spec[1] - r).abs() < 1e-12);
        // highest weight is the ground state after the reflection pass
        let hw = s.highest_weight().unwrap();
        assert!((res.energy(hw) + r).abs() < 1e-12);
    }

    #[test]
    fn cartan_element_needs_no_steps() {
        let s = ortho("su3");
        let mut c = vec![0.0; 8];
        c[2] = -0.4;
        c[7] = 0.9;
        let res = diagonalize(&s, &AlgebraElement::new(&s, c.clone()).unwrap(), 1e-10).unwrap();
        assert_eq!(res.iterations, 0);
        let same = jacobi_step(&s, &AlgebraElement::new(&s, c).unwrap()).unwrap();
        assert!(same.is_none());
    }

    #[test]
    fn su4_contraction_and_isospectrality() {
        let s = ortho("su:4");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let el = random_element(&s, &mut rng);
            let res = diagonalize(&s, &el, 1e-12).unwrap();
            let l = 6.0;
            for w in res.history.windows(2) {
                assert!(w[1] <= (l - 1.0) / l * w[0] + 1e-14);
            }
            let h = s.element_matrix(&el.coeffs).unwrap();
            let dense = eigvalsh(&h);
            let got = weight_spectrum(&s, &res).unwrap();
            for (a, b) in dense.iter().zip(&got) {
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
            let u = res.unitary(&s).unwrap();
            assert!(crate::linalg::is_unitary(&u, 1e-9));
            let hd = &u * &h * u.adjoint();
            let mut diag = hd.clone();
            diag.fill_diagonal(C64::new(0.0, 0.0));
            assert!(max_abs(&diag) < 1e-5);
            assert!((dense[0] - res.energy(s.highest_weight().unwrap())).abs() < 1e-9);
        }
    }

    #[test]
    fn u8_matches_dense_and_bogolubov() {
        let s = ortho("u:8");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let el = random_element(&s, &mut rng);
        let res = diagonalize(&s, &el, DEFAULT_EPSILON).unwrap();
        let lam = s.element_matrix(&el.coeffs).unwrap();
        let bog = bogolubov_quadratic(&lam).unwrap();
        for (a, b) in bog.iter().zip(weight_spectrum(&s, &res).unwrap()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(res.iterations <= iteration_cap(28, 64, res.history[0], DEFAULT_EPSILON));
    }

    #[test]
    fn fock_weight_formula() {
        let s = ortho("u-fock:3");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let el = random_element(&s, &mut rng);
        let res = diagonalize(&s, &el, 1e-12).unwrap();
        let dense = eigvalsh(&s.element_matrix(&el.coeffs).unwrap());
        for (a, b) in dense.iter().zip(weight_spectrum(&s, &res).unwrap()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn bogolubov_cases() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(-1.0, 0.0)]));
        assert_eq!(bogolubov_quadratic(&d).unwrap(), vec![-1.0, 2.0]);
        let tau = 0.8;
        let h = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(tau, 0.0), C64::new(tau, 0.0), C64::new(0.0, 0.0)]);
        let e = bogolubov_quadratic(&h).unwrap();
        assert!((e[0] + tau).abs() < 1e-14 && (e[1] - tau).abs() < 1e-14);
        let n = 8;
        let mut ring = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            ring[(j, (j + 1) % n)] = C64::new(1.0, 0.0);
            ring[((j + 1) % n, j)] = C64::new(1.0, 0.0);
        }
        let e = bogolubov_quadratic(&ring).unwrap();
        let mut want: Vec<f64> = (0..n).map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(bogolubov_quadratic(&bad).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let s = AlgebraSpec::builtin("u:3").unwrap();
        let el = AlgebraElement::new(&s, vec![0.1; 9]).unwrap();
        assert!(diagonalize(&s, &el, 1e-10).is_err());
    }
}
