//! Independent oracles shared by the acceptance run and the property suites.
//! Nothing here calls into the library's mappings or solvers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use qsimkit::linalg::LinearOp;
use qsimkit::opalgebra::PauliSum;
use qsimkit::C64;
use std::collections::HashMap;
use twofloat::TwoFloat;

pub mod props;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Fock-space matrix of `sum h_ij c_i^dag c_j` over occupation bitstrings
/// (bit `i` set = mode `i` occupied), signs counted from occupied modes below.
pub fn fock_quadratic(h: &DMatrix<f64>) -> DMatrix<C64> {
    let n = h.nrows();
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        for i in 0..n {
            for j in 0..n {
                if h[(i, j)] == 0.0 {
                    continue;
                }
                if let Some((t, s)) = hop(b as u32, i, j) {
                    out[(t as usize, b)] += c(h[(i, j)] * s, 0.0);
                }
            }
        }
    }
    out
}

/// `c_a^dag c_b` on an occupation bitstring.
pub fn hop(cfg: u32, a: usize, b: usize) -> Option<(u32, f64)> {
    if cfg >> b & 1 == 0 {
        return None;
    }
    let c1 = cfg & !(1 << b);
    if c1 >> a & 1 == 1 {
        return None;
    }
    let s = (c1 & ((1 << b) - 1)).count_ones() + (c1 & ((1 << a) - 1)).count_ones();
    Some((c1 | 1 << a, if s % 2 == 0 { 1.0 } else { -1.0 }))
}

/// `c_a + c_a^dag` on occupation bitstrings.
pub fn fock_majorana(n: usize, a: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let s = if (b & ((1 << a) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[(b ^ (1 << a), b)] = c(s, 0.0);
    }
    out
}

/// `exp(-i H t)` for Hermitian `H` from nalgebra's eigendecomposition.
pub fn evolve_dense(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let e = h.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| C64::from_polar(1.0, -x * t)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// Fano-Anderson pair `G(t) = <phi| b(t) b^dag |phi>` by dense Fock evolution:
/// mode 0 is the impurity, mode 1 the band mode, `phi` has the band mode filled.
pub fn fano_green_dense(eps_k0: f64, eps: f64, v: f64, t: f64) -> C64 {
    let h = DMatrix::from_row_slice(2, 2, &[eps, v, v, eps_k0]);
    let hf = fock_quadratic(&h);
    let x = fock_majorana(2, 0);
    let mut phi = DVector::zeros(4);
    phi[0b10] = c(1.0, 0.0);
    let u = evolve_dense(&hf, t);
    let right = &u * (&x * &phi);
    let left = &u * &phi;
    left.dotc(&(&x * right))
}

/// Eigenvalues of `[[a, v], [v, d]]` by the quadratic formula.
pub fn pair_eigenvalues(a: f64, d: f64, v: f64) -> [f64; 2] {
    let m = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + v * v).sqrt();
    [m - r, m + r]
}

/// Periodic `nx x ny` lattice bonds, one per site per direction; a
/// direction of length 2 contributes each bond twice, length 1 none.
pub fn lattice_bonds(nx: usize, ny: usize) -> Vec<(usize, usize)> {
    let mut b = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let s = i + j * nx;
            if nx > 1 {
                b.push((s, (i + 1) % nx + j * nx));
            }
            if ny > 1 {
                b.push((s, i + ((j + 1) % ny) * nx));
            }
        }
    }
    b
}

/// Fixed-particle-number sector of the Hubbard model over occupation
/// bitstrings; rows are `up_index * n_down_configs + down_index`.
pub struct HubbardSector {
    pub ns: usize,
    pub up: Vec<u32>,
    pub down: Vec<u32>,
    pub h: DMatrix<f64>,
}

impl HubbardSector {
    pub fn new(nx: usize, ny: usize, t: f64, u: f64, n_up: usize, n_down: usize) -> Self {
        let ns = nx * ny;
        let combos = |k: usize| (0u32..1 << ns).filter(|x| x.count_ones() as usize == k).collect::<Vec<_>>();
        let up = combos(n_up);
        let down = combos(n_down);
        let nd = down.len();
        let d = up.len() * nd;
        let mut h = DMatrix::zeros(d, d);
        let bonds = lattice_bonds(nx, ny);
        for (iu, &cu) in up.iter().enumerate() {
            for (id, &cd) in down.iter().enumerate() {
                let r = iu * nd + id;
                h[(r, r)] += u * (cu & cd).count_ones() as f64;
                for &(a, b) in &bonds {
                    for (x, y) in [(a, b), (b, a)] {
                        if let Some((nc, s)) = hop(cu, x, y) {
                            let k = up.binary_search(&nc).unwrap();
                            h[(k * nd + id, r)] -= t * s;
                        }
                        if let Some((nc, s)) = hop(cd, x, y) {
                            let k = down.binary_search(&nc).unwrap();
                            h[(iu * nd + k, r)] -= t * s;
                        }
                    }
                }
            }
        }
        HubbardSector { ns, up, down, h }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Closed-shell Slater determinant of the lowest hopping orbitals,
    /// amplitudes from determinants of the occupied orbital rows.
    pub fn slater(&self, nx: usize, ny: usize, t: f64) -> DVector<f64> {
        let ns = self.ns;
        let mut k = DMatrix::<f64>::zeros(ns, ns);
        for (a, b) in lattice_bonds(nx, ny) {
            k[(a, b)] -= t;
            k[(b, a)] -= t;
        }
        let e = k.symmetric_eigen();
        let mut order: Vec<usize> = (0..ns).collect();
        order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
        let amp = |cfg: u32| {
            let sites: Vec<usize> = (0..ns).filter(|s| cfg >> s & 1 == 1).collect();
            let n = sites.len();
            DMatrix::from_fn(n, n, |i, j| e.eigenvectors[(sites[i], order[j])]).determinant()
        };
        let au: Vec<f64> = self.up.iter().map(|&x| amp(x)).collect();
        let ad: Vec<f64> = self.down.iter().map(|&x| amp(x)).collect();
        let nd = self.down.len();
        DVector::from_fn(self.dim(), |r, _| au[r / nd] * ad[r % nd])
    }
}

/// A Pauli sum restricted to a set of basis labels that it leaves invariant.
pub struct SectorOp {
    pub labels: Vec<usize>,
    rows: Vec<Vec<(usize, C64)>>,
    bound: f64,
}

impl SectorOp {
    /// Fails if some column has weight outside the sector.
    pub fn new(op: &PauliSum, n: usize, labels: Vec<usize>) -> Result<Self, String> {
        let pos: HashMap<usize, usize> = labels.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let terms: Vec<(usize, usize, usize, C64)> = op
            .iter()
            .map(|(s, &k)| {
                let (x, z, y) = s.masks(n);
                (x, z, y, k)
            })
            .collect();
        let mut rows = vec![Vec::new(); labels.len()];
        for (col, &b) in labels.iter().enumerate() {
            let mut acc: HashMap<usize, C64> = HashMap::new();
            for &(x, z, y, k) in &terms {
                // Y = i X Z on a basis state
                let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                *acc.entry(b ^ x).or_default() += k * C64::i().powu(y as u32) * sign;
            }
            for (to, v) in acc {
                match pos.get(&to) {
                    Some(&r) => rows[r].push((col, v)),
                    None if v.norm() > 1e-12 => return Err(format!("label {to:b} leaves the sector")),
                    None => {}
                }
            }
        }
        Ok(SectorOp {
            labels,
            rows,
            bound: op.one_norm(),
        })
    }
}

impl LinearOp for SectorOp {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, row) in self.rows.iter().enumerate() {
            y[r] = row.iter().map(|(k, v)| v * x[*k]).sum();
        }
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }
}

type Dd = Complex<TwoFloat>;

fn dd(x: C64) -> Dd {
    Complex::new(TwoFloat::from(x.re), TwoFloat::from(x.im))
}

fn dd_matmul(a: &[Dd], b: &[Dd], n: usize) -> Vec<Dd> {
    let zero = dd(c(0.0, 0.0));
    let mut out = vec![zero; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

/// `exp(A)` in double-double arithmetic: scaling to `|A|_1 <= 1/8`, a
/// 30-term Taylor sum and repeated squaring.
pub fn expm_double_double(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = (0..n).map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.125 { (norm / 0.125).log2().ceil() as i32 } else { 0 };
    let scale = TwoFloat::from(2f64.powi(-s));
    let x: Vec<Dd> = (0..n * n).map(|k| dd(a[(k / n, k % n)]) * scale).collect();
    let one = dd(c(1.0, 0.0));
    let zero = dd(c(0.0, 0.0));
    let mut term: Vec<Dd> = (0..n * n).map(|k| if k / n == k % n { one } else { zero }).collect();
    let mut sum = term.clone();
    for k in 1..=30 {
        term = dd_matmul(&term, &x, n);
        let inv = TwoFloat::from(1.0) / TwoFloat::from(k as f64);
        for v in term.iter_mut() {
            *v = *v * inv;
        }
        for (acc, v) in sum.iter_mut().zip(&term) {
            *acc = *acc + *v;
        }
    }
    for _ in 0..s {
        sum = dd_matmul(&sum, &sum, n);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let v = sum[i * n + j];
        c(v.re.hi() + v.re.lo(), v.im.hi() + v.im.lo())
    })
}

/// Joint eigenvector of the Cartan matrices with eigenvalues `weight`,
/// taken from a generic combination of them.
pub fn weight_vector(cartan: &[DMatrix<C64>], weight: &[f64]) -> DVector<C64> {
    let dim = cartan[0].nrows();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut target = 0.0;
    for (k, h) in cartan.iter().enumerate() {
        let g = 1.0 + 0.37 * (k as f64 + 1.0).sqrt();
        m += h * c(g, 0.0);
        target += g * weight[k];
    }
    let e = m.symmetric_eigen();
    let best = (0..dim)
        .min_by(|&i, &j| (e.eigenvalues[i] - target).abs().total_cmp(&(e.eigenvalues[j] - target).abs()))
        .unwrap();
    e.eigenvectors.column(best).into_owned()
}
