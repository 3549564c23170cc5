//! Parameterised physical models: Fano-Anderson impurity, 2D Hubbard,
//! anisotropic XY chain in a transverse field, and the LMG model.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};
use crate::linalg::eigh;
use crate::opalgebra::{an, cr, jordan_wigner, FermionExpr, PauliSum, RawExpr};
use crate::qprotocol::{prepare_orbital_slater, Circuit, HamiltonianSpec};
use crate::statevector::{Axis, Gate};

fn check_finite(vals: &[f64], what: &str) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        invalid(format!("{what} must be finite"))
    }
}

/// One impurity level coupled to the `k_0` mode of a ring of `n` sites.
/// Mode 0 is the impurity `b`, mode `l + 1` is the band mode `k_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct FanoAnderson {
    n: usize,
    tau: f64,
    v: f64,
    eps: f64,
}

impl FanoAnderson {
    pub fn new(n: usize, tau: f64, v: f64, eps: f64) -> Result<Self> {
        if n == 0 {
            return invalid("Fano-Anderson ring needs at least one site");
        }
        if n + 1 > crate::statevector::MAX_QUBITS {
            return Err(QsimError::TooLarge(n + 1, crate::statevector::MAX_QUBITS));
        }
        check_finite(&[tau, v, eps], "Fano-Anderson parameters")?;
        Ok(FanoAnderson { n, tau, v, eps })
    }

    /// The `n = 1` model from the `k_0` band energy, impurity energy and coupling.
    pub fn two_level(eps_k0: f64, eps: f64, v: f64) -> Result<Self> {
        FanoAnderson::new(1, -eps_k0 / 2.0, v, eps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn coupling(&self) -> f64 {
        self.v
    }

    pub fn impurity_energy(&self) -> f64 {
        self.eps
    }

    pub fn n_qubits(&self) -> usize {
        self.n + 1
    }

    pub fn wave_vector(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.n as f64
    }

    /// `eps_{k_l} = -2 tau cos k_l`.
    pub fn mode_energy(&self, l: usize) -> f64 {
        -2.0 * self.tau * self.wave_vector(l).cos()
    }

    pub fn fermion_hamiltonian(&self) -> Result<FermionExpr> {
        let nm = self.n + 1;
        let mut raw = RawExpr::new();
        raw.push(C64::new(self.eps, 0.0), vec![cr(0), an(0)]);
        for l in 0..self.n {
            raw.push(C64::new(self.mode_energy(l), 0.0), vec![cr(l + 1), an(l + 1)]);
        }
        raw.push(C64::new(self.v, 0.0), vec![cr(1), an(0)]);
        raw.push(C64::new(self.v, 0.0), vec![cr(0), an(1)]);
        FermionExpr::from_raw(nm, &raw)
    }

    /// Jordan-Wigner image with the impurity on qubit 0 and `k_l` on qubit `l + 1`.
    pub fn hamiltonian(&self) -> Result<PauliSum> {
        jordan_wigner(&self.fermion_hamiltonian()?, self.n_qubits())
    }

    /// The Hamiltonian without its constant part.
    pub fn reduced_hamiltonian(&self) -> Result<PauliSum> {
        Ok(self.hamiltonian()?.without_constant())
    }

    /// Hamiltonian split into the diagonal part, the XX part and the YY part.
    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        let h = self.reduced_hamiltonian()?;
        let mut layers = vec![PauliSum::zero(), PauliSum::zero(), PauliSum::zero()];
        for (s, &c) in h.iter() {
            let k = match s.factors().first().map(|f| f.1) {
                Some(crate::opalgebra::Pauli::X) => 1,
                Some(crate::opalgebra::Pauli::Y) => 2,
                _ => 0,
            };
            layers[k].add_term(c, s.clone());
        }
        layers.retain(|l| !l.is_empty());
        HamiltonianSpec::from_layers(layers)
    }

    /// One-particle Hamiltonian in the mode basis `(b, k_0, ..., k_{n-1})`.
    pub fn one_particle_matrix(&self) -> DMatrix<f64> {
        let nm = self.n + 1;
        let mut h = DMatrix::zeros(nm, nm);
        h[(0, 0)] = self.eps;
        for l in 0..self.n {
            h[(l + 1, l + 1)] = self.mode_energy(l);
        }
        h[(0, 1)] = self.v;
        h[(1, 0)] = self.v;
        h
    }

    pub fn one_particle_energies(&self) -> Vec<f64> {
        let h = self.one_particle_matrix().map(|x| C64::new(x, 0.0));
        crate::linalg::eigvalsh(&h)
    }

    /// Basis label of `|phi>`: one fermion in `k_0`, the rest empty.
    pub fn reference_state(&self) -> usize {
        let all = (1usize << self.n_qubits()) - 1;
        all & !(1usize << (self.n_qubits() - 2))
    }

    /// `(E, Delta, Omega)` with `E = (eps + eps_k0)/2`, `Delta = (eps - eps_k0)/2`
    /// and `Omega = sqrt(Delta^2 + V^2)`.
    pub fn pair_parameters(&self) -> (f64, f64, f64) {
        let ek0 = self.mode_energy(0);
        let e = (self.eps + ek0) / 2.0;
        let d = (self.eps - ek0) / 2.0;
        (e, d, d.hypot(self.v))
    }

    /// `G(t) = <phi| b(t) b^dag |phi>` from the two-mode block.
    pub fn green_closed_form(&self, t: f64) -> C64 {
        let (e, d, w) = self.pair_parameters();
        let ratio = if w == 0.0 { 0.0 } else { d / w };
        C64::from_polar(1.0, -e * t) * C64::new((w * t).cos(), -ratio * (w * t).sin())
    }

    /// `S(t) = <phi| exp(-iHt) |phi>` from the two-mode block.
    pub fn survival_closed_form(&self, t: f64) -> C64 {
        let (e, d, w) = self.pair_parameters();
        let ratio = if w == 0.0 { 0.0 } else { d / w };
        C64::from_polar(1.0, -e * t) * C64::new((w * t).cos(), ratio * (w * t).sin())
    }

    /// `exp(-i Hbar t)` for `n = 1` as `U exp(-i l1 Z_1 t) exp(-i l2 Z_2 t) U^dag`
    /// in single-qubit rotations and Ising gates.
    pub fn decomposed_evolution(&self, t: f64) -> Result<Vec<Gate>> {
        if self.n != 1 {
            return invalid("the two-qubit decomposition needs n = 1");
        }
        let (e, d, w) = self.pair_parameters();
        let (l1, l2) = ((e - w) / 2.0, (e + w) / 2.0);
        let diag = [Gate::rot(Axis::Z, 0, 2.0 * l1 * t), Gate::rot(Axis::Z, 1, 2.0 * l2 * t)];
        if self.v == 0.0 {
            let ek0 = self.mode_energy(0);
            return Ok(vec![Gate::rot(Axis::Z, 0, self.eps * t), Gate::rot(Axis::Z, 1, ek0 * t)]);
        }
        let delta = (d + w) / self.v;
        let theta = (1.0 / (1.0 + delta * delta).sqrt()).acos();
        // exp(i a sigma) is a rotation by -2a
        let r = |axis, q, a: f64| Gate::rot(axis, q, -2.0 * a);
        let ising = |a: f64| Gate::Ising { j: 0, k: 1, omega: -2.0 * a };
        let u = vec![
            r(Axis::Y, 1, FRAC_PI_4),
            r(Axis::X, 0, -FRAC_PI_4),
            ising(theta / 2.0),
            r(Axis::Y, 1, -FRAC_PI_4),
            r(Axis::X, 1, -FRAC_PI_4),
            r(Axis::X, 0, FRAC_PI_4),
            r(Axis::Y, 0, FRAC_PI_4),
            ising(-theta / 2.0),
            r(Axis::Y, 0, -FRAC_PI_4),
            r(Axis::X, 1, FRAC_PI_4),
        ];
        let mut gates: Vec<Gate> = u.iter().rev().map(Gate::inverse).collect();
        gates.extend(diag);
        gates.extend(u);
        Ok(gates)
    }
}

/// Spin label of a Hubbard mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Largest Hubbard lattice (sites), so that `2 N_x N_y + 1 <= 17` qubits.
pub const MAX_HUBBARD_SITES: usize = 8;

/// Spin-1/2 Hubbard model on an `N_x x N_y` torus. Site `(i, j)` (zero-based)
/// is spatial index `i + j N_x`; spin-up modes come first, then spin-down.
/// With periodic wrapping a direction of length 2 counts its bond twice and a
/// direction of length 1 has no bonds.
#[derive(Clone, Debug, PartialEq)]
pub struct Hubbard2D {
    nx: usize,
    ny: usize,
    tx: f64,
    ty: f64,
    u: f64,
}

impl Hubbard2D {
    pub fn new(nx: usize, ny: usize, tx: f64, ty: f64, u: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return invalid("lattice dimensions must be positive");
        }
        if nx * ny > MAX_HUBBARD_SITES {
            return Err(QsimError::TooLarge(nx * ny, MAX_HUBBARD_SITES));
        }
        check_finite(&[tx, ty, u], "Hubbard parameters")?;
        Ok(Hubbard2D { nx, ny, tx, ty, u })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn interaction(&self) -> f64 {
        self.u
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn site(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        match spin {
            Spin::Up => site,
            Spin::Down => site + self.n_sites(),
        }
    }

    /// Directed bonds `(a, b, t)`, one per site and direction.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.nx > 1 {
                    out.push((self.site(i, j), self.site((i + 1) % self.nx, j), self.tx));
                }
                if self.ny > 1 {
                    out.push((self.site(i, j), self.site(i, (j + 1) % self.ny), self.ty));
                }
            }
        }
        out
    }

    /// Single-particle hopping matrix `h` with `K_sigma = sum h_ab c^dag_a c_b`.
    pub fn hopping_matrix(&self) -> DMatrix<f64> {
        let ns = self.n_sites();
        let mut h = DMatrix::zeros(ns, ns);
        for (a, b, t) in self.bonds() {
            h[(a, b)] -= t;
            h[(b, a)] -= t;
        }
        h
    }

    pub fn single_particle_energies(&self) -> Vec<f64> {
        eigh(&self.hopping_matrix().map(|x| C64::new(x, 0.0))).0
    }

    pub fn kinetic(&self, spin: Spin) -> Result<FermionExpr> {
        let nm = self.n_modes();
        let mut raw = RawExpr::new();
        for (a, b, t) in self.bonds() {
            let (ma, mb) = (self.mode(a, spin), self.mode(b, spin));
            raw.push(C64::new(-t, 0.0), vec![cr(ma), an(mb)]);
            raw.push(C64::new(-t, 0.0), vec![cr(mb), an(ma)]);
        }
        FermionExpr::from_raw(nm, &raw)
    }

    pub fn potential(&self) -> Result<FermionExpr> {
        let nm = self.n_modes();
        let mut raw = RawExpr::new();
        for s in 0..self.n_sites() {
            let (up, dn) = (self.mode(s, Spin::Up), self.mode(s, Spin::Down));
            raw.push(C64::new(self.u, 0.0), vec![cr(up), an(up), cr(dn), an(dn)]);
        }
        FermionExpr::from_raw(nm, &raw)
    }

    /// Pauli layers `K_up`, `K_down`, `V`.
    pub fn layers(&self) -> Result<Vec<PauliSum>> {
        let n = self.n_modes();
        Ok(vec![
            jordan_wigner(&self.kinetic(Spin::Up)?, n)?,
            jordan_wigner(&self.kinetic(Spin::Down)?, n)?,
            jordan_wigner(&self.potential()?, n)?,
        ])
    }

    /// Commuting layers in the order `K_up`, `K_down`, `V`; each kinetic
    /// term is split further into commuting groups.
    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        let mut layers = Vec::new();
        for l in self.layers()? {
            if !l.is_empty() {
                layers.extend(HamiltonianSpec::from_sum(&l)?.layers().iter().cloned());
            }
        }
        HamiltonianSpec::from_layers(layers)
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        Ok(self.layers()?.iter().fold(PauliSum::zero(), |acc, l| acc.add(l)))
    }

    /// Occupied orbitals of the paramagnetic mean-field state: the `n_up`
    /// and `n_down` lowest hopping orbitals, as columns over all modes.
    pub fn mean_field_orbitals(&self, n_up: usize, n_down: usize) -> Result<DMatrix<f64>> {
        let ns = self.n_sites();
        if n_up > ns || n_down > ns {
            return invalid(format!("at most {ns} electrons per spin"));
        }
        let (_, vecs) = eigh(&self.hopping_matrix().map(|x| C64::new(x, 0.0)));
        let mut phi = DMatrix::zeros(2 * ns, n_up + n_down);
        for (col, (k, offset)) in (0..n_up).map(|k| (k, 0)).chain((0..n_down).map(|k| (k, ns))).enumerate() {
            // real symmetric input: fix the phase so the column is real
            let v = vecs.column(k);
            let big = v.iter().copied().fold(C64::new(0.0, 0.0), |m, x| if x.norm() > m.norm() { x } else { m });
            let ph = big.conj() / big.norm();
            for a in 0..ns {
                phi[(a + offset, col)] = (v[a] * ph).re;
            }
        }
        Ok(phi)
    }

    /// Mean-field Slater determinant circuit on `2 N_x N_y` qubits.
    pub fn mean_field_circuit(&self, n_up: usize, n_down: usize) -> Result<Circuit> {
        prepare_orbital_slater(&self.mean_field_orbitals(n_up, n_down)?)
    }
}

/// Anisotropic XY chain in a transverse field, `N` even, periodic.
#[derive(Clone, Debug, PartialEq)]
pub struct XYChain {
    n: usize,
    gamma: f64,
}

/// Exact quantities of the XY ground state at one coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct XyExact {
    pub g: f64,
    /// Wave vectors of the antiperiodic set.
    pub k: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub v2: Vec<f64>,
    pub purity: f64,
    pub shifted: f64,
}

impl XYChain {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return invalid("XY chain length must be even and at least 2");
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return invalid("anisotropy must lie in (0, 1]");
        }
        Ok(XYChain { n, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `+-pi/N, +-3pi/N, ..., +-(N-1)pi/N`.
    pub fn wave_vectors(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut v = Vec::with_capacity(self.n);
        for m in 0..self.n / 2 {
            let k = (2 * m + 1) as f64 * PI / n;
            v.push(-k);
            v.push(k);
        }
        v
    }

    /// `-g sum [(1+gamma) X_i X_{i+1} + (1-gamma) Y_i Y_{i+1}] + sum Z_i`.
    pub fn hamiltonian(&self, g: f64) -> Result<PauliSum> {
        use crate::opalgebra::Pauli;
        let mut h = PauliSum::zero();
        for i in 0..self.n {
            let j = (i + 1) % self.n;
            h = h.add(&PauliSum::single(C64::new(-g * (1.0 + self.gamma), 0.0), &[(i, Pauli::X), (j, Pauli::X)])?);
            h = h.add(&PauliSum::single(C64::new(-g * (1.0 - self.gamma), 0.0), &[(i, Pauli::Y), (j, Pauli::Y)])?);
            h = h.add(&PauliSum::single(C64::new(1.0, 0.0), &[(i, Pauli::Z)])?);
        }
        h.prune(0.0);
        Ok(h)
    }

    /// Bogoliubov solution and `u(N)` purity of the ground state.
    pub fn exact(&self, g: f64) -> Result<XyExact> {
        if !(g >= 0.0 && g.is_finite()) {
            return invalid("coupling g must be finite and non-negative");
        }
        let k = self.wave_vectors();
        let mut phi = Vec::with_capacity(k.len());
        let mut xi = Vec::with_capacity(k.len());
        let mut v2 = Vec::with_capacity(k.len());
        for &kk in &k {
            let a = 1.0 - 2.0 * g * kk.cos();
            let b = 2.0 * g * self.gamma * kk.sin();
            let r = a.hypot(b);
            // tan phi = 2 g gamma sin k / (-1 + 2 g cos k), branch with phi -> 0 at g = 0
            let p = (-b).atan2(a);
            phi.push(p);
            xi.push(2.0 * r);
            v2.push((p / 2.0).sin().powi(2));
        }
        let purity = 4.0 / self.n as f64 * v2.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
        Ok(XyExact {
            g,
            k,
            phi,
            xi,
            v2,
            purity,
            shifted: purity - 1.0 / (1.0 + self.gamma),
        })
    }

    /// `(2/N)(<N^2> - <N>^2)` from the independent `(k, -k)` pairs.
    pub fn number_fluctuation(&self, g: f64) -> Result<f64> {
        let ex = self.exact(g)?;
        let var: f64 = ex
            .k
            .iter()
            .zip(&ex.v2)
            .filter(|(k, _)| **k > 0.0)
            .map(|(_, v)| 4.0 * v * (1.0 - v))
            .sum();
        Ok(2.0 / self.n as f64 * var)
    }

    /// Probability `Omega(n)` of `n` fermions, `n = 0..=N`.
    pub fn number_distribution(&self, g: f64) -> Result<Vec<f64>> {
        let ex = self.exact(g)?;
        let mut dist = vec![0.0; self.n + 1];
        dist[0] = 1.0;
        for (k, v) in ex.k.iter().zip(&ex.v2) {
            if *k <= 0.0 {
                continue;
            }
            for m in (0..=self.n).rev() {
                let stay = dist[m] * (1.0 - v);
                let moved = if m >= 2 { dist[m - 2] * v } else { 0.0 };
                dist[m] = stay + moved;
            }
        }
        Ok(dist)
    }

    /// Thermodynamic-limit purity.
    pub fn purity_limit(&self, g: f64) -> f64 {
        xy_purity_limit(self.gamma, g)
    }
}

/// Thermodynamic-limit `u(N)` purity of the XY ground state. Written as
/// `(1 + gamma^2 - 4g^2) / (s (s + gamma^2))`, `s = sqrt(1 - 4g^2(1-gamma^2))`,
/// which is the closed form with the `1 - gamma^2` factor cancelled.
pub fn xy_purity_limit(gamma: f64, g: f64) -> f64 {
    if g > 0.5 {
        return 1.0 / (1.0 + gamma);
    }
    let g2 = gamma * gamma;
    let s = (1.0 - 4.0 * g * g * (1.0 - g2)).sqrt();
    (1.0 + g2 - 4.0 * g * g) / (s * (s + g2))
}

/// Shifted purity `P - 1/(1+gamma)` in the thermodynamic limit.
pub fn xy_shifted_purity_limit(gamma: f64, g: f64) -> f64 {
    xy_purity_limit(gamma, g) - 1.0 / (1.0 + gamma)
}

/// Lipkin-Meshkov-Glick model `H = J_z + V/(2N)(J_+^2 + J_-^2) + W/(2N)(J_+J_- + J_-J_+)`
/// in the `J = N/2` sector.
#[derive(Clone, Debug, PartialEq)]
pub struct Lmg {
    n: usize,
    v: f64,
    w: f64,
}

/// Largest particle number accepted by [`Lmg`].
pub const MAX_LMG_PARTICLES: usize = 4000;

/// Ground state of one parity sector.
#[derive(Clone, Debug, PartialEq)]
pub struct LmgSector {
    pub energy: f64,
    /// `<J_z>`.
    pub jz: f64,
    /// Amplitudes over `J_z = -J, ..., J` (zero outside the sector).
    pub state: Vec<f64>,
}

/// Minimiser of the classical energy per particle at `j = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmgClassical {
    pub theta: f64,
    pub phi: f64,
    pub energy: f64,
    pub purity: f64,
    pub n_up: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmgSolution {
    pub energy_per_particle: f64,
    pub n_up: f64,
    pub purity: f64,
    /// Ground states of the even and odd `J_z + J` sectors.
    pub sectors: [LmgSector; 2],
    pub classical: LmgClassical,
}

impl Lmg {
    pub fn new(n: usize, v: f64, w: f64) -> Result<Self> {
        if n == 0 {
            return invalid("LMG needs at least one particle");
        }
        if n > MAX_LMG_PARTICLES {
            return Err(QsimError::TooLarge(n, MAX_LMG_PARTICLES));
        }
        check_finite(&[v, w], "LMG couplings")?;
        Ok(Lmg { n, v, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Delta = |V| - W`.
    pub fn delta(&self) -> f64 {
        self.v.abs() - self.w
    }

    fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    fn m(&self, idx: usize) -> f64 {
        idx as f64 - self.j()
    }

    fn ladder(&self, m: f64) -> f64 {
        let j = self.j();
        (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// Diagonal and `J_z -> J_z + 2` elements of `H` over `m = -J..J`.
    pub fn matrix_elements(&self) -> (Vec<f64>, Vec<f64>) {
        let nn = self.n as f64;
        let j = self.j();
        let dim = self.n + 1;
        let diag = (0..dim)
            .map(|i| {
                let m = self.m(i);
                m + self.w / nn * (j * (j + 1.0) - m * m)
            })
            .collect();
        let off = (0..dim.saturating_sub(2))
            .map(|i| {
                let m = self.m(i);
                self.v / (2.0 * nn) * self.ladder(m) * self.ladder(m + 1.0)
            })
            .collect();
        (diag, off)
    }

    /// Dense `(N+1) x (N+1)` Hamiltonian.
    pub fn dense(&self) -> DMatrix<f64> {
        let (d, o) = self.matrix_elements();
        let dim = d.len();
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        for (i, x) in o.into_iter().enumerate() {
            h[(i, i + 2)] = x;
            h[(i + 2, i)] = x;
        }
        debug_assert_eq!(h.nrows(), dim);
        h
    }

    fn sector(&self, parity: usize) -> Result<LmgSector> {
        let (d, o) = self.matrix_elements();
        let idx: Vec<usize> = (parity..d.len()).step_by(2).collect();
        let diag: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
        let off: Vec<f64> = idx.iter().skip(1).map(|&i| o[i - 2]).collect();
        let (energy, vec) = tridiagonal_ground(&diag, &off)?;
        let mut state = vec![0.0; d.len()];
        let mut jz = 0.0;
        for (&i, &a) in idx.iter().zip(&vec) {
            state[i] = a;
            jz += a * a * self.m(i);
        }
        Ok(LmgSector { energy, jz, state })
    }

    pub fn classical(&self) -> LmgClassical {
        let delta = self.delta();
        let c = if delta > 1.0 { -1.0 / delta } else { -1.0 };
        let phi = if self.v > 0.0 { FRAC_PI_2 } else { 0.0 };
        let theta = c.acos();
        LmgClassical {
            theta,
            phi,
            energy: lmg_classical_energy(self.v, self.w, 0.5, theta, phi),
            purity: c * c,
            n_up: (1.0 + c) / 2.0,
        }
    }

    pub fn exact(&self) -> Result<LmgSolution> {
        let even = self.sector(0)?;
        let odd = self.sector(1)?;
        let g = if odd.energy < even.energy { &odd } else { &even };
        let nn = self.n as f64;
        Ok(LmgSolution {
            energy_per_particle: g.energy / nn,
            n_up: 0.5 + g.jz / nn,
            purity: 4.0 / (nn * nn) * g.jz * g.jz,
            sectors: [even.clone(), odd.clone()],
            classical: self.classical(),
        })
    }
}

/// Classical energy per particle of `H`,
/// `h_c = j cos(theta) + V j^2 sin^2(theta) cos(2 phi) + W j^2 sin^2(theta)`,
/// using `J_+^2 + J_-^2 = 2(J_x^2 - J_y^2)`. Its minimum at `j = 1/2` has
/// `cos(theta) = -1/Delta` for `Delta > 1`.
pub fn lmg_classical_energy(v: f64, w: f64, j: f64, theta: f64, phi: f64) -> f64 {
    let s2 = theta.sin().powi(2);
    j * theta.cos() + v * j * j * s2 * (2.0 * phi).cos() + w * j * j * s2
}

/// Lowest eigenpair of a symmetric tridiagonal matrix: Sturm bisection for
/// the eigenvalue, then inverse iteration for the vector.
pub fn tridiagonal_ground(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return invalid("tridiagonal matrix shape mismatch");
    }
    if n == 1 {
        return Ok((diag[0], vec![1.0]));
    }
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            (diag[i] - l - r, diag[i] + l + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
    let count_below = |x: f64| {
        let mut cnt = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            cnt += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };
    let (mut lo, mut hi) = radius;
    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let shift = lambda - 1e-10 * scale;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..8 {
        let mut y = solve_tridiagonal(diag, off, shift, &x);
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(QsimError::NotConverged { iterations: 0, residual: f64::NAN });
        }
        y.iter_mut().for_each(|v| *v /= nrm);
        x = y;
    }
    let mut hx = vec![0.0; n];
    for i in 0..n {
        hx[i] = diag[i] * x[i];
        if i > 0 {
            hx[i] += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            hx[i] += off[i] * x[i + 1];
        }
    }
    let energy: f64 = x.iter().zip(&hx).map(|(a, b)| a * b).sum();
    let residual = hx.iter().zip(&x).map(|(h, v)| (h - energy * v).powi(2)).sum::<f64>().sqrt();
    if residual > 1e-8 * scale {
        return Err(QsimError::NotConverged { iterations: 8, residual });
    }
    Ok((energy, x))
}

/// Solve `(T - s) y = b` by Gaussian elimination with partial pivoting.
fn solve_tridiagonal(diag: &[f64], off: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // banded LU with one extra super-diagonal for pivoting
    let mut a: Vec<[f64; 3]> = (0..n)
        .map(|i| [diag[i] - s, if i + 1 < n { off[i] } else { 0.0 }, 0.0])
        .collect();
    let mut lower: Vec<f64> = off.to_vec();
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if lower[i].abs() > a[i][0].abs() {
            let next = a[i + 1];
            let cur = a[i];
            a[i] = [lower[i], next[0], next[1]];
            a[i + 1] = [cur[1], cur[2], 0.0];
            lower[i] = cur[0];
            rhs.swap(i, i + 1);
            // row i+1 now holds the old row i shifted one column right
            let f = lower[i] / a[i][0];
            a[i + 1][0] -= f * a[i][1];
            a[i + 1][1] -= f * a[i][2];
            rhs[i + 1] -= f * rhs[i];
        } else {
            let piv = if a[i][0] == 0.0 { f64::EPSILON } else { a[i][0] };
            a[i][0] = piv;
            let f = lower[i] / piv;
            a[i + 1][0] -= f * a[i][1];
            rhs[i + 1] -= f * rhs[i];
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= a[i][1] * y[i + 1];
        }
        if i + 2 < n {
            v -= a[i][2] * y[i + 2];
        }
        let piv = if a[i][0] == 0.0 { f64::EPSILON } else { a[i][0] };
        y[i] = v / piv;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_pauli_sum, eigvalsh, max_abs, unitary_evolution};
    use crate::statevector::StateVector;

    #[test]
    fn fano_two_level_form() {
        let m = FanoAnderson::two_level(-2.0, -8.0, 0.5).unwrap();
        let h = m.hamiltonian().unwrap();
        let want = PauliSum::from_text("-5 0 I\n-4 0 Z1\n-1 0 Z2\n0.25 0 X1 X2\n0.25 0 Y1 Y2").unwrap();
        assert!(h.approx_eq(&want, 1e-12), "{}", h.to_text());
        let e = m.one_particle_energies();
        let r = 9.25f64.sqrt();
        assert!((e[0] - (-5.0 - r)).abs() < 1e-12 && (e[1] - (-5.0 + r)).abs() < 1e-12);
        let free = FanoAnderson::two_level(-2.0, -8.0, 0.0).unwrap().hamiltonian().unwrap();
        assert!(free.iter().all(|(s, _)| s.factors().iter().all(|f| f.1 == crate::opalgebra::Pauli::Z)));
        assert_eq!(m.reference_state(), 0b10);
    }

    #[test]
    fn fano_closed_forms_match_dense() {
        for &(ek0, eps, v) in &[(-2.0, -8.0, 4.0), (-2.0, 0.0, 4.0), (-2.0, -8.0, 0.0)] {
            let m = FanoAnderson::two_level(ek0, eps, v).unwrap();
            let hbar = dense_pauli_sum(&m.reduced_hamiltonian().unwrap(), 2).unwrap();
            let h = dense_pauli_sum(&m.hamiltonian().unwrap(), 2).unwrap();
            let x1 = dense_pauli_sum(&PauliSum::from_text("1 0 X1").unwrap(), 2).unwrap();
            for &t in &[0.0, 0.37, 2.5] {
                let tb = unitary_evolution(&hbar, t);
                let g = (tb.adjoint() * &x1 * &tb * &x1)[(0b10, 0b10)];
                assert!((g - m.green_closed_form(t)).norm() < 1e-12);
                let s = unitary_evolution(&h, t)[(0b10, 0b10)];
                assert!((s - m.survival_closed_form(t)).norm() < 1e-12);
                let mut want = StateVector::new_register(2, 0).unwrap();
                let mut got = want.clone();
                want.evolve_exact(&m.reduced_hamiltonian().unwrap(), t).unwrap();
                for gate in m.decomposed_evolution(t).unwrap() {
                    gate.apply(&mut got).unwrap();
                }
                let mut st = StateVector::new_register(2, 0b01).unwrap();
                let mut sw = st.clone();
                for gate in m.decomposed_evolution(t).unwrap() {
                    gate.apply(&mut st).unwrap();
                }
                sw.evolve_exact(&m.reduced_hamiltonian().unwrap(), t).unwrap();
                assert!((got.inner(&want).norm() - 1.0).abs() < 1e-12);
                assert!((st.inner(&sw) - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fano_ring_spectrum() {
        let m = FanoAnderson::new(4, 1.0, 0.3, -1.0).unwrap();
        assert!((m.mode_energy(2) - 2.0).abs() < 1e-12);
        let h = dense_pauli_sum(&m.hamiltonian().unwrap(), 5).unwrap();
        let one = m.one_particle_energies();
        // one-particle states: one qubit in |0>
        let mut sector = DMatrix::<C64>::zeros(5, 5);
        let labels: Vec<usize> = (0..5).map(|q| 0b11111 & !(1 << (4 - q))).collect();
        for (a, &la) in labels.iter().enumerate() {
            for (b, &lb) in labels.iter().enumerate() {
                sector[(a, b)] = h[(la, lb)];
            }
        }
        let got = eigvalsh(&sector);
        for (x, y) in got.iter().zip(&one) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(m.hamiltonian_spec().unwrap().layers().len() == 3);
    }

    #[test]
    fn hubbard_free_spectrum_is_single_particle_sums() {
        let m = Hubbard2D::new(2, 2, 1.0, 0.5, 0.0).unwrap();
        let h = dense_pauli_sum(&m.hamiltonian().unwrap(), 8).unwrap();
        let eps = m.single_particle_energies();
        let mut sums = Vec::new();
        for mask in 0usize..256 {
            let e: f64 = (0..8).filter(|b| mask >> b & 1 == 1).map(|b| eps[b % 4]).sum();
            sums.push(e);
        }
        sums.sort_by(f64::total_cmp);
        let got = eigvalsh(&h);
        for (a, b) in got.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(m.hamiltonian_spec().unwrap().total().approx_eq(&m.hamiltonian().unwrap(), 1e-12));
    }

    #[test]
    fn hubbard_two_site_ground_energy() {
        let (t, u) = (1.0, 4.0);
        let m = Hubbard2D::new(1, 2, 0.7, t, u).unwrap();
        let h = dense_pauli_sum(&m.hamiltonian().unwrap(), 4).unwrap();
        // two electrons: labels with exactly two zeros
        let idx: Vec<usize> = (0..16usize).filter(|b| (!b & 0xF).count_ones() == 2).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
        let e0 = eigvalsh(&sub)[0];
        assert!((e0 - (u - (u * u + 64.0 * t * t).sqrt()) / 2.0).abs() < 1e-10);
        assert_eq!(m.bonds().len(), 2);
        assert!(Hubbard2D::new(3, 3, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn hubbard_mean_field_state() {
        let m = Hubbard2D::new(2, 2, 1.0, 1.0, 2.0).unwrap();
        let phi = m.mean_field_orbitals(2, 1).unwrap();
        assert!(max_abs(&(phi.transpose() * &phi - DMatrix::identity(3, 3)).map(|x| C64::new(x, 0.0))) < 1e-12);
        let sv = m.mean_field_circuit(2, 1).unwrap().run().unwrap();
        let h = m.hopping_matrix();
        let eps = m.single_particle_energies();
        let kin = jordan_wigner(&m.kinetic(Spin::Up).unwrap().add(&m.kinetic(Spin::Down).unwrap()), 8).unwrap();
        let want = 2.0 * eps[0] + eps[1];
        assert!((sv.expectation(&kin).unwrap().re - want).abs() < 1e-10, "{h}");
    }

    #[test]
    fn xy_limits() {
        let c = XYChain::new(400, 1.0).unwrap();
        assert!((c.exact(0.0).unwrap().purity - 1.0).abs() < 1e-14);
        assert!((xy_shifted_purity_limit(1.0, 0.3) - 0.32).abs() < 1e-14);
        assert_eq!(xy_shifted_purity_limit(1.0, 0.8), 0.0);
        assert!(c.number_fluctuation(0.0).unwrap().abs() < 1e-14);
        for &g in &[0.1, 0.5, 0.9] {
            let ex = c.exact(g).unwrap();
            assert!((c.number_fluctuation(g).unwrap() - (1.0 - ex.purity)).abs() < 1e-12);
            let d = c.number_distribution(g).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!((c.number_fluctuation(0.5).unwrap() - 0.5).abs() < 1e-2);
        assert!(XYChain::new(5, 1.0).is_err() && XYChain::new(4, 0.0).is_err());
        // closed form agrees with the uncancelled expression away from gamma = 1
        let (gm, g) = (0.4f64, 0.3f64);
        let raw = (1.0 - gm * gm / (1.0 - 4.0 * g * g * (1.0 - gm * gm)).sqrt()) / (1.0 - gm * gm);
        assert!((xy_purity_limit(gm, g) - raw).abs() < 1e-14);
    }

    #[test]
    fn xy_matches_dense_chain() {
        let n = 6;
        for &(gamma, g) in &[(1.0, 0.3), (0.5, 0.8)] {
            let c = XYChain::new(n, gamma).unwrap();
            let h = dense_pauli_sum(&c.hamiltonian(g).unwrap(), n).unwrap();
            let (vals, vecs) = eigh(&h);
            let ex = c.exact(g).unwrap();
            let e0 = -0.5 * ex.xi.iter().sum::<f64>();
            assert!((vals[0] - e0).abs() < 1e-9, "{} {}", vals[0], e0);
            let sv = StateVector::from_amplitudes(vecs.column(0).iter().copied().collect()).unwrap();
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let op = jordan_wigner(&FermionExpr::monomial(n, C64::new(1.0, 0.0), vec![cr(i), an(j)]).unwrap(), n).unwrap();
                    let mut cij = sv.expectation(&op).unwrap();
                    if i == j {
                        cij -= 0.5;
                    }
                    tr += cij.norm_sqr();
                }
            }
            assert!((4.0 / n as f64 * tr - ex.purity).abs() < 1e-9);
        }
    }

    #[test]
    fn lmg_cases() {
        let free = Lmg::new(500, 0.0, 1.0).unwrap().exact().unwrap();
        assert!((free.purity - 1.0).abs() < 1.0 / 500.0);
        let c = Lmg::new(10, -3.0, 1.0).unwrap().classical();
        assert!((c.theta.cos() + 0.5).abs() < 1e-14 && (c.purity - 0.25).abs() < 1e-14);
        assert_eq!(Lmg::new(10, 0.5, 0.0).unwrap().classical().theta, PI);
        for &(n, v, w) in &[(7, 1.3, -0.4), (12, -2.5, 0.3), (20, 0.0, -2.0)] {
            let m = Lmg::new(n, v, w).unwrap();
            let dense = m.dense().map(|x| C64::new(x, 0.0));
            let e0 = eigvalsh(&dense)[0];
            let sol = m.exact().unwrap();
            assert!((sol.energy_per_particle * n as f64 - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn lmg_classical_minimiser_beats_grid() {
        for &(v, w) in &[(-3.0, 0.5), (2.0, -1.5), (0.4, 0.2), (0.0, -2.0)] {
            let c = Lmg::new(10, v, w).unwrap().classical();
            let mut best = f64::INFINITY;
            for a in 0..=200 {
                for b in 0..=100 {
                    let th = PI * a as f64 / 200.0;
                    let ph = PI * b as f64 / 100.0;
                    best = best.min(lmg_classical_energy(v, w, 0.5, th, ph));
                }
            }
            assert!(c.energy <= best + 1e-12 && c.energy > best - 1e-3, "{v} {w} {} {best}", c.energy);
        }
    }

    #[test]
    fn tridiagonal_solver() {
        let d = [2.0, -1.0, 0.5, 3.0];
        let o = [1.0, 0.3, -2.0];
        let (e, v) = tridiagonal_ground(&d, &o).unwrap();
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = C64::new(d[i], 0.0);
        }
        for i in 0..3 {
            m[(i, i + 1)] = C64::new(o[i], 0.0);
            m[(i + 1, i)] = C64::new(o[i], 0.0);
        }
        assert!((e - eigvalsh(&m)[0]).abs() < 1e-12);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
