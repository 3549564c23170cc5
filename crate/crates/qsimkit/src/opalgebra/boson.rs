//! One-cold qubit encoding of truncated bosonic modes.

use num_complex::Complex64 as C64;

use super::fermion::{Ladder, RawExpr};
use super::pauli::{Pauli, PauliString, PauliSum};
use crate::error::{QsimError, Result};

/// `n_modes` bosonic modes with at most `n_max` bosons each. Mode `j`
/// (zero-based) owns qubits `(n_max+1) j .. (n_max+1)(j+1)`; occupation `n`
/// is the block state with a single `0` at position `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BosonEncoding {
    pub n_modes: usize,
    pub n_max: usize,
}

impl BosonEncoding {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        if n_modes == 0 || n_max == 0 {
            return Err(QsimError::InvalidArgument(
                "boson encoding needs at least one mode and N_P >= 1".into(),
            ));
        }
        Ok(BosonEncoding { n_modes, n_max })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_modes * (self.n_max + 1)
    }

    /// Zero-based qubit of the pair `(n, j)`; the one-based label is this plus one.
    pub fn qubit(&self, n: usize, j: usize) -> usize {
        n + (self.n_max + 1) * j
    }

    /// Basis label of the mapped Fock state with the given occupations.
    pub fn fock_label(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(QsimError::InvalidArgument(format!(
                "expected {} occupations, got {}",
                self.n_modes,
                occupations.len()
            )));
        }
        let nq = self.n_qubits();
        let mut label = (1usize << nq) - 1;
        for (j, &occ) in occupations.iter().enumerate() {
            if occ > self.n_max {
                return Err(QsimError::OutOfRange {
                    index: occ,
                    limit: self.n_max + 1,
                });
            }
            label &= !(1usize << (nq - 1 - self.qubit(occ, j)));
        }
        Ok(label)
    }

    pub fn vacuum_label(&self) -> usize {
        self.fock_label(&vec![0; self.n_modes]).expect("valid vacuum")
    }

    /// Qubit image of `b_j^dag`: `sum_n sqrt(n+1) sigma_-^{n,j} sigma_+^{n+1,j}`.
    pub fn creation(&self, j: usize) -> Result<PauliSum> {
        if j >= self.n_modes {
            return Err(QsimError::OutOfRange {
                index: j,
                limit: self.n_modes,
            });
        }
        let mut out = PauliSum::zero();
        for n in 0..self.n_max {
            let t = PauliSum::sigma_minus(self.qubit(n, j))
                .mul(&PauliSum::sigma_plus(self.qubit(n + 1, j)))
                .scale(C64::new(((n + 1) as f64).sqrt(), 0.0));
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn annihilation(&self, j: usize) -> Result<PauliSum> {
        Ok(self.creation(j)?.adjoint())
    }

    /// Qubit image of `n_j`: `sum_n n (Z^{n,j} + 1)/2`.
    pub fn number(&self, j: usize) -> Result<PauliSum> {
        if j >= self.n_modes {
            return Err(QsimError::OutOfRange {
                index: j,
                limit: self.n_modes,
            });
        }
        let mut out = PauliSum::zero();
        for n in 1..=self.n_max {
            out = out.add(&PauliSum::projector_zero(self.qubit(n, j)).scale(C64::new(n as f64, 0.0)));
        }
        Ok(out)
    }

    /// Sum of `Z` over the block of mode `j`; the mapped operators commute with it.
    pub fn block_z(&self, j: usize) -> PauliSum {
        let mut out = PauliSum::zero();
        for n in 0..=self.n_max {
            out.add_term(C64::new(1.0, 0.0), PauliString::single(self.qubit(n, j), Pauli::Z));
        }
        out
    }
}

/// Qubit image of an ordered bosonic expression. A monomial that creates more
/// than `N_P` bosons in one mode is rejected as an occupancy overflow.
pub fn boson_map(expr: &RawExpr, enc: &BosonEncoding) -> Result<PauliSum> {
    let mut out = PauliSum::zero();
    for (c, ops) in &expr.terms {
        let mut net = vec![0i64; enc.n_modes];
        for l in ops {
            if l.mode >= enc.n_modes {
                return Err(QsimError::OutOfRange {
                    index: l.mode,
                    limit: enc.n_modes,
                });
            }
            net[l.mode] += if l.dagger { 1 } else { -1 };
        }
        if let Some(j) = net.iter().position(|&d| d.unsigned_abs() as usize > enc.n_max) {
            return Err(QsimError::InvalidArgument(format!(
                "monomial changes the occupation of mode {j} by more than N_P = {}",
                enc.n_max
            )));
        }
        let mut acc = PauliSum::identity(*c);
        for &Ladder { mode, dagger } in ops {
            let op = if dagger {
                enc.creation(mode)?
            } else {
                enc.annihilation(mode)?
            };
            acc = acc.mul(&op);
        }
        out = out.add(&acc);
    }
    Ok(out)
}
