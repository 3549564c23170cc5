//! Symbolic operator algebra: Pauli sums and the fermion, anyon and boson
//! mappings onto qubits.

mod boson;
mod fermion;
mod pauli;

pub use boson::{boson_map, BosonEncoding};
pub use fermion::{
    an, anyon_ladder_matrix, anyon_map, anyon_number_matrix, cr, jordan_wigner,
    jordan_wigner_raw, mode_reindex_2d, FermionExpr, Ladder, RawExpr,
};
pub use pauli::{
    pauli_add, pauli_commutator, pauli_mul, Pauli, PauliString, PauliSum, PauliTerm, PRUNE_TOL,
};
