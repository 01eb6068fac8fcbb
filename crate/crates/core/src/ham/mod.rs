//! Hamiltonian construction, ingestion, rescaling and exact diagonalization.

pub mod dense;
pub mod fermion;
pub mod pauli;
pub mod rescale;
pub mod spectrum;

pub use dense::{DenseHermitian, EigenDecomposition, DEGENERACY_TOL, MAX_DENSE_DIM};
pub use fermion::{build_fermi_hubbard, jordan_wigner_hop, jordan_wigner_number, total_number_operator};
pub use pauli::{Pauli, PauliMasks, PauliSum, PauliTerm, PauliWord};
pub use rescale::{RescaleParams, TopMargin};
pub use spectrum::{Spectrum, SpectrumEntry};
