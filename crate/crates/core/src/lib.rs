//! Statevector simulation of ensemble (purified-probe) quantum phase
//! estimation, plus sparse recovery of the underlying spectrum from the
//! measured phase histogram.
//!
//! The crate is organized along the pipeline:
//!
//! * [`ham`] — build or ingest a Hamiltonian, rescale its spectrum into the
//!   phase interval `[0, 1)`, diagonalize exactly (the classical oracle);
//! * [`sim`] — the three-register statevector engine (time-frequency, state,
//!   purification) with Trotterized or exact controlled evolution;
//! * [`protocol`] — the end-to-end phase-estimation run: probe preparation,
//!   controlled powers, inverse QFT, marginalization, sampling;
//! * [`recon`] — kernel-dictionary sparse recovery of spectral lines and
//!   integer degeneracies from a histogram, scored by Wasserstein distance.
//!
//! Conventions used throughout: qubits are little-endian within each
//! register; the controlled unitary is `U = exp(+2 pi i H~)` so a measured
//! phase is an eigenvalue of the rescaled Hamiltonian `H~` directly.

pub mod error;
pub mod ham;
pub mod protocol;
pub mod recon;
pub mod sim;

pub use error::{Error, Result};
pub use ham::{
    build_fermi_hubbard, DenseHermitian, EigenDecomposition, Pauli, PauliSum, PauliTerm,
    PauliWord, RescaleParams, Spectrum, SpectrumEntry, TopMargin,
};
pub use protocol::{
    analytic_prediction, analytic_response, run, shots_required, DosQpeConfig, DosQpeResult,
    Probe, Provenance,
};
pub use recon::{
    build_dictionary, kernel_value, reconstruct, threshold_cluster_round, wasserstein1,
    EstimateEntry, KernelDictionary, ReconstructionConfig, SpectralEstimate, TransportGeometry,
};
pub use sim::{
    EvolutionMode, EvolutionSpec, Hamiltonian, HistogramKind, PhaseHistogram, QubitLayout,
    StateVector, TrotterOrder,
};
