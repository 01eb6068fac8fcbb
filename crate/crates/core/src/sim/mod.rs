//! Statevector engine for the three-register phase-estimation circuit.

pub mod evolution;
pub mod fft;
pub mod histogram;
pub mod layout;
pub mod state;

pub use evolution::{
    apply_controlled_powers, evolution_unitary, CompiledEvolution, EvolutionMode,
    EvolutionOperator, EvolutionSpec, Hamiltonian, TrotterOrder,
};
pub use histogram::{HistogramKind, PhaseHistogram};
pub use layout::{max_total_qubits, QubitLayout, DEFAULT_MAX_QUBITS};
pub use state::{StateVector, STATE_DUMP_MAGIC};
