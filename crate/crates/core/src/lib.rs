//! Two XY-coupled qubits in a single-mode coherent field: closed-form
//! propagation, independent numerical oracles and entanglement observables.

pub mod cubic;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod propagator;

pub use num_complex::Complex64 as C64;

pub use cubic::{CubicRoots, block_roots};
pub use error::{Error, Result};
pub use model::{
    CoherentField, ModelParams, Preset, QubitInitState, StateVector, coherent_weights,
    initial_state, preset,
};
pub use observables::{
    EntanglementResult, Qubit, TwoQubitDensity, concurrence, eof, inversion, qubits_rdm, single_rdm,
};
pub use propagator::{AnalyticPropagator, RootCache, evolve_state};
