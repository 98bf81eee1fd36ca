//! Driven-dissipative exciton transport in a disordered emitter chain that is
//! collectively coupled to one cavity mode.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, disorder sampling, Hamiltonian and jump operators
//!   in the single-excitation subspace.
//! * [`liouvillian`]: dense Lindblad superoperator and density matrices.
//! * [`dynamics`]: propagation and steady states.
//! * [`observables`]: coherences, energy currents, diffusion, entropies and
//!   entanglement measures.
//! * [`ensemble`]: disorder ensembles, parameter sweeps and statistics.
//! * [`classical`]: the classical rate-equation counterpart.

pub mod classical;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod liouvillian;
pub mod model;
pub mod observables;

#[cfg(test)]
mod testutil;

pub use dynamics::{propagate, steady_state, Method, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use liouvillian::{apply_liouvillian, build_liouvillian, DensityMatrix, Superoperator};
pub use model::{
    build_hamiltonian, build_jump_channels, lab_hamiltonian_ev, sample_disorder, BasisIndex,
    ChannelKind, DisorderRealization, JumpChannel, ModelParams, HBAR_EV_PS,
};
pub use num_complex::Complex64;
