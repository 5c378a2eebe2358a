//! Stochastic series expansion (SSE) quantum Monte Carlo for the
//! transverse-field Ising model on a fully frustrated honeycomb lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] builds the periodic honeycomb geometry with its coupling
//!   signs, six-sublattice labels, plaquettes and tracked hexagon units.
//! * [`graph`] is the Hamiltonian view shared by the engine and the exact
//!   oracles: sites, signed bonds, the transverse field and optional
//!   order-parameter annotations.
//! * [`sse`] is the Markov chain (diagonal update, linked vertices, cluster
//!   flips, cutoff growth, run orchestration).
//! * [`observables`] evaluates energy density and the order parameters
//!   `m_H` / `psi_H` over propagated states, with binned statistics.
//! * [`oracle`] holds exact references: dense diagonalisation, exhaustive
//!   classical enumeration and a row transfer-matrix ground-state search.
//!
//! Numerical code is generic over [`Real`] (implemented for `f32` and
//! `f64`); the `*F64` aliases below are the concrete types the CLI uses.

pub mod config;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod rng;
pub mod sse;

mod real;

pub use error::{Error, Result};
pub use real::Real;

pub use config::{InitMode, MsNorm, RunConfig};
pub use graph::{OrderGeometry, SpinGraph};
pub use lattice::{CouplingPattern, Lattice, SpinConfig};
pub use observables::{bin_statistics, energy_density, MeasurementAccumulator, SweepSample};
pub use sse::{OperatorSlot, RunResult, SseState};

/// Complex value used for the order parameters.
pub type ComplexValue<T> = num_complex::Complex<T>;

pub type ComplexF64 = ComplexValue<f64>;
pub type SpinGraphF64 = SpinGraph<f64>;
pub type SseStateF64 = SseState<f64>;
pub type RunResultF64 = RunResult<f64>;
pub type RunConfigF64 = RunConfig<f64>;
pub type MeasurementAccumulatorF64 = MeasurementAccumulator<f64>;
