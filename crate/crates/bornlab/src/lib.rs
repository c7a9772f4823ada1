//! # bornlab
//!
//! A numerical laboratory for the question: are quantum probabilities
//! postulated, or can they emerge from dynamics?
//!
//! The crate has three layers:
//!
//! - **Exact Hilbert-space algebra** ([`matrix`], [`state`], [`observable`],
//!   [`evolution`]): finite-dimensional states, observables with cached
//!   spectral decompositions, the Born rule and the projection postulate as
//!   postulates, unitary propagators, and the decomposition of arbitrary
//!   Hilbert-space paths into infinitesimal unitaries.
//! - **Stochastic dynamics** ([`sde`], [`lindblad`], [`ensemble`]): an Itô
//!   integrator for norm-preserving stochastic modifications of the
//!   Schrödinger equation, the deterministic evolution of the noise-averaged
//!   density matrix as a reference oracle, and Monte Carlo machinery that
//!   measures how outcome frequencies, reduction times, and mean densities
//!   behave. Here the Born rule is *measured*, not assumed: eigenspace
//!   weights are martingales of the stochastic flow, so outcome frequencies
//!   reproduce the initial-state weights.
//! - **Front end** ([`histories`], [`scenario`], [`output`], [`verify`]):
//!   chain-operator probabilities for ordered sequences of projected events,
//!   a scenario-file runner, CSV/JSONL emitters, and a self-check suite.
//!
//! Units are ħ = 1 throughout; all quantities are dimensionless rates and
//! times.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `bornlab` binary for the scenario-file interface.

pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod histories;
pub mod lindblad;
pub mod matrix;
pub mod observable;
pub mod output;
pub mod scenario;
pub mod sde;
pub mod state;
pub mod testkit;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{c64, commutator, C64, ComplexMatrix};
pub use observable::{EigenSpace, HermitianObservable};
pub use state::{DensityMatrix, StateVector};
