//! Simulation of two-station spin-1/2 (and photon polarization) correlation
//! experiments.
//!
//! Three correlation models share one measurement contract:
//!
//! * [`models::QuantumSinglet`] samples the exact singlet joint statistics,
//! * [`models::SignLhv`] is the classical `A = sign(λ·a)` hidden-variable rule,
//! * [`models::AlgebraicShared`] pairs anticommuting shared-vector components,
//!   so the per-pair product is `(λ·a)(λ·b) = a·b + iλ·(a×b)`.
//!
//! [`experiments`] estimates correlations, sweeps, CHSH values and audits a
//! model's verifiable properties. [`locality`] runs the same trials through a
//! spacetime schedule and records which inputs each station consumed.

pub mod algebra;
pub mod error;
pub mod experiments;
pub mod locality;
pub mod math;
pub mod models;

pub use error::{Error, Result};

/// Version string reported in result documents.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
