//! Exact ray-trajectory integration of Helmholtz-like wave equations.
//!
//! A monochromatic (mono-energetic) wave admits an exact Hamiltonian ray
//! system once the amplitude transported on a discretized wavefront feeds
//! back through a wave potential proportional to -lap(R)/R. This crate
//! integrates that coupled system in three regimes — classical optics,
//! non-relativistic and relativistic matter waves — validates it against
//! the analytic Gaussian-beam envelope, and cross-checks it with a 1D
//! time-dependent Schrödinger / guidance-trajectory comparator.

pub mod bohm;
pub mod config;
pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod figure;
pub mod front;
pub mod potentials;
pub mod scenarios;
pub mod units;

pub use error::{Result, SimError};
pub use exec::Exec;
pub use units::{make_unit_system, rayleigh_length, RegimeKind, UnitSystem};
