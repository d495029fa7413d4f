//! Random-matrix Schrödinger walks on a 1D grid.
//!
//! States evolve under alternating free Schrödinger segments and unitary
//! kicks generated by fresh GUE Hamiltonians. The crate provides the state
//! space and its Fubini–Study geometry, the kick ensemble, free dynamics,
//! first-passage collapse experiments with their return-time statistics, and
//! a calculator for the environmental order-of-magnitude estimates.

pub mod collapse;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod rng;
pub mod spectral;
pub mod statespace;
pub mod stats;

pub use error::{Error, Result};
pub use statespace::{Grid, GridState, PacketParams, PhysicalConstants};
