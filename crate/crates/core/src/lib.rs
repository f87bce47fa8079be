//! Lattice spin toolkit for the XY model and its arc discretisations.
//!
//! The crate covers two ways of turning the plane rotor into a q-state
//! model and the numerics needed to compare them:
//!
//! 1. projecting continuous-spin Gibbs samples through an arc partition of
//!    the circle (module [`partition`] plus the projection observables in
//!    [`sampler`]), and
//! 2. simulating the q-state clock model directly with the same Hamiltonian
//!    ([`energy`], [`sampler`]).
//!
//! Module [`bounds`] computes the Dobrushin-style fineness criteria that
//! certify when the projected measure behaves like a Gibbs measure for a
//! discrete interaction, module [`exact`] provides exact small-system
//! oracles (enumeration, transfer operators, constrained conditionals), and
//! [`energy`] also carries the constrained double-well analysis behind the
//! low-temperature breakdown of route 1.
//!
//! All heavy inner loops run data-parallel through rayon when the default
//! `parallel` feature is enabled; disabling it yields a sequential build
//! with identical results.

pub mod bounds;
pub mod config;
pub mod energy;
pub mod error;
pub mod exact;
pub mod fmt;
pub mod lattice;
pub mod partition;
pub mod sampler;

pub use error::{Error, Result};
