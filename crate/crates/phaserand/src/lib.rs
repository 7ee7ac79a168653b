//! Phase-randomness analysis for attenuated-laser QKD sources.
//!
//! A gain-switched laser diode is assumed, in most BB84 security analyses, to
//! emit pulses whose optical phases are independent and uniformly random. At
//! multi-GHz clock rates photons can survive between pulses and seed the next
//! one, correlating adjacent phases. This crate quantifies the damage that a
//! partially randomized phase does to the usual security arguments and turns
//! the answer into a measurable pass/fail criterion on interference-fringe
//! visibility:
//!
//! - [`fockspace`] builds partially phase-randomized coherent-state density
//!   matrices on a truncated photon-number basis and computes Uhlmann
//!   fidelities between them.
//! - [`security`] converts fidelities into the quantum-coin imbalance and the
//!   signal/decoy distinguishability, and locates the phase spread at which
//!   each metric has converged to its fully-randomized asymptote.
//! - [`discrimination`] optimizes three-outcome POVMs that discriminate the
//!   signal from the decoy state at a fixed inconclusive probability.
//! - [`fringe`] fits interference fringes, estimates visibility with
//!   confidence intervals, and converts visibility to the phase-spread sigma.
//! - [`laser`] models the sinusoidal drive (normalized minimum excitation,
//!   turn-off duration, effective photon lifetime) and simulates pulse-phase
//!   trains through an asymmetric Mach-Zehnder interferometer.
//! - [`cli`] wires everything into the `phaserand` command-line tool.
//!
//! Start with the runnable examples (`cargo run --release --example ...`);
//! each one exercises a single capability end to end.

pub mod cli;
pub mod discrimination;
pub mod error;
pub mod fockspace;
pub mod fringe;
pub mod laser;
mod linalg;
pub mod security;

pub use error::{Error, Result};
