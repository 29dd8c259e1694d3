//! Adiabatic-impulse modelling, gate synthesis and exact verification for
//! driven two-level and two-qubit systems.
//!
//! Units: ħ = 1. Energies are expressed in units of the qubit gap Δ (single
//! qubit) or the coupling g (two qubits); times in the reciprocal unit.

// Negated comparisons reject NaN inputs along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aim;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod parallel;
pub mod quadrature;
pub mod special;
pub mod sweep;
pub mod synthesis;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
