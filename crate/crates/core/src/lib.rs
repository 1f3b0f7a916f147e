//! Simulation library for quantum channel certification to a target unitary.
//!
//! The crate is organized in four layers:
//!
//! - [`linalg`] — dense complex matrices, pure/mixed states, Hermitian
//!   eigendecomposition, Haar sampling. Everything above is built on this.
//! - [`channels`] — CPTP maps as Kraus families: composition, powers, Choi
//!   matrices, entanglement fidelity, Stinespring dilations, and the p-faulty
//!   Grover instance family.
//! - [`distances`] — diamond-norm lower bounds (Choi-state witness and an
//!   ancilla-assisted witness search) and numerical checks of the two
//!   inequalities the certification analysis rests on.
//! - [`certify`] — the three certification testers (incoherent, coherent,
//!   source-code access) with exact per-kind query accounting, plus the
//!   simulated amplitude-estimation subroutine.

pub mod certify;
pub mod channels;
pub mod distances;
mod error;
pub mod linalg;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default numeric tolerances, shared across the crate.
pub mod tol {
    /// Structural checks: unitarity, hermiticity, state normalization.
    pub const STRUCTURAL: f64 = 1e-10;
    /// Derived equalities: CPTP sums, Choi reconstructions, fidelity identities.
    pub const DERIVED: f64 = 1e-8;
}
