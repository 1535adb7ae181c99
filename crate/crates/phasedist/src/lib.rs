//! Phase-difference distributions for two optical modes, computed the way an
//! eight-port homodyne experiment actually produces them: from photon
//! count-difference statistics, with explicit postselection policies, exact
//! Bessel-kernel count laws for coherent inputs, strong- and weak-field
//! closed forms, an indirect common-local-oscillator route, a truncated
//! Fock-space engine for arbitrary pure two-mode states, and Monte Carlo
//! cross-validation of everything.
//!
//! The measured quantities are the two count differences n43 = n4 - n3 and
//! n65 = n6 - n5 of the four detectors; the operational phase is the lattice
//! angle of (n43, n65), averaged over a controlled shift theta applied to the
//! second input.

pub mod direct;
pub mod error;
pub mod fock;
pub mod indirect;
pub mod kernels;
pub mod montecarlo;
pub mod numerics;

pub use error::{Error, Result};
