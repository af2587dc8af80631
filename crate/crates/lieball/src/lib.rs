//! Numerical toolkit for holomorphic maps from complex unit balls into
//! Type IV bounded symmetric domains (Lie balls) and generalized balls.
//!
//! The crate provides:
//!
//! * the domains themselves (`domains`): membership, boundary stratification,
//!   Heisenberg models and the Cayley transform;
//! * a catalog of named holomorphic maps (`maps`) with exact expression
//!   trees, evaluation and forward-mode Jacobians;
//! * Bergman / indefinite Kähler metrics and pullback isometry verdicts
//!   (`metrics`);
//! * automorphism groups acting projectively through the Borel embedding
//!   (`groups`);
//! * Hermitian bihomogeneous form algebra with exact coefficients,
//!   signatures and D'Angelo unitary recovery (`hforms`);
//! * the constructive classification of ball-to-Lie-ball isometries into the
//!   rational and irrational canonical families (`classify`);
//! * weighted-jet verification of the Heisenberg mapping equation (`jets`).
//!
//! See the `examples/` directory for runnable tours of each capability and
//! `src/bin/lieball.rs` for the batch CLI.

pub mod acceptance;
pub mod algebra;
pub mod classify;
pub mod cli;
pub mod domains;
pub mod error;
pub mod exact;
pub mod groups;
pub mod hforms;
pub mod jets;
pub mod linalg;
pub mod maps;
pub mod metrics;
pub mod series;

pub use error::{Error, Result};

/// Complex scalar used throughout the floating-point paths.
pub type C64 = num_complex::Complex64;
