//! A desk-scale numerical laboratory for the quintic nonlinear Schrödinger
//! equation on the round 3-sphere, restricted to zonal fields.
//!
//! The crate has three layers:
//!
//! * exact spectral geometry of `S³` in the zonal Chebyshev-U basis
//!   ([`sphere`]), together with quadratic exponential sums and the
//!   circle-method toolkit ([`expsum`]) and computable `U^p`/`V^p`
//!   variation norms ([`variation`]);
//! * measurement harnesses for dispersive estimates: Strichartz scalings,
//!   trilinear cluster bounds, phase-integral orthogonality and decay of
//!   eigenfunction products ([`estimates`]);
//! * a split-step/Picard solver for the PDE itself with conservation and
//!   contraction diagnostics ([`solver`]).
//!
//! Everything is deterministic given a master seed: per-trial generators are
//! derived from `(seed, stream indices)` in [`seed`], and summation orders
//! are fixed.

pub mod estimates;
pub mod expsum;
pub mod report;
pub mod seed;
pub mod solver;
pub mod sphere;
pub mod variation;

pub use num_complex::Complex64;
