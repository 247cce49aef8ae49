// Validation uses the `!(x > 0.0)` form deliberately so that NaN inputs are
// rejected alongside out-of-range ones; indexed loops over the (z-grid, branch)
// table read more clearly than iterator chains there.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Discrete spectra of two-dimensional magnetic Schrödinger operators with an
//! attractive potential supported on a circle.
//!
//! The solver approximates the circle potential by `N` point potentials placed
//! equidistantly on the circle. Eigenvalues in the spectral gaps between Landau
//! levels are located as zero crossings of the eigenvalue branches of the
//! Krein matrix `Λ(z)`, which is circulant for the equidistant configuration.
//! An independent exact reference decomposes the circle problem into angular
//! momentum modes and solves `α = c_l(z)` per mode.
//!
//! Module layout:
//! - [`specfun`]: log-gamma, digamma, Tricomi `U(a, 1; x)`
//! - [`green`]: homogeneous-field Green function, phase factor, regularized
//!   diagonal value `ξ(z)`
//! - [`pointop`]: site generation, Krein matrix assembly, circulant/dense
//!   eigenvalue branches, gap scanning, Schur-Holmgren diagnostic
//! - [`exactcircle`]: angular-momentum oracle for the uniform circle measure
//! - [`study`]: convergence study, report and CSV emission

pub mod error;
pub mod exactcircle;
pub mod green;
pub mod pointop;
pub mod specfun;
pub mod study;

pub use error::Error;
