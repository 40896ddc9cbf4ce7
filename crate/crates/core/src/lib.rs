//! Expected Euler characteristics and Minkowski functionals for excursion sets
//! of weakly non-Gaussian, isotropic random fields.
//!
//! The crate is organised around a perturbative expansion of the Euler
//! characteristic densities `Ξ_d` of the excursion set `{t : X(t) ≥ v}`.  For a
//! unit-variance field the densities are Gaussian to leading order and pick up
//! skewness and kurtosis corrections driven by a small set of cumulant
//! derivatives at the origin.  The modules are layered bottom-up:
//!
//! * [`hermite`] — probabilists' Hermite polynomials `H_k`, the Gaussian
//!   density and the `H_{-1}` tail extension,
//! * [`jet`] — exact rational polynomial jets in the entries of a symmetric
//!   matrix, the determinantal derivative operator `det(-D_Θ + γx I_n)`, and
//!   verifiers for the closed-form evaluation identities behind the expansion,
//! * [`geometry`] — intrinsic volumes of rectangles, flag coefficients, tube
//!   volumes,
//! * [`theory`] — the corrected EC densities and expected curves
//!   `E[χ(E_v)]`, `E[L_k(E_v)]`,
//! * [`model`] — a closed-form Gaussian-squared field model with analytic
//!   cumulants and a finite-difference cross-check,
//! * [`field`] — synthesis of Gaussian and transformed lattice fields,
//! * [`excursion`] — discrete Euler characteristic curves and 2-D Minkowski
//!   functionals measured on lattice fields.
//!
//! The crate is `no_std` (with `alloc`); IO, configuration and the command
//! line harness live in the companion crate `minkowski-lab-cli`.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]
// Guards are written `!(x < bound)` on purpose: a NaN must fail the guard
// the same way an out-of-range value does.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod excursion;
pub mod field;
pub mod geometry;
pub mod hermite;
pub mod jet;
pub mod model;
pub mod theory;

pub use error::Error;
