//! An equivariant covering map from the upper half plane onto the complex
//! plane with the hexagonal lattice `R = Z(ω+1) ⊕ Z(ω²−1)` removed.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: exact Eisenstein integers, the excised lattice and the
//!   fundamental triangle with corners `0, ω, ω²`.
//! - [`gamma`]: the modular group, the homomorphism `ψ` onto the affine group
//!   preserving `R`, normal forms, the character `ℓ` and the kernel `N`.
//! - [`elliptic`]: `℘`, `℘′`, lattice invariants, modular `λ` and Klein `J`.
//! - [`covering`]: the map `φ` and its derivative.
//! - [`sl3`]: weight-lattice trace sums for `℘` and `λ`.
//! - [`registry`], [`suites`], [`grid`]: named evaluators, verification
//!   suites and grid export used by the command-line front end.

// `!(x < tol)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod elliptic;
pub mod error;
pub mod gamma;
pub mod grid;
pub mod lattice;
pub mod registry;
pub mod report;
pub mod sl3;
pub mod suites;

pub use error::{Error, Result};
pub use num_complex::Complex64;
