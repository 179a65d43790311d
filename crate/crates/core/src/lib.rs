//! Numerical toolkit for swiveled Rényi entropic quantities.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex Hermitian kernels (eigendecomposition, matrix
//!   functions on support, Schatten norms, tensor calculus).
//! - [`states`]: density operators, channels in Kraus form with cached
//!   Stinespring dilations, seeded random instance generation, and the JSON
//!   instance format.
//! - [`entropy`]: scalar entropic functionals (von Neumann, relative, both
//!   Rényi families, special values, fidelity, the relative entropy
//!   difference Δ).
//! - [`swivel`]: commutant parametrization, the norm-chain objectives, the
//!   swivel optimizer, Δ′_α / Δ̃′_α and their one-sided limits at α = 1.
//! - [`recovery`]: tripartite states, Petz / rotated / swiveled recovery
//!   maps, conditional mutual information and its swiveled variants, and the
//!   recovery-type inequality reports.
//! - [`combos`]: swiveled generalizations of arbitrary ±1/0 linear
//!   combinations of von Neumann entropies, and the trace quantities with a
//!   single swivel.
//! - [`verify`]: the claim registry behind the verification harness; each
//!   claim checks one inequality family on seeded random instances.

#![forbid(unsafe_code)]

pub mod combos;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod recovery;
pub mod states;
pub mod swivel;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianOperator, C64};
