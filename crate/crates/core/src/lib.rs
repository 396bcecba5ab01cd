//! Exact computer algebra for deformed formal calculus and the loop Lie
//! algebras built from conformal algebras.
//!
//! The crate provides, bottom up:
//!
//! - [`field`]: the coefficient field Q(zeta_M) with exact arithmetic;
//! - [`series`]: truncated-or-exact Laurent series and their calculus;
//! - [`deform`]: the deformation p(x), the derivation p(x) d/dx, and the
//!   substitution series phi(x,z) = exp(z p(x) d/dx)(x);
//! - [`delta`]: two-variable delta-type distributions in normal form;
//! - [`conformal`]: conformal algebras, group structures, and quotients;
//! - [`loop_alg`]: the loop Lie algebras, their brackets and field modes;
//! - [`models`]: affine, Virasoro, and Novikov target algebras with
//!   machine-checked isomorphisms;
//! - [`fock`]: a rank-one oscillator Fock module as restricted-module witness;
//! - [`suite`]: named verification suites producing deterministic reports.
//!
//! All arithmetic is exact; operations that would need unknown coefficients
//! of a truncated series fail instead of guessing.

pub mod conformal;
pub mod deform;
pub mod delta;
pub mod error;
pub mod field;
pub mod fock;
pub mod loop_alg;
pub mod models;
pub mod parse;
pub mod report;
pub mod rng;
pub mod series;
pub mod suite;

pub use deform::Deformation;
pub use error::{Error, Result};
pub use field::{CycloScalar, FieldCtx};
pub use series::{LaurentSeries, Prec};
