//! Variable-exponent Lebesgue spaces on finite metric measure spaces.
//!
//! The crate discretizes a space `(X, d, μ)` as a finite point set with masses and
//! provides Luxemburg norms, the classical integral operators, Matuszewska–Orlicz
//! indices of weights, admissibility checks for weights and exponents, and a
//! harness that estimates operator norms under mesh refinement.

pub mod criteria;
pub mod error;
pub mod exponent;
pub mod harness;
pub mod lebesgue;
pub mod operators;
pub mod quadrature;
pub mod space;
pub mod weight;

pub use error::{Error, Result};
