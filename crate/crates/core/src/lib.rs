//! Exact-arithmetic workbench for Witt-type graded Lie algebras.
//!
//! The crate models algebras whose basis is indexed by an optional group part
//! and an integer index, with brackets given by structure-constant rules. On
//! top of that sit:
//!
//! - a checker and window solver for 1/2-derivations (linear maps with
//!   `f([x,y]) = ([f(x),y] + [x,f(y)]) / 2`),
//! - commutative products, product mutations, and transposed Poisson
//!   structure checking/solving,
//! - a small text format (`.liealg`) for declaring algebras, and
//! - built-in constructions of the classical Witt-type families.
//!
//! Everything is computed over Gaussian rationals; there is no floating
//! point and no tolerance anywhere.

pub mod algebra;
pub mod catalog;
pub mod coeff;
pub mod dsl;
pub mod halfderiv;
pub mod linalg;
pub mod scalar;
pub mod tps;

pub use algebra::{AlgebraDef, BasisIndex, Element, Window};
pub use scalar::GaussianRational;
