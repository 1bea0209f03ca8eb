//! Exact symbolic workbench for the infinitesimal Poisson algebra of a
//! coordinate Poisson submanifold `S = {y = 0}`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is exact: polynomial
//! coefficients are arbitrary-precision rationals and every dimension is the
//! rank of an exact rational matrix.
//!
//! Layout:
//! - [`polyring`]: rational polynomials over a base/normal split of variables,
//!   a text parser and a canonical printer.
//! - [`multivector`]: multivector fields, the Schouten bracket, the
//!   Lichnerowicz differential.
//! - [`infinitesimal`]: the submanifold test, extraction of `(psi, c, Gamma, K)`,
//!   the structural identities and the affine bracket.
//! - [`linalg`]: fraction-free exact elimination.
//! - [`cohomology`]: weight-graded first cohomologies and the criterion checks.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cohomology;
pub mod infinitesimal;
pub mod linalg;
pub mod multivector;
pub mod polyring;

pub use num_rational::BigRational as Rational;

pub use cohomology::{CohomologyError, CohomologyReport, Verdict};
pub use infinitesimal::{AffineElement, InfinitesimalData, PtReport, SubmanifoldError};
pub use multivector::{Multivector, MultivectorError, Space};
pub use polyring::{Monomial, ParseError, Poly, PolyError, VarContext};
