//! Exact symbolic calculus for linear and conformal operads.
//!
//! The crate implements, over an exact scalar field:
//!
//! - multivariate polynomial arithmetic in the formal variables `d` (the
//!   module endomorphism), `l1, l2, ...` (the lambda variables attached to
//!   cochain slots) and `w1, w2, ...` (difference coordinates `z_i - z_n`);
//! - permutations, Koszul signs, shuffles and the two blocked compositions
//!   of permutations used by operad equivariance;
//! - finitely generated `F[d]`-supermodules, the quotient spaces
//!   `V[l1..ln] / <d + l1 + .. + ln>` and the embeddings back;
//! - the endomorphism operad of a finite dimensional superspace, the Chom
//!   operad and its polynomial-valued (tilde) variant, and the chiral operad
//!   acting on translation invariant localized polynomials;
//! - the graded Lie superalgebra of symmetric-group invariants of any of
//!   these operads, with box products, (lambda-)brackets, master elements
//!   encoding Lie, Lie conformal and vertex algebra structures, and the
//!   associated cohomology complexes sliced by conformal weight.
//!
//! All arithmetic is exact. The blessed scalar is [`Rat`]; the core is
//! generic over [`scalar::Scalar`] so the same code runs over any exact
//! field implementing the trait.

pub mod axioms;
pub mod chiral;
pub mod chom;
pub mod complex;
pub mod error;
pub mod fdmod;
pub mod hom;
pub mod linalg;
pub mod operad;
pub mod perm;
pub mod poly;
pub mod sample;
pub mod scalar;
pub mod structures;

pub use error::{Error, Result};

/// The exact rational scalar used throughout the CLI and test suites.
pub type Rat = num_rational::BigRational;

/// Polynomial over the exact rationals.
pub type QPoly = poly::Poly<Rat>;

/// Matrix over the exact rationals.
pub type QMatrix = linalg::Matrix<Rat>;

/// Module element with rational coefficients.
pub type QModElem = fdmod::ModElem<Rat>;

/// Canonical quotient representative with rational coefficients.
pub type QQuotElem = fdmod::QuotElem<Rat>;

/// Construct a [`Rat`] from an integer.
pub fn rat(n: i64) -> Rat {
    use num_traits::FromPrimitive;
    Rat::from_i64(n).expect("i64 into BigRational")
}

/// Construct a [`Rat`] from a ratio of integers.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}
