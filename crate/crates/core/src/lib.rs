//! Exact enumeration and certification of maximal unbalanced families.
//!
//! A family of subsets of `[n]` is unbalanced when some zero-sum weight
//! vector is strictly positive on every member. The maximal unbalanced
//! families are the chambers of the arrangement of hyperplanes with nonzero
//! 0-1 normals in `R^{n-1}`. This crate enumerates them, certifies balance
//! status with exact rational certificates, computes signatures and the
//! flat-lattice invariants of the arrangement, and checks the known bounds
//! on their number.

pub mod bounds;
pub mod enumerate;
pub mod error;
pub mod families;
pub mod kernel;
pub mod lattice;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::ExactInt;

/// Arbitrary-precision integer used for counts and polynomial coefficients.
pub type Integer = num_bigint::BigInt;
/// Arbitrary-precision rational used for certificates and LP values.
pub type Rational = num_rational::BigRational;
/// Integer vector with arbitrary-precision entries.
pub type BigIntVector = kernel::IntVector<Integer>;
/// Integer vector with machine-word entries; the fast path for 0-1 data.
pub type SmallIntVector = kernel::IntVector<i64>;
/// Maximum-margin LP with arbitrary-precision coefficients.
pub type BigLpProblem = kernel::LpProblem<Integer>;
/// Maximum-margin LP with machine-word coefficients.
pub type SmallLpProblem = kernel::LpProblem<i64>;
