//! Exact arithmetic kernel: linear algebra over Q and F2 and the
//! maximum-margin LP oracle.

pub mod linalg;
pub mod simplex;

pub use linalg::{nonzero_binary_vectors, rank, span_closure, BinaryEchelon, Field, IntVector, RationalEchelon};
pub use simplex::{lp_max_margin, solve_in, LpProblem, LpSolution, RowSense};
