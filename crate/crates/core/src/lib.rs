//! Derivative sup-norms of multiply monotone functions on the half-line `(-inf, 0]`.
//!
//! For orders `0 = k1 < k2 < k3 <= r - 2` and `k4 = r` this crate decides whether
//! a function that is non-negative together with its first `r - 1` derivatives can
//! have prescribed sup-norms `M_k1, M_k2, M_k3, M_r`, and when it can, builds one.
//!
//! The building blocks are
//!
//! * [`poly`]: piecewise polynomials on the half-line (evaluation, calculus, sup-norms),
//! * [`extremal`]: the two-knot extremal splines `phi_r(a, b, l; t)` and their norms,
//! * [`solver`]: the three-norm inverse problem (find `a, b, l` from three norms),
//! * [`oracle`]: the four-norm feasibility decision and witness construction,
//! * [`verify`]: an independent quadrature oracle and random class members,
//! * [`cli`]: the `hlk` command line front end.

// NaN must fail validation, hence `!(x > 0.0)` style checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod extremal;
pub mod oracle;
pub mod poly;
pub mod roots;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use extremal::{ExtremalParams, NormProfile};
pub use oracle::{FeasibilityReport, Problem4, Witness};
pub use poly::PiecewisePolynomial;
pub use solver::{SolveRequest, SolveResult};

/// Default relative tolerance for feasibility and equality-boundary decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `n!` as a float. Exact for every order this crate deals with.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
