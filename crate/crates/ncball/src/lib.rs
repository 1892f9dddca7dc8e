//! Exact finite-truncation computations for free power series on the
//! noncommutative unit ball.
//!
//! Everything in this crate lives on a truncated full Fock space: the span of
//! words of length at most `m` over `n` letters. Creation operators truncated
//! to that space are jointly nilpotent, so the operator identities of the
//! free-analytic toolbox — Poisson-type reproducing formulas, Cayley
//! transforms between contractive and positive-real series, least
//! pluriharmonic majorants and their linear-fractional parametrizations, and
//! multivariable commutant lifting — hold *exactly*, up to floating-point
//! rounding, rather than asymptotically. The test suites exploit that to pin
//! each identity to tight numerical tolerances.
//!
//! Module map:
//!
//! * [`fock`] — words, the graded-lex basis, creation operators, compressions;
//! * [`series`] — matrix-coefficient free power series and their arithmetic;
//! * [`transforms`] — Poisson kernels/transforms, Cayley transforms, moments
//!   of positive-real series;
//! * [`majorant`] — least pluriharmonic majorants of `|f|^2` and the
//!   parametrization of all majorants;
//! * [`schur`] — column representations of contractive series and the
//!   associated linear-fractional maps;
//! * [`lifting`] — multivariable commutant lifting with constraints and the
//!   parametrization of all interpolants;
//! * [`gen`] — seeded random instances for tests and the CLI;
//! * [`report`], [`acceptance`] — structured check results and the end-to-end
//!   verification suite.

pub mod error;
pub mod linalg;
pub mod fock;
pub mod series;
pub mod transforms;
pub mod report;
pub mod majorant;
pub mod schur;
pub mod lifting;
pub mod gen;
pub mod acceptance;

pub use error::{Error, Result};

/// Default floor for eigenvalue-nonnegativity checks.
pub const TOL_EIG: f64 = 1e-9;

/// Default ceiling for residual-norm checks.
pub const TOL_RES: f64 = 1e-8;
