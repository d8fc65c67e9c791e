//! Random-walk Monte Carlo solution of the Wiener-Hopf normal equations
//! `R w = b`, benchmarked against classical adaptive algorithms on
//! synthetic system-identification problems.
//!
//! The crate is organized around five building blocks:
//!
//! - [`corrmath`]: Toeplitz correlation matrices, dense vectors/matrices,
//!   a pivoted direct solver used as the reference oracle, norms,
//!   Gershgorin discs, and spectral-radius estimation.
//! - [`sigmodel`]: wide-sense-stationary input generation (IID and AR(1)),
//!   FIR plant simulation, and exact or empirical construction of the
//!   correlation quantities `R` and `b`.
//! - [`mcsolve`]: the random-walk solver itself, built on the `R = I - F`
//!   splitting and the value/probability decomposition with an absorbing
//!   state; walk execution and averaging, minimum-walk counts, truncated
//!   Neumann sums, error lower bounds, and the convergence precheck.
//! - [`baselines`]: LMS, NLMS, RLS, and Kaczmarz recursions with
//!   instrumented multiplication counters.
//! - [`harness`]: experiment orchestration over an iteration ladder plus
//!   CSV/JSON report emission.
//!
//! The `walksolve` binary exposes all of this behind `solve`, `precheck`,
//! `identify`, `walks`, and `bounds` subcommands.

pub mod baselines;
pub mod corrmath;
pub mod harness;
pub mod mcsolve;
pub mod sigmodel;

pub use corrmath::{CorrelationMatrix, DenseMatrix, RealVector};
pub use mcsolve::{PrecheckReport, ProbabilityScheme, SplitSystem, Verdict, WalkEstimate};
