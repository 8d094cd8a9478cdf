//! Primal and dual randomized coordinate descent for L2-regularized
//! empirical risk minimization, plus the cost model that decides which of
//! the two to run on a given data matrix.
//!
//! The library has three layers:
//!
//! * data handling - [`matrix`] (sparse storage with row *and* column
//!   access, LIBSVM ingestion), [`generators`] (synthetic and adversarial
//!   instances);
//! * solvers - [`losses`], [`sampling`] and [`solver`] implement serial
//!   randomized coordinate descent on the primal problem over the `d`
//!   features and coordinate ascent on the dual problem over the `n`
//!   examples, with seeded, reproducible traces;
//! * analysis - [`analyzer`] computes iteration bounds, per-iteration
//!   costs, the structural quantities `C_P`/`C_D` and their binary-matrix
//!   extremes, and recommends the cheaper method.
//!
//! A longer narrative with worked examples lives in the `book/` directory
//! (mdBook); its code snippets are compiled as doc-tests of this crate.
//!
//! ```
//! use pdcd::analyzer::{recommend, Recommendation};
//! use pdcd::generators::gen_worst_for_dual;
//!
//! // 100 features, 300 examples, 10% fill, skewed against the dual method
//! let x = gen_worst_for_dual(100, 300, 3_000, 0).unwrap().matrix;
//! let report = recommend(&x, 1.0 / 300.0, 0.25).unwrap();
//! assert_eq!(report.recommendation, Recommendation::Primal);
//! ```

pub mod analyzer;
mod book;
pub mod error;
pub mod generators;
pub mod losses;
pub mod matrix;
pub mod reference;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
