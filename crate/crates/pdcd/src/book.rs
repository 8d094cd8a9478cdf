//! Doc-test anchors for the mdBook chapters in `book/src`.
//!
//! Each chapter is included verbatim so that its code blocks compile and
//! run as doc-tests of this crate. If a chapter drifts from the API,
//! `cargo test` fails.

#[doc = include_str!("../../../book/src/problem.md")]
pub mod problem {}

#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}

#[doc = include_str!("../../../book/src/cost-model.md")]
pub mod cost_model {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
