//! Command-line front end for `kellner-core`: single-n queries, range
//! verification, convergence tables, lemma checks and the split of the upper
//! count, with CSV/JSON output and a results cache.

// `!(a > b)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod cache;
pub mod commands;
pub mod compute;
pub mod error;
pub mod grid;
pub mod output;

pub use error::CliError;
