//! Exact prime-factor counts of the digit-sum prime product
//! `p_n = prod { p : s_p(n) >= p }`, split at `sqrt(n)`, together with the
//! exponential-integral main term `n E1(log sqrt n)` and numeric checks of the
//! analytic bounds that control the error.
//!
//! Modules, bottom-up:
//! - [`primes`]: segmented sieve, deterministic primality, pi(x), Lambda(m).
//! - [`digits`]: base-p digit sums and Legendre's valuation of n!.
//! - [`kellner`]: omega of the lower and upper factors by three algorithms.
//! - [`special`]: E1, the PNT error factor delta(x), main term, asymptotic series.
//! - [`analytic`]: bound checks and the S1/S2/S11/S12 decomposition.

// `!(a > b)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod digits;
pub mod error;
pub mod kellner;
pub mod primes;
pub mod special;
pub mod sum;

pub use error::{Error, Result};
