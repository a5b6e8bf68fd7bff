//! Parallel evaluation over a set of n. Work is partitioned across the
//! current rayon pool and merged in input order, so results do not depend on
//! the thread count.

use std::time::{Duration, Instant};

use kellner_core::kellner::{
    omega_minus_with, omega_plus_fast, omega_plus_scan_many_in, OmegaMethod, ScanMethod,
};
use kellner_core::primes::{isqrt, small_primes};
use rayon::prelude::*;

use crate::args::MethodArg;

/// Prime ranges narrower than this are scanned as one piece.
const MIN_PIECE: u64 = 1 << 22;

impl MethodArg {
    pub fn methods(self) -> &'static [OmegaMethod] {
        match self {
            Self::Digit => &[OmegaMethod::DigitScan],
            Self::Identity => &[OmegaMethod::IdentityScan],
            Self::Fast => &[OmegaMethod::Fast],
            Self::All => &OmegaMethod::ALL,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::All => "all",
            _ => self.methods()[0].as_str(),
        }
    }
}

/// Upper counts for ascending `ns`.
pub fn upper_counts(ns: &[u64], method: OmegaMethod) -> Vec<u64> {
    let scan = match method {
        OmegaMethod::Fast => return ns.par_iter().map(|&n| omega_plus_fast(n)).collect(),
        OmegaMethod::DigitScan => ScanMethod::Digit,
        OmegaMethod::IdentityScan => ScanMethod::Identity,
    };
    let Some(&max) = ns.iter().max() else {
        return Vec::new();
    };
    // Split the prime range, not the n set, so the sieve runs once overall.
    let end = max + 1;
    let pieces = (rayon::current_num_threads() as u64 * 8)
        .min(end.div_ceil(MIN_PIECE))
        .max(1);
    let width = end.div_ceil(pieces);
    (0..pieces)
        .into_par_iter()
        .map(|k| omega_plus_scan_many_in(ns, k * width, ((k + 1) * width).min(end), scan))
        .reduce(
            || vec![0; ns.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

pub fn lower_counts(ns: &[u64]) -> Vec<u64> {
    let max = ns.iter().copied().max().unwrap_or(0);
    let primes = small_primes(isqrt(max.saturating_sub(1)));
    ns.par_iter()
        .map(|&n| omega_minus_with(n, &primes))
        .collect()
}

/// `pi(floor(sqrt n))` for each n.
pub fn pi_sqrt(ns: &[u64]) -> Vec<u64> {
    let max = ns.iter().copied().max().unwrap_or(0);
    let primes = small_primes(isqrt(max));
    ns.iter()
        .map(|&n| primes.partition_point(|&p| p <= isqrt(n)) as u64)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub ns: Vec<u64>,
    /// Upper counts per requested method, in method order.
    pub upper: Vec<(OmegaMethod, Vec<u64>)>,
    pub lower: Vec<u64>,
    pub elapsed: Duration,
}

impl Evaluation {
    pub fn run(ns: Vec<u64>, method: MethodArg) -> Self {
        let start = Instant::now();
        let upper = method
            .methods()
            .iter()
            .map(|&m| (m, upper_counts(&ns, m)))
            .collect();
        let lower = lower_counts(&ns);
        Self {
            ns,
            upper,
            lower,
            elapsed: start.elapsed(),
        }
    }

    /// The upper count of the first method.
    pub fn omega_plus(&self, i: usize) -> u64 {
        self.upper[0].1[i]
    }

    /// First index where the methods disagree.
    pub fn first_disagreement(&self) -> Option<usize> {
        (0..self.ns.len()).find(|&i| self.upper.iter().any(|(_, v)| v[i] != self.upper[0].1[i]))
    }

    /// Amortised time per n.
    pub fn elapsed_per_n(&self) -> Duration {
        self.elapsed / self.ns.len().max(1) as u32
    }
}
