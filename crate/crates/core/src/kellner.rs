//! Prime-factor counts of `p_n = prod { p prime : s_p(n) >= p }`.
//!
//! The product splits at `sqrt(n)` into a lower factor (primes with
//! `p^2 < n`) and an upper factor (primes with `p^2 > n`). A prime with
//! `p^2 = n` has `s_p(n) = 1` and belongs to neither. All comparisons with
//! `sqrt(n)` are done on squares in integer arithmetic.
//!
//! The upper count is computed three ways:
//!
//! - **digit scan**: sieve `(sqrt n, n]` and test `s_p(n) >= p` per prime;
//! - **identity scan**: sieve the same range and test
//!   `floor((n-1)/(p-1)) > floor(n/p)`;
//! - **fast**: quotient inversion. For `p^2 > n` write `n = a p + b`, so
//!   `s_p(n) = a + b` and `a + b >= p` iff `p <= (n+a)/(a+1)`. Together with
//!   `floor(n/p) = a`, i.e. `n/(a+1) < p <= n/a`, the admissible interval has
//!   length `a/(a+1) < 1`, so its only candidate is `m = floor((n+a)/(a+1))`.
//!   That leaves `floor(sqrt n)` primality tests.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::digits::digit_sum_unchecked;
use crate::primes::{for_each_prime, is_prime, isqrt, small_primes, PrimeWalker};

/// Algorithm used for the upper count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaMethod {
    DigitScan,
    IdentityScan,
    Fast,
}

impl OmegaMethod {
    pub const ALL: [OmegaMethod; 3] = [Self::DigitScan, Self::IdentityScan, Self::Fast];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DigitScan => "digit-scan",
            Self::IdentityScan => "identity-scan",
            Self::Fast => "fast",
        }
    }
}

impl std::fmt::Display for OmegaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A prime dividing `p_n` with its base-`p` data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualifyingPrime {
    pub p: u64,
    /// s_p(n)
    pub s: u64,
    /// floor(n / p)
    pub a: u64,
    /// n mod p
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualifyingList {
    pub primes: Vec<QualifyingPrime>,
    pub truncated: bool,
}

/// One computed data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRecord {
    pub n: u64,
    pub omega_plus: u64,
    pub omega_minus: u64,
    pub method: OmegaMethod,
    #[serde(rename = "elapsed_ms", with = "duration_ms")]
    pub elapsed: Duration,
}

impl OmegaRecord {
    /// `omega_plus < sqrt(n)` and `omega_minus <= pi(floor(sqrt n))`.
    pub fn bounds_hold(&self, pi_sqrt: u64) -> bool {
        upper_bound_holds(self.n, self.omega_plus) && self.omega_minus <= pi_sqrt
    }
}

/// `omega_plus < sqrt(n)`, checked on squares.
pub fn upper_bound_holds(n: u64, omega_plus: u64) -> bool {
    (omega_plus as u128) * (omega_plus as u128) < n as u128
}

mod duration_ms {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Duration::try_from_secs_f64(ms.max(0.0) / 1e3).map_err(serde::de::Error::custom)
    }
}

/// `s_p(n) >= p`. `p` is assumed prime.
pub fn qualifies(n: u64, p: u64) -> bool {
    p >= 2 && digit_sum_unchecked(n, p) >= p
}

/// Primes `p` with `p^2 > n` start here.
#[inline]
fn upper_start(n: u64) -> u64 {
    isqrt(n) + 1
}

/// omega of the lower factor: primes with `p^2 < n` and `s_p(n) >= p`.
pub fn omega_minus(n: u64) -> u64 {
    if n < 5 {
        return 0;
    }
    let primes = small_primes(isqrt(n - 1));
    omega_minus_with(n, &primes)
}

/// Same as [`omega_minus`], using a caller-supplied ascending prime list
/// that covers `floor(sqrt(n - 1))`.
pub fn omega_minus_with(n: u64, primes: &[u64]) -> u64 {
    if n < 2 {
        return 0;
    }
    let limit = isqrt(n - 1);
    primes
        .iter()
        .take_while(|&&p| p <= limit)
        .filter(|&&p| qualifies(n, p))
        .count() as u64
}

/// Full-scan algorithms over `(sqrt n, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMethod {
    Digit,
    Identity,
}

impl From<ScanMethod> for OmegaMethod {
    fn from(m: ScanMethod) -> Self {
        match m {
            ScanMethod::Digit => OmegaMethod::DigitScan,
            ScanMethod::Identity => OmegaMethod::IdentityScan,
        }
    }
}

/// Reciprocal of a 32-bit divisor `d >= 2`: `floor(x / d) = (c * x) >> 64`
/// for every 32-bit `x`, with `c = ceil(2^64 / d)`.
#[inline]
fn reciprocal(d: u64) -> u64 {
    debug_assert!((2..1 << 32).contains(&d));
    u64::MAX / d + 1
}

#[inline]
fn mul_hi(c: u64, x: u64) -> u64 {
    ((c as u128 * x as u128) >> 64) as u64
}

/// A sieve block with per-prime reciprocals, shared by every `n` scanned
/// against it. Reciprocals are only built when all `n` fit in 32 bits.
struct ScanBlock<'a> {
    primes: &'a [u64],
    recip_p: Vec<u64>,
    recip_p_minus_1: Vec<u64>,
}

impl<'a> ScanBlock<'a> {
    fn new(primes: &'a [u64], method: ScanMethod, narrow: bool) -> Self {
        let mut block = Self {
            primes,
            recip_p: Vec::new(),
            recip_p_minus_1: Vec::new(),
        };
        if narrow {
            // p = 2 is handled outside the kernels; its slot is never read.
            let recip = |d: u64| if d >= 2 { reciprocal(d) } else { 0 };
            block.recip_p = primes.iter().map(|&p| recip(p)).collect();
            if method == ScanMethod::Identity {
                block.recip_p_minus_1 = primes.iter().map(|&p| recip(p - 1)).collect();
            }
        }
        block
    }

    /// Qualifying primes among `primes[range]`; every prime there satisfies
    /// `p^2 > n` and `p <= n`.
    fn count(&self, n: u64, range: std::ops::Range<usize>, method: ScanMethod) -> u64 {
        let mut range = range;
        let mut total = 0;
        // p = 2 only shows up for n <= 3; (p - 1) = 1 has no 64-bit reciprocal.
        if self.primes.get(range.start) == Some(&2) {
            let hit = match method {
                ScanMethod::Digit => digit_sum_unchecked(n, 2) >= 2,
                ScanMethod::Identity => n - 1 > n / 2,
            };
            total += u64::from(hit);
            range.start += 1;
        }
        let primes = &self.primes[range.clone()];
        if self.recip_p.is_empty() {
            total += match method {
                ScanMethod::Digit => primes
                    .iter()
                    .filter(|&&p| digit_sum_unchecked(n, p) >= p)
                    .count() as u64,
                ScanMethod::Identity => primes
                    .iter()
                    .filter(|&&p| (n - 1) / (p - 1) > n / p)
                    .count() as u64,
            };
            return total;
        }
        let recip_p = &self.recip_p[range.clone()];
        total += match method {
            ScanMethod::Digit => primes
                .iter()
                .zip(recip_p)
                .map(|(&p, &c)| {
                    let mut rest = n;
                    let mut s = 0;
                    while rest > 0 {
                        let q = mul_hi(c, rest);
                        s += rest - q * p;
                        rest = q;
                    }
                    u64::from(s >= p)
                })
                .sum::<u64>(),
            ScanMethod::Identity => recip_p
                .iter()
                .zip(&self.recip_p_minus_1[range])
                .map(|(&cp, &cq)| u64::from(mul_hi(cq, n - 1) > mul_hi(cp, n)))
                .sum::<u64>(),
        };
        total
    }
}

/// Upper count restricted to primes in `[lo, hi)`; summing over a partition
/// of `[0, n + 1)` gives the full count.
pub fn omega_plus_scan_in(n: u64, lo: u64, hi: u64, method: ScanMethod) -> u64 {
    omega_plus_scan_many_in(&[n], lo, hi, method)[0]
}

/// Upper count by a full sieve scan of `(sqrt n, n]`.
pub fn omega_plus_scan(n: u64, method: ScanMethod) -> u64 {
    omega_plus_scan_in(n, 0, n.saturating_add(1), method)
}

pub fn omega_plus_digit_scan(n: u64) -> u64 {
    omega_plus_scan(n, ScanMethod::Digit)
}

pub fn omega_plus_identity_scan(n: u64) -> u64 {
    omega_plus_scan(n, ScanMethod::Identity)
}

/// Upper counts for many `n` at once, restricted to primes in `[lo, hi)`.
///
/// One sieve pass over the union of the ranges is shared by all `n`, so the
/// cost is one sieve plus one test per (n, prime) pair. Output order follows
/// `ns`.
pub fn omega_plus_scan_many_in(ns: &[u64], lo: u64, hi: u64, method: ScanMethod) -> Vec<u64> {
    let mut counts = vec![0u64; ns.len()];
    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| ns[i]);
    let Some(&first) = order.first() else {
        return counts;
    };
    let max_n = ns[*order.last().unwrap()];
    let lo = lo.max(upper_start(ns[first])).max(2);
    let hi = hi.min(max_n.saturating_add(1));
    if lo >= hi {
        return counts;
    }

    let narrow = max_n < 1 << 32;
    let mut walk = PrimeWalker::new(lo, hi);
    while let Some(block) = walk.next_block() {
        let (b_first, b_last) = (block[0], *block.last().unwrap());
        let scan = ScanBlock::new(block, method, narrow);
        // Candidates for this block: n >= b_first and sqrt(n) < b_last.
        let start = order.partition_point(|&i| ns[i] < b_first);
        for &i in &order[start..] {
            let n = ns[i];
            let from = upper_start(n);
            if from > b_last {
                break;
            }
            let a = block.partition_point(|&p| p < from);
            let b = block.partition_point(|&p| p <= n);
            if a < b {
                counts[i] += scan.count(n, a..b, method);
            }
        }
    }
    counts
}

pub fn omega_plus_scan_many(ns: &[u64], method: ScanMethod) -> Vec<u64> {
    omega_plus_scan_many_in(ns, 0, u64::MAX, method)
}

/// Quotient-inversion candidate for quotient `a`, if it is admissible
/// (before the primality test).
#[inline]
fn inversion_candidate(n: u64, a: u64) -> Option<u64> {
    let (n128, a128) = (n as u128, a as u128);
    let m = (n128 + a128) / (a128 + 1);
    let ok = m * (a128 + 1) > n128 && m * m > n128 && m <= n128;
    ok.then_some(m as u64)
}

/// Upper count with `floor(sqrt n)` primality tests.
pub fn omega_plus_fast(n: u64) -> u64 {
    (1..=isqrt(n))
        .filter_map(|a| inversion_candidate(n, a))
        .filter(|&m| is_prime(m))
        .count() as u64
}

/// The primes counted by [`omega_plus_fast`], ascending.
pub fn omega_plus_fast_primes(n: u64) -> Vec<u64> {
    // Larger quotients give smaller primes.
    (1..=isqrt(n))
        .rev()
        .filter_map(|a| inversion_candidate(n, a))
        .filter(|&m| is_prime(m))
        .collect()
}

/// Upper count by any of the three algorithms.
pub fn omega_plus(n: u64, method: OmegaMethod) -> u64 {
    match method {
        OmegaMethod::DigitScan => omega_plus_digit_scan(n),
        OmegaMethod::IdentityScan => omega_plus_identity_scan(n),
        OmegaMethod::Fast => omega_plus_fast(n),
    }
}

/// Both counts for one `n`, timed.
pub fn omega_record(n: u64, method: OmegaMethod) -> OmegaRecord {
    let start = Instant::now();
    let omega_plus = omega_plus(n, method);
    let omega_minus = omega_minus(n);
    OmegaRecord {
        n,
        omega_plus,
        omega_minus,
        method,
        elapsed: start.elapsed(),
    }
}

/// All primes `p <= n` with `s_p(n) >= p`, at most `cap` of them.
pub fn qualifying_primes(n: u64, cap: usize) -> QualifyingList {
    let mut primes = Vec::new();
    let mut truncated = false;
    let mut walk = PrimeWalker::new(2, n.saturating_add(1));
    'outer: while let Some(block) = walk.next_block() {
        for &p in block {
            let s = digit_sum_unchecked(n, p);
            if s < p {
                continue;
            }
            if primes.len() == cap {
                truncated = true;
                break 'outer;
            }
            primes.push(QualifyingPrime {
                p,
                s,
                a: n / p,
                b: n % p,
            });
        }
    }
    QualifyingList { primes, truncated }
}

/// Primes `p` with `p^2 > n` and `s_p(n) >= p`, by direct digit test.
pub fn upper_qualifying_primes(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime(upper_start(n), n.saturating_add(1), |p| {
        if qualifies(n, p) {
            out.push(p);
        }
    });
    out
}
