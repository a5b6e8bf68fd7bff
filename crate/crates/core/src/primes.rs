//! Prime generation, primality testing, prime counting and the von Mangoldt
//! function.
//!
//! Sieving is segmented and stores odd numbers only, one bit per odd. A
//! sieve over `[lo, hi)` never allocates more than one working segment of
//! `SieveConfig::segment_len` numbers, except for the result bitmap that
//! `sieve_range` hands back.
//!
//! Primality of a single 64-bit value uses Miller–Rabin with witness sets
//! that are known to be deterministic for the whole 32-bit and 64-bit ranges,
//! after cheap trial division.

use crate::error::{Error, Result};

/// Default number of integers covered by one internal sieve segment.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 26;

/// Largest bitmap `sieve_range` will materialise (in flags).
const MAX_OUTPUT_FLAGS: u64 = 1 << 36;

/// Block length used by streaming prime walks; sized to stay cache resident.
pub const WALK_BLOCK_LEN: u64 = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_len: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

/// Exact floor square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    // Float seed, then Newton-free correction in integer arithmetic.
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Exact floor k-th root, `k >= 1`.
pub fn iroot(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "iroot: k must be positive");
    if k == 1 || n < 2 {
        return n;
    }
    if k >= 64 {
        return 1;
    }
    let fits = |r: u64| r.checked_pow(k).is_some_and(|v| v <= n);
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// Primes `<= limit` by a plain byte sieve; used for base primes only.
pub fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("small_primes limit fits in usize");
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Odd base primes needed to sieve numbers below `hi`.
fn base_primes_for(hi: u64) -> Vec<u64> {
    let mut base = small_primes(isqrt(hi.saturating_sub(1)));
    base.retain(|&p| p != 2);
    base
}

/// Clear the bits of odd composites in `[odd_lo, odd_lo + 2*count)`.
///
/// `bits` must be pre-filled with ones for the `count` positions; bit `i`
/// stands for `odd_lo + 2i`.
fn clear_odd_composites(odd_lo: u64, count: usize, base: &[u64], bits: &mut [u64]) {
    let end = odd_lo + 2 * count as u64;
    for &p in base {
        let sq = p * p;
        if sq >= end {
            break;
        }
        let mut start = match odd_lo.div_ceil(p).checked_mul(p) {
            Some(m) => m,
            None => continue,
        };
        if start % 2 == 0 {
            start += p;
        }
        start = start.max(sq);
        if start >= end {
            continue;
        }
        let mut idx = ((start - odd_lo) / 2) as usize;
        let step = p as usize;
        while idx < count {
            bits[idx >> 6] &= !(1u64 << (idx & 63));
            idx += step;
        }
    }
    if odd_lo == 1 && count > 0 {
        bits[0] &= !1;
    }
}

fn fill_ones(bits: &mut Vec<u64>, count: usize) {
    bits.clear();
    bits.resize(count.div_ceil(64), u64::MAX);
    if !count.is_multiple_of(64) {
        if let Some(last) = bits.last_mut() {
            *last = (1u64 << (count % 64)) - 1;
        }
    }
}

/// Odd numbers in `[lo, hi)`: first odd and how many.
fn odd_span(lo: u64, hi: u64) -> (u64, usize) {
    let odd_lo = lo | 1;
    if odd_lo >= hi {
        return (odd_lo, 0);
    }
    (odd_lo, ((hi - odd_lo).div_ceil(2)) as usize)
}

/// Primality flags for the half-open interval `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSegment {
    lo: u64,
    hi: u64,
    has_two: bool,
    odd_lo: u64,
    odd_count: usize,
    bits: Vec<u64>,
}

impl PrimeSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    /// Whether `m` is flagged prime. Values outside the segment are `false`.
    pub fn contains(&self, m: u64) -> bool {
        if m < self.lo || m >= self.hi {
            return false;
        }
        if m == 2 {
            return self.has_two;
        }
        if m.is_multiple_of(2) {
            return false;
        }
        let idx = ((m - self.odd_lo) / 2) as usize;
        self.bits[idx >> 6] >> (idx & 63) & 1 == 1
    }

    /// Flag `i`, i.e. whether `lo + i` is prime.
    pub fn flag(&self, i: u64) -> bool {
        self.lo.checked_add(i).is_some_and(|m| self.contains(m))
    }

    pub fn count(&self) -> u64 {
        self.has_two as u64 + self.bits.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.has_two.then_some(2);
        let odd_lo = self.odd_lo;
        two.into_iter()
            .chain(set_bits(&self.bits).map(move |i| odd_lo + 2 * i as u64))
    }

    /// Flags as one `bool` per integer in `[lo, hi)`.
    pub fn flags(&self) -> Vec<bool> {
        (self.lo..self.hi).map(|m| self.contains(m)).collect()
    }
}

fn set_bits(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let tz = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(w * 64 + tz)
        })
    })
}

/// Sieve `[lo, hi)` with the default segment length.
pub fn sieve_range(lo: u64, hi: u64) -> Result<PrimeSegment> {
    sieve_range_with(lo, hi, SieveConfig::default())
}

pub fn sieve_range_with(lo: u64, hi: u64, config: SieveConfig) -> Result<PrimeSegment> {
    if lo < 2 {
        return Err(Error::InvalidRange {
            lo,
            hi,
            reason: "lo must be at least 2",
        });
    }
    if lo >= hi {
        return Err(Error::InvalidRange {
            lo,
            hi,
            reason: "lo must be below hi",
        });
    }
    if hi - lo > MAX_OUTPUT_FLAGS {
        return Err(Error::RangeTooLarge { lo, hi });
    }
    if config.segment_len < 128 {
        return Err(Error::InvalidRange {
            lo,
            hi,
            reason: "segment length below 128",
        });
    }
    let (odd_lo, odd_count) = odd_span(lo, hi);
    let base = base_primes_for(hi);
    let mut bits = vec![0u64; odd_count.div_ceil(64)];

    // Sub-segments are aligned to 128 numbers so each one maps onto whole
    // 64-bit words of the output bitmap.
    let seg_odds = (config.segment_len / 128 * 64) as usize;
    let mut scratch = Vec::new();
    let mut done = 0usize;
    while done < odd_count {
        let count = seg_odds.min(odd_count - done);
        let seg_lo = odd_lo + 2 * done as u64;
        fill_ones(&mut scratch, count);
        clear_odd_composites(seg_lo, count, &base, &mut scratch);
        let word0 = done / 64;
        bits[word0..word0 + scratch.len()].copy_from_slice(&scratch);
        done += count;
    }

    Ok(PrimeSegment {
        lo,
        hi,
        has_two: lo <= 2 && 2 < hi,
        odd_lo,
        odd_count,
        bits,
    })
}

/// Streams primes in `[lo, hi)` block by block without holding the range.
///
/// ```
/// use kellner_core::primes::PrimeWalker;
/// let mut walk = PrimeWalker::new(90, 110);
/// let mut seen = Vec::new();
/// while let Some(block) = walk.next_block() {
///     seen.extend_from_slice(block);
/// }
/// assert_eq!(seen, vec![97, 101, 103, 107, 109]);
/// ```
pub struct PrimeWalker {
    cursor: u64,
    hi: u64,
    block_len: u64,
    base: Vec<u64>,
    bits: Vec<u64>,
    primes: Vec<u64>,
}

impl PrimeWalker {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self::with_block_len(lo, hi, WALK_BLOCK_LEN)
    }

    pub fn with_block_len(lo: u64, hi: u64, block_len: u64) -> Self {
        let block_len = block_len.max(2);
        let hi = hi.max(lo);
        Self {
            cursor: lo,
            hi,
            block_len,
            base: base_primes_for(hi),
            bits: Vec::new(),
            primes: Vec::new(),
        }
    }

    /// Next non-empty block of primes in ascending order.
    pub fn next_block(&mut self) -> Option<&[u64]> {
        loop {
            if self.cursor >= self.hi {
                return None;
            }
            let lo = self.cursor;
            let hi = lo.saturating_add(self.block_len).min(self.hi);
            self.cursor = hi;
            self.primes.clear();
            if lo <= 2 && 2 < hi {
                self.primes.push(2);
            }
            let (odd_lo, count) = odd_span(lo.max(3), hi);
            if count > 0 {
                fill_ones(&mut self.bits, count);
                clear_odd_composites(odd_lo, count, &self.base, &mut self.bits);
                self.primes
                    .extend(set_bits(&self.bits).map(|i| odd_lo + 2 * i as u64));
            }
            if !self.primes.is_empty() {
                return Some(&self.primes);
            }
        }
    }

    /// Count the remaining primes without materialising them.
    pub fn count_remaining(mut self) -> u64 {
        let mut total = 0u64;
        while self.cursor < self.hi {
            let lo = self.cursor;
            let hi = lo.saturating_add(self.block_len).min(self.hi);
            self.cursor = hi;
            if lo <= 2 && 2 < hi {
                total += 1;
            }
            let (odd_lo, count) = odd_span(lo.max(3), hi);
            if count > 0 {
                fill_ones(&mut self.bits, count);
                clear_odd_composites(odd_lo, count, &self.base, &mut self.bits);
                total += self.bits.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            }
        }
        total
    }
}

/// Calls `f` on every prime in `[lo, hi)` in ascending order.
pub fn for_each_prime(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    let mut walk = PrimeWalker::new(lo, hi);
    while let Some(block) = walk.next_block() {
        block.iter().copied().for_each(&mut f);
    }
}

/// pi(x), the number of primes `<= x`.
pub fn prime_count(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    // u64::MAX is composite, so the saturated bound loses nothing.
    PrimeWalker::new(2, x.saturating_add(1)).count_remaining()
}

// Montgomery arithmetic modulo an odd 64-bit modulus, R = 2^64.
struct Montgomery {
    n: u64,
    inv: u64,
    r2: u64,
    one: u64,
}

impl Montgomery {
    fn new(n: u64) -> Self {
        debug_assert!(n % 2 == 1);
        let mut inv = n;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r1 = ((1u128 << 64) % n as u128) as u64;
        let r2 = ((r1 as u128 * r1 as u128) % n as u128) as u64;
        Self {
            n,
            inv,
            r2,
            one: r1,
        }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        // t - m*n is divisible by R; subtract the high words only.
        let m = (t as u64).wrapping_mul(self.inv);
        let mn = m as u128 * self.n as u128;
        let (t_hi, mn_hi) = ((t >> 64) as u64, (mn >> 64) as u64);
        if t_hi >= mn_hi {
            t_hi - mn_hi
        } else {
            t_hi.wrapping_sub(mn_hi).wrapping_add(self.n)
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.n, self.r2)
    }

    fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = self.one;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

fn pow_mod_u32(base: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    let mut b = base % n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % n;
        }
        b = b * b % n;
        e >>= 1;
    }
    acc
}

const TRIAL_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

// Deterministic below 2^32 (Jaeschke).
const WITNESSES_32: [u64; 3] = [2, 7, 61];
// Deterministic below 2^64 (Sinclair).
const WITNESSES_64: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Deterministic primality for every 64-bit input.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &p in &TRIAL_PRIMES {
        if m == p {
            return true;
        }
        if m.is_multiple_of(p) {
            return false;
        }
    }
    if m < 53 * 53 {
        return true;
    }
    let s = (m - 1).trailing_zeros();
    let d = (m - 1) >> s;

    if m < 1 << 32 {
        return WITNESSES_32.iter().all(|&a| {
            let a = a % m;
            if a == 0 {
                return true;
            }
            let mut x = pow_mod_u32(a, d, m);
            if x == 1 || x == m - 1 {
                return true;
            }
            for _ in 1..s {
                x = x * x % m;
                if x == m - 1 {
                    return true;
                }
            }
            false
        });
    }

    let mont = Montgomery::new(m);
    let one = mont.one;
    let minus_one = m - one;
    WITNESSES_64.iter().all(|&a| {
        if a % m == 0 {
            return true;
        }
        let mut x = mont.pow(mont.to_mont(a), d);
        if x == one || x == minus_one {
            return true;
        }
        for _ in 1..s {
            x = mont.mul(x, x);
            if x == minus_one {
                return true;
            }
        }
        false
    })
}

/// Smallest prime exponents that can appear in a 64-bit perfect power.
const ROOT_EXPONENTS: [u32; 18] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
];

/// If `m = p^k` for a prime `p` and `k >= 1`, return `p`.
pub fn prime_power_base(m: u64) -> Option<u64> {
    if m < 2 {
        return None;
    }
    if is_prime(m) {
        return Some(m);
    }
    // m = p^k with k > 1 is an exact q-th power for any prime q | k.
    for &q in &ROOT_EXPONENTS {
        if 1u64.checked_shl(q).is_none_or(|two_q| two_q > m) {
            break;
        }
        let r = iroot(m, q);
        if r.checked_pow(q) == Some(m) {
            return prime_power_base(r);
        }
    }
    None
}

/// Lambda(m): `ln p` when `m` is a power of the prime `p`, else 0.
pub fn von_mangoldt(m: u64) -> f64 {
    prime_power_base(m).map_or(0.0, |p| (p as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(m: u64) -> bool {
        m >= 2
            && (2..)
                .take_while(|d| d * d <= m)
                .all(|d| !m.is_multiple_of(d))
    }

    #[test]
    fn first_primes() {
        let seg = sieve_range(2, 10).unwrap();
        assert_eq!(seg.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        let seg = sieve_range(90, 100).unwrap();
        assert_eq!(seg.primes().collect::<Vec<_>>(), vec![97]);
    }

    #[test]
    fn bad_ranges() {
        assert!(matches!(
            sieve_range(1, 10),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            sieve_range(10, 10),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            sieve_range(2, 2 + (1 << 37)),
            Err(Error::RangeTooLarge { .. })
        ));
    }

    #[test]
    fn flags_match_trial_division() {
        let seg = sieve_range_with(2, 10_001, SieveConfig { segment_len: 256 }).unwrap();
        for m in 2..10_001u64 {
            assert_eq!(seg.contains(m), trial_division(m), "m = {m}");
            assert_eq!(seg.flag(m - 2), trial_division(m));
        }
    }

    #[test]
    fn is_prime_small_exhaustive() {
        for m in 0..=10_000u64 {
            assert_eq!(is_prime(m), trial_division(m), "m = {m}");
        }
    }

    #[test]
    fn is_prime_known_values() {
        assert!(!is_prime(1));
        assert!(is_prime((1 << 61) - 1));
        assert!(is_prime(1_000_000_000_039));
        assert!(is_prime(18_446_744_073_709_551_557)); // largest 64-bit prime
        assert!(!is_prime(u64::MAX));
        // strong pseudoprime to bases 2..=37 below 2^64
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(4_294_967_297)); // F5 = 641 * 6700417
        assert!(!is_prime(3_215_031_751)); // spsp(2,3,5,7)
    }

    #[test]
    fn walker_matches_segment() {
        let seg = sieve_range(1_000_000, 1_010_000).unwrap();
        let mut walk = PrimeWalker::with_block_len(1_000_000, 1_010_000, 333);
        let mut got = Vec::new();
        while let Some(b) = walk.next_block() {
            got.extend_from_slice(b);
        }
        assert_eq!(got, seg.primes().collect::<Vec<_>>());
    }

    #[test]
    fn counts() {
        assert_eq!(prime_count(0), 0);
        assert_eq!(prime_count(1), 0);
        assert_eq!(prime_count(2), 1);
        assert_eq!(prime_count(100), 25);
        assert_eq!(prime_count(1_000_000), 78_498);
    }

    #[test]
    fn roots() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
        assert_eq!(isqrt((1 << 52) + 1), 1 << 26);
        assert_eq!(iroot(u64::MAX, 3), 2_642_245);
        assert_eq!(iroot(1 << 63, 63), 2);
        assert_eq!(iroot(243, 5), 3);
        assert_eq!(iroot(242, 5), 2);
    }

    #[test]
    fn von_mangoldt_values() {
        assert_eq!(von_mangoldt(1), 0.0);
        assert_eq!(von_mangoldt(8), 2f64.ln());
        assert_eq!(von_mangoldt(12), 0.0);
        assert_eq!(von_mangoldt(7 * 7 * 7 * 7 * 7 * 7), 7f64.ln());
        assert_eq!(von_mangoldt(36), 0.0);
        assert_eq!(von_mangoldt(1 << 63), 2f64.ln());
        assert_eq!(von_mangoldt(97), 97f64.ln());
    }
}
