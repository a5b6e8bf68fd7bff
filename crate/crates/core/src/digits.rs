//! Base-p digit expansions and Legendre's formula.

use crate::error::{Error, Result};
use crate::primes::is_prime;

/// Base-`p` digits of `n`, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitExpansion {
    n: u64,
    p: u64,
    digits: Vec<u64>,
}

impl DigitExpansion {
    pub fn new(n: u64, p: u64) -> Result<Self> {
        check_prime(p)?;
        let mut digits = Vec::new();
        let mut rest = n;
        while rest > 0 {
            digits.push(rest % p);
            rest /= p;
        }
        Ok(Self { n, p, digits })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn sum(&self) -> u64 {
        self.digits.iter().sum()
    }

    /// `sum digits[i] * p^i`, or `None` on overflow.
    pub fn reconstruct(&self) -> Option<u64> {
        self.digits
            .iter()
            .rev()
            .try_fold(0u64, |acc, &d| acc.checked_mul(self.p)?.checked_add(d))
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime { p })
    }
}

/// s_p(n) without the primality check on `p` (any base `p >= 2`).
#[inline]
pub(crate) fn digit_sum_unchecked(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// s_p(n), the sum of the base-`p` digits of `n`.
pub fn digit_sum(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    Ok(digit_sum_unchecked(n, p))
}

/// v_p(n!) = sum_{k>=1} floor(n / p^k).
pub fn legendre_valuation(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    let mut total = 0;
    let mut pk = p;
    while pk <= n {
        total += n / pk;
        pk = match pk.checked_mul(p) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(total)
}
