//! The exponential integral E1, the prime-number-theorem error factor
//! delta(x), the main term `n E1(log sqrt n)` and its truncated asymptotic
//! series.
//!
//! E1 is evaluated by region:
//!
//! | region        | method                              | error bound                    |
//! |---------------|-------------------------------------|--------------------------------|
//! | `x <= 1`      | power series with Euler's constant  | first omitted term + rounding  |
//! | `1 < x <= 50` | continued fraction (modified Lentz) | last correction + rounding     |
//! | `x > 50`      | asymptotic series, `N = min(x, 30)` | `N! e^-x / x^(N+1)` + rounding |
//!
//! Every evaluation also carries `ln E1(x)` so that callers can work past the
//! point where `e^-x` underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Euler–Mascheroni constant, 0.57721566490153286061 (DLMF 5.2.3).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponent constant of delta(x).
pub const DELTA_CONSTANT: f64 = 0.2098;

/// Upper edge of the power-series region.
pub const SERIES_MAX_X: f64 = 1.0;
/// Upper edge of the continued-fraction region.
pub const FRACTION_MAX_X: f64 = 50.0;

/// Largest truncation order accepted by [`corollary_series`].
pub const MAX_SERIES_TERMS: u32 = 20;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum E1Method {
    PowerSeries,
    ContinuedFraction,
    Asymptotic,
}

/// One evaluation of E1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E1Eval {
    pub x: f64,
    pub value: f64,
    /// `ln E1(x)`; finite even where `value` underflows to zero.
    pub ln_value: f64,
    pub method: E1Method,
    /// Absolute error bound on `value`.
    pub error_bound: f64,
}

impl E1Eval {
    pub fn relative_error_bound(&self) -> f64 {
        if self.value > 0.0 {
            self.error_bound / self.value
        } else {
            0.0
        }
    }

    /// `e^-x/(x+1) < E1(x) < e^-x/x`, compared in log space.
    pub fn within_sandwich(&self) -> bool {
        let x = self.x;
        let lower = -x - (x + 1.0).ln();
        let upper = -x - x.ln();
        lower < self.ln_value && self.ln_value < upper
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("E1 needs a finite x > 0, got {x}")))
    }
}

/// `E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)`.
pub fn e1_power_series(x: f64) -> Result<E1Eval> {
    check_positive(x)?;
    let mut sum = CompensatedSum::new();
    sum.add(-EULER_GAMMA);
    sum.add(-x.ln());
    // term_k = (-1)^(k+1) x^k / (k k!); alternating and decreasing once k > x.
    let mut power = 1.0; // (-1)^(k+1) x^k / k!
    let mut k = 1u32;
    let omitted = loop {
        power *= -x / k as f64;
        let term = -power / k as f64;
        if term.abs() <= 1e-18 * sum.value().abs().max(1e-300) && k as f64 > x {
            break term.abs();
        }
        sum.add(term);
        k += 1;
        if k > 200 {
            break term.abs();
        }
    };
    let value = sum.value();
    let rounding = 4.0 * EPS * (EULER_GAMMA + x.ln().abs() + 2.0 * x.exp()) + sum.error_bound();
    Ok(E1Eval {
        x,
        value,
        ln_value: value.ln(),
        method: E1Method::PowerSeries,
        error_bound: omitted + rounding,
    })
}

/// `E1(x) = e^-x / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))`.
pub fn e1_continued_fraction(x: f64) -> Result<E1Eval> {
    check_positive(x)?;
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0u32;
    for i in 1..100_000u32 {
        let an = -((i as f64) * (i as f64));
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        last_change = (del - 1.0).abs();
        iterations = i;
        if last_change <= EPS {
            break;
        }
    }
    // h = e^x E1(x); relative error from the last correction and the
    // rounding of each Lentz step.
    let relative = 2.0 * last_change + 4.0 * EPS * (iterations as f64).sqrt() + 2.0 * EPS;
    let ln_value = h.ln() - x;
    let value = ln_value.exp();
    Ok(E1Eval {
        x,
        value,
        ln_value,
        method: E1Method::ContinuedFraction,
        error_bound: relative * value,
    })
}

/// `E1(x) = e^-x/x * sum_{m<N} (-1)^m m!/x^m + R_N`, `|R_N| <= N! e^-x / x^(N+1)`.
pub fn e1_asymptotic(x: f64, terms: u32) -> Result<E1Eval> {
    check_positive(x)?;
    let terms = terms.max(1);
    let mut sum = CompensatedSum::new();
    let mut t = 1.0; // (-1)^m m! / x^m
    for m in 0..terms {
        sum.add(t);
        t *= -((m + 1) as f64) / x;
    }
    // t now holds (-1)^N N!/x^N: the remainder relative to e^-x/x.
    let s = sum.value();
    let relative = t.abs() / s + sum.error_bound() / s + 4.0 * EPS;
    let ln_value = -x - x.ln() + s.ln();
    let value = ln_value.exp();
    Ok(E1Eval {
        x,
        value,
        ln_value,
        method: E1Method::Asymptotic,
        error_bound: relative * value,
    })
}

/// E1(x) for `x > 0`, method chosen by region.
pub fn exp_integral_e1(x: f64) -> Result<E1Eval> {
    check_positive(x)?;
    if x <= SERIES_MAX_X {
        e1_power_series(x)
    } else if x <= FRACTION_MAX_X {
        e1_continued_fraction(x)
    } else {
        e1_asymptotic(x, (x.floor() as u32).min(30))
    }
}

/// `delta(x) = exp(-0.2098 (ln x)^(3/5) (ln ln x)^(-1/5))` for `x > e`.
pub fn delta(x: f64) -> Result<f64> {
    if !(x > std::f64::consts::E) || !x.is_finite() {
        return Err(Error::Domain(format!("delta needs x > e, got {x}")));
    }
    let l = x.ln();
    Ok((-DELTA_CONSTANT * l.powf(0.6) * l.ln().powf(-0.2)).exp())
}

/// `n E1(log sqrt n)`, with `log sqrt n` taken as `ln(n)/2`.
pub fn main_term(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("main term needs n >= 2, got {n}")));
    }
    let e1 = exp_integral_e1(0.5 * (n as f64).ln())?;
    Ok(n as f64 * e1.value)
}

/// The first `N` terms of the asymptotic expansion of the main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    pub n: u64,
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    pub remainder_bound: f64,
}

impl TruncatedSeries {
    /// Running sums after 1, 2, ..., N terms.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.terms
            .iter()
            .scan(CompensatedSum::new(), |acc, &t| {
                acc.add(t);
                Some(acc.value())
            })
            .collect()
    }
}

/// Terms `(-1)^m 2^(m+1) m! sqrt(n) / (ln n)^(m+1)` for `m < N`, and the
/// bound `2^(N+1) N! sqrt(n) / (ln n)^(N+1)` on what is left over.
pub fn corollary_series(n: u64, terms: u32) -> Result<TruncatedSeries> {
    if n < 3 {
        return Err(Error::Domain(format!("series needs n >= 3, got {n}")));
    }
    if terms == 0 {
        return Err(Error::Domain("series needs at least one term".into()));
    }
    if terms > MAX_SERIES_TERMS {
        return Err(Error::TruncationLimit {
            requested: terms,
            limit: MAX_SERIES_TERMS,
        });
    }
    let log_n = (n as f64).ln();
    let mut t = 2.0 * (n as f64).sqrt() / log_n;
    let mut out = Vec::with_capacity(terms as usize);
    for m in 0..terms {
        out.push(t);
        t *= -2.0 * (m + 1) as f64 / log_n;
    }
    let partial_sum = out.iter().copied().collect::<CompensatedSum>().value();
    Ok(TruncatedSeries {
        n,
        terms: out,
        partial_sum,
        remainder_bound: t.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_at_one() {
        // E1(1) = 0.21938393439552027368 (A&S 5.1, DLMF 6.2)
        let e = exp_integral_e1(1.0).unwrap();
        assert_eq!(e.method, E1Method::PowerSeries);
        assert!((e.value - 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!(e.error_bound < 1e-13);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(exp_integral_e1(f64::NAN).is_err());
        assert!(delta(2.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        for x in [0.5, 5.0, 50.0, 50.5, 700.0, 800.0] {
            let e = exp_integral_e1(x).unwrap();
            assert!(e.within_sandwich(), "x = {x}");
            if x <= 700.0 {
                let (lo, hi) = ((-x).exp() / (x + 1.0), (-x).exp() / x);
                assert!(lo < e.value && e.value < hi, "x = {x}");
            }
        }
        assert!(exp_integral_e1(700.0).unwrap().value > 0.0);
        assert!(exp_integral_e1(800.0).unwrap().ln_value.is_finite());
    }

    #[test]
    fn regions_agree_at_switch_points() {
        let a = e1_power_series(1.0).unwrap().value;
        let b = e1_continued_fraction(1.0).unwrap().value;
        assert!(((a - b) / a).abs() < 1e-12, "{a} vs {b}");
        let c = e1_continued_fraction(50.0).unwrap().value;
        let d = e1_asymptotic(50.0, 30).unwrap().value;
        assert!(((c - d) / c).abs() < 1e-12, "{c} vs {d}");
    }

    #[test]
    fn error_bounds_are_tight_enough() {
        for i in 0..=200 {
            let x = 10f64.powf(-2.0 + 5.0 * i as f64 / 200.0);
            let e = exp_integral_e1(x).unwrap();
            assert!(
                e.error_bound <= 1e-12 * e.value.max(1e-300),
                "x = {x}: {e:?}"
            );
        }
    }

    #[test]
    fn delta_shape() {
        let d100 = delta(100.0).unwrap();
        assert!(0.0 < d100 && d100 < 1.0);
        assert!(delta(1e6).unwrap() < delta(1e3).unwrap());
        // delta decays slower than any power, but against x^0.01 that only
        // shows once log x is in the hundreds.
        let grid = [1e100, 1e150, 1e200, 1e300];
        let scaled: Vec<f64> = grid
            .iter()
            .map(|&x| delta(x).unwrap() * x.powf(0.01))
            .collect();
        assert!(scaled.windows(2).all(|w| w[0] < w[1]), "{scaled:?}");
    }

    #[test]
    fn series_shape() {
        let n = 1_000_000u64;
        let s1 = corollary_series(n, 1).unwrap();
        let l = (n as f64).ln();
        assert!((s1.partial_sum - 2.0 * 1000.0 / l).abs() < 1e-12);
        let s4 = corollary_series(10_000_000_000, 4).unwrap();
        assert!(s4.terms.windows(2).all(|w| w[0].signum() == -w[1].signum()));
        assert_eq!(
            corollary_series(n, 21),
            Err(Error::TruncationLimit {
                requested: 21,
                limit: 20
            })
        );
        assert!(corollary_series(2, 3).is_err());
        // Leading coefficients 2, -4, 16, -96.
        let s = corollary_series(n, 4).unwrap();
        let unit = 1000.0;
        let coeffs: Vec<f64> = s
            .terms
            .iter()
            .enumerate()
            .map(|(m, t)| t * l.powi(m as i32 + 1) / unit)
            .collect();
        for (got, want) in coeffs.iter().zip([2.0, -4.0, 16.0, -96.0]) {
            assert!((got - want).abs() < 1e-9, "{coeffs:?}");
        }
    }

    #[test]
    fn main_term_upper_bound() {
        for n in [10_000u64, 123_456, 10_000_000, 1 << 40] {
            let m = main_term(n).unwrap();
            let lead = 2.0 * (n as f64).sqrt() / (n as f64).ln();
            assert!(m < 1.5 * lead);
            assert!(m < lead);
        }
    }
}
