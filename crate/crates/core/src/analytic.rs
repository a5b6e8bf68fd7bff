//! Numeric checks of the analytic bounds behind the asymptotic formula for
//! the upper count, and the decomposition of that count into `S1 + S2` with
//! `S1 = S11 - S12`.
//!
//! Only two bounds carry explicit constants (the short-interval prime-divisor
//! bound with constant 2 and the von Mangoldt exponential-sum bound with
//! constant 17); those are asserted. Everything stated with an unspecified
//! implied constant is reported with its margin and never asserted.
//!
//! Floors of rationals are always taken in 128-bit integer arithmetic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{for_each_prime, isqrt, small_primes, von_mangoldt};
use crate::special::{delta, exp_integral_e1};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundName {
    Lemma2,
    Corollary3,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Theorem1,
}

impl BoundName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lemma2 => "lemma2",
            Self::Corollary3 => "corollary3",
            Self::Lemma4 => "lemma4",
            Self::Lemma5 => "lemma5",
            Self::Lemma6 => "lemma6",
            Self::Lemma7 => "lemma7",
            Self::Theorem1 => "theorem1",
        }
    }

    /// Bounds with an explicit constant, checked as hard assertions.
    pub fn has_explicit_constant(self) -> bool {
        matches!(self, Self::Lemma2 | Self::Lemma5)
    }
}

impl std::fmt::Display for BoundName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma2" => Self::Lemma2,
            "corollary3" => Self::Corollary3,
            "lemma4" => Self::Lemma4,
            "lemma5" => Self::Lemma5,
            "lemma6" => Self::Lemma6,
            "lemma7" => Self::Lemma7,
            "theorem1" => Self::Theorem1,
            other => return Err(Error::Domain(format!("unknown bound `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

/// One bound-check instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundName,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs / lhs`, infinite when `lhs = 0` (serialised as `"inf"`).
    #[serde(with = "extended_f64")]
    pub margin: f64,
    pub verdict: Verdict,
}

impl BoundReport {
    fn new(name: BoundName, params: &[(&str, f64)], lhs: f64, rhs: f64) -> Self {
        let margin = if lhs > 0.0 { rhs / lhs } else { f64::INFINITY };
        let verdict = if !name.has_explicit_constant() {
            Verdict::ReportOnly
        } else if lhs < rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            lhs,
            rhs,
            margin,
            verdict,
        }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad margin `{t}`"))),
        }
    }
}

/// Sawtooth `x - floor(x) - 1/2`.
pub fn psi_saw(x: f64) -> f64 {
    x - x.floor() - 0.5
}

/// `e(x) = exp(2 pi i x)`.
pub fn e_unit(x: f64) -> Complex64 {
    // Reduce to [-1/2, 1/2) first so large x keep their fractional part.
    let r = x - x.round();
    let (s, c) = (std::f64::consts::TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num / den)` with the phase reduced modulo `den` in integers.
fn e_rational(num: u128, den: u128) -> Complex64 {
    e_unit((num % den) as f64 / den as f64)
}

/// Number of distinct prime divisors `p` of `m` with `a < p <= b`.
pub fn omega_in_range(m: u64, a: f64, b: f64) -> Result<u64> {
    if !(1.0 <= a && a < b && b <= m as f64) {
        return Err(Error::Precondition(format!(
            "need 1 <= a < b <= m, got a={a}, b={b}, m={m}"
        )));
    }
    let mut rest = m;
    let mut count = 0;
    let in_range = |p: u64| a < p as f64 && p as f64 <= b;
    for p in small_primes(isqrt(m)) {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            count += u64::from(in_range(p));
            while rest.is_multiple_of(p) {
                rest /= p;
            }
        }
    }
    if rest > 1 {
        count += u64::from(in_range(rest));
    }
    Ok(count)
}

/// `floor(n/p + (n-p)/(p(p-1))) - floor(n/p)`, exactly.
pub fn floor_gap(n: u64, p: u64) -> u64 {
    let (n, p) = (n as u128, p as u128);
    let num = n * (p - 1) + (n - p);
    let den = p * (p - 1);
    (num / den - n / p) as u64
}

fn floor_gap_checked(n: u64, p: u64) -> Result<u64> {
    let g = floor_gap(n, p);
    if g > 1 {
        return Err(Error::Invariant(format!(
            "floor gap {g} > 1 at n={n}, p={p}"
        )));
    }
    Ok(g)
}

/// Sum of `floor_gap(n, p)` over primes in `[lo, hi]`, each gap in {0, 1}.
fn floor_gap_sum(n: u64, lo: u64, hi: u64) -> Result<u64> {
    let mut total = 0u64;
    let mut bad = None;
    if lo <= hi {
        for_each_prime(lo, hi.saturating_add(1), |p| {
            match floor_gap_checked(n, p) {
                Ok(g) => total += g,
                Err(e) => {
                    bad.get_or_insert(e);
                }
            }
        });
    }
    bad.map_or(Ok(total), Err)
}

/// Short-interval bound: `sum_{z<p<=x} (floor((x+y)/p) - floor(x/p)) < 2(y+1)/eps`
/// under `x >= 2`, `eps > 0` and `1 <= x^eps <= y <= z < x`.
pub fn lemma2_check(x: f64, y: f64, z: f64, eps: f64) -> Result<BoundReport> {
    let ok = x >= 2.0 && eps > 0.0 && 1.0 <= x.powf(eps) && x.powf(eps) <= y && y <= z && z < x;
    if !ok || !x.is_finite() || x >= 2f64.powi(52) {
        return Err(Error::Precondition(format!(
            "need x >= 2, eps > 0 and 1 <= x^eps <= y <= z < x; got x={x}, y={y}, z={z}, eps={eps}"
        )));
    }
    // floor(u / p) = floor(floor(u) / p) for integer p.
    let carry = u64::from(x.fract() + y.fract() >= 1.0);
    let x_floor = x.floor() as u64;
    let xy_floor = x_floor + y.floor() as u64 + carry;
    let mut lhs = 0u64;
    for_each_prime(z.floor() as u64 + 1, x_floor + 1, |p| {
        lhs += xy_floor / p - x_floor / p;
    });
    let rhs = 2.0 * (y + 1.0) / eps;
    Ok(BoundReport::new(
        BoundName::Lemma2,
        &[("x", x), ("y", y), ("z", z), ("eps", eps)],
        lhs as f64,
        rhs,
    ))
}

/// `sum_{sqrt(n)/alpha < p <= n} floor_gap(n, p)` against `alpha sqrt(n)`,
/// for `n^(-7/16) < alpha < 1`.
pub fn corollary3_check(n: u64, alpha: f64) -> Result<BoundReport> {
    let floor_alpha = (n as f64).powf(-7.0 / 16.0);
    if !(floor_alpha < alpha && alpha < 1.0) {
        return Err(Error::Precondition(format!(
            "need n^(-7/16) = {floor_alpha} < alpha < 1, got alpha = {alpha}"
        )));
    }
    let root = (n as f64).sqrt();
    let lower = root / alpha;
    let lhs = floor_gap_sum(n, lower.floor() as u64 + 1, n)?;
    Ok(BoundReport::new(
        BoundName::Corollary3,
        &[("n", n as f64), ("alpha", alpha), ("lower", lower)],
        lhs as f64,
        alpha * root,
    ))
}

/// A complex sum with a bound on its accumulated floating-point error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSum {
    pub value: Complex64,
    pub error_bound: f64,
}

/// `sum_{M < m <= M1} Lambda(m) e(x/m)`, with `M < M1 <= 2M`.
pub fn lambda_exp_sum(x: f64, m_lo: u64, m_hi: u64) -> Result<ExpSum> {
    if !(m_lo >= 1 && m_lo < m_hi && m_hi <= 2 * m_lo) {
        return Err(Error::Precondition(format!(
            "need 1 <= M < M1 <= 2M, got M={m_lo}, M1={m_hi}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Precondition(format!("x must be finite, got {x}")));
    }
    let exact_x = (x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53)).then_some(x as u128);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut term_error = 0.0;
    for m in m_lo + 1..=m_hi {
        let lambda = von_mangoldt(m);
        if lambda == 0.0 {
            continue;
        }
        let (phase, phase_error) = match exact_x {
            Some(xi) => (e_rational(xi, m as u128), 4.0 * f64::EPSILON),
            None => {
                let q = x / m as f64;
                (
                    e_unit(q),
                    std::f64::consts::TAU * f64::EPSILON * q.abs().max(1.0),
                )
            }
        };
        re.add(lambda * phase.re);
        im.add(lambda * phase.im);
        term_error += lambda * (phase_error + 3.0 * f64::EPSILON);
    }
    Ok(ExpSum {
        value: Complex64::new(re.value(), im.value()),
        error_bound: term_error + re.error_bound() + im.error_bound(),
    })
}

/// `|sum_{M<m<=M1} Lambda(m) e(x/m)| < 17 (x^2 M^19)^(1/24) (log 16M)^(11/4)`
/// for `M <= x^(3/5)/5` and `M < M1 <= 2M`.
pub fn lemma5_check(x: f64, m_lo: u64, m_hi: u64) -> Result<BoundReport> {
    if !(x > 0.0) || (m_lo as f64) > x.powf(0.6) / 5.0 {
        return Err(Error::Precondition(format!(
            "need M <= x^(3/5)/5, got x={x}, M={m_lo}"
        )));
    }
    let sum = lambda_exp_sum(x, m_lo, m_hi)?;
    let m = m_lo as f64;
    let rhs =
        17.0 * ((2.0 * x.ln() + 19.0 * m.ln()) / 24.0).exp() * (16.0 * m).ln().powf(11.0 / 4.0);
    let mut report = BoundReport::new(
        BoundName::Lemma5,
        &[
            ("x", x),
            ("M", m),
            ("M1", m_hi as f64),
            ("sum_error", sum.error_bound),
        ],
        sum.value.norm(),
        rhs,
    );
    // Certify against the rounding error too.
    if report.lhs + sum.error_bound >= rhs {
        report.verdict = Verdict::Fail;
    }
    Ok(report)
}

/// Largest `H` the default choice may produce.
pub const MAX_DEFAULT_H: u64 = 1 << 20;

/// `floor((M^53 n^-26)^(1/50) (e/42 log M)^(-21/25))`, clamped to `[1, MAX_DEFAULT_H]`.
pub fn default_h(n: u64, m: u64) -> u64 {
    let (n, m) = (n as f64, m as f64);
    let log_h = (53.0 * m.ln() - 26.0 * n.ln()) / 50.0
        - 21.0 / 25.0 * (std::f64::consts::E / 42.0 * m.ln()).ln();
    let h = log_h.exp().floor();
    if h.is_nan() || h < 1.0 {
        1
    } else {
        (h as u64).min(MAX_DEFAULT_H)
    }
}

/// Sawtooth sum over `M < p <= 2M` against its Fourier-side majorant
/// `M/H + sum_{h<=H} (1/h) |sum_p e(h f(p))|`, with `f(p) = n/p`, or
/// `n/p + (n-p)/(p(p-1)) = (n-1)/(p-1)` when `use_g`. `H = 0` selects
/// [`default_h`].
pub fn lemma4_report(n: u64, m: u64, h: u64, use_g: bool) -> Result<BoundReport> {
    if m < 2 {
        return Err(Error::Precondition(format!("need M >= 2, got {m}")));
    }
    let h = if h == 0 { default_h(n, m) } else { h };
    let mut fracs = Vec::new(); // (f(p) mod 1) as num/den
    for_each_prime(m + 1, 2 * m + 1, |p| {
        let (num, den) = if use_g && p > 1 {
            (n.saturating_sub(1), p - 1)
        } else {
            (n, p)
        };
        fracs.push(((num % den) as u128, den as u128));
    });
    let lhs: CompensatedSum = fracs
        .iter()
        .map(|&(r, d)| r as f64 / d as f64 - 0.5)
        .collect();
    let mut rhs = CompensatedSum::new();
    rhs.add(m as f64 / h as f64);
    for k in 1..=h {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for &(r, d) in &fracs {
            let z = e_rational(k as u128 * r, d);
            re.add(z.re);
            im.add(z.im);
        }
        rhs.add(Complex64::new(re.value(), im.value()).norm() / k as f64);
    }
    Ok(BoundReport::new(
        BoundName::Lemma4,
        &[
            ("n", n as f64),
            ("M", m as f64),
            ("H", h as f64),
            ("use_g", f64::from(u8::from(use_g))),
            ("primes", fracs.len() as f64),
        ],
        lhs.value().abs(),
        rhs.value(),
    ))
}

/// Bracket for `sum_{p>t} 1/(p(p-1))` from primes up to `cutoff` plus the
/// tail bound `sum_{p>C} 1/(p(p-1)) < 1/floor(C)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeTailBracket {
    pub lower: f64,
    pub upper: f64,
}

pub fn prime_reciprocal_tail(t: f64, cutoff: f64) -> PrimeTailBracket {
    let c = cutoff.floor() as u64;
    let s: CompensatedSum = {
        let mut acc = CompensatedSum::new();
        for_each_prime(t.floor() as u64 + 1, c + 1, |p| {
            let p = p as f64;
            acc.add(1.0 / (p * (p - 1.0)));
        });
        acc
    };
    let slack = s.error_bound() + 4.0 * f64::EPSILON * s.value();
    PrimeTailBracket {
        lower: s.value() - slack,
        upper: s.value() + slack + 1.0 / c as f64,
    }
}

/// `sum_{p>t} 1/(p(p-1))` against `E1(log t)`, discrepancy in units of
/// `delta(t)/t`. Requires `t > e` (for delta) and `cutoff >= 1000 t`.
pub fn lemma6_check(t: f64, cutoff: f64) -> Result<BoundReport> {
    if !(t > std::f64::consts::E) || !(cutoff >= 1e3 * t) || !cutoff.is_finite() {
        return Err(Error::Precondition(format!(
            "need t > e and cutoff >= 1000 t, got t={t}, cutoff={cutoff}"
        )));
    }
    let bracket = prime_reciprocal_tail(t, cutoff);
    let e1 = exp_integral_e1(t.ln())?.value;
    let discrepancy = if e1 < bracket.lower {
        bracket.lower - e1
    } else if e1 > bracket.upper {
        e1 - bracket.upper
    } else {
        0.0
    };
    let scale = delta(t)? / t;
    Ok(BoundReport::new(
        BoundName::Lemma6,
        &[
            ("t", t),
            ("cutoff", cutoff),
            ("sum_lower", bracket.lower),
            ("sum_upper", bracket.upper),
            ("e1", e1),
            ("ratio", discrepancy / scale),
        ],
        discrepancy,
        scale,
    ))
}

/// The split of the upper count at `sqrt(n)/delta(sqrt(n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SDecomposition {
    pub n: u64,
    pub cut: f64,
    #[serde(rename = "S1")]
    pub s1: u64,
    #[serde(rename = "S2")]
    pub s2: u64,
    #[serde(rename = "S11")]
    pub s11: f64,
    #[serde(rename = "S12")]
    pub s12: f64,
}

impl SDecomposition {
    pub fn omega_plus(&self) -> u64 {
        self.s1 + self.s2
    }

    /// `|S1 - (S11 - S12)|`.
    pub fn residual(&self) -> f64 {
        (self.s1 as f64 - (self.s11 - self.s12)).abs()
    }
}

/// `S1`, `S2` count the floor gaps over `(sqrt n, cut]` and `(cut, n]`;
/// `S11 = sum (n-p)/(p(p-1))` and `S12 = sum (psi(n/p + g(p)) - psi(n/p))`
/// over the first range.
pub fn s_decomposition(n: u64) -> Result<SDecomposition> {
    if n < 100 {
        return Err(Error::Precondition(format!(
            "decomposition needs n >= 100, got {n}"
        )));
    }
    let root = (n as f64).sqrt();
    let cut = root / delta(root)?;
    let cut_floor = (cut.floor() as u64).min(n);
    let start = isqrt(n) + 1;

    let mut s1 = 0u64;
    let mut s11 = CompensatedSum::new();
    let mut s12 = CompensatedSum::new();
    let mut bad = None;
    for_each_prime(start, cut_floor + 1, |p| {
        match floor_gap_checked(n, p) {
            Ok(g) => s1 += g,
            Err(e) => {
                bad.get_or_insert(e);
            }
        }
        let (nf, pf) = (n as f64, p as f64);
        s11.add((nf - pf) / (pf * (pf - 1.0)));
        // n/p + g(p) = (n-1)/(p-1); both fractional parts are exact rationals.
        let with_g = ((n - 1) % (p - 1)) as f64 / (p - 1) as f64;
        let without = (n % p) as f64 / pf;
        s12.add(with_g - without);
    });
    if let Some(e) = bad {
        return Err(e);
    }
    let s2 = floor_gap_sum(n, cut_floor + 1, n)?;
    Ok(SDecomposition {
        n,
        cut,
        s1,
        s2,
        s11: s11.value(),
        s12: s12.value(),
    })
}

/// `|S12|` against `n^(49/100) (log n)^(67/25)`.
pub fn lemma7_report(n: u64) -> Result<BoundReport> {
    let d = s_decomposition(n)?;
    Ok(lemma7_from(&d))
}

pub fn lemma7_from(d: &SDecomposition) -> BoundReport {
    let nf = d.n as f64;
    BoundReport::new(
        BoundName::Lemma7,
        &[("n", nf)],
        d.s12.abs(),
        nf.powf(0.49) * nf.ln().powf(67.0 / 25.0),
    )
}

/// `S2` against `sqrt(n) delta(sqrt(n))`.
pub fn s2_report(d: &SDecomposition) -> Result<BoundReport> {
    let root = (d.n as f64).sqrt();
    let alpha = delta(root)?;
    Ok(BoundReport::new(
        BoundName::Corollary3,
        &[("n", d.n as f64), ("alpha", alpha), ("lower", d.cut)],
        d.s2 as f64,
        alpha * root,
    ))
}

/// `|omega_plus - n E1(log sqrt n)|` against `sqrt(n) delta(sqrt(n))`.
pub fn theorem1_report(n: u64, omega_plus: u64) -> Result<BoundReport> {
    let main = crate::special::main_term(n)?;
    let root = (n as f64).sqrt();
    Ok(BoundReport::new(
        BoundName::Theorem1,
        &[
            ("n", n as f64),
            ("omega_plus", omega_plus as f64),
            ("main_term", main),
        ],
        (omega_plus as f64 - main).abs(),
        root * delta(root)?,
    ))
}
