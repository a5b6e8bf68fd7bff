//! Integer, range and grid syntax.
//!
//! Integers accept `12345`, `1_000`, `1e6`, `3.5e4` and `10^9`; the value must
//! be exact.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub fn parse_int(s: &str) -> Result<u64, CliError> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    let bad = || CliError::Usage(format!("not a non-negative integer: `{s}`"));
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(bad);
    }
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    // Exact below 2^53 only.
    if v >= 0.0 && v.fract() == 0.0 && v < 9_007_199_254_740_992.0 {
        Ok(v as u64)
    } else {
        Err(bad())
    }
}

/// Inclusive `A..B`, or a single value.
pub fn parse_range(s: &str) -> Result<(u64, u64), CliError> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse_int(a)?, parse_int(b.trim_start_matches('='))?),
        None => {
            let v = parse_int(s)?;
            (v, v)
        }
    };
    if a < 1 || a > b {
        return Err(CliError::Usage(format!(
            "range needs 1 <= A <= B, got `{s}`"
        )));
    }
    Ok((a, b))
}

/// `A:B:xR` gives `A, A R, A R^2, ...` up to `B`; a single value is a one-row grid.
pub fn parse_grid(s: &str) -> Result<Vec<u64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let (a, b, ratio) = match parts.as_slice() {
        [v] => {
            let v = parse_int(v)?;
            (v, v, 2.0)
        }
        [a, b, r] => {
            let r = r.strip_prefix('x').unwrap_or(r);
            let r: f64 = r
                .parse()
                .map_err(|_| CliError::Usage(format!("bad grid ratio in `{s}`")))?;
            (parse_int(a)?, parse_int(b)?, r)
        }
        _ => return Err(CliError::Usage(format!("grid must be `A:B:xR`, got `{s}`"))),
    };
    if !(ratio > 1.0) || a < 1 || a > b {
        return Err(CliError::Usage(format!(
            "grid needs 1 <= A <= B and ratio > 1, got `{s}`"
        )));
    }
    let mut out = Vec::new();
    if ratio.fract() == 0.0 && ratio < 1e18 {
        let r = ratio as u64;
        let mut v = a;
        while v <= b {
            out.push(v);
            match v.checked_mul(r) {
                Some(next) => v = next,
                None => break,
            }
        }
    } else {
        let mut k = 0;
        loop {
            let v = (a as f64 * ratio.powi(k)).round();
            if v > b as f64 {
                break;
            }
            let v = v as u64;
            if out.last() != Some(&v) {
                out.push(v);
            }
            k += 1;
        }
    }
    Ok(out)
}

/// `k` distinct values drawn uniformly from `[a, b]`, ascending.
pub fn sample_distinct(a: u64, b: u64, k: usize, seed: u64) -> Result<Vec<u64>, CliError> {
    if (b - a) as u128 + 1 < k as u128 {
        return Err(CliError::Usage(format!(
            "cannot draw {k} distinct values from [{a}, {b}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    while set.len() < k {
        set.insert(rng.gen_range(a..=b));
    }
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers() {
        assert_eq!(parse_int("10^4").unwrap(), 10_000);
        assert_eq!(parse_int("1e9").unwrap(), 1_000_000_000);
        assert_eq!(parse_int("1_000").unwrap(), 1000);
        assert!(parse_int("1.5").is_err());
        assert!(parse_int("-3").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..10^4").unwrap(), (2, 10_000));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("0..5").is_err());
        assert!(parse_range("9..5").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(
            parse_grid("1e4:1e6:x10").unwrap(),
            vec![10_000, 100_000, 1_000_000]
        );
        assert_eq!(parse_grid("1e4").unwrap(), vec![10_000]);
        assert_eq!(parse_grid("100:300:x1.5").unwrap(), vec![100, 150, 225]);
        assert!(parse_grid("1e4:1e6:x1").is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_distinct(100, 1_000_000, 50, 3).unwrap();
        assert_eq!(a, sample_distinct(100, 1_000_000, 50, 3).unwrap());
        assert_eq!(a.len(), 50);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(sample_distinct(1, 3, 4, 0).is_err());
    }
}
