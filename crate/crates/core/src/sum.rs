//! Compensated summation.

/// Neumaier's variant of Kahan summation with a running error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
    terms: u64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
        self.terms += 1;
    }

    /// Merge another partial sum, as if its terms had been added here.
    pub fn merge(&mut self, other: &CompensatedSum) {
        let (abs, terms) = (self.abs + other.abs, self.terms + other.terms);
        self.add(other.sum);
        self.comp += other.comp;
        self.abs = abs;
        self.terms = terms;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Bound on |value - exact sum| for exactly represented inputs.
    pub fn error_bound(&self) -> f64 {
        let eps = f64::EPSILON / 2.0;
        2.0 * eps * self.value().abs() + 4.0 * (self.terms as f64) * eps * eps * self.abs
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        iter.into_iter().for_each(|x| self.add(x));
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
        let naive: f64 = [1.0, 1e100, 1.0, -1e100].iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn harmonic_tail() {
        let s: CompensatedSum = (1..=1_000_000u64).map(|k| 1.0 / k as f64).collect();
        // H_{10^6} = 14.392726722865723631...
        assert!((s.value() - 14.392_726_722_865_724).abs() <= 2e-15);
        assert!(s.error_bound() < 1e-14);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (1..2000)
            .map(|k| ((k * 7919) % 1000) as f64 * 1e-3 - 0.5)
            .collect();
        let whole: CompensatedSum = xs.iter().copied().collect();
        let mut left: CompensatedSum = xs[..900].iter().copied().collect();
        let right: CompensatedSum = xs[900..].iter().copied().collect();
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() <= 1e-15);
        assert_eq!(left.terms(), whole.terms());
    }
}
