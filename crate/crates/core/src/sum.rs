//! Compensated (Kahan–Babuška–Neumaier) summation.

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
    count: u64,
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
        self.count += 1;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of absolute values of the addends.
    pub fn abs_total(&self) -> f64 {
        self.abs
    }

    /// A bound on the accumulated rounding error of [`value`](Self::value).
    pub fn rounding_bound(&self) -> f64 {
        2.0 * f64::EPSILON * self.value().abs()
            + (self.count as f64) * f64::EPSILON * f64::EPSILON * self.abs
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
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
    fn many_small_terms() {
        let s: CompensatedSum = std::iter::repeat_n(0.1, 1_000_000).collect();
        assert!((s.value() - 100_000.0).abs() < 1e-9);
    }
}
