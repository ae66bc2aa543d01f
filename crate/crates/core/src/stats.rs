use serde::{Deserialize, Serialize};

/// Running min/max/mean/population-std over a stream of values.
///
/// Merge is associative and commutative up to floating-point rounding of the
/// sums; integer-valued inputs below 2^53 aggregate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    sum: f64,
    sum_sq: f64,
}

impl Default for Summary {
    fn default() -> Self {
        Summary {
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Summary) {
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Clamped to `[min, max]`; summation rounding can otherwise push the
    /// mean of identical values past them.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| (self.sum / self.count as f64).clamp(self.min, self.max))
    }

    pub fn std_dev(&self) -> Option<f64> {
        let mean = self.mean()?;
        let var = self.sum_sq / self.count as f64 - mean * mean;
        Some(var.max(0.0).sqrt())
    }

    pub fn min_value(&self) -> Option<f64> {
        (self.count > 0).then_some(self.min)
    }

    pub fn max_value(&self) -> Option<f64> {
        (self.count > 0).then_some(self.max)
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        let s: Summary = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0].into_iter().collect();
        assert_eq!(s.mean(), Some(5.0));
        assert_eq!(s.std_dev(), Some(2.0));
        assert_eq!(s.min_value(), Some(2.0));
        assert_eq!(s.max_value(), Some(9.0));
    }

    #[test]
    fn empty_has_no_moments() {
        let s = Summary::default();
        assert!(s.is_empty());
        assert_eq!(s.mean(), None);
        assert_eq!(s.std_dev(), None);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs = [1.0, 3.0, 8.0, 2.0, 2.0];
        let whole: Summary = xs.into_iter().collect();
        let mut a: Summary = xs[..2].iter().copied().collect();
        let b: Summary = xs[2..].iter().copied().collect();
        a.merge(&b);
        assert_eq!(a, whole);
    }
}
