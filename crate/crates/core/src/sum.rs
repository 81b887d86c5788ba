//! Compensated summation.
//!
//! Spectral sums here run to 10^5–10^6 terms of mixed magnitude, so every
//! accumulation goes through a Kahan–Babuška–Neumaier accumulator.

use std::ops::AddAssign;

use crate::Scalar;

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> NeumaierSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    /// Merge another accumulator; used for fixed-order chunk reductions.
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Scalar> AddAssign<T> for NeumaierSum<T> {
    #[inline]
    fn add_assign(&mut self, rhs: T) {
        self.add(rhs);
    }
}

impl<T: Scalar> FromIterator<T> for NeumaierSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<NeumaierSum<T>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn harmonic_partial_sum_matches_reverse_order() {
        let n = 200_000;
        let fwd = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        let rev = compensated_sum((1..=n).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 1e-15 * fwd);
    }

    proptest! {
        #[test]
        fn merge_equals_single_pass(xs in proptest::collection::vec(-1e6f64..1e6, 1..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let whole = compensated_sum(xs.iter().copied());
            let mut a: NeumaierSum<f64> = xs[..split].iter().copied().collect();
            let b: NeumaierSum<f64> = xs[split..].iter().copied().collect();
            a.merge(&b);
            prop_assert!((a.value() - whole).abs() <= 1e-9 * (1.0 + whole.abs()));
        }
    }
}
