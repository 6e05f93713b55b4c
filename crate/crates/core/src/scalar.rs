//! Numeric backends for frequencies and scores.

use std::fmt::Debug;
use std::ops::Add;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// A number type able to hold a count ratio `num / den`.
///
/// Floating types give the usual approximations; `Ratio<u64>` keeps
/// frequencies exact so sums and comparisons carry no rounding.
pub trait Scalar: Clone + PartialOrd + Zero + Add<Output = Self> + Debug + Send + Sync {
    /// `num / den`; callers guarantee `den > 0`.
    fn ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn ratio(num: u64, den: u64) -> f64 {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn ratio(num: u64, den: u64) -> f32 {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Ratio<u64> {
    fn ratio(num: u64, den: u64) -> Ratio<u64> {
        Ratio::new(num, den)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_agrees_across_backends() {
        assert_eq!(<f64 as Scalar>::ratio(3, 12), 0.25);
        assert_eq!(<f32 as Scalar>::ratio(3, 12), 0.25);
        assert_eq!(<Ratio<u64> as Scalar>::ratio(3, 12), Ratio::new(1, 4));
        assert_eq!(Scalar::to_f64(&Ratio::new(1u64, 4)), 0.25);
    }

    #[test]
    fn exact_sum_of_thirds_is_one() {
        let third = <Ratio<u64> as Scalar>::ratio(1, 3);
        assert_eq!(third + third + third, Ratio::new(1, 1));
    }
}
