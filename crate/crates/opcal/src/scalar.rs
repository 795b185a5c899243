//! Scalar trait: the field the whole calculus is generic over.

use num_traits::{One, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// An exact field of characteristic zero, as far as the calculus needs one.
///
/// `num_rational::BigRational` is the intended instance; `f64` also
/// satisfies the bounds and is occasionally convenient for quick numeric
/// experiments, but nothing in the test suites relies on it.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_integer(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_integer(num) / Self::from_integer(den)
    }

    /// 1/n! — division by factorials is always exact in characteristic 0.
    fn inv_factorial(n: usize) -> Self {
        let mut f = Self::one();
        for k in 1..=n {
            f = f * Self::from_integer(k as i64);
        }
        Self::one() / f
    }
}

impl Scalar for num_rational::BigRational {
    fn from_integer(n: i64) -> Self {
        num_rational::BigRational::from_integer(n.into())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num_rational::BigRational::new(num.into(), den.into())
    }
}

impl Scalar for f64 {
    fn from_integer(n: i64) -> Self {
        n as f64
    }
}

/// Binomial coefficient as a scalar.
pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let mut acc = S::one();
    for j in 0..k {
        acc = acc * S::from_integer((n - j) as i64) / S::from_integer((j + 1) as i64);
    }
    acc
}
