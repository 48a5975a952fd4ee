//! Scalar abstractions shared by the numeric modules.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{Num, One, Signed, Zero};

/// Arbitrary-precision rational, the default exact scalar.
pub type Rational = num_rational::BigRational;

/// An ordered field usable for exact or approximate computations.
pub trait ExactScalar: Num + Signed + Clone + PartialOrd + Debug {
    /// The image of an integer.
    fn from_int(n: i64) -> Self {
        let mut acc = Self::zero();
        let mut step = Self::one();
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc + step.clone();
            }
            step = step.clone() + step;
            m >>= 1;
        }
        if n < 0 {
            -acc
        } else {
            acc
        }
    }

    /// `self^e` for a nonnegative exponent.
    fn powi(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc * self.clone())
    }
}

impl ExactScalar for Rational {
    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

impl ExactScalar for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl ExactScalar for f32 {
    fn from_int(n: i64) -> Self {
        n as f32
    }
}

/// Renders a rational as `p/q` (or `p` when integral).
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or `p`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_int_generic_matches_specialized() {
        for n in [-9i64, -1, 0, 1, 2, 7, 1000] {
            assert_eq!(<f64 as ExactScalar>::from_int(n), n as f64);
            assert_eq!(Rational::from_int(n), Rational::from_integer(n.into()));
        }
        assert_eq!(Rational::from_int(2).powi(10), Rational::from_int(1024));
    }

    #[test]
    fn rational_strings() {
        let r = Rational::new(6.into(), 16.into());
        assert_eq!(rational_string(&r), "3/8");
        assert_eq!(parse_rational("3/8"), Some(r));
        assert_eq!(parse_rational("5"), Some(Rational::from_int(5)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
