use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::IntervalError;

/// Exact rational exponent, kept in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Rational(Rational64);

impl Rational {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, IntervalError> {
        if denominator == 0 {
            return Err(IntervalError::ZeroDenominator);
        }
        Ok(Self(Rational64::new(numerator, denominator)))
    }

    pub fn integer(n: i64) -> Self {
        Self(Rational64::from_integer(n))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `Some(k)` when the denominator is `2^k`.
    pub fn dyadic_order(&self) -> Option<u32> {
        let d = self.denominator() as u64;
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    /// Exact dyadic rational equal to `v`, if `v * 2^k` is an integer for some
    /// `k <= max_order`.
    pub fn from_dyadic_f64(v: f64, max_order: u32) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        for k in 0..=max_order {
            let scaled = v * (1u64 << k) as f64;
            if scaled.fract() == 0.0 && scaled.abs() < (1u64 << 52) as f64 {
                return Some(Self(Rational64::new(scaled as i64, 1i64 << k)));
            }
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }

    pub fn is_positive(&self) -> bool {
        self.numerator() > 0
    }

    pub fn is_zero(&self) -> bool {
        self.numerator() == 0
    }
}

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl TryFrom<(i64, i64)> for Rational {
    type Error = IntervalError;
    fn try_from((n, d): (i64, i64)) -> Result<Self, Self::Error> {
        Rational::new(n, d)
    }
}

impl From<Rational> for (i64, i64) {
    fn from(r: Rational) -> Self {
        (r.numerator(), r.denominator())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalises_sign() {
        let r = Rational::new(6, -8).unwrap();
        assert_eq!((r.numerator(), r.denominator()), (-3, 4));
        assert_eq!(r.dyadic_order(), Some(2));
        assert_eq!(Rational::new(1, 3).unwrap().dyadic_order(), None);
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn recovers_dyadic_exponents() {
        assert_eq!(
            Rational::from_dyadic_f64(0.75, 8),
            Some(Rational::new(3, 4).unwrap())
        );
        assert_eq!(
            Rational::from_dyadic_f64(1.25, 8),
            Some(Rational::new(5, 4).unwrap())
        );
        assert_eq!(
            Rational::from_dyadic_f64(2.0, 8),
            Some(Rational::integer(2))
        );
        assert_eq!(Rational::from_dyadic_f64(0.1, 8), None);
    }
}
