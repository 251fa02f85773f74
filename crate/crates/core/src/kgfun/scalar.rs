use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use super::KgError;
use crate::interval::{Interval, IntervalError};

/// Number types the function library is generic over: plain `f64` for point
/// evaluation and [`Interval`] for rigorous enclosures.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn try_div(self, rhs: Self) -> Result<Self, KgError>;
    /// Square root. Arguments that are negative throughout are errors.
    fn sqrt(self) -> Result<Self, KgError>;
    fn sqr(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, p: f64) -> Result<Self, KgError>;
    fn sin(self) -> Result<Self, KgError>;
    fn cos(self) -> Result<Self, KgError>;
    /// Restrict to `[lo, hi]` when the true value is known to lie there.
    fn clamp_to(self, lo: f64, hi: f64) -> Self;
    fn lower(self) -> f64;
    fn upper(self) -> f64;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }

    fn try_div(self, rhs: Self) -> Result<Self, KgError> {
        if rhs == 0.0 {
            return Err(KgError::Interval(IntervalError::DivisionByZeroInterval(
                Interval::zero(),
            )));
        }
        Ok(self / rhs)
    }

    fn sqrt(self) -> Result<Self, KgError> {
        if self < 0.0 {
            return Err(KgError::Interval(IntervalError::NegativeDomain(
                Interval::point(self),
            )));
        }
        Ok(f64::sqrt(self))
    }

    fn sqr(self) -> Self {
        self * self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn powf(self, p: f64) -> Result<Self, KgError> {
        if self < 0.0 {
            return Err(KgError::Interval(IntervalError::NegativeDomain(
                Interval::point(self),
            )));
        }
        Ok(f64::powf(self, p))
    }

    fn sin(self) -> Result<Self, KgError> {
        Ok(f64::sin(self))
    }

    fn cos(self) -> Result<Self, KgError> {
        Ok(f64::cos(self))
    }

    fn clamp_to(self, lo: f64, hi: f64) -> Self {
        self.clamp(lo, hi)
    }

    fn lower(self) -> f64 {
        self
    }

    fn upper(self) -> f64 {
        self
    }
}

impl Scalar for Interval {
    fn cst(v: f64) -> Self {
        Interval::point(v)
    }

    fn try_div(self, rhs: Self) -> Result<Self, KgError> {
        Ok(self.div(&rhs)?)
    }

    fn sqrt(self) -> Result<Self, KgError> {
        Ok(Interval::sqrt(&self)?)
    }

    fn sqr(self) -> Self {
        Interval::sqr(&self)
    }

    fn abs(self) -> Self {
        Interval::abs(&self)
    }

    fn powf(self, p: f64) -> Result<Self, KgError> {
        Ok(Interval::powf(&self, p)?)
    }

    fn sin(self) -> Result<Self, KgError> {
        Ok(Interval::sin(&self)?)
    }

    fn cos(self) -> Result<Self, KgError> {
        Ok(Interval::cos(&self)?)
    }

    fn clamp_to(self, lo: f64, hi: f64) -> Self {
        Interval::clamp_to(&self, lo, hi)
    }

    fn lower(self) -> f64 {
        self.lo()
    }

    fn upper(self) -> f64 {
        self.hi()
    }
}
