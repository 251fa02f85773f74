//! Closed real intervals with outward-rounded endpoint arithmetic.
//!
//! Every operation returns an enclosure of the exact range of the real
//! operation over its arguments. Endpoints are `f64`; rounding direction is
//! enforced per operation (see [`round`]), so no global FPU state is touched
//! and values can be shared freely between threads.

mod elementary;
mod rational;
pub mod round;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval endpoints [{lo}, {hi}]")]
    InvalidEndpoints { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: {0}")]
    DivisionByZeroInterval(Interval),
    #[error("argument {0} leaves the domain of the function")]
    NegativeDomain(Interval),
    #[error("argument {0} is outside the supported range [-2pi, 2pi]")]
    DomainTooWide(Interval),
    #[error("cannot bisect the degenerate interval {0}")]
    ZeroWidth(Interval),
    #[error("rational exponent with zero denominator")]
    ZeroDenominator,
}

/// What `sqrt` does with a lower endpoint below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainPolicy {
    /// Intersect the argument with `[0, inf)` first.
    #[default]
    Clamp,
    /// Report [`IntervalError::NegativeDomain`].
    Strict,
}

/// A closed interval `[lo, hi]` with `lo <= hi` and no NaN endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The degenerate interval `[v, v]`. Panics on NaN.
    pub fn point(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN is not a valid interval endpoint");
        Self { lo: v, hi: v }
    }

    pub fn entire() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// Smallest interval containing both `a` and `b`.
    pub fn spanning(a: f64, b: f64) -> Self {
        Self::new(a.min(b), a.max(b)).expect("NaN endpoint")
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    pub fn one() -> Self {
        Self::point(1.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Width rounded upward.
    pub fn width(&self) -> f64 {
        round::sub_up(self.hi, self.lo)
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Split at the midpoint. The halves share the midpoint.
    pub fn bisect(&self) -> Result<(Interval, Interval), IntervalError> {
        if self.lo == self.hi || !self.is_finite() {
            return Err(IntervalError::ZeroWidth(*self));
        }
        let m = self.midpoint();
        Ok((
            Interval { lo: self.lo, hi: m },
            Interval { lo: m, hi: self.hi },
        ))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Intersection with `[lo, hi]`, used when the caller knows the true
    /// values lie in that range. An empty intersection collapses to the
    /// nearest bound.
    pub fn clamp_to(&self, lo: f64, hi: f64) -> Interval {
        let a = self.lo.max(lo).min(hi);
        let b = self.hi.min(hi).max(lo);
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval::point(if self.hi < lo { lo } else { hi })
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval {
                lo: 0.0,
                hi: (-self.lo).max(self.hi),
            }
        }
    }

    /// `x^2`, always with a nonnegative lower bound.
    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: round::mul_down(a.lo, a.lo),
            hi: round::mul_up(a.hi, a.hi),
        }
    }

    pub fn div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval(*rhs));
        }
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| round::div_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| round::div_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::one().div(self)
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        self.sqrt_with(DomainPolicy::Clamp)
    }

    pub fn sqrt_with(&self, policy: DomainPolicy) -> Result<Interval, IntervalError> {
        if self.hi < 0.0 || (self.lo < 0.0 && policy == DomainPolicy::Strict) {
            return Err(IntervalError::NegativeDomain(*self));
        }
        let lo = self.lo.max(0.0);
        Ok(Interval {
            lo: round::sqrt_down(lo),
            hi: round::sqrt_up(self.hi),
        })
    }

    /// Integer power. Negative exponents require `0` outside the interval.
    pub fn pow_int(&self, n: i64) -> Result<Interval, IntervalError> {
        if n == 0 {
            return Ok(Interval::one());
        }
        if n < 0 {
            return self.pow_int(-n)?.recip();
        }
        let n = n as u64;
        if n.is_multiple_of(2) {
            let a = self.abs();
            return Ok(Interval {
                lo: pow_nonneg_down(a.lo, n),
                hi: pow_nonneg_up(a.hi, n),
            });
        }
        let lo = if self.lo >= 0.0 {
            pow_nonneg_down(self.lo, n)
        } else {
            -pow_nonneg_up(-self.lo, n)
        };
        let hi = if self.hi >= 0.0 {
            pow_nonneg_up(self.hi, n)
        } else {
            -pow_nonneg_down(-self.hi, n)
        };
        Ok(Interval { lo, hi })
    }

    /// `x^p` for an exact rational exponent.
    ///
    /// Dyadic exponents `m / 2^k` are evaluated as `k` square roots of `x^m`,
    /// using only correctly rounded operations; all other exponents go
    /// through an `exp(p log x)` enclosure (see [`Interval::pow_explog`]).
    pub fn pow_rational(&self, p: Rational) -> Result<Interval, IntervalError> {
        if p.is_integer() {
            return self.pow_int(p.numerator());
        }
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeDomain(*self));
        }
        match p.dyadic_order() {
            Some(k) if k <= 16 && p.numerator().abs() <= 64 => self.pow_dyadic(p),
            _ => {
                let num = p.numerator() as f64;
                let den = p.denominator() as f64;
                let exponent = Interval {
                    lo: round::div_down(num, den),
                    hi: round::div_up(num, den),
                };
                self.pow_explog(exponent)
            }
        }
    }

    /// Repeated-square-root evaluation for exponents with a power-of-two
    /// denominator. Requires a nonnegative argument.
    pub fn pow_dyadic(&self, p: Rational) -> Result<Interval, IntervalError> {
        let k = p.dyadic_order().ok_or(IntervalError::ZeroDenominator)?;
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeDomain(*self));
        }
        let mut acc = self.pow_int(p.numerator().abs())?;
        for _ in 0..k {
            acc = acc.sqrt_with(DomainPolicy::Strict)?;
        }
        if p.numerator() < 0 {
            acc = acc.recip()?;
        }
        Ok(acc)
    }

    /// `x^p` for a real exponent, dispatching to the exact dyadic path when
    /// `p` happens to be a short dyadic rational.
    pub fn powf(&self, p: f64) -> Result<Interval, IntervalError> {
        match Rational::from_dyadic_f64(p, 16) {
            Some(r) => self.pow_rational(r),
            None => {
                if self.lo < 0.0 {
                    return Err(IntervalError::NegativeDomain(*self));
                }
                self.pow_explog(Interval::point(p))
            }
        }
    }

    /// Enclosure of `{ x^p : x in self, p in exponent }` via `exp(p log x)`,
    /// widened by one extra ulp on each side. The exponent interval must not
    /// contain zero and the base must be nonnegative.
    pub fn pow_explog(&self, exponent: Interval) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeDomain(*self));
        }
        if exponent.contains_zero() {
            if exponent.is_point() {
                return Ok(Interval::one());
            }
            return Err(IntervalError::NegativeDomain(exponent));
        }
        let positive = exponent.lo > 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in &[self.lo, self.hi] {
            for &p in &[exponent.lo, exponent.hi] {
                let corner = pow_corner(x, p, positive)?;
                lo = lo.min(corner.lo);
                hi = hi.max(corner.hi);
            }
        }
        Ok(Interval { lo, hi })
    }
}

/// Enclosure of the single value `x^p`, one ulp wider than the composed
/// `exp(p log x)` enclosure.
fn pow_corner(x: f64, p: f64, positive: bool) -> Result<Interval, IntervalError> {
    if x == 0.0 {
        return if positive {
            Ok(Interval::zero())
        } else {
            Err(IntervalError::DivisionByZeroInterval(Interval::zero()))
        };
    }
    if x == 1.0 {
        return Ok(Interval::one());
    }
    if x == f64::INFINITY {
        return Ok(Interval::point(if positive { f64::INFINITY } else { 0.0 }));
    }
    let log = Interval::point(x).ln()?;
    let v = (log * Interval::point(p)).exp()?;
    Ok(Interval {
        lo: v.lo.next_down().max(0.0),
        hi: if v.hi.is_finite() {
            v.hi.next_up()
        } else {
            v.hi
        },
    })
}

fn pow_nonneg_down(x: f64, n: u64) -> f64 {
    (0..n).fold(1.0, |acc, _| round::mul_down(acc, x))
}

fn pow_nonneg_up(x: f64, n: u64) -> f64 {
    (0..n).fold(1.0, |acc, _| round::mul_up(acc, x))
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::add_down(self.lo, rhs.lo),
            hi: round::add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::sub_down(self.lo, rhs.hi),
            hi: round::sub_up(self.hi, rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| round::mul_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| round::mul_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}
