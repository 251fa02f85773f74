use std::f64::consts::{FRAC_PI_2, TAU};

use super::round::{self, LIBM_ULPS};
use super::{Interval, IntervalError};

/// Enclosure of `k * pi/2`.
fn half_pi_multiple(k: i32) -> Interval {
    let hp = Interval {
        lo: FRAC_PI_2,
        hi: FRAC_PI_2.next_up(),
    };
    hp * Interval::point(k as f64)
}

fn may_contain(x: &Interval, point: &Interval) -> bool {
    x.lo <= point.hi && point.lo <= x.hi
}

fn sin_down(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    round::widen_down(x.sin(), LIBM_ULPS).max(-1.0)
}

fn sin_up(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    round::widen_up(x.sin(), LIBM_ULPS).min(1.0)
}

fn cos_down(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    round::widen_down(x.cos(), LIBM_ULPS).max(-1.0)
}

fn cos_up(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    round::widen_up(x.cos(), LIBM_ULPS).min(1.0)
}

impl Interval {
    fn check_trig_range(&self) -> Result<(), IntervalError> {
        let limit = TAU.next_up();
        if self.lo < -limit || self.hi > limit {
            return Err(IntervalError::DomainTooWide(*self));
        }
        Ok(())
    }

    /// Sine on a subinterval of `[-2pi, 2pi]`.
    pub fn sin(&self) -> Result<Interval, IntervalError> {
        self.check_trig_range()?;
        let mut lo = sin_down(self.lo).min(sin_down(self.hi));
        let mut hi = sin_up(self.lo).max(sin_up(self.hi));
        // maxima at pi/2 and -3pi/2, minima at -pi/2 and 3pi/2
        if [1, -3]
            .iter()
            .any(|&k| may_contain(self, &half_pi_multiple(k)))
        {
            hi = 1.0;
        }
        if [-1, 3]
            .iter()
            .any(|&k| may_contain(self, &half_pi_multiple(k)))
        {
            lo = -1.0;
        }
        Ok(Interval { lo, hi })
    }

    /// Cosine on a subinterval of `[-2pi, 2pi]`.
    pub fn cos(&self) -> Result<Interval, IntervalError> {
        self.check_trig_range()?;
        let mut lo = cos_down(self.lo).min(cos_down(self.hi));
        let mut hi = cos_up(self.lo).max(cos_up(self.hi));
        if self.contains_zero()
            || [4, -4]
                .iter()
                .any(|&k| may_contain(self, &half_pi_multiple(k)))
        {
            hi = 1.0;
        }
        if [2, -2]
            .iter()
            .any(|&k| may_contain(self, &half_pi_multiple(k)))
        {
            lo = -1.0;
        }
        Ok(Interval { lo, hi })
    }

    pub fn exp(&self) -> Result<Interval, IntervalError> {
        let lo = if self.lo == 0.0 {
            1.0
        } else if self.lo == f64::NEG_INFINITY {
            0.0
        } else {
            round::widen_down(self.lo.exp(), LIBM_ULPS).max(0.0)
        };
        let hi = if self.hi == 0.0 {
            1.0
        } else if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            let e = self.hi.exp();
            if e.is_finite() {
                round::widen_up(e, LIBM_ULPS)
            } else {
                f64::INFINITY
            }
        };
        Ok(Interval { lo, hi })
    }

    /// Natural logarithm; the argument must be nonnegative. A zero lower
    /// endpoint gives `-inf`.
    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeDomain(*self));
        }
        let lo = if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else if self.lo == 1.0 {
            0.0
        } else if self.lo == f64::INFINITY {
            f64::MAX
        } else {
            round::widen_down(self.lo.ln(), LIBM_ULPS)
        };
        let hi = if self.hi == 0.0 {
            f64::MIN
        } else if self.hi == 1.0 {
            0.0
        } else if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            round::widen_up(self.hi.ln(), LIBM_ULPS)
        };
        Ok(Interval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn exact_special_values() {
        assert_eq!(Interval::zero().sin().unwrap(), Interval::zero());
        assert_eq!(Interval::zero().cos().unwrap(), Interval::one());
        assert_eq!(Interval::zero().exp().unwrap(), Interval::one());
        assert_eq!(Interval::one().ln().unwrap(), Interval::zero());
    }

    #[test]
    fn critical_points_are_captured() {
        let s = iv(1.0, 2.0).sin().unwrap();
        assert_eq!(s.hi(), 1.0);
        let s = iv(-2.0, -1.0).sin().unwrap();
        assert_eq!(s.lo(), -1.0);
        let c = iv(3.0, 3.5).cos().unwrap();
        assert_eq!(c.lo(), -1.0);
        let c = iv(-0.5, 0.25).cos().unwrap();
        assert_eq!(c.hi(), 1.0);
        // the f64 closest to pi/2 lies below it, but the peak still counts
        let s = Interval::point(FRAC_PI_2).sin().unwrap();
        assert_eq!(s.hi(), 1.0);
    }

    #[test]
    fn monotone_pieces_are_tight() {
        let s = iv(0.1, 0.2).sin().unwrap();
        assert!(s.contains(0.1f64.sin()) && s.contains(0.2f64.sin()));
        assert!(s.lo() > 0.09 && s.hi() < 0.2);
    }

    #[test]
    fn rejects_wide_arguments() {
        assert!(matches!(
            iv(0.0, 7.0).sin(),
            Err(IntervalError::DomainTooWide(_))
        ));
        assert!(iv(-2.0 * PI, 2.0 * PI).cos().is_ok());
    }

    #[test]
    fn log_domain() {
        assert!(iv(-1.0, 1.0).ln().is_err());
        assert_eq!(iv(0.0, 1.0).ln().unwrap().lo(), f64::NEG_INFINITY);
    }
}
