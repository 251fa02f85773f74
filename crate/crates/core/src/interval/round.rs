//! Directed rounding for the basic IEEE operations.
//!
//! Every function returns the round-to-nearest result nudged one step outward
//! only when the operation was inexact. Exactness is detected with error-free
//! transformations (TwoSum for addition, a fused multiply-add residual for
//! multiplication, division and square root), so exact results such as
//! `1 + 3` or `sqrt(4)` come back unchanged.

/// Products and quotients below this magnitude may have lost bits to gradual
/// underflow, where the fma residual is no longer exact.
const TINY: f64 = 1e-290;

#[inline]
fn down_from(v: f64, err_sign: f64) -> f64 {
    if err_sign < 0.0 {
        v.next_down()
    } else {
        v
    }
}

#[inline]
fn up_from(v: f64, err_sign: f64) -> f64 {
    if err_sign > 0.0 {
        v.next_up()
    } else {
        v
    }
}

/// Lower bound for a non-finite round-to-nearest result `v` of an operation
/// whose inputs were finite.
#[inline]
fn overflow_down(v: f64) -> f64 {
    if v == f64::INFINITY {
        f64::MAX
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
fn overflow_up(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        f64::MIN
    } else {
        f64::INFINITY
    }
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_down(s)
        } else if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        };
    }
    down_from(s, two_sum_err(a, b, s))
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_up(s)
        } else if s.is_nan() {
            f64::INFINITY
        } else {
            s
        };
    }
    up_from(s, two_sum_err(a, b, s))
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_down(p)
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    down_from(p, a.mul_add(b, -p))
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_up(p)
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    up_from(p, a.mul_add(b, -p))
}

/// Sign of `a/b - q` for the rounded quotient `q`.
#[inline]
fn div_err_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    }
}

pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_down(q)
        } else {
            q
        };
    }
    if q.abs() < TINY || !b.is_finite() {
        return q.next_down();
    }
    down_from(q, div_err_sign(a, b, q))
}

pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if a.is_finite() && b.is_finite() {
            overflow_up(q)
        } else {
            q
        };
    }
    if q.abs() < TINY || !b.is_finite() {
        return q.next_up();
    }
    up_from(q, div_err_sign(a, b, q))
}

/// Sign of `sqrt(x) - r` for the rounded root `r`.
#[inline]
fn sqrt_err_sign(x: f64, r: f64) -> f64 {
    let res = (-r).mul_add(r, x);
    if res > 0.0 {
        1.0
    } else if res < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Requires `x >= 0`.
pub fn sqrt_down(x: f64) -> f64 {
    if x == 0.0 || x == f64::INFINITY {
        return x;
    }
    let r = x.sqrt();
    if x < TINY {
        return r.next_down().max(0.0);
    }
    down_from(r, sqrt_err_sign(x, r))
}

/// Requires `x >= 0`.
pub fn sqrt_up(x: f64) -> f64 {
    if x == 0.0 || x == f64::INFINITY {
        return x;
    }
    let r = x.sqrt();
    if x < TINY {
        return r.next_up();
    }
    up_from(r, sqrt_err_sign(x, r))
}

/// Outward widening applied to results of the platform's transcendental
/// functions, in units in the last place. The platform libm is assumed to be
/// accurate to within one ulp; two keeps a full ulp of slack.
pub const LIBM_ULPS: u32 = 2;

pub fn widen_down(v: f64, ulps: u32) -> f64 {
    (0..ulps).fold(v, |acc, _| acc.next_down())
}

pub fn widen_up(v: f64, ulps: u32) -> f64 {
    (0..ulps).fold(v, |acc, _| acc.next_up())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0), 4.0);
        assert_eq!(add_up(1.0, 3.0), 4.0);
        assert_eq!(mul_down(-3.0, 2.0), -6.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sqrt_down(9.0), 3.0);
        assert_eq!(sqrt_up(9.0), 3.0);
    }

    #[test]
    fn inexact_operations_bracket_the_result() {
        // 0.1 + 0.2 is inexact in binary
        let lo = add_down(0.1, 0.2);
        let hi = add_up(0.1, 0.2);
        assert!(lo < hi);
        assert_eq!(hi, lo.next_up());

        let lo = div_down(1.0, 3.0);
        let hi = div_up(1.0, 3.0);
        assert_eq!(hi, lo.next_up());
        // 3 * lo < 1 < 3 * hi, checked exactly through fma residuals
        assert!(lo.mul_add(3.0, -1.0) < 0.0);
        assert!(hi.mul_add(3.0, -1.0) > 0.0);

        let lo = sqrt_down(2.0);
        let hi = sqrt_up(2.0);
        assert!(lo.mul_add(lo, -2.0) < 0.0);
        assert!(hi.mul_add(hi, -2.0) > 0.0);
    }

    #[test]
    fn overflow_is_bounded_outward() {
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
        assert_eq!(add_up(f64::MAX, f64::MAX), f64::INFINITY);
        assert_eq!(mul_down(1e300, 1e300), f64::MAX);
    }

    #[test]
    fn underflow_keeps_sign_information() {
        let lo = mul_down(1e-200, 1e-200);
        let hi = mul_up(1e-200, 1e-200);
        assert!(lo <= 0.0 && hi > 0.0);
    }
}
