//! Software arbitrary-precision evaluation, independent of the double
//! precision code paths it is used to audit.

use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

/// Default working precision in bits (about 77 significant digits).
pub const HP_BITS: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

pub struct Hp {
    p: usize,
    cc: Consts,
}

impl Default for Hp {
    fn default() -> Self {
        Self::new(HP_BITS)
    }
}

impl Hp {
    pub fn new(bits: usize) -> Self {
        Self {
            p: bits,
            cc: Consts::new().expect("constant cache"),
        }
    }

    /// The exact value of a double.
    pub fn exact(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    /// The decimal number a double prints as, e.g. `0.7` rather than the
    /// binary value nearest to it.
    pub fn decimal(&mut self, v: f64) -> BigFloat {
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            return self.exact(v);
        }
        self.parse(&format!("{v:?}"))
    }

    pub fn parse(&mut self, text: &str) -> BigFloat {
        BigFloat::parse(text, Radix::Dec, self.p, RM, &mut self.cc)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, RM)
    }

    pub fn abs(&self, a: &BigFloat) -> BigFloat {
        a.abs()
    }

    /// `a^e` for `a > 0`.
    pub fn pow(&mut self, a: &BigFloat, e: &BigFloat) -> BigFloat {
        a.pow(e, self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, RM, &mut self.cc)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, RM, &mut self.cc)
    }

    /// `sqrt(1 + x^2)`.
    pub fn hypot1(&self, x: &BigFloat) -> BigFloat {
        let one = self.exact(1.0);
        self.sqrt(&self.add(&one, &self.mul(x, x)))
    }

    /// Nearest double (up to a final decimal-to-binary rounding).
    pub fn to_f64(&mut self, a: &BigFloat) -> f64 {
        if a.is_nan() {
            return f64::NAN;
        }
        if a.is_zero() {
            return 0.0;
        }
        if a.is_inf_pos() {
            return f64::INFINITY;
        }
        if a.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        a.format(Radix::Dec, RM, &mut self.cc)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN)
    }

    /// Exact comparison of `a` with the double `v`.
    pub fn cmp_f64(&self, a: &BigFloat, v: f64) -> Option<Ordering> {
        a.cmp(&self.exact(v)).map(|c| c.cmp(&0))
    }

    /// `lo <= a <= hi`, compared exactly.
    pub fn within(&self, a: &BigFloat, lo: f64, hi: f64) -> bool {
        matches!(
            self.cmp_f64(a, lo),
            Some(Ordering::Greater | Ordering::Equal)
        ) && matches!(self.cmp_f64(a, hi), Some(Ordering::Less | Ordering::Equal))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_constants() {
        let mut hp = Hp::default();
        let two = hp.exact(2.0);
        let r = hp.sqrt(&two);
        assert_eq!(hp.to_f64(&r), std::f64::consts::SQRT_2);
        let tenth = hp.decimal(0.1);
        // the decimal 0.1 lies strictly above the double 0.1
        assert_eq!(hp.cmp_f64(&tenth, 0.1), Some(Ordering::Less));
        assert_eq!(hp.to_f64(&tenth), 0.1);
        let p = hp.decimal(0.75);
        let v = hp.pow(&two, &p);
        assert_eq!(hp.to_f64(&v), 2f64.powf(0.75));
        assert_eq!(hp.to_f64(&hp.exact(-3.5e-200)), -3.5e-200);
        let one = hp.exact(1.0);
        let s = hp.sin(&one);
        assert!((hp.to_f64(&s) - 1f64.sin()).abs() < 2e-16);
    }
}
