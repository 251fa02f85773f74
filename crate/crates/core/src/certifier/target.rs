use std::fmt;

use serde::{Deserialize, Serialize};

use super::boxes::{theta_max, AngleBox};
use crate::interval::Interval;
use crate::kgfun::{self, AlphaParam, KgError, Scalar};

/// The three inequality families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `sigma_1 <= C J` for `xi2 >= xi1`; the lemma has `C = 1`.
    E2,
    /// `1 - cos(theta2 - theta1) <= C J` for `xi2 >= xi1`; the lemma has `C = 1`.
    E5,
    /// `sigma_2 <= C J` on the extended plane; the lemma has `C = 2`.
    Elem2,
}

impl Family {
    pub fn lemma_constant(self) -> f64 {
        match self {
            Family::E2 | Family::E5 => 1.0,
            Family::Elem2 => 2.0,
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        match name.to_ascii_lowercase().as_str() {
            "e2" => Some(Family::E2),
            "e5" => Some(Family::E5),
            "elem2" => Some(Family::Elem2),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::E2 => "E2",
            Family::E5 => "E5",
            Family::Elem2 => "Elem2",
        })
    }
}

/// An inequality instance `raw_margin >= 0` on the upper triangle
/// `theta1 <= theta2` of `[-pi/2, pi/2]^2`.
///
/// With `Sigma = theta1 + theta2`, `Delta = theta2 - theta1`,
/// `a = cos^2(Delta/2)`, `b = cos^2(Sigma/2)` and `cos theta1 cos theta2 = a + b - 1`,
/// the raw margin equals `removed_factor * factored_margin`, where:
///
/// | family | removed factor | factored margin |
/// |---|---|---|
/// | E2 | `2 sin(Delta/2) / (cos(Sigma/2) + cos(Delta/2) sqrt(c1 c2))` | `(C-1)(b + sqrt(a b c1 c2)) + sin^2(Delta/2)(a + b)` |
/// | E5 | `2 sin(Delta/2)` | `(C-1) cos(Sigma/2) + sqrt((1+s1)(1-s2))` |
/// | Elem2 | `4 sin(Delta/2)` | `(C/2-1) cos(Sigma/2) + sqrt((1+s1)(1-s2)) + sin^3(Delta/2)` |
///
/// Every term of each factored margin is a product of quantities that are
/// nonnegative on the triangle, apart from the constant offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityTarget {
    pub family: Family,
    pub constant: f64,
    corrupted: bool,
}

impl InequalityTarget {
    pub fn new(family: Family, constant: f64) -> Self {
        Self {
            family,
            constant,
            corrupted: false,
        }
    }

    /// The instance proved in the lemma.
    pub fn lemma(family: Family) -> Self {
        Self::new(family, family.lemma_constant())
    }

    /// A copy whose factored margin is off by a relative 1e-3, for negative
    /// controls of [`super::validate_reformulation`].
    pub fn corrupted(mut self) -> Self {
        self.corrupted = true;
        self
    }

    pub fn is_corrupted(&self) -> bool {
        self.corrupted
    }

    pub fn id(&self) -> String {
        format!("{}(C={:?})", self.family, self.constant)
    }

    pub fn statement(&self) -> String {
        let c = self.constant;
        match self.family {
            Family::E2 => format!("sigma_1(xi1, xi2) <= {c:?} * J(xi1, xi2) for all xi2 >= xi1"),
            Family::E5 => format!(
                "1 - (1 + xi1 xi2)/(sqrt(1+xi1^2) sqrt(1+xi2^2)) <= {c:?} * J(xi1, xi2) for all xi2 >= xi1"
            ),
            Family::Elem2 => {
                format!("sigma_2(xi1, xi2) <= {c:?} * J(xi1, xi2) for all xi1, xi2 in the extended line")
            }
        }
    }

    /// The two sides `(C J, rhs)` of `rhs <= C J` at finite `xi`, computed
    /// directly in the `xi` variables with the cancellation-free `J`.
    pub fn sides(&self, xi1: f64, xi2: f64) -> Result<(f64, f64), KgError> {
        let j = kgfun::jacobian_reformulated(xi1, xi2)?;
        let other = match self.family {
            Family::E2 => kgfun::sigma(AlphaParam::new(1.0)?, xi1, xi2)?,
            Family::Elem2 => kgfun::sigma(AlphaParam::new(2.0)?, xi1, xi2)?,
            Family::E5 => {
                let r = 1f64.hypot(xi1) * 1f64.hypot(xi2);
                1.0 - (1.0 + xi1 * xi2) / r
            }
        };
        Ok((self.constant * j, other))
    }

    /// `C J - rhs` at finite `xi`.
    pub fn raw_margin(&self, xi1: f64, xi2: f64) -> Result<f64, KgError> {
        let (cj, other) = self.sides(xi1, xi2)?;
        Ok(cj - other)
    }

    /// The factor divided out of the raw margin; nonnegative on the triangle.
    pub fn removed_factor(&self, t1: f64, t2: f64) -> f64 {
        let half_delta = 0.5 * (t2 - t1);
        let half_sigma = 0.5 * (t1 + t2);
        match self.family {
            Family::E2 => {
                let cc = (t1.cos() * t2.cos()).max(0.0);
                2.0 * half_delta.sin() / (half_sigma.cos() + half_delta.cos() * cc.sqrt())
            }
            Family::E5 => 2.0 * half_delta.sin(),
            Family::Elem2 => 4.0 * half_delta.sin(),
        }
    }

    /// The factored margin at a point or over a box of the triangle.
    ///
    /// Every intermediate quantity is intersected with the range it takes on
    /// the triangle, so the result is an enclosure over the part of the
    /// argument lying in the domain.
    pub fn factored<S: Scalar>(&self, t1: S, t2: S) -> Result<S, KgError> {
        let h = theta_max();
        let t1 = t1.clamp_to(-h, h);
        let t2 = t2.clamp_to(-h, h);
        let half = S::cst(0.5);
        let half_delta = (half * (t2 - t1)).clamp_to(0.0, h);
        let half_sigma = (half * (t1 + t2)).clamp_to(-h, h);
        let cos_hs = half_sigma.cos()?.clamp_to(0.0, 1.0);
        let sin_hd = half_delta.sin()?.clamp_to(0.0, 1.0);
        let c = S::cst(self.constant);
        let one = S::cst(1.0);
        let value = match self.family {
            Family::E2 => {
                let a = half_delta.cos()?.clamp_to(0.0, 1.0).sqr();
                let b = cos_hs.sqr();
                let c1 = t1.cos()?.clamp_to(0.0, 1.0);
                let c2 = t2.cos()?.clamp_to(0.0, 1.0);
                let cross = (a * b * c1 * c2).clamp_to(0.0, 1.0).sqrt()?;
                (c - one) * (b + cross) + sin_hd.sqr() * (a + b)
            }
            Family::E5 => (c - one) * cos_hs + self.corner_root(t1, t2)?,
            Family::Elem2 => {
                (half * c - one) * cos_hs + self.corner_root(t1, t2)? + sin_hd.sqr() * sin_hd
            }
        };
        Ok(if self.corrupted {
            value * S::cst(1.001)
        } else {
            value
        })
    }

    /// `sqrt((1 + sin theta1)(1 - sin theta2))`.
    fn corner_root<S: Scalar>(&self, t1: S, t2: S) -> Result<S, KgError> {
        let s1 = t1.sin()?.clamp_to(-1.0, 1.0);
        let s2 = t2.sin()?.clamp_to(-1.0, 1.0);
        let p = (S::cst(1.0) + s1).clamp_to(0.0, 2.0) * (S::cst(1.0) - s2).clamp_to(0.0, 2.0);
        p.sqrt()
    }

    /// Interval enclosure of the factored margin over a box.
    pub fn factored_box(&self, b: &AngleBox) -> Result<Interval, KgError> {
        self.factored(b.t1, b.t2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_root_box_is_sign_evident() {
        for fam in [Family::E2, Family::E5, Family::Elem2] {
            let t = InequalityTarget::lemma(fam);
            let bound = t.factored_box(&AngleBox::root()).unwrap();
            assert!(bound.lo() >= 0.0, "{fam}: {bound}");
        }
    }

    #[test]
    fn factorisation_at_a_point() {
        for fam in [Family::E2, Family::E5, Family::Elem2] {
            for c in [0.7, 1.0, 2.0, 3.5] {
                let t = InequalityTarget::new(fam, c);
                let (t1, t2) = (-0.3f64, 0.9f64);
                let raw = t.raw_margin(t1.tan(), t2.tan()).unwrap();
                let fac = t.removed_factor(t1, t2) * t.factored(t1, t2).unwrap();
                assert!((raw - fac).abs() < 1e-14, "{fam} C={c}: {raw} vs {fac}");
            }
        }
    }

    #[test]
    fn weakened_constants_go_negative_where_expected() {
        let e2 = InequalityTarget::new(Family::E2, 0.99);
        assert!(e2.factored(0.0, 1e-3).unwrap() < 0.0);
        let el = InequalityTarget::new(Family::Elem2, 1.9);
        let h = std::f64::consts::FRAC_PI_2;
        assert!(el.factored(h - 0.1, h).unwrap() < 0.0);
        assert!(el.factored(-h, -h + 0.1).unwrap() < 0.0);
        assert!(el.factored(-1.0, 1.0).unwrap() > 0.0);
    }
}
