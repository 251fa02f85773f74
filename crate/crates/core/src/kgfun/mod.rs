//! The weight, distance and Jacobian functions on the Klein-Gordon
//! hyperbola, in three coordinate systems:
//!
//! * `xi`: the frequency variable itself;
//! * `s = xi / sqrt(1 + xi^2)`, which maps the extended line onto `[-1, 1]`;
//! * `theta` with `s = sin(theta)`, on `[-pi/2, pi/2]`.
//!
//! Generic functions accept any [`Scalar`], so the same formula serves point
//! evaluation and interval enclosure.

mod scalar;

use thiserror::Error;

use crate::interval::IntervalError;

pub use scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KgError {
    #[error("s = {0} has no finite preimage")]
    PoleAtUnitCircle(f64),
    #[error("weight is singular on the diagonal xi1 = xi2 = {0}")]
    DiagonalSingularity(f64),
    #[error("exponent {0} is outside the open range (1/2, 3/4)")]
    BadExponentRange(f64),
    #[error("constant {0} must be finite and at least 1")]
    BadConstant(f64),
    #[error("alpha = {0} is outside [1, 2]")]
    BadAlpha(f64),
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// The interpolation parameter of the deformed chordal distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam {
    alpha: f64,
    certifiable: bool,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self, KgError> {
        if !(1.0..=2.0).contains(&alpha) {
            return Err(KgError::BadAlpha(alpha));
        }
        Ok(Self {
            alpha,
            certifiable: true,
        })
    }

    /// Any positive alpha, for blow-up experiments. Never certifiable.
    pub fn experimental(alpha: f64) -> Result<Self, KgError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(KgError::BadAlpha(alpha));
        }
        Ok(Self {
            alpha,
            certifiable: (1.0..=2.0).contains(&alpha),
        })
    }

    pub fn value(&self) -> f64 {
        self.alpha
    }

    pub fn is_certifiable(&self) -> bool {
        self.certifiable
    }
}

fn finite(x: f64) -> Result<f64, KgError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(KgError::NonFinite(x))
    }
}

/// `sqrt(1 + x^2)` without overflow for point arguments.
fn hypot1(x: f64) -> f64 {
    1f64.hypot(x)
}

/// `x / sqrt(1 + x^2)`, the map from the line onto `(-1, 1)`.
pub fn g<S: Scalar>(x: S) -> Result<S, KgError> {
    let r = (x.sqr() + S::cst(1.0)).sqrt()?;
    Ok(x.try_div(r)?.clamp_to(-1.0, 1.0))
}

/// Point version of [`g`] that stays accurate for huge `|x|`.
pub fn to_s(x: f64) -> Result<f64, KgError> {
    Ok(finite(x)? / hypot1(x))
}

pub fn to_xi(s: f64) -> Result<f64, KgError> {
    if !(s.abs() < 1.0) {
        return Err(KgError::PoleAtUnitCircle(s));
    }
    Ok(s / ((1.0 - s) * (1.0 + s)).sqrt())
}

/// `J = |g(xi1) - g(xi2)|`, evaluated directly.
pub fn jacobian(x1: f64, x2: f64) -> Result<f64, KgError> {
    Ok((to_s(x1)? - to_s(x2)?).abs())
}

/// `J` through the rationalised numerator, which avoids the cancellation in
/// `g(xi1) - g(xi2)` when both arguments have the same sign.
pub fn jacobian_reformulated(x1: f64, x2: f64) -> Result<f64, KgError> {
    finite(x1)?;
    finite(x2)?;
    if x1 == x2 {
        return Ok(0.0);
    }
    if x1 * x2 < 0.0 {
        return jacobian(x1, x2);
    }
    let (r1, r2) = (hypot1(x1), hypot1(x2));
    let (a1, a2) = (x1.abs(), x2.abs());
    // |x1^2 - x2^2| / ((|x1| r2 + |x2| r1) r1 r2), split to avoid overflow
    let num = (a1 - a2).abs() * ((a1 + a2) / (a1 * r2 + a2 * r1));
    Ok(num / r1 / r2)
}

pub fn jacobian_s<S: Scalar>(s1: S, s2: S) -> S {
    (s1 - s2).abs()
}

/// Chordal distance `|xi1 - xi2| / (sqrt(1 + xi1^2) sqrt(1 + xi2^2))`.
pub fn chordal(x1: f64, x2: f64) -> Result<f64, KgError> {
    finite(x1)?;
    finite(x2)?;
    Ok(((x1 - x2).abs() / hypot1(x1) / hypot1(x2)).min(1.0))
}

pub fn chordal_s<S: Scalar>(s1: S, s2: S) -> Result<S, KgError> {
    let c1 = (S::cst(1.0) - s1.sqr()).sqrt()?;
    let c2 = (S::cst(1.0) - s2.sqr()).sqrt()?;
    Ok((s1 * c2 - s2 * c1).abs().clamp_to(0.0, 1.0))
}

/// Deformed chordal distance
/// `sigma_alpha = |xi1 - xi2|^alpha / ((1 + xi1^2)(1 + xi2^2))^(1/2 + alpha/4)`,
/// evaluated as `chi^alpha (c1 c2)^((2 - alpha)/2)` with `c = 1/sqrt(1 + xi^2)`.
pub fn sigma(alpha: AlphaParam, x1: f64, x2: f64) -> Result<f64, KgError> {
    let a = alpha.value();
    let chi = chordal(x1, x2)?;
    let cc = 1.0 / hypot1(x1) / hypot1(x2);
    Ok(chi.powf(a) * cc.powf((2.0 - a) / 2.0))
}

/// `sigma_alpha` in `s` coordinates; at `s = +-1` this is the continuous
/// extension, which vanishes for `alpha < 2`.
pub fn sigma_s<S: Scalar>(alpha: AlphaParam, s1: S, s2: S) -> Result<S, KgError> {
    let a = alpha.value();
    let chi = chordal_s(s1, s2)?;
    let cc = ((S::cst(1.0) - s1.sqr()) * (S::cst(1.0) - s2.sqr())).clamp_to(0.0, 1.0);
    Ok(chi.powf(a)? * cc.powf((2.0 - a) / 4.0)?)
}

/// Weight of the Ozawa-Rogers estimate,
/// `(1 + xi1^2)^(3/4) (1 + xi2^2)^(3/4) / |xi2 - xi1|`.
pub fn weight_thm_a(x1: f64, x2: f64) -> Result<f64, KgError> {
    finite(x1)?;
    finite(x2)?;
    if x1 == x2 {
        return Err(KgError::DiagonalSingularity(x1));
    }
    Ok((hypot1(x1) * hypot1(x2)).powf(1.5) / (x2 - x1).abs())
}

/// Weight `(1 - (1 + xi1 xi2) / (sqrt(1 + xi1^2) sqrt(1 + xi2^2)))^(-1)`.
///
/// The denominator is `1 - cos(theta1 - theta2)`; when the cosine is
/// positive it is rewritten as `chi^2 / (1 + cos)` to avoid cancellation.
pub fn weight_thm1(x1: f64, x2: f64) -> Result<f64, KgError> {
    finite(x1)?;
    finite(x2)?;
    if x1 == x2 {
        return Err(KgError::DiagonalSingularity(x1));
    }
    let (r1, r2) = (hypot1(x1), hypot1(x2));
    let cos = (1.0 / r1 / r2 + (x1 / r1) * (x2 / r2)).clamp(-1.0, 1.0);
    let denom = if cos > 0.0 {
        let chi = chordal(x1, x2)?;
        chi * chi / (1.0 + cos)
    } else {
        1.0 - cos
    };
    if denom == 0.0 {
        return Err(KgError::DiagonalSingularity(x1));
    }
    Ok(1.0 / denom)
}

/// [`weight_thm1`] in `s` coordinates. The denominator `1 - s1 s2 - c1 c2`
/// equals `(s1 - s2)^2 / 2 * (1 + ((s1 + s2)/(c1 + c2))^2)`, which has no
/// cancellation and is used whenever `c1 + c2 > 0`.
pub fn weight_thm1_s(s1: f64, s2: f64) -> Result<f64, KgError> {
    if s1 == s2 {
        return Err(KgError::DiagonalSingularity(s1));
    }
    let c1 = ((1.0 - s1) * (1.0 + s1)).max(0.0).sqrt();
    let c2 = ((1.0 - s2) * (1.0 + s2)).max(0.0).sqrt();
    let d = s1 - s2;
    let denom = if c1 + c2 > 0.0 {
        let t = (s1 + s2) / (c1 + c2);
        0.5 * d * d * (1.0 + t * t)
    } else {
        1.0 - s1 * s2 - c1 * c2
    };
    Ok(1.0 / denom)
}

/// `J` in angle coordinates: `|sin theta1 - sin theta2|`.
pub fn jacobian_theta<S: Scalar>(t1: S, t2: S) -> Result<S, KgError> {
    Ok((t1.sin()? - t2.sin()?).abs())
}

/// `chi` in angle coordinates: `|sin(theta1 - theta2)|`.
pub fn chordal_theta<S: Scalar>(t1: S, t2: S) -> Result<S, KgError> {
    Ok((t1 - t2).sin()?.abs().clamp_to(0.0, 1.0))
}

/// `sigma_alpha` in angle coordinates: `chi^alpha (cos theta1 cos theta2)^((2 - alpha)/2)`.
pub fn sigma_theta<S: Scalar>(alpha: AlphaParam, t1: S, t2: S) -> Result<S, KgError> {
    let a = alpha.value();
    let chi = chordal_theta(t1, t2)?;
    let cc = (t1.cos()?.clamp_to(0.0, 1.0) * t2.cos()?.clamp_to(0.0, 1.0)).clamp_to(0.0, 1.0);
    Ok(chi.powf(a)? * cc.powf((2.0 - a) / 2.0)?)
}

/// Convexity auxiliary for the exponent-3/4 inequality, with `xi1` fixed:
/// `f(x) = (xi1^2+1)^(3/4) x (x^2+1)^(1/4) - xi1 (xi1^2+1)^(1/4) (x^2+1)^(3/4) - (x - xi1)`.
pub fn aux_e2<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let p = xi1.sqr() + S::cst(1.0);
    let q = x.sqr() + S::cst(1.0);
    Ok(p.powf(0.75)? * x * q.powf(0.25)? - xi1 * p.powf(0.25)? * q.powf(0.75)? - (x - xi1))
}

pub fn aux_e2_d1<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let p = xi1.sqr() + S::cst(1.0);
    let q = x.sqr() + S::cst(1.0);
    let p34 = p.powf(0.75)?;
    let t1 = p34 * q.powf(0.25)?;
    let t2 = (p34 * x.sqr()).try_div(S::cst(2.0) * q.powf(0.75)?)?;
    let t3 = (S::cst(3.0) * xi1 * p.powf(0.25)? * x).try_div(S::cst(2.0) * q.powf(0.25)?)?;
    Ok(t1 + t2 - t3 - S::cst(1.0))
}

pub fn aux_e2_d2<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let p = xi1.sqr() + S::cst(1.0);
    let q = x.sqr() + S::cst(1.0);
    let bracket = p.sqrt()? * x - xi1 * q.sqrt()?;
    let num = S::cst(3.0) * p.powf(0.25)? * (x.sqr() + S::cst(2.0)) * bracket;
    num.try_div(S::cst(4.0) * q.powf(1.75)?)
}

/// Concavity auxiliary for the chordal inequality, with `xi1` fixed:
/// `f(x) = -sqrt(xi1^2+1) sqrt(x^2+1) - xi1 sqrt(x^2+1) + sqrt(xi1^2+1) x + xi1 x + 1`.
pub fn aux_e5<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let rp = (xi1.sqr() + S::cst(1.0)).sqrt()?;
    let rq = (x.sqr() + S::cst(1.0)).sqrt()?;
    Ok(-(rp * rq) - xi1 * rq + rp * x + xi1 * x + S::cst(1.0))
}

pub fn aux_e5_d1<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let rp = (xi1.sqr() + S::cst(1.0)).sqrt()?;
    let rq = (x.sqr() + S::cst(1.0)).sqrt()?;
    ((rp + xi1) * (rq - x)).try_div(rq)
}

pub fn aux_e5_d2<S: Scalar>(x: S, xi1: S) -> Result<S, KgError> {
    let rp = (xi1.sqr() + S::cst(1.0)).sqrt()?;
    let q = x.sqr() + S::cst(1.0);
    (-rp - xi1).try_div(q.powf(1.5)?)
}

/// Derivative of the sharpness auxiliary at its base point,
/// `C (1 + xi1^2)^(2a - 3/2) - 1`.
pub fn prop_seed_derivative(xi1: f64, c: f64, a: f64) -> Result<f64, KgError> {
    if !(a > 0.5 && a < 0.75) {
        return Err(KgError::BadExponentRange(a));
    }
    if !(c.is_finite() && c >= 1.0) {
        return Err(KgError::BadConstant(c));
    }
    finite(xi1)?;
    Ok(c * (1.0 + xi1 * xi1).powf(2.0 * a - 1.5) - 1.0)
}

/// `|A + B| / |A sqrt(1 + B^2) + B sqrt(1 + A^2)|` for nonnegative `A, B`,
/// the ratio bounded by 1 in the opposite-sign case of the `alpha = 2` lemma.
pub fn elementary_ab_ratio(a: f64, b: f64) -> f64 {
    (a + b).abs() / (a * hypot1(b) + b * hypot1(a)).abs()
}
