//! Explicit counterexamples and extremal sequences: the exponent 3/4 cannot
//! be lowered, the constants 1 and 2 cannot be lowered, and `alpha < 1`
//! gives no bounded constant at all.

pub mod hp;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgfun::{self, AlphaParam, KgError};
use hp::Hp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SharpnessError {
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("no violation found for a = {a}, C = {c}")]
    SearchFailed { a: f64, c: f64 },
    #[error("alpha = {0} is outside (0, 1]")]
    BadAlpha(f64),
    #[error("path length {0} is outside the supported range")]
    BadLength(usize),
    #[error("output: {0}")]
    Io(String),
}

/// A point where `(xi2 - xi1) / ((1+xi1^2)^a (1+xi2^2)^a) <= C (g(xi2) - g(xi1))`
/// fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, negative.
    pub margin: f64,
    /// The margin recomputed at 256 bits, rounded to a double.
    pub hp_margin: f64,
}

/// Both sides of the exponent-`a` inequality in double precision.
pub fn exponent_sides(a: f64, c: f64, xi1: f64, xi2: f64) -> Result<(f64, f64), KgError> {
    let p1 = 1f64.hypot(xi1).powf(2.0 * a);
    let p2 = 1f64.hypot(xi2).powf(2.0 * a);
    let lhs = (xi2 - xi1) / p1 / p2;
    let rhs = c * kgfun::jacobian_reformulated(xi1, xi2)?;
    Ok((lhs, rhs))
}

const DYADIC_BITS: u32 = 6;

/// `a = m / 2^k` in lowest terms with `k <= 6` and `m` small, where the
/// power reduces to square roots.
fn dyadic_exponent(a: f64) -> Option<(u32, u32)> {
    let m = a * f64::from(1u32 << DYADIC_BITS);
    if !(m.fract() == 0.0 && m > 0.0 && m <= 256.0) {
        return None;
    }
    let (mut m, mut k) = (m as u32, DYADIC_BITS);
    while k > 0 && m % 2 == 0 {
        m /= 2;
        k -= 1;
    }
    Some((m, k))
}

/// `rhs - lhs` at 256 bits, with `a` and `C` read as the decimals they
/// print as and `xi1, xi2` taken exactly.
pub fn hp_margin(hp: &mut Hp, a: f64, c: f64, xi1: f64, xi2: f64) -> f64 {
    let (x1, x2) = (hp.exact(xi1), hp.exact(xi2));
    let one = hp.exact(1.0);
    let q1 = hp.add(&one, &hp.mul(&x1, &x1));
    let q2 = hp.add(&one, &hp.mul(&x2, &x2));
    let q = hp.mul(&q1, &q2);
    let den = match dyadic_exponent(a) {
        Some((m, k)) => {
            let mut r = q;
            for _ in 0..k {
                r = hp.sqrt(&r);
            }
            let mut acc = one.clone();
            for _ in 0..m {
                acc = hp.mul(&acc, &r);
            }
            acc
        }
        None => {
            let e = hp.decimal(a);
            hp.pow(&q, &e)
        }
    };
    let c = hp.decimal(c);
    let lhs = hp.div(&hp.sub(&x2, &x1), &den);
    let g1 = hp.div(&x1, &hp.sqrt(&q1));
    let g2 = hp.div(&x2, &hp.sqrt(&q2));
    let rhs = hp.mul(&c, &hp.sub(&g2, &g1));
    let m = hp.sub(&rhs, &lhs);
    hp.to_f64(&m)
}

impl Violation {
    /// Recompute both sides in double precision.
    pub fn recompute(&self) -> Result<(f64, f64), KgError> {
        exponent_sides(self.a, self.c, self.xi1, self.xi2)
    }

    pub fn csv_header() -> &'static str {
        "a,C,xi1,xi2,lhs,rhs,margin"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.a, self.c, self.xi1, self.xi2, self.lhs, self.rhs, self.margin
        )
    }
}

/// Smallest `xi1 >= 0` with `C (1 + xi1^2)^(2a - 3/2) - 1 <= -1/2`.
pub fn seed_xi1(a: f64, c: f64) -> Result<f64, KgError> {
    kgfun::prop_seed_derivative(0.0, c, a)?;
    let q = (2.0 * c).powf(1.0 / (1.5 - 2.0 * a));
    Ok((q - 1.0).max(0.0).sqrt())
}

/// Find a violation of the exponent-`a` inequality with constant `C`.
///
/// Starting from the seed point where the auxiliary function has slope at
/// most `-1/2`, the gap `xi2 - xi1` is halved until the margin turns
/// negative. Every hit is re-verified at 256 bits before it is returned.
pub fn find_violation(a: f64, c: f64) -> Result<Violation, SharpnessError> {
    let mut xi1 = seed_xi1(a, c)?;
    let mut hp = Hp::default();
    for _ in 0..16 {
        if !xi1.is_finite() {
            break;
        }
        if kgfun::prop_seed_derivative(xi1, c, a)? > -0.5 {
            xi1 = (2.0 * xi1).max(1.0);
            continue;
        }
        // xi1 + 1 is not representable once xi1 exceeds 2^53
        let mut delta = (xi1 * 2f64.powi(-10)).max(1.0);
        for _ in 0..1100 {
            let xi2 = xi1 + delta;
            if xi2 <= xi1 {
                break;
            }
            let (lhs, rhs) = exponent_sides(a, c, xi1, xi2)?;
            if rhs - lhs < 0.0 {
                let hm = hp_margin(&mut hp, a, c, xi1, xi2);
                if hm < 0.0 {
                    return Ok(Violation {
                        a,
                        c,
                        xi1,
                        xi2,
                        lhs,
                        rhs,
                        margin: rhs - lhs,
                        hp_margin: hm,
                    });
                }
            }
            delta *= 0.5;
        }
        xi1 = (2.0 * xi1).max(1.0);
    }
    Err(SharpnessError::SearchFailed { a, c })
}

/// [`find_violation`] over a grid, in parallel, results in row-major input
/// order.
pub fn run_grid(
    exponents: &[f64],
    constants: &[f64],
) -> Vec<(f64, f64, Result<Violation, SharpnessError>)> {
    let cells: Vec<(f64, f64)> = exponents
        .iter()
        .flat_map(|&a| constants.iter().map(move |&c| (a, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(a, c)| (a, c, find_violation(a, c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub samples: u64,
    pub seed: u64,
    /// Near ties re-evaluated at 256 bits.
    pub hp_checked: u64,
    pub violations: Vec<Violation>,
    /// Smallest `(rhs - lhs) / rhs` among double-precision evaluations.
    pub min_rel_margin: f64,
}

/// Margins within this many ulps of the larger side are re-evaluated at
/// high precision.
pub const TIE_ULPS: f64 = 1e3;

/// Random search for violations with `xi2 > xi1`. Half the samples are
/// uniform in angle, half are near-diagonal pairs with relative gaps down to
/// `1e-8`. A violation is reported only if the 256-bit margin is negative.
pub fn scan_for_violations(a: f64, c: f64, samples: u64, seed: u64) -> ScanReport {
    const CHUNK: u64 = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(u64, Vec<Violation>, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let n = CHUNK.min(samples - k * CHUNK);
            let mut hp: Option<Hp> = None;
            let mut checked = 0;
            let mut found = Vec::new();
            let mut min_rel = f64::INFINITY;
            for i in 0..n {
                let (xi1, xi2) = sample_pair(&mut rng, i % 2 == 0);
                if !(xi2 > xi1) {
                    continue;
                }
                let Ok((lhs, rhs)) = exponent_sides(a, c, xi1, xi2) else {
                    continue;
                };
                let margin = rhs - lhs;
                if rhs > 0.0 {
                    min_rel = min_rel.min(margin / rhs);
                }
                let tie = TIE_ULPS * f64::EPSILON * lhs.abs().max(rhs.abs());
                if margin < tie {
                    checked += 1;
                    let hp = hp.get_or_insert_with(Hp::default);
                    let hm = hp_margin(hp, a, c, xi1, xi2);
                    if hm < 0.0 {
                        found.push(Violation {
                            a,
                            c,
                            xi1,
                            xi2,
                            lhs,
                            rhs,
                            margin,
                            hp_margin: hm,
                        });
                    }
                }
            }
            (checked, found, min_rel)
        })
        .collect();
    let mut report = ScanReport {
        a,
        c,
        samples,
        seed,
        hp_checked: 0,
        violations: Vec::new(),
        min_rel_margin: f64::INFINITY,
    };
    for (checked, found, min_rel) in parts {
        report.hp_checked += checked;
        report.violations.extend(found);
        report.min_rel_margin = report.min_rel_margin.min(min_rel);
    }
    report
}

fn sample_pair(rng: &mut ChaCha8Rng, uniform: bool) -> (f64, f64) {
    let h = std::f64::consts::FRAC_PI_2;
    let t1: f64 = rng.gen_range(-h..h);
    if uniform {
        let t2: f64 = rng.gen_range(-h..h);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        (lo.tan(), hi.tan())
    } else {
        let x1 = t1.tan();
        let gap = 10f64.powf(-rng.gen_range(0.0..8.0)) * x1.abs().max(1.0);
        (x1, x1 + gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFamily {
    Sigma1OverJ,
    Sigma2OverJ,
    SigmaAlphaOverJ,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTrace {
    pub family: RatioFamily,
    pub path: String,
    /// `(parameter, ratio)` pairs.
    pub samples: Vec<(f64, f64)>,
}

impl RatioTrace {
    pub fn last_ratio(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }
}

/// `J` and `sigma_alpha` without cancellation.
fn sigma_over_j(alpha: AlphaParam, xi1: f64, xi2: f64) -> Result<f64, KgError> {
    Ok(kgfun::sigma(alpha, xi1, xi2)? / kgfun::jacobian_reformulated(xi1, xi2)?)
}

/// The ratios along the paths that show the constants 1 and 2 are sharp:
/// `sigma_1 / J` at `xi1 = 0, xi2 = 10^-k`, and `sigma_2 / J` at
/// `xi1 = 10^k, xi2 = 10^(3k)`, for `k = 1..=n`.
pub fn extremal_ratio(family: RatioFamily, n: usize) -> Result<RatioTrace, SharpnessError> {
    let (alpha, path) = match family {
        RatioFamily::Sigma1OverJ => {
            if n == 0 || n > 300 {
                return Err(SharpnessError::BadLength(n));
            }
            (1.0, "xi1 = 0, xi2 = 10^-k")
        }
        RatioFamily::Sigma2OverJ => {
            if n == 0 || n > 100 {
                return Err(SharpnessError::BadLength(n));
            }
            (2.0, "xi1 = 10^k, xi2 = 10^(3k)")
        }
        RatioFamily::SigmaAlphaOverJ => return Err(SharpnessError::BadAlpha(f64::NAN)),
    };
    let alpha = AlphaParam::new(alpha)?;
    let mut samples = Vec::with_capacity(n);
    for k in 1..=n {
        let kf = k as f64;
        let (x1, x2) = match family {
            RatioFamily::Sigma1OverJ => (0.0, 10f64.powf(-kf)),
            _ => (10f64.powf(kf), 10f64.powf(3.0 * kf)),
        };
        samples.push((kf, sigma_over_j(alpha, x1, x2)?));
    }
    Ok(RatioTrace {
        family,
        path: path.into(),
        samples,
    })
}

/// `sigma_alpha / J` along `xi2 = xi1 + 10^-k`, `k = 2..=10`, and the
/// least-squares slope of `ln(ratio)` against `ln(xi2 - xi1)`, which is
/// `alpha - 1` asymptotically. `alpha = 1` is accepted as a control.
pub fn alpha_blowup_slope(alpha: f64, xi1: f64) -> Result<(f64, RatioTrace), SharpnessError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SharpnessError::BadAlpha(alpha));
    }
    let param = AlphaParam::experimental(alpha)?;
    let mut samples = Vec::new();
    for k in 2..=10 {
        let xi2 = xi1 + 10f64.powi(-k);
        let gap = xi2 - xi1;
        samples.push((gap, sigma_over_j(param, xi1, xi2)?));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(d, r)| (d.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((
        sxy / sxx,
        RatioTrace {
            family: RatioFamily::SigmaAlphaOverJ,
            path: format!("alpha = {alpha:?}, xi1 = {xi1:?}, xi2 = xi1 + 10^-k"),
            samples,
        },
    ))
}

pub fn write_violations_csv<W: Write>(
    out: &mut W,
    rows: &[Violation],
) -> Result<(), SharpnessError> {
    let io = |e: std::io::Error| SharpnessError::Io(e.to_string());
    writeln!(out, "{}", Violation::csv_header()).map_err(io)?;
    for v in rows {
        writeln!(out, "{}", v.csv_row()).map_err(io)?;
    }
    Ok(())
}

pub fn write_jsonl<W: Write, T: Serialize>(out: &mut W, rows: &[T]) -> Result<(), SharpnessError> {
    for r in rows {
        let line = serde_json::to_string(r).map_err(|e| SharpnessError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| SharpnessError::Io(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_violation_point() {
        let (lhs, rhs) = exponent_sides(0.7, 1.0, 1.0, 1.001).unwrap();
        assert!((lhs - 3.787e-4).abs() < 1e-6, "{lhs}");
        assert!((rhs - 3.536e-4).abs() < 1e-6, "{rhs}");
        let mut hp = Hp::default();
        assert!(hp_margin(&mut hp, 0.7, 1.0, 1.0, 1.001) < 0.0);
    }

    #[test]
    fn finds_violations() {
        for (a, c) in [(0.7, 1.0), (0.74, 10.0), (0.55, 100.0)] {
            let v = find_violation(a, c).unwrap();
            assert!(v.margin < 0.0 && v.hp_margin < 0.0, "{v:?}");
        }
        assert!(matches!(
            find_violation(0.8, 1.0),
            Err(SharpnessError::Kg(KgError::BadExponentRange(_)))
        ));
    }

    #[test]
    fn ratio_traces() {
        let t1 = extremal_ratio(RatioFamily::Sigma1OverJ, 8).unwrap();
        assert!(t1.last_ratio().unwrap() >= 0.999);
        let t2 = extremal_ratio(RatioFamily::Sigma2OverJ, 4).unwrap();
        assert!((t2.samples[0].1 - 1.9555).abs() < 1e-3);
        assert!(t2.last_ratio().unwrap() >= 1.99);
    }

    #[test]
    fn blowup_slopes() {
        let (s, _) = alpha_blowup_slope(0.9, 1.0).unwrap();
        assert!((s + 0.1).abs() < 0.005, "{s}");
        let (s, _) = alpha_blowup_slope(1.0, 1.0).unwrap();
        assert!(s.abs() < 0.005, "{s}");
    }
}
