//! Interval branch-and-bound certification of the three inequality families
//! over the angle square, certificate files, independent replay, and the
//! interpolation step for intermediate `alpha`.

mod boxes;
mod certificate;
mod compose;
mod replay;
mod target;

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalError};
use crate::kgfun::KgError;

pub use boxes::{theta_max, AngleBox};
pub use certificate::{BoxRecord, BoxStatus, Certificate, ConfigRecord, ExactF64, TargetRecord};
pub use compose::{
    compose_interpolation, ComposeError, InterpolatedConclusion, SpotCheck, SPOT_CHECK_TOL,
};
pub use replay::{replay, replay_ok, ReplayError, ReplayReport};
pub use target::{Family, InequalityTarget};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertConfig {
    pub max_depth: u32,
    /// Boxes narrower than this (radians) are not split further.
    pub min_width: f64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Cap on evaluated boxes.
    pub budget: u64,
    /// Random points for the factorisation check run before the search.
    pub validation_samples: usize,
    pub seed: u64,
}

impl Default for CertConfig {
    fn default() -> Self {
        Self {
            max_depth: 40,
            min_width: 1e-8,
            workers: 0,
            budget: 10_000_000,
            validation_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The interval upper bound is negative on the whole box.
    NegativeBox,
    /// The bound still straddles zero at the resolution limit.
    Inconclusive,
}

/// The search could not certify the target. Not a disproof: the box is the
/// place where interval evaluation gave up or found the margin negative.
#[derive(Debug, Clone, PartialEq)]
pub struct CertFailure {
    pub target: String,
    pub suspect: AngleBox,
    pub bound: Interval,
    pub kind: FailureKind,
    pub depth: u32,
    pub evaluated: u64,
}

impl CertFailure {
    /// Box centre in the original variables, `xi = tan(theta)`.
    pub fn xi_center(&self) -> (f64, f64) {
        let (a, b) = self.suspect.center();
        (a.tan(), b.tan())
    }
}

impl fmt::Display for CertFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FailureKind::NegativeBox => "margin negative on",
            FailureKind::Inconclusive => "inconclusive at resolution limit on",
        };
        let (x1, x2) = self.xi_center();
        write!(
            f,
            "{}: {} theta1 = {}, theta2 = {} (xi near ({:e}, {:e})), bound {} at depth {}",
            self.target, what, self.suspect.t1, self.suspect.t2, x1, x2, self.bound, self.depth
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("certification failed: {0}")]
    Failure(Box<CertFailure>),
    #[error("box budget {budget} exhausted after {evaluated} evaluations")]
    BudgetExhausted { budget: u64, evaluated: u64 },
    #[error(
        "factored margin disagrees with the raw margin: discrepancy {discrepancy:e} \
         (scale {scale:e}) at theta = ({t1}, {t2})"
    )]
    ReformulationMismatch {
        discrepancy: f64,
        scale: f64,
        t1: f64,
        t2: f64,
    },
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("certificate format: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl From<serde_json::Error> for CertError {
    fn from(e: serde_json::Error) -> Self {
        CertError::Format(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub target: String,
    pub samples: usize,
    /// Largest `|raw - removed * factored| / scale` seen.
    pub max_rel_discrepancy: f64,
    pub min_removed_factor: f64,
}

/// Relative tolerance of the factorisation check.
pub const REFORMULATION_TOL: f64 = 1e-10;

/// Compare the raw margin, evaluated in the `xi` variables, with
/// `removed_factor * factored_margin` evaluated in angle coordinates, at
/// random interior points of the triangle with `theta2 - theta1 >= 1e-3`.
/// Both sides are analytic on the open triangle, so agreement on a random
/// sample there guards against transcription slips in the factored forms.
pub fn validate_reformulation(
    target: &InequalityTarget,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport, CertError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = std::f64::consts::FRAC_PI_2;
    let mut worst = 0.0f64;
    let mut min_removed = f64::INFINITY;
    let mut taken = 0;
    while taken < samples {
        let a: f64 = rng.gen_range(-h..h);
        let b: f64 = rng.gen_range(-h..h);
        let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
        if t2 - t1 < 1e-3 || t1 <= -h || t2 >= h {
            continue;
        }
        taken += 1;
        let (x1, x2) = (t1.tan(), t2.tan());
        let (cj, other) = target.sides(x1, x2)?;
        let raw = cj - other;
        let removed = target.removed_factor(t1, t2);
        let product = removed * target.factored(t1, t2)?;
        let scale = cj.abs() + other.abs();
        let rel = (raw - product).abs() / scale;
        if !(rel <= REFORMULATION_TOL) || !(removed >= 0.0) {
            return Err(CertError::ReformulationMismatch {
                discrepancy: (raw - product).abs(),
                scale,
                t1,
                t2,
            });
        }
        worst = worst.max(rel);
        min_removed = min_removed.min(removed);
    }
    Ok(ValidationReport {
        target: target.id(),
        samples,
        max_rel_discrepancy: worst,
        min_removed_factor: min_removed,
    })
}

/// Prove `factored_margin >= 0` on the upper triangle by interval
/// branch-and-bound.
///
/// The search runs level by level; every box of one level has the same
/// shape, so this is widest-first order. A level is evaluated in parallel and
/// collected in canonical order, so the result does not depend on the number
/// of workers. When a box turns out negative the level is finished and the
/// search zooms into the most negative box to report a localized suspect.
pub fn certify(target: &InequalityTarget, config: &CertConfig) -> Result<Certificate, CertError> {
    validate_reformulation(target, config.validation_samples, config.seed)?;
    if config.workers == 0 {
        return search(target, config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CertError::Pool(e.to_string()))?;
    pool.install(|| search(target, config))
}

enum Verdict {
    Verified(f64),
    Negative(Interval),
    Split,
    Stalled(Interval),
}

fn search(target: &InequalityTarget, config: &CertConfig) -> Result<Certificate, CertError> {
    let start = Instant::now();
    let mut level = vec![AngleBox::root()];
    let mut leaves: Vec<BoxRecord> = Vec::new();
    let mut evaluated: u64 = 0;
    let mut depth: u32 = 0;

    while !level.is_empty() {
        level.sort_by(|a, b| a.canonical_cmp(b));
        evaluated += level.len() as u64;
        if evaluated > config.budget {
            return Err(CertError::BudgetExhausted {
                budget: config.budget,
                evaluated,
            });
        }
        let verdicts: Vec<Verdict> = level
            .par_iter()
            .map(|b| classify(target, b, depth, config))
            .collect();

        let mut negative: Option<(AngleBox, Interval)> = None;
        let mut stalled: Option<(AngleBox, Interval)> = None;
        let mut next = Vec::new();
        for (b, v) in level.iter().zip(verdicts) {
            match v {
                Verdict::Verified(lo) => leaves.push(BoxRecord::new(b, lo)),
                Verdict::Negative(bound) => {
                    if negative.is_none_or(|(_, n)| bound.hi() < n.hi()) {
                        negative = Some((*b, bound));
                    }
                }
                Verdict::Stalled(bound) => {
                    if stalled.is_none_or(|(_, s)| bound.lo() < s.lo()) {
                        stalled = Some((*b, bound));
                    }
                }
                Verdict::Split => {
                    let (l, r) = b.bisect()?;
                    next.extend([l, r].into_iter().filter(|c| !c.below_diagonal()));
                }
            }
        }
        if let Some((b, bound)) = negative {
            let (suspect, bound, at) = zoom(target, b, bound, depth, config);
            return Err(CertError::Failure(Box::new(CertFailure {
                target: target.id(),
                suspect,
                bound,
                kind: FailureKind::NegativeBox,
                depth: at,
                evaluated,
            })));
        }
        if let Some((suspect, bound)) = stalled {
            return Err(CertError::Failure(Box::new(CertFailure {
                target: target.id(),
                suspect,
                bound,
                kind: FailureKind::Inconclusive,
                depth,
                evaluated,
            })));
        }
        level = next;
        depth += 1;
    }

    leaves.sort_by(|a, b| {
        let ka = a.angle_box().expect("valid box");
        let kb = b.angle_box().expect("valid box");
        ka.canonical_cmp(&kb)
    });
    let walltime_ms = start.elapsed().as_millis() as u64;
    Ok(Certificate::new(
        target,
        config,
        leaves,
        evaluated,
        walltime_ms,
    ))
}

/// Follow the child with the smallest upper bound down to the resolution
/// limit, so the reported box sits where the margin is most negative rather
/// than on a coarse box that merely touches that region.
fn zoom(
    target: &InequalityTarget,
    mut b: AngleBox,
    mut bound: Interval,
    mut depth: u32,
    config: &CertConfig,
) -> (AngleBox, Interval, u32) {
    while depth < config.max_depth && b.width() > config.min_width {
        let Ok((l, r)) = b.bisect() else { break };
        let best = [l, r]
            .into_iter()
            .filter(|c| !c.below_diagonal())
            .map(|c| {
                (
                    c,
                    target
                        .factored_box(&c)
                        .unwrap_or_else(|_| Interval::entire()),
                )
            })
            .min_by(|x, y| x.1.hi().total_cmp(&y.1.hi()));
        match best {
            Some((c, cb)) if cb.hi() < 0.0 => {
                b = c;
                bound = cb;
                depth += 1;
            }
            _ => break,
        }
    }
    (b, bound, depth)
}

fn classify(target: &InequalityTarget, b: &AngleBox, depth: u32, config: &CertConfig) -> Verdict {
    // an evaluation error means the enclosure is unbounded
    let bound = target
        .factored_box(b)
        .unwrap_or_else(|_| Interval::entire());
    if bound.lo() >= 0.0 {
        Verdict::Verified(bound.lo())
    } else if bound.hi() < 0.0 {
        Verdict::Negative(bound)
    } else if depth >= config.max_depth || b.width() <= config.min_width {
        Verdict::Stalled(bound)
    } else {
        Verdict::Split
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CertConfig {
        CertConfig {
            validation_samples: 2_000,
            ..CertConfig::default()
        }
    }

    #[test]
    fn lemma_targets_certify_and_replay() {
        for fam in [Family::E2, Family::E5, Family::Elem2] {
            let cert = certify(&InequalityTarget::lemma(fam), &quick()).unwrap();
            assert!(cert.count >= 1);
            assert!(replay(&cert).is_ok());
        }
    }

    #[test]
    fn corrupted_factorisation_is_caught() {
        let t = InequalityTarget::lemma(Family::E2).corrupted();
        assert!(matches!(
            validate_reformulation(&t, 1_000, 1),
            Err(CertError::ReformulationMismatch { .. })
        ));
    }

    #[test]
    fn weakened_constant_fails() {
        let t = InequalityTarget::new(Family::E2, 0.99);
        let err = certify(&t, &quick()).unwrap_err();
        let CertError::Failure(f) = err else {
            panic!("expected a failure, got {err}");
        };
        let (c1, c2) = f.suspect.center();
        assert!(c1.abs() < 1e-3 && c2.abs() < 1e-3, "{f}");
    }

    #[test]
    fn budget_is_enforced() {
        let t = InequalityTarget::new(Family::Elem2, 1.9);
        let cfg = CertConfig {
            budget: 3,
            ..quick()
        };
        assert!(matches!(
            certify(&t, &cfg),
            Err(CertError::BudgetExhausted { .. })
        ));
    }
}
