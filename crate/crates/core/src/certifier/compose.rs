use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::certificate::Certificate;
use super::replay::{replay, ReplayError};
use super::target::{Family, InequalityTarget};
use crate::kgfun::{self, AlphaParam, KgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("alpha = {0} is outside [1, 2]")]
    AlphaOutOfRange(f64),
    #[error("expected a certificate for {expected}, got {got}")]
    WrongTarget { expected: String, got: String },
    #[error("certificate for {target} does not replay: {source}")]
    Replay { target: String, source: ReplayError },
    #[error("spot check failed at s = ({s1:?}, {s2:?}): sigma = {sigma:e} > {bound:e}")]
    SpotCheckFailed {
        s1: f64,
        s2: f64,
        sigma: f64,
        bound: f64,
    },
    #[error(transparent)]
    Kg(#[from] KgError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheck {
    pub samples: usize,
    pub seed: u64,
    /// Largest observed `sigma_alpha / (2^(alpha-1) J)`.
    pub max_ratio: f64,
    pub passed: bool,
}

/// The conclusion `sigma_alpha <= 2^(alpha-1) J` on the extended plane,
/// obtained from the two endpoint certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolatedConclusion {
    pub alpha: f64,
    pub constant: f64,
    pub statement: String,
    pub justification: Vec<String>,
    pub certificates: [String; 2],
    pub spot_check: SpotCheck,
}

/// Relative slack allowed by the spot check.
pub const SPOT_CHECK_TOL: f64 = 1e-12;
pub const SPOT_CHECK_SAMPLES: usize = 100_000;

/// Combine a certificate of `sigma_1 <= J` (upper triangle) and one of
/// `sigma_2 <= 2 J` (upper triangle) into `sigma_alpha <= 2^(alpha-1) J`.
///
/// Both sides are symmetric in `(xi1, xi2)`, so the triangle covers the
/// plane, and `sigma_alpha = sigma_1^(2-alpha) sigma_2^(alpha-1)` gives
/// `sigma_alpha <= J^(2-alpha) (2J)^(alpha-1) = 2^(alpha-1) J`.
pub fn compose_interpolation(
    cert_e2: &Certificate,
    cert_elem2: &Certificate,
    alpha: f64,
) -> Result<InterpolatedConclusion, ComposeError> {
    let alpha_param = AlphaParam::new(alpha).map_err(|_| ComposeError::AlphaOutOfRange(alpha))?;
    let want_e2 = InequalityTarget::lemma(Family::E2);
    let want_el = InequalityTarget::lemma(Family::Elem2);
    for (cert, want) in [(cert_e2, want_e2), (cert_elem2, want_el)] {
        let got = cert.target();
        if got.family != want.family || got.constant != want.constant {
            return Err(ComposeError::WrongTarget {
                expected: want.id(),
                got: got.id(),
            });
        }
        replay(cert).map_err(|source| ComposeError::Replay {
            target: got.id(),
            source,
        })?;
    }

    let constant = 2f64.powf(alpha - 1.0);
    let spot_check = spot_check(alpha_param, SPOT_CHECK_SAMPLES, 0x5eed)?;
    Ok(InterpolatedConclusion {
        alpha,
        constant,
        statement: format!(
            "sigma_{alpha:?}(xi1, xi2) <= 2^({alpha:?} - 1) J(xi1, xi2) = {constant:?} J(xi1, xi2) \
             for all xi1, xi2 in the extended line"
        ),
        justification: vec![
            format!(
                "{} holds on theta1 <= theta2 (certificate replayed)",
                want_e2.statement()
            ),
            format!(
                "{} holds on theta1 <= theta2 (certificate replayed)",
                want_el.statement()
            ),
            "sigma_alpha and J are symmetric in (xi1, xi2), so both hold on the whole square"
                .into(),
            format!(
                "sigma_alpha = sigma_1^(2 - alpha) sigma_2^(alpha - 1) <= J^{:?} (2 J)^{:?}",
                2.0 - alpha,
                alpha - 1.0
            ),
        ],
        certificates: [want_e2.id(), want_el.id()],
        spot_check,
    })
}

/// Check `sigma_alpha <= 2^(alpha-1) J` at random `s` in `[-1, 1]^2`, with
/// the four corners included. Evaluated in angle form, where `J` is
/// `2 cos(Sigma/2) |sin(Delta/2)|` and no difference cancels.
pub fn spot_check(alpha: AlphaParam, samples: usize, seed: u64) -> Result<SpotCheck, ComposeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = alpha.value();
    let constant = 2f64.powf(a - 1.0);
    let corners = [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (1.0, 1.0)];
    let mut max_ratio = 0.0f64;
    for i in 0..samples {
        let (s1, s2): (f64, f64) = if i < corners.len() {
            corners[i]
        } else {
            (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
        };
        let (t1, t2) = (s1.asin(), s2.asin());
        let sigma = kgfun::sigma_theta(alpha, t1, t2)?;
        let j = 2.0 * (0.5 * (t1 + t2)).cos().max(0.0) * (0.5 * (t2 - t1)).sin().abs();
        let bound = constant * j;
        if sigma > bound * (1.0 + SPOT_CHECK_TOL) + f64::MIN_POSITIVE {
            return Err(ComposeError::SpotCheckFailed {
                s1,
                s2,
                sigma,
                bound,
            });
        }
        if bound > 0.0 {
            max_ratio = max_ratio.max(sigma / bound);
        }
    }
    Ok(SpotCheck {
        samples,
        seed,
        max_ratio,
        passed: true,
    })
}
