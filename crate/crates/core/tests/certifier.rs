use kgv_core::certifier::{
    certify, replay, AngleBox, BoxRecord, CertConfig, CertError, Certificate, ExactF64,
    FailureKind, Family, InequalityTarget, ReplayError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

fn config(workers: usize) -> CertConfig {
    CertConfig {
        workers,
        validation_samples: 20_000,
        ..CertConfig::default()
    }
}

fn lemma_certificates() -> Vec<Certificate> {
    [Family::E2, Family::E5, Family::Elem2]
        .into_iter()
        .map(|f| certify(&InequalityTarget::lemma(f), &config(1)).unwrap())
        .collect()
}

/// Every leaf of the bisection tree down to `depth`, minus those strictly
/// below the diagonal, with its recomputed lower bound.
fn uniform_tiling(target: &InequalityTarget, depth: u32) -> Certificate {
    let mut level = vec![AngleBox::root()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for b in level {
            let (l, r) = b.bisect().unwrap();
            next.extend([l, r].into_iter().filter(|c| !c.below_diagonal()));
        }
        level = next;
    }
    let cfg = config(1);
    let boxes = level
        .iter()
        .map(|b| BoxRecord::new(b, target.factored_box(b).unwrap().lo()))
        .collect();
    Certificate::new(target, &cfg, boxes, 0, 0)
}

#[test]
fn lemma_certificates_replay() {
    for cert in lemma_certificates() {
        let rep = replay(&cert).unwrap();
        assert!(rep.boxes >= 1 && rep.boxes <= 10_000_000);
        assert!(rep.min_bound >= 0.0);
        let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
        assert_eq!(back, cert);
    }
}

/// The certified statements hold at a million random points, and the
/// factored margin at each point is at least its box's stored bound.
#[test]
fn certificates_are_sound_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for cert in lemma_certificates() {
        let target = cert.target();
        let leaves: Vec<(AngleBox, f64)> = cert
            .boxes
            .iter()
            .map(|r| (r.angle_box().unwrap(), r.bound.0))
            .collect();
        for _ in 0..1_000_000 / 3 {
            let a: f64 = rng.gen_range(-HALF_PI..HALF_PI);
            let b: f64 = rng.gen_range(-HALF_PI..HALF_PI);
            let (t1, t2) = (a.min(b), a.max(b));
            let (_, bound) = leaves
                .iter()
                .find(|(bx, _)| bx.t1.contains(t1) && bx.t2.contains(t2))
                .expect("point not covered");
            let f = target.factored::<f64>(t1, t2).unwrap();
            assert!(
                f >= *bound - 1e-15,
                "{}: {f:e} < {bound:e} at ({t1}, {t2})",
                target.id()
            );
            let (x1, x2) = (t1.tan(), t2.tan());
            let (lhs, rhs) = target.sides(x1, x2).unwrap();
            assert!(
                lhs >= rhs - 1e-12 * lhs.abs().max(rhs.abs()),
                "{}: {lhs:e} < {rhs:e} at ({x1}, {x2})",
                target.id()
            );
        }
    }
}

#[test]
fn deep_tiling_replays() {
    let target = InequalityTarget::lemma(Family::E2);
    let cert = uniform_tiling(&target, 8);
    assert!(cert.boxes.len() > 100);
    assert!(replay(&cert).is_ok());
}

#[test]
fn deleted_box_is_a_gap() {
    let target = InequalityTarget::lemma(Family::E5);
    let mut cert = uniform_tiling(&target, 6);
    cert.boxes.remove(cert.boxes.len() / 2);
    cert.count -= 1;
    assert!(matches!(replay(&cert), Err(ReplayError::TileGap { .. })));

    let mut single = certify(&target, &config(1)).unwrap();
    single.boxes.clear();
    single.count = 0;
    assert!(matches!(replay(&single), Err(ReplayError::TileGap { .. })));
}

#[test]
fn duplicated_box_overlaps() {
    let target = InequalityTarget::lemma(Family::Elem2);
    let mut cert = uniform_tiling(&target, 6);
    let dup = cert.boxes[3].clone();
    cert.boxes.push(dup);
    cert.count += 1;
    assert!(matches!(
        replay(&cert),
        Err(ReplayError::TileOverlap { .. })
    ));
}

#[test]
fn flipped_bound_is_rejected() {
    let target = InequalityTarget::lemma(Family::E2);
    let mut cert = uniform_tiling(&target, 4);
    let i = cert.boxes.iter().position(|b| b.bound.0 > 0.0).unwrap();
    cert.boxes[i].bound = ExactF64(-cert.boxes[i].bound.0);
    assert!(matches!(replay(&cert), Err(ReplayError::NegativeBound { index, .. }) if index == i));

    // a stored bound that the boxes do not support
    let weaker = InequalityTarget::new(Family::E2, 0.99);
    let mut forged = uniform_tiling(&target, 4);
    forged.target.constant = ExactF64(weaker.constant);
    assert!(matches!(
        replay(&forged),
        Err(ReplayError::NegativeBound { .. })
    ));
}

#[test]
fn count_mismatch_is_reported() {
    let mut cert = certify(&InequalityTarget::lemma(Family::E2), &config(1)).unwrap();
    cert.count += 1;
    assert!(matches!(
        replay(&cert),
        Err(ReplayError::CountMismatch { .. })
    ));
}

#[test]
fn results_do_not_depend_on_workers() {
    for f in [Family::E2, Family::E5, Family::Elem2] {
        let t = InequalityTarget::lemma(f);
        let a = certify(&t, &config(1)).unwrap();
        for w in [2, 4] {
            let b = certify(&t, &config(w)).unwrap();
            assert!(a.same_tiling(&b));
        }
    }
    for t in [
        InequalityTarget::new(Family::E2, 0.99),
        InequalityTarget::new(Family::Elem2, 1.9),
    ] {
        let fail = |w| match certify(&t, &config(w)) {
            Err(CertError::Failure(f)) => *f,
            other => panic!("{}: expected a failure, got {other:?}", t.id()),
        };
        let a = fail(1);
        for w in [2, 4] {
            assert_eq!(a, fail(w));
        }
    }
}

#[test]
fn weakened_constants_fail_in_the_expected_regions() {
    let e2 = match certify(&InequalityTarget::new(Family::E2, 0.99), &config(1)) {
        Err(CertError::Failure(f)) => f,
        other => panic!("{other:?}"),
    };
    assert_eq!(e2.kind, FailureKind::NegativeBox);
    let (x1, x2) = e2.xi_center();
    assert!(x1.abs() < 1e-3 && x2.abs() < 1e-3, "({x1}, {x2})");

    let el = match certify(&InequalityTarget::new(Family::Elem2, 1.9), &config(1)) {
        Err(CertError::Failure(f)) => f,
        other => panic!("{other:?}"),
    };
    let (x1, x2) = el.xi_center();
    assert!(x1 * x2 > 0.0, "opposite signs: ({x1}, {x2})");
    assert!(x1.abs().max(x2.abs()) > 1e3, "not far out: ({x1}, {x2})");
}

#[test]
fn budget_exhaustion_is_reported() {
    let cfg = CertConfig {
        budget: 3,
        ..config(1)
    };
    let r = certify(&InequalityTarget::new(Family::Elem2, 1.9), &cfg);
    assert!(matches!(r, Err(CertError::BudgetExhausted { .. })), "{r:?}");
}

#[test]
fn composition_covers_the_alpha_range() {
    use kgv_core::certifier::{compose_interpolation, ComposeError};
    let certs = lemma_certificates();
    let (e2, elem2) = (&certs[0], &certs[2]);
    for a in [1.0, 1.1, 1.25, 1.5, 1.75, 1.9, 2.0] {
        let c = compose_interpolation(e2, elem2, a).unwrap();
        assert_eq!(c.constant, 2f64.powf(a - 1.0));
        assert!(c.spot_check.passed && c.spot_check.samples == 100_000);
        assert!(c.spot_check.max_ratio <= 1.0 + kgv_core::certifier::SPOT_CHECK_TOL);
    }
    assert!(matches!(
        compose_interpolation(e2, elem2, 2.5),
        Err(ComposeError::AlphaOutOfRange(_))
    ));
    assert!(matches!(
        compose_interpolation(elem2, e2, 1.5),
        Err(ComposeError::WrongTarget { .. })
    ));
    let mut broken = elem2.clone();
    broken.boxes.clear();
    broken.count = 0;
    assert!(matches!(
        compose_interpolation(e2, &broken, 1.5),
        Err(ComposeError::Replay { .. })
    ));
}
