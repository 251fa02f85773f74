use kgv_core::sharpness::{
    alpha_blowup_slope, exponent_sides, extremal_ratio, find_violation, hp::Hp, hp_margin,
    run_grid, scan_for_violations, RatioFamily, SharpnessError,
};

const EXPONENTS: [f64; 5] = [0.55, 0.6, 0.65, 0.7, 0.74];
const CONSTANTS: [f64; 4] = [1.0, 2.0, 10.0, 100.0];

#[test]
fn every_grid_cell_has_a_verified_violation() {
    let mut hp = Hp::default();
    let grid = run_grid(&EXPONENTS, &CONSTANTS);
    assert_eq!(grid.len(), 20);
    for (a, c, r) in grid {
        let v = r.unwrap_or_else(|e| panic!("a = {a}, C = {c}: {e}"));
        assert!(v.xi2 > v.xi1);
        assert!(v.margin < 0.0 && v.hp_margin < 0.0);
        assert!(hp_margin(&mut hp, a, c, v.xi1, v.xi2) < 0.0);
        let (lhs, rhs) = exponent_sides(a, c, v.xi1, v.xi2).unwrap();
        assert_eq!((lhs, rhs), (v.lhs, v.rhs));
    }
}

#[test]
fn search_is_deterministic() {
    assert_eq!(
        find_violation(0.6, 10.0).unwrap(),
        find_violation(0.6, 10.0).unwrap()
    );
}

#[test]
fn no_violation_at_three_quarters() {
    let r = scan_for_violations(0.75, 1.0, 10_000_000, 7);
    assert_eq!(r.samples, 10_000_000);
    assert!(r.violations.is_empty(), "{:?}", r.violations.first());
    assert!(r.min_rel_margin > -1e-9, "{:e}", r.min_rel_margin);
}

#[test]
fn scan_finds_violations_below_three_quarters() {
    let r = scan_for_violations(0.55, 1.0, 200_000, 3);
    assert!(!r.violations.is_empty());
    let mut hp = Hp::default();
    for v in &r.violations {
        assert!(hp_margin(&mut hp, v.a, v.c, v.xi1, v.xi2) < 0.0);
    }
}

fn assert_increasing_to(trace: &[(f64, f64)], limit: f64) {
    for w in trace.windows(2) {
        assert!(
            w[1].1 >= w[0].1 - 1e-14 * limit,
            "{:?} then {:?}",
            w[0],
            w[1]
        );
    }
    let last = trace.last().unwrap().1;
    assert!((last - limit).abs() < 1e-6 * limit, "ends at {last}");
    assert!(trace.iter().all(|s| s.1 <= limit * (1.0 + 1e-12)));
}

#[test]
fn ratio_traces_increase_to_the_constants() {
    let t1 = extremal_ratio(RatioFamily::Sigma1OverJ, 12).unwrap();
    assert_increasing_to(&t1.samples, 1.0);
    let t2 = extremal_ratio(RatioFamily::Sigma2OverJ, 8).unwrap();
    assert_increasing_to(&t2.samples, 2.0);
    assert!(matches!(
        extremal_ratio(RatioFamily::Sigma1OverJ, 0),
        Err(SharpnessError::BadLength(0))
    ));
}

#[test]
fn blowup_slope_below_one() {
    let (slope, trace) = alpha_blowup_slope(0.9, 1.0).unwrap();
    assert!((slope + 0.1).abs() <= 0.005, "slope {slope}");
    assert!(trace.samples.windows(2).all(|w| w[1].1 > w[0].1));
    let (control, _) = alpha_blowup_slope(1.0, 1.0).unwrap();
    assert!(control.abs() < 1e-3, "control slope {control}");
    assert!(alpha_blowup_slope(1.2, 1.0).is_err());
}
