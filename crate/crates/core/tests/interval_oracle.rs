//! Containment of exact results in interval enclosures, checked against a
//! 256-bit evaluation of the same operation at points of the inputs.

use astro_float::BigFloat;
use kgv_core::interval::{Interval, Rational};
use kgv_core::sharpness::hp::Hp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CASES: usize = 100_000;
const CHUNK: usize = 5_000;

fn magnitude(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.gen_range(lo_exp..hi_exp))
}

/// A random interval inside `[min, max]` of random width, with a few exact
/// points mixed in.
fn interval_in(rng: &mut ChaCha8Rng, min: f64, max: f64) -> Interval {
    let c = rng.gen_range(min..=max);
    if rng.gen_bool(0.05) {
        return Interval::point(c);
    }
    let w = magnitude(rng, -15.0, 0.0) * (max - min);
    let lo = (c - w * rng.gen::<f64>()).max(min);
    let hi = (c + w * rng.gen::<f64>()).min(max);
    Interval::new(lo, hi).unwrap()
}

fn signed_interval(rng: &mut ChaCha8Rng) -> Interval {
    let m = magnitude(rng, -3.0, 3.0);
    interval_in(rng, -m, m)
}

fn positive_interval(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> Interval {
    let a = magnitude(rng, lo_exp, hi_exp);
    let b = a * (1.0 + magnitude(rng, -15.0, 0.5));
    Interval::new(a, b).unwrap()
}

/// An endpoint or an interior point of `x`.
fn point_in(rng: &mut ChaCha8Rng, x: &Interval) -> f64 {
    match rng.gen_range(0..4) {
        0 => x.lo(),
        1 => x.hi(),
        _ => {
            let p = x.lo() + rng.gen::<f64>() * (x.hi() - x.lo());
            p.clamp(x.lo(), x.hi())
        }
    }
}

/// Run `case` on `CASES` seeds across threads and collect any escapes.
fn check<F>(name: &str, seed: u64, case: F)
where
    F: Fn(&mut ChaCha8Rng, &mut Hp) -> Option<String> + Sync,
{
    let escapes: Vec<String> = (0..CASES / CHUNK)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64 * 7919));
            let mut hp = Hp::default();
            let mut out = Vec::new();
            for _ in 0..CHUNK {
                out.extend(case(&mut rng, &mut hp));
            }
            out
        })
        .collect();
    assert!(
        escapes.is_empty(),
        "{name}: {} escapes, first: {}",
        escapes.len(),
        escapes[0]
    );
}

fn contained(hp: &Hp, exact: &BigFloat, r: &Interval) -> bool {
    hp.within(exact, r.lo(), r.hi())
}

fn binary<F, G>(
    name: &str,
    seed: u64,
    gen: fn(&mut ChaCha8Rng) -> (Interval, Interval),
    op: F,
    exact: G,
) where
    F: Fn(&Interval, &Interval) -> Interval + Sync,
    G: Fn(&Hp, &BigFloat, &BigFloat) -> BigFloat + Sync,
{
    check(name, seed, |rng, hp| {
        let (x, y) = gen(rng);
        let r = op(&x, &y);
        let (a, b) = (point_in(rng, &x), point_in(rng, &y));
        let e = exact(hp, &hp.exact(a), &hp.exact(b));
        (!contained(hp, &e, &r)).then(|| format!("{x} op {y} = {r}, point ({a:?}, {b:?})"))
    });
}

fn unary<F, G>(name: &str, seed: u64, gen: fn(&mut ChaCha8Rng) -> Interval, op: F, exact: G)
where
    F: Fn(&Interval) -> Interval + Sync,
    G: Fn(&mut Hp, &BigFloat) -> BigFloat + Sync,
{
    check(name, seed, |rng, hp| {
        let x = gen(rng);
        let r = op(&x);
        let a = point_in(rng, &x);
        let xa = hp.exact(a);
        let e = exact(hp, &xa);
        (!contained(hp, &e, &r)).then(|| format!("f({x}) = {r}, point {a:?}"))
    });
}

fn two_signed(rng: &mut ChaCha8Rng) -> (Interval, Interval) {
    (signed_interval(rng), signed_interval(rng))
}

#[test]
fn add_sub_mul_are_sound() {
    binary(
        "add",
        1,
        two_signed,
        |x, y| *x + *y,
        |hp, a, b| hp.add(a, b),
    );
    binary(
        "sub",
        2,
        two_signed,
        |x, y| *x - *y,
        |hp, a, b| hp.sub(a, b),
    );
    binary(
        "mul",
        3,
        two_signed,
        |x, y| *x * *y,
        |hp, a, b| hp.mul(a, b),
    );
}

#[test]
fn div_is_sound() {
    fn gen(rng: &mut ChaCha8Rng) -> (Interval, Interval) {
        let y = positive_interval(rng, -3.0, 3.0);
        let y = if rng.gen_bool(0.5) { -y } else { y };
        (signed_interval(rng), y)
    }
    binary(
        "div",
        4,
        gen,
        |x, y| x.div(y).unwrap(),
        |hp, a, b| hp.div(a, b),
    );
}

#[test]
fn sqr_abs_recip_sqrt_are_sound() {
    unary("sqr", 5, signed_interval, |x| x.sqr(), |hp, a| hp.mul(a, a));
    unary("abs", 6, signed_interval, |x| x.abs(), |hp, a| hp.abs(a));
    unary(
        "recip",
        7,
        |rng| positive_interval(rng, -3.0, 3.0),
        |x| x.recip().unwrap(),
        |hp, a| hp.div(&hp.exact(1.0), a),
    );
    unary(
        "sqrt",
        8,
        |rng| positive_interval(rng, -6.0, 6.0),
        |x| x.sqrt().unwrap(),
        |hp, a| hp.sqrt(a),
    );
}

#[test]
fn pow_int_is_sound() {
    check("pow_int", 9, |rng, hp| {
        let m = magnitude(rng, -1.0, 1.0);
        let x = interval_in(rng, -m, m);
        let n = rng.gen_range(-6i64..=7);
        if n < 0 && x.contains_zero() {
            return None;
        }
        let r = x.pow_int(n).unwrap();
        let a = point_in(rng, &x);
        let mut e = hp.exact(1.0);
        let base = hp.exact(a);
        for _ in 0..n.unsigned_abs() {
            e = hp.mul(&e, &base);
        }
        if n < 0 {
            e = hp.div(&hp.exact(1.0), &e);
        }
        (!contained(hp, &e, &r)).then(|| format!("{x}^{n} = {r}, point {a:?}"))
    });
}

/// `y` in `[lo, hi]` with `y = x^(num/den)` is checked as
/// `lo^den <= x^num <= hi^den`, using exact products at 2048 bits.
#[test]
fn pow_rational_is_sound() {
    fn ipow(hp: &Hp, x: &BigFloat, n: u64) -> BigFloat {
        let mut e = hp.exact(1.0);
        for _ in 0..n {
            e = hp.mul(&e, x);
        }
        e
    }
    check("pow_rational", 10, |rng, _| {
        let hp = Hp::new(2048);
        let x = positive_interval(rng, -3.0, 3.0);
        let den = [1i64, 2, 3, 4, 5, 7, 8, 16, 12][rng.gen_range(0..9)];
        let num = rng.gen_range(-20i64..=20);
        let p = Rational::new(num, den).unwrap();
        let r = x.pow_rational(p).unwrap();
        let a = hp.exact(point_in(rng, &x));
        let k = p.denominator() as u64;
        let m = p.numerator();
        let xm = ipow(&hp, &a, m.unsigned_abs());
        let one = hp.exact(1.0);
        // compare t^k with x^m, i.e. t^k x^|m| with 1 when m < 0
        let side = |t: f64| {
            let tk = ipow(&hp, &hp.exact(t), k);
            if m < 0 {
                hp.mul(&tk, &xm).cmp(&one)
            } else {
                tk.cmp(&xm)
            }
        };
        let ok = r.lo() >= 0.0
            && matches!(side(r.lo()), Some(c) if c <= 0)
            && (r.hi() == f64::INFINITY || matches!(side(r.hi()), Some(c) if c >= 0));
        (!ok).then(|| format!("{x}^({num}/{den}) = {r}"))
    });
}

#[test]
fn powf_is_sound() {
    check("powf", 11, |rng, hp| {
        let x = positive_interval(rng, -3.0, 3.0);
        let p: f64 = rng.gen_range(-3.0..3.0);
        let r = x.powf(p).unwrap();
        let a = point_in(rng, &x);
        let (base, ex) = (hp.exact(a), hp.exact(p));
        let e = hp.pow(&base, &ex);
        (!contained(hp, &e, &r)).then(|| format!("{x}^{p:?} = {r}, point {a:?}"))
    });
}

#[test]
fn sin_cos_are_sound() {
    fn gen(rng: &mut ChaCha8Rng) -> Interval {
        interval_in(rng, -std::f64::consts::TAU, std::f64::consts::TAU)
    }
    unary("sin", 12, gen, |x| x.sin().unwrap(), |hp, a| hp.sin(a));
    unary("cos", 13, gen, |x| x.cos().unwrap(), |hp, a| hp.cos(a));
}

#[test]
fn exp_ln_are_sound() {
    unary(
        "exp",
        14,
        |rng| interval_in(rng, -700.0, 700.0),
        |x| x.exp().unwrap(),
        |hp, a| hp.exp(a),
    );
    unary(
        "ln",
        15,
        |rng| positive_interval(rng, -300.0, 300.0),
        |x| x.ln().unwrap(),
        |hp, a| hp.ln(a),
    );
}

/// `sqrt(x^2 + |y|) sin(x) - exp(y) / (1 + x^2)` on small boxes.
#[test]
fn compositions_are_sound() {
    check("composition", 16, |rng, hp| {
        let x = interval_in(rng, -3.0, 3.0);
        let y = interval_in(rng, -3.0, 3.0);
        let one = Interval::one();
        let r = (x.sqr() + y.abs()).sqrt().unwrap() * x.sin().unwrap()
            - y.exp().unwrap().div(&(one + x.sqr())).unwrap();
        let (a, b) = (point_in(rng, &x), point_in(rng, &y));
        let (ha, hb) = (hp.exact(a), hp.exact(b));
        let s = hp.sqrt(&hp.add(&hp.mul(&ha, &ha), &hp.abs(&hb)));
        let sin = hp.sin(&ha);
        let ex = hp.exp(&hb);
        let den = hp.add(&hp.exact(1.0), &hp.mul(&ha, &ha));
        let e = hp.sub(&hp.mul(&s, &sin), &hp.div(&ex, &den));
        (!contained(hp, &e, &r)).then(|| format!("x = {x}, y = {y}: {r}, point ({a:?}, {b:?})"))
    });
}

/// The jacobian and weights built from interval primitives enclose their
/// high-precision values.
#[test]
fn kg_expressions_are_sound() {
    check("chordal", 17, |rng, hp| {
        let t1 = interval_in(rng, -1.5, 1.5);
        let t2 = interval_in(rng, -1.5, 1.5);
        let r = kgv_core::kgfun::chordal_theta(t1, t2).unwrap();
        let (a, b) = (point_in(rng, &t1), point_in(rng, &t2));
        let d = hp.sub(&hp.exact(a), &hp.exact(b));
        let s = hp.sin(&d);
        let e = hp.abs(&s);
        (!contained(hp, &e, &r)).then(|| format!("chi({t1}, {t2}) = {r}, point ({a:?}, {b:?})"))
    });
}
