//! Klein-Gordon half-wave propagation and the bilinear space-time norm.
//!
//! Conventions: `f^(xi) = int f(x) e^{-i x xi} dx` and
//! `u(t, x) = (1/2pi) int f^(xi) e^{i x xi + i t sqrt(1 + xi^2)} dxi`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgfun::{self, KgError};

mod profile;

pub use profile::{AnalyticProfile, FrequencyProfile, Shape, MAX_DXI};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilinearError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("supports [{}, {}] and [{}, {}] are not separated", .s1.0, .s1.1, .s2.0, .s2.1)]
    SupportsOverlap { s1: (f64, f64), s2: (f64, f64) },
    #[error("space-time norm did not settle by T = {t_reached}: last increment {increment:e}")]
    NotConverged { t_reached: f64, increment: f64 },
    #[error("bad profile: {0}")]
    BadProfile(String),
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Periodic spatial window `[-L, L)` with `n` points and a time window
/// `[-t_max, t_max]` with step `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub half_width: f64,
    pub n: usize,
    pub t_max: f64,
    pub dt: f64,
}

impl SpaceTimeGrid {
    pub fn new(half_width: f64, n: usize, t_max: f64, dt: f64) -> Result<Self, BilinearError> {
        if !n.is_power_of_two() || n < 8 {
            return Err(BilinearError::GridMismatch(format!(
                "n = {n} is not a power of two >= 8"
            )));
        }
        if !(half_width > 0.0 && t_max >= 0.0 && dt > 0.0) {
            return Err(BilinearError::GridMismatch(
                "window sizes must be positive".into(),
            ));
        }
        Ok(Self {
            half_width,
            n,
            t_max,
            dt,
        })
    }

    /// Smallest power-of-two grid on `[-L, L)` with spacing at most `max_dx`.
    pub fn fitted(
        half_width: f64,
        max_dx: f64,
        t_max: f64,
        dt: f64,
    ) -> Result<Self, BilinearError> {
        let n = ((2.0 * half_width / max_dx).ceil() as usize)
            .next_power_of_two()
            .max(8);
        Self::new(half_width, n, t_max, dt)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Spacing of the frequency lattice dual to the spatial window.
    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn time_steps(&self) -> usize {
        (2.0 * self.t_max / self.dt).round() as usize + 1
    }
}

/// An FFT plan bound to a grid.
pub struct Propagator {
    grid: SpaceTimeGrid,
    fft: Arc<dyn Fft<f64>>,
}

impl Propagator {
    pub fn new(grid: SpaceTimeGrid) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(grid.n);
        Self { grid, fft }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    /// Check that `p` sits on this grid's frequency lattice below Nyquist.
    pub fn check(&self, p: &FrequencyProfile) -> Result<(), BilinearError> {
        let dxi = self.grid.dxi();
        if (p.dxi() - dxi).abs() > 1e-12 * dxi {
            return Err(BilinearError::GridMismatch(format!(
                "profile spacing {} differs from lattice spacing {dxi}",
                p.dxi()
            )));
        }
        let half = (self.grid.n / 2) as i64;
        let m0 = p.first_index();
        let m1 = m0 + p.len() as i64 - 1;
        if m0 <= -half || m1 >= half {
            return Err(BilinearError::GridMismatch(format!(
                "support [{}, {}] exceeds the Nyquist frequency {}",
                p.support().0,
                p.support().1,
                PI / self.grid.dx()
            )));
        }
        Ok(())
    }

    /// `u(t, x_j)` for `x_j = -L + j dx`.
    pub fn propagate(&self, p: &FrequencyProfile, t: f64) -> Result<Vec<Complex64>, BilinearError> {
        self.check(p)?;
        let n = self.grid.n as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.n];
        for (k, &v) in p.values().iter().enumerate() {
            let m = p.first_index() + k as i64;
            let xi = m as f64 * p.dxi();
            // x_j xi_m = -pi m + 2 pi j m / n
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let phase = Complex64::from_polar(sign, t * 1f64.hypot(xi));
            buf[m.rem_euclid(n) as usize] = v * phase;
        }
        self.fft.process(&mut buf);
        let scale = p.dxi() / (2.0 * PI);
        for u in &mut buf {
            *u *= scale;
        }
        Ok(buf)
    }
}

/// `u(t, .)` on `grid`; see [`Propagator::propagate`].
pub fn propagate(
    p: &FrequencyProfile,
    t: f64,
    grid: &SpaceTimeGrid,
) -> Result<Vec<Complex64>, BilinearError> {
    Propagator::new(*grid).propagate(p, t)
}

/// `int |u|^2 dx` on the lattice.
pub fn spatial_norm_sq(u: &[Complex64], dx: f64) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

/// Fraction of `int |u|^2` carried by `|x| > 0.9 L`.
pub fn boundary_fraction(u: &[Complex64], grid: &SpaceTimeGrid) -> f64 {
    let cut = 0.9 * grid.half_width;
    let mut edge = 0.0;
    let mut total = 0.0;
    for (j, z) in u.iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if grid.x(j).abs() > cut {
            edge += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacetimeConfig {
    /// Largest spatial step.
    pub dx: f64,
    pub dt: f64,
    pub t_start: f64,
    /// Largest `T` tried before giving up.
    pub t_budget: f64,
    /// Relative increment under which a doubling counts as converged.
    pub tolerance: f64,
    pub alias_tolerance: f64,
}

impl Default for SpacetimeConfig {
    fn default() -> Self {
        Self {
            dx: 0.25,
            dt: 0.5,
            t_start: 16.0,
            t_budget: 4096.0,
            tolerance: 0.01,
            alias_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeResult {
    pub value: f64,
    /// Relative change of the last `T` doubling.
    pub truncation_estimate: f64,
    pub grid: SpaceTimeGrid,
    /// Largest boundary-band energy fraction seen at `t = +-T`.
    pub aliasing_fraction: f64,
    /// `(T, value)` for every window tried.
    pub history: Vec<(f64, f64)>,
}

/// Trapezoid rule in `t` over the grid's window, lattice sum in `x`.
/// Slices run in parallel and are summed in time order.
pub fn spacetime_fixed(
    prop: &Propagator,
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
) -> Result<f64, BilinearError> {
    let g = *prop.grid();
    let nt = g.time_steps();
    let dx = g.dx();
    let slices: Result<Vec<f64>, BilinearError> = (0..nt)
        .into_par_iter()
        .map(|k| {
            let t = -g.t_max + k as f64 * g.dt;
            let u1 = prop.propagate(p1, t)?;
            let u2 = prop.propagate(p2, t)?;
            let s: f64 = u1.iter().zip(&u2).map(|(a, b)| (a * b).norm_sqr()).sum();
            let w = if k == 0 || k + 1 == nt { 0.5 } else { 1.0 };
            Ok(w * s * dx)
        })
        .collect();
    Ok(slices?.into_iter().sum::<f64>() * g.dt)
}

fn window_for(p1: &FrequencyProfile, p2: &FrequencyProfile, t: f64) -> f64 {
    let v = p1.max_group_speed().max(p2.max_group_speed());
    let reach = p1.shift().abs().max(p2.shift().abs());
    1.25 * (v * t + 40.0 + reach)
}

fn on_lattice(
    p: &FrequencyProfile,
    grid: &SpaceTimeGrid,
) -> Result<FrequencyProfile, BilinearError> {
    p.resample(grid.dxi())
}

/// `||u1 u2||^2_{L^2_{t,x}}` with `T` doubled from `t_start` until the
/// relative increment drops below `tolerance`.
pub fn bilinear_norm_spacetime(
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
    cfg: &SpacetimeConfig,
) -> Result<SpacetimeResult, BilinearError> {
    if p1.is_tabulated() && p2.is_tabulated() && (p1.dxi() - p2.dxi()).abs() > 1e-12 * p1.dxi() {
        return Err(BilinearError::GridMismatch(
            "tabulated profiles have different spacings".into(),
        ));
    }
    // tabulated data fixes the lattice up to a power-of-two refinement
    let base_l = [p1, p2]
        .iter()
        .find(|p| p.is_tabulated())
        .map(|p| PI / p.dxi());

    let mut t = cfg.t_start;
    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    let mut last_inc = f64::INFINITY;
    let mut alias_max = 0.0f64;
    while t <= cfg.t_budget {
        let want = window_for(p1, p2, t);
        let mut l = match base_l {
            Some(b) => {
                let mut l = b;
                while l < want {
                    l *= 2.0;
                }
                l
            }
            None => want,
        };
        let (grid, q1, q2, alias) = loop {
            let grid = SpaceTimeGrid::fitted(l, cfg.dx, t, cfg.dt)?;
            let prop = Propagator::new(grid);
            let q1 = on_lattice(p1, &grid)?;
            let q2 = on_lattice(p2, &grid)?;
            let mut alias = 0.0f64;
            for q in [&q1, &q2] {
                for s in [-t, t] {
                    alias = alias.max(boundary_fraction(&prop.propagate(q, s)?, &grid));
                }
            }
            if alias < cfg.alias_tolerance {
                break (grid, q1, q2, alias);
            }
            l *= 2.0;
        };
        alias_max = alias_max.max(alias);
        let value = spacetime_fixed(&Propagator::new(grid), &q1, &q2)?;
        history.push((t, value));
        if let Some(p) = prev {
            last_inc = if value == 0.0 && p == 0.0 {
                0.0
            } else {
                (value - p).abs() / value.abs()
            };
            if last_inc < cfg.tolerance {
                return Ok(SpacetimeResult {
                    value,
                    truncation_estimate: last_inc,
                    grid,
                    aliasing_fraction: alias_max,
                    history,
                });
            }
        }
        prev = Some(value);
        t *= 2.0;
    }
    Err(BilinearError::NotConverged {
        t_reached: t / 2.0,
        increment: last_inc,
    })
}

fn separated<'a>(
    p1: &'a FrequencyProfile,
    p2: &'a FrequencyProfile,
) -> Result<(&'a FrequencyProfile, &'a FrequencyProfile), BilinearError> {
    if p1.overlaps(p2) {
        return Err(BilinearError::SupportsOverlap {
            s1: p1.support(),
            s2: p2.support(),
        });
    }
    Ok(if p1.support().0 < p2.support().0 {
        (p1, p2)
    } else {
        (p2, p1)
    })
}

/// `sum_i sum_j w_i w_j dxi_lo dxi_hi f(...)` over the node pairs, where
/// `lo` is the profile with the lower support. The outer loop runs in
/// parallel and rows are summed in order.
fn pair_sum<F>(lo: &FrequencyProfile, hi: &FrequencyProfile, f: F) -> Result<f64, BilinearError>
where
    F: Fn(f64, Complex64, f64, Complex64) -> Result<f64, KgError> + Sync,
{
    let outer: Vec<(f64, Complex64, f64)> = lo.nodes().collect();
    let inner: Vec<(f64, Complex64, f64)> = hi.nodes().collect();
    let rows: Result<Vec<f64>, KgError> = outer
        .par_iter()
        .map(|&(xa, va, wa)| {
            let mut s = 0.0;
            for &(xb, vb, wb) in &inner {
                s += wb * f(xa, va, xb, vb)?;
            }
            Ok(wa * s)
        })
        .collect();
    Ok(rows?.into_iter().sum::<f64>() * lo.dxi() * hi.dxi())
}

/// `4/(2pi)^2 int_{xi2 >= xi1} |F|^2 / J` with
/// `F = (f^1(xi1) f^2(xi2) + f^1(xi2) f^2(xi1)) / 2`.
pub fn bilinear_norm_frequency(
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
) -> Result<f64, BilinearError> {
    let (lo, hi) = separated(p1, p2)?;
    let s = pair_sum(lo, hi, |xa, va, xb, vb| {
        let f = 0.5 * (va * vb + lo.sample(xb) * hi.sample(xa));
        let n = f.norm_sqr();
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(n / kgfun::jacobian_reformulated(xa, xb)?)
    })?;
    Ok(4.0 / (4.0 * PI * PI) * s)
}

fn weighted_bound(
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
    weight: fn(f64, f64) -> Result<f64, KgError>,
) -> Result<f64, BilinearError> {
    let (lo, hi) = separated(p1, p2)?;
    let s = pair_sum(lo, hi, |xa, va, xb, vb| {
        let n = va.norm_sqr() * vb.norm_sqr();
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(n * weight(xa, xb)?)
    })?;
    Ok(s / (4.0 * PI * PI))
}

/// `1/(2pi)^2 int |f^1|^2 |f^2|^2 (1+xi1^2)^(3/4) (1+xi2^2)^(3/4) / |xi2 - xi1|`.
pub fn bound_thm_a(p1: &FrequencyProfile, p2: &FrequencyProfile) -> Result<f64, BilinearError> {
    weighted_bound(p1, p2, kgfun::weight_thm_a)
}

/// `1/(2pi)^2 int |f^1|^2 |f^2|^2 / (1 - cos(theta1 - theta2))`.
pub fn bound_thm1(p1: &FrequencyProfile, p2: &FrequencyProfile) -> Result<f64, BilinearError> {
    weighted_bound(p1, p2, kgfun::weight_thm1)
}

/// Relative change of the frequency-side value when `dxi` is halved.
/// Both profiles must be analytic.
pub fn frequency_refinement(
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
    dxi: f64,
) -> Result<(f64, f64, f64), BilinearError> {
    let coarse = bilinear_norm_frequency(&p1.resample(dxi)?, &p2.resample(dxi)?)?;
    let fine = bilinear_norm_frequency(&p1.resample(dxi / 2.0)?, &p2.resample(dxi / 2.0)?)?;
    Ok((coarse, fine, (fine - coarse).abs() / fine.abs()))
}

/// Weights evaluated with ordered arguments, so the map is exactly symmetric.
fn weights_at(x1: f64, x2: f64) -> Result<(f64, f64), KgError> {
    let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    Ok((kgfun::weight_thm_a(a, b)?, kgfun::weight_thm1(a, b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xi1: (f64, f64),
    pub xi2: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightCell {
    pub xi1: f64,
    pub xi2: f64,
    pub weight_a: f64,
    pub weight_1: f64,
    /// `sign(weight_a - weight_1)`: `-1` where the first bound is tighter.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMap {
    pub region: Rect,
    pub resolution: usize,
    pub min_gap: f64,
    /// Row-major over `xi1`; `None` marks points within `min_gap` of the diagonal.
    pub cells: Vec<Option<WeightCell>>,
    pub a_tighter: usize,
    pub thm1_tighter: usize,
    pub ties: usize,
    pub excluded: usize,
}

impl WeightMap {
    pub fn cell(&self, i: usize, j: usize) -> Option<&WeightCell> {
        self.cells[i * self.resolution + j].as_ref()
    }
}

fn axis(range: (f64, f64), n: usize, k: usize) -> f64 {
    if n == 1 {
        return 0.5 * (range.0 + range.1);
    }
    let f = k as f64 / (n - 1) as f64;
    range.0 * (1.0 - f) + range.1 * f
}

/// Compare the two weights on an `n x n` node grid over `region`.
pub fn weight_comparison(
    region: Rect,
    resolution: usize,
    min_gap: f64,
) -> Result<WeightMap, BilinearError> {
    if resolution == 0 || !(min_gap > 0.0) {
        return Err(BilinearError::GridMismatch(
            "resolution must be positive and the diagonal gap > 0".into(),
        ));
    }
    let n = resolution;
    let cells: Result<Vec<Option<WeightCell>>, KgError> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let x1 = axis(region.xi1, n, idx / n);
            let x2 = axis(region.xi2, n, idx % n);
            if (x1 - x2).abs() < min_gap {
                return Ok(None);
            }
            let (wa, w1) = weights_at(x1, x2)?;
            let sign = match wa.partial_cmp(&w1) {
                Some(std::cmp::Ordering::Less) => -1,
                Some(std::cmp::Ordering::Greater) => 1,
                _ => 0,
            };
            Ok(Some(WeightCell {
                xi1: x1,
                xi2: x2,
                weight_a: wa,
                weight_1: w1,
                sign,
            }))
        })
        .collect();
    let cells = cells?;
    let mut map = WeightMap {
        region,
        resolution,
        min_gap,
        cells,
        a_tighter: 0,
        thm1_tighter: 0,
        ties: 0,
        excluded: 0,
    };
    for c in &map.cells {
        match c.as_ref().map(|c| c.sign) {
            None => map.excluded += 1,
            Some(-1) => map.a_tighter += 1,
            Some(1) => map.thm1_tighter += 1,
            Some(_) => map.ties += 1,
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub xi1: f64,
    pub xi2: f64,
    pub inv_j: f64,
    pub weight_a: f64,
    pub weight_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub samples: usize,
    pub seed: u64,
    pub excluded: usize,
    /// Smallest `weight J - 1` seen for each weight.
    pub min_slack_a: f64,
    pub min_slack_1: f64,
    pub violations: Vec<OrderingViolation>,
}

/// Relative rounding allowance in `1/J <= weight`.
pub const ORDERING_TOL: f64 = 1e-12;

struct OrderingChunk {
    excluded: usize,
    slack_a: f64,
    slack_1: f64,
    violations: Vec<OrderingViolation>,
}

fn ordering_at(x1: f64, x2: f64, acc: &mut OrderingChunk) {
    let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let j = match kgfun::jacobian_reformulated(a, b) {
        Ok(j) if a != b && j > 0.0 => j,
        _ => {
            acc.excluded += 1;
            return;
        }
    };
    let (wa, w1) = match weights_at(a, b) {
        Ok(w) => w,
        Err(_) => {
            acc.excluded += 1;
            return;
        }
    };
    let inv_j = 1.0 / j;
    acc.slack_a = acc.slack_a.min(wa * j - 1.0);
    acc.slack_1 = acc.slack_1.min(w1 * j - 1.0);
    if inv_j > wa * (1.0 + ORDERING_TOL) || inv_j > w1 * (1.0 + ORDERING_TOL) {
        acc.violations.push(OrderingViolation {
            xi1: a,
            xi2: b,
            inv_j,
            weight_a: wa,
            weight_1: w1,
        });
    }
}

/// Check `1/J <= min(weight_a, weight_1)` at `samples` random points
/// `xi = tan(theta)` with `theta` uniform, plus the point `(0, 1e6)`.
/// Diagonal draws are excluded.
pub fn verify_pointwise_weight_ordering(samples: usize, seed: u64) -> OrderingReport {
    const CHUNK: usize = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<OrderingChunk> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut acc = OrderingChunk {
                excluded: 0,
                slack_a: f64::INFINITY,
                slack_1: f64::INFINITY,
                violations: Vec::new(),
            };
            let n = CHUNK.min(samples - k * CHUNK);
            for i in 0..n {
                if k == 0 && i == 0 {
                    ordering_at(0.0, 1e6, &mut acc);
                    continue;
                }
                let h = PI / 2.0;
                let x1 = rng.gen_range(-h..h).tan();
                let x2 = rng.gen_range(-h..h).tan();
                ordering_at(x1, x2, &mut acc);
            }
            acc
        })
        .collect();
    let mut report = OrderingReport {
        samples,
        seed,
        excluded: 0,
        min_slack_a: f64::INFINITY,
        min_slack_1: f64::INFINITY,
        violations: Vec::new(),
    };
    for p in parts {
        report.excluded += p.excluded;
        report.min_slack_a = report.min_slack_a.min(p.slack_a);
        report.min_slack_1 = report.min_slack_1.min(p.slack_1);
        report.violations.extend(p.violations);
    }
    report
}

/// Peak position of `|u|^2` refined by a parabola through the three
/// samples around the maximum.
pub fn packet_peak(u: &[Complex64], grid: &SpaceTimeGrid) -> f64 {
    let e: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
    let (j, _) =
        e.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    let n = e.len();
    let (a, b, c) = (e[(j + n - 1) % n], e[j], e[(j + 1) % n]);
    let denom = a - 2.0 * b + c;
    let off = if denom != 0.0 {
        0.5 * (a - c) / denom
    } else {
        0.0
    };
    grid.x(j) + off * grid.dx()
}

/// Velocity of the peak of a bump packet on `[xi0 - half, xi0 + half]`,
/// measured as peak drift between `t = 0` and `t`. With the multiplier
/// `e^{+it sqrt(1 + xi^2)}` a packet at `xi0 > 0` moves towards `-x`.
pub fn measure_group_velocity(xi0: f64, half: f64, t: f64) -> Result<f64, BilinearError> {
    let l = 1.25 * (t + 40.0);
    let grid = SpaceTimeGrid::fitted(l, 0.25, t, 1.0)?;
    let prop = Propagator::new(grid);
    let p = FrequencyProfile::bump(xi0 - half, xi0 + half, grid.dxi())?;
    let x0 = packet_peak(&prop.propagate(&p, 0.0)?, &grid);
    let x1 = packet_peak(&prop.propagate(&p, t)?, &grid);
    Ok((x1 - x0) / t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearConfig {
    /// Frequency-side grid spacing for analytic profiles.
    pub frequency_dxi: f64,
    pub spacetime: SpacetimeConfig,
    /// Allowed `|spacetime - frequency| / frequency`.
    pub identity_tolerance: f64,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        Self {
            frequency_dxi: 1.0 / 64.0,
            spacetime: SpacetimeConfig::default(),
            identity_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub kind: String,
    pub support: (f64, f64),
    pub samples: usize,
    pub dxi: f64,
    pub l2_norm_sq: f64,
}

impl ProfileSummary {
    pub fn of(p: &FrequencyProfile, kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            support: p.support(),
            samples: p.len(),
            dxi: p.dxi(),
            l2_norm_sq: p.l2_norm_sq(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilinearReport {
    pub profiles: [ProfileSummary; 2],
    pub spacetime: f64,
    pub frequency: f64,
    pub bound_a: f64,
    pub bound_1: f64,
    pub truncation_estimate: f64,
    /// Relative change of the frequency side under `dxi -> dxi/2`;
    /// absent for tabulated data.
    pub refinement_change: Option<f64>,
    pub relative_discrepancy: f64,
    pub identity_ok: bool,
    pub ordering_ok: bool,
    pub grid: SpaceTimeGrid,
    pub frequency_dxi: f64,
    pub aliasing_fraction: f64,
    pub window_history: Vec<(f64, f64)>,
}

impl BilinearReport {
    pub fn passed(&self) -> bool {
        self.identity_ok && self.ordering_ok
    }

    pub fn csv_header() -> &'static str {
        "support1_lo,support1_hi,support2_lo,support2_hi,spacetime,frequency,bound_a,bound_1,truncation,refinement,discrepancy,passed"
    }

    pub fn csv_row(&self) -> String {
        let [a, b] = &self.profiles;
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{}",
            a.support.0,
            a.support.1,
            b.support.0,
            b.support.1,
            self.spacetime,
            self.frequency,
            self.bound_a,
            self.bound_1,
            self.truncation_estimate,
            self.refinement_change
                .map(|r| format!("{r:?}"))
                .unwrap_or_default(),
            self.relative_discrepancy,
            self.passed()
        )
    }
}

/// Space-time norm, frequency side, both bounds and the refinement check
/// for one pair of profiles.
pub fn run_bilinear(
    p1: &FrequencyProfile,
    p2: &FrequencyProfile,
    kinds: [&str; 2],
    cfg: &BilinearConfig,
) -> Result<BilinearReport, BilinearError> {
    separated(p1, p2)?;
    let analytic = !p1.is_tabulated() && !p2.is_tabulated();
    let (f1, f2) = if analytic {
        (
            p1.resample(cfg.frequency_dxi)?,
            p2.resample(cfg.frequency_dxi)?,
        )
    } else {
        (p1.clone(), p2.clone())
    };
    let (frequency, refinement_change) = if analytic {
        let (coarse, _, change) = frequency_refinement(p1, p2, cfg.frequency_dxi)?;
        (coarse, Some(change))
    } else {
        (bilinear_norm_frequency(&f1, &f2)?, None)
    };
    let bound_a = bound_thm_a(&f1, &f2)?;
    let bound_1 = bound_thm1(&f1, &f2)?;
    let st = bilinear_norm_spacetime(p1, p2, &cfg.spacetime)?;
    let relative_discrepancy = if frequency == 0.0 {
        st.value.abs()
    } else {
        (st.value - frequency).abs() / frequency
    };
    Ok(BilinearReport {
        profiles: [
            ProfileSummary::of(&f1, kinds[0]),
            ProfileSummary::of(&f2, kinds[1]),
        ],
        spacetime: st.value,
        frequency,
        bound_a,
        bound_1,
        truncation_estimate: st.truncation_estimate,
        refinement_change,
        relative_discrepancy,
        identity_ok: relative_discrepancy <= cfg.identity_tolerance,
        ordering_ok: frequency <= bound_a && frequency <= bound_1,
        grid: st.grid,
        frequency_dxi: f1.dxi(),
        aliasing_fraction: st.aliasing_fraction,
        window_history: st.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitarity_and_identity_at_zero() {
        let grid = SpaceTimeGrid::new(64.0, 1024, 0.0, 1.0).unwrap();
        let p = FrequencyProfile::bump(1.0, 2.0, grid.dxi()).unwrap();
        let want = p.l2_norm_sq();
        for t in [0.0, 1.0, 5.0] {
            let u = propagate(&p, t, &grid).unwrap();
            let got = spatial_norm_sq(&u, grid.dx());
            assert!(
                (got - want).abs() / want < 1e-12,
                "t = {t}: {got} vs {want}"
            );
        }
        let off = FrequencyProfile::bump(1.0, 2.0, 0.1).unwrap();
        assert!(matches!(
            propagate(&off, 0.0, &grid),
            Err(BilinearError::GridMismatch(_))
        ));
    }

    #[test]
    fn group_velocity() {
        let v = measure_group_velocity(3.0, 0.25, 10.0).unwrap();
        assert!((v + 3.0 / 10f64.sqrt()).abs() < 5e-3, "v = {v}");
    }

    #[test]
    fn frequency_side_symmetric_and_bounded() {
        let p1 = FrequencyProfile::bump(1.0, 2.0, 1.0 / 64.0).unwrap();
        let p2 = FrequencyProfile::bump(3.0, 4.0, 1.0 / 64.0).unwrap();
        let a = bilinear_norm_frequency(&p1, &p2).unwrap();
        let b = bilinear_norm_frequency(&p2, &p1).unwrap();
        assert_eq!(a, b);
        assert!(a < bound_thm_a(&p1, &p2).unwrap());
        assert!(a < bound_thm1(&p1, &p2).unwrap());
        assert!(matches!(
            bilinear_norm_frequency(&p1, &p1),
            Err(BilinearError::SupportsOverlap { .. })
        ));
    }

    #[test]
    fn identity_holds_for_standard_pair() {
        let p1 = FrequencyProfile::bump(1.0, 2.0, 1.0 / 64.0).unwrap();
        let p2 = FrequencyProfile::bump(3.0, 4.0, 1.0 / 64.0).unwrap();
        let r = run_bilinear(&p1, &p2, ["bump", "bump"], &BilinearConfig::default()).unwrap();
        eprintln!("{r:#?}");
        assert!(r.passed());
        assert!(r.refinement_change.unwrap() < 1e-3);
    }

    #[test]
    fn weight_map_examples() {
        let (wa, w1) = weights_at(0.0, 1.0).unwrap();
        assert!((wa - 1.6818).abs() < 1e-4 && (w1 - 3.4142).abs() < 1e-4);
        let (wa, w1) = weights_at(-1.0, 1.0).unwrap();
        assert!((wa - std::f64::consts::SQRT_2).abs() < 1e-12 && (w1 - 1.0).abs() < 1e-12);
        let m = weight_comparison(
            Rect {
                xi1: (-3.0, 3.0),
                xi2: (-3.0, 3.0),
            },
            41,
            0.1,
        )
        .unwrap();
        for i in 0..41 {
            for j in 0..41 {
                assert_eq!(m.cell(i, j).map(|c| c.sign), m.cell(j, i).map(|c| c.sign));
            }
        }
        assert!(m.a_tighter > 0 && m.thm1_tighter > 0);
    }

    #[test]
    fn ordering_sample() {
        let r = verify_pointwise_weight_ordering(10_000, 1);
        assert!(r.violations.is_empty(), "{:?}", &r.violations[..1]);
    }
}
