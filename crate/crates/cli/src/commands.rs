use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use kgv_core::bilinear::{
    self, BilinearConfig, BilinearError, FrequencyProfile, Rect, SpacetimeConfig,
};
use kgv_core::certifier::{
    self, compose_interpolation, CertConfig, CertError, Certificate, Family, InequalityTarget,
};
use kgv_core::sharpness::{self, RatioFamily};

use crate::{Resolved, Verdict};

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// E2, E5 or Elem2.
    #[arg(long)]
    target: Option<String>,
    /// Constant in front of J; defaults to the sharp value for the target.
    #[arg(long)]
    constant: Option<f64>,
    /// Also derive the interpolated bound for these alphas in [1, 2].
    #[arg(long, value_delimiter = ',')]
    compose: Vec<f64>,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long)]
    budget: Option<u64>,
}

fn cert_config(args: &CertifyArgs, r: &Resolved) -> CertConfig {
    let s = &r.file.certify;
    let d = CertConfig::default();
    CertConfig {
        max_depth: args.max_depth.or(s.max_depth).unwrap_or(d.max_depth),
        min_width: r.tolerance.or(s.min_width).unwrap_or(d.min_width),
        workers: r.workers,
        budget: args.budget.or(s.budget).unwrap_or(d.budget),
        validation_samples: s.validation_samples.unwrap_or(d.validation_samples),
        seed: r.seed,
    }
}

fn cert_path(out: &Path, target: &InequalityTarget) -> PathBuf {
    out.join(format!(
        "certificate-{}-{:?}.json",
        target.family, target.constant
    ))
}

/// `Ok(None)` when the search ran but did not certify.
fn certify_one(
    target: &InequalityTarget,
    cfg: &CertConfig,
    out: &Path,
) -> Result<Option<Certificate>> {
    match certifier::certify(target, cfg) {
        Ok(cert) => {
            let path = cert_path(out, target);
            cert.write(&path)?;
            println!("{cert}");
            println!("wrote {}", path.display());
            Ok(Some(cert))
        }
        Err(CertError::Failure(f)) => {
            eprintln!("{f}");
            let (x1, x2) = f.xi_center();
            let record = json!({
                "target": f.target,
                "kind": format!("{:?}", f.kind),
                "theta1": [f.suspect.t1.lo(), f.suspect.t1.hi()],
                "theta2": [f.suspect.t2.lo(), f.suspect.t2.hi()],
                "xi_center": [x1, x2],
                "bound": [f.bound.lo(), f.bound.hi()],
                "depth": f.depth,
                "evaluated": f.evaluated,
                "seed": cfg.seed,
            });
            let name = format!("failure-{}-{:?}.json", target.family, target.constant);
            write_json(&out.join(name), &record)?;
            Ok(None)
        }
        Err(e @ (CertError::BudgetExhausted { .. } | CertError::ReformulationMismatch { .. })) => {
            eprintln!("{}: {e}", target.id());
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn certify(args: &CertifyArgs, r: &Resolved) -> Result<Verdict> {
    let s = &r.file.certify;
    let name = args
        .target
        .clone()
        .or_else(|| s.target.clone())
        .ok_or_else(|| anyhow!("--target is required (E2, E5 or Elem2)"))?;
    let family = Family::parse(&name).ok_or_else(|| anyhow!("unknown target {name:?}"))?;
    let constant = args
        .constant
        .or(s.constant)
        .unwrap_or_else(|| family.lemma_constant());
    if !(constant > 0.0 && constant.is_finite()) {
        bail!("constant must be positive and finite, got {constant}");
    }
    let alphas = if args.compose.is_empty() {
        s.compose.clone().unwrap_or_default()
    } else {
        args.compose.clone()
    };
    for &a in &alphas {
        if !(1.0..=2.0).contains(&a) {
            bail!("compose alpha {a} is outside [1, 2]");
        }
    }
    let target = InequalityTarget::new(family, constant);
    if !alphas.is_empty()
        && target != InequalityTarget::lemma(Family::E2)
        && target != InequalityTarget::lemma(Family::Elem2)
    {
        bail!("--compose needs the target E2 with constant 1 or Elem2 with constant 2");
    }
    let cfg = cert_config(args, r);
    create_out(&r.out)?;
    let Some(cert) = certify_one(&target, &cfg, &r.out)? else {
        return Ok(Verdict::Fail);
    };
    if alphas.is_empty() {
        return Ok(Verdict::Pass);
    }

    let other_family = if family == Family::E2 {
        Family::Elem2
    } else {
        Family::E2
    };
    let Some(other) = certify_one(&InequalityTarget::lemma(other_family), &cfg, &r.out)? else {
        return Ok(Verdict::Fail);
    };
    let (e2, elem2) = if family == Family::E2 {
        (&cert, &other)
    } else {
        (&other, &cert)
    };
    let mut conclusions = Vec::new();
    for &a in &alphas {
        match compose_interpolation(e2, elem2, a) {
            Ok(c) => {
                println!(
                    "{} (spot check max ratio {:?})",
                    c.statement, c.spot_check.max_ratio
                );
                conclusions.push(c);
            }
            Err(e) => {
                eprintln!("alpha = {a}: {e}");
                return Ok(Verdict::Fail);
            }
        }
    }
    write_json(&r.out.join("conclusions.json"), &conclusions)?;
    Ok(Verdict::Pass)
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    /// Exponents a in (1/2, 3/4).
    #[arg(long, value_delimiter = ',')]
    exponents: Vec<f64>,
    /// Constants C >= 1.
    #[arg(long, value_delimiter = ',')]
    constants: Vec<f64>,
    /// Write a ratio trace: sigma1_over_j or sigma2_over_j.
    #[arg(long)]
    trace: Option<String>,
    #[arg(long)]
    trace_len: Option<usize>,
    /// Random samples per grid cell for an additional scan.
    #[arg(long)]
    scan_samples: Option<u64>,
}

pub const DEFAULT_EXPONENTS: [f64; 5] = [0.55, 0.6, 0.65, 0.7, 0.74];
pub const DEFAULT_CONSTANTS: [f64; 4] = [1.0, 2.0, 10.0, 100.0];

fn parse_trace(name: &str) -> Result<RatioFamily> {
    match name.to_ascii_lowercase().as_str() {
        "sigma1_over_j" => Ok(RatioFamily::Sigma1OverJ),
        "sigma2_over_j" => Ok(RatioFamily::Sigma2OverJ),
        _ => bail!("unknown trace {name:?}; expected sigma1_over_j or sigma2_over_j"),
    }
}

pub fn sharpness(args: &SharpnessArgs, r: &Resolved) -> Result<Verdict> {
    let s = &r.file.sharpness;
    let pick = |flag: &Vec<f64>, file: &Option<Vec<f64>>, default: &[f64]| {
        if !flag.is_empty() {
            flag.clone()
        } else {
            file.clone().unwrap_or_else(|| default.to_vec())
        }
    };
    let exponents = pick(&args.exponents, &s.exponents, &DEFAULT_EXPONENTS);
    let constants = pick(&args.constants, &s.constants, &DEFAULT_CONSTANTS);
    for &a in &exponents {
        if !(a > 0.5 && a < 0.75) {
            bail!("exponent {a} is outside (1/2, 3/4)");
        }
    }
    for &c in &constants {
        if !(c >= 1.0 && c.is_finite()) {
            bail!("constant {c} must be finite and at least 1");
        }
    }
    let trace = match args.trace.clone().or_else(|| s.trace.clone()) {
        Some(name) => Some((parse_trace(&name)?, name.to_ascii_lowercase())),
        None => None,
    };
    create_out(&r.out)?;

    let mut found = Vec::new();
    let mut failed = 0;
    for (a, c, res) in sharpness::run_grid(&exponents, &constants) {
        match res {
            Ok(v) => found.push(v),
            Err(e) => {
                eprintln!("a = {a}, C = {c}: {e}");
                failed += 1;
            }
        }
    }
    let mut csv = BufWriter::new(fs::File::create(r.out.join("violations.csv"))?);
    sharpness::write_violations_csv(&mut csv, &found)?;
    csv.flush()?;
    let mut jsonl = BufWriter::new(fs::File::create(r.out.join("violations.jsonl"))?);
    sharpness::write_jsonl(&mut jsonl, &found)?;
    jsonl.flush()?;
    println!(
        "{} of {} cells produced a verified violation",
        found.len(),
        exponents.len() * constants.len()
    );

    let scan_samples = args.scan_samples.or(s.scan_samples).unwrap_or(0);
    if scan_samples > 0 {
        let mut scans = Vec::new();
        for &a in &exponents {
            for &c in &constants {
                scans.push(sharpness::scan_for_violations(a, c, scan_samples, r.seed));
            }
        }
        write_json(&r.out.join("scan.json"), &scans)?;
    }

    if let Some((family, name)) = trace {
        let len = args.trace_len.or(s.trace_len).unwrap_or(8);
        let t = sharpness::extremal_ratio(family, len)?;
        let mut body = String::from("k,ratio\n");
        for (k, ratio) in &t.samples {
            body.push_str(&format!("{k:?},{ratio:?}\n"));
        }
        let path = r.out.join(format!("trace-{name}.csv"));
        fs::write(&path, body)?;
        println!(
            "trace {} ends at {:?}",
            t.path,
            t.last_ratio().unwrap_or(f64::NAN)
        );
    }
    Ok(if failed == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

#[derive(Args, Debug)]
pub struct BilinearArgs {
    /// Profile pair `SPEC,SPEC`, where SPEC is `bump:A:B`,
    /// `semicircle:A:B` or `csv:PATH`. Repeatable.
    #[arg(long = "pair")]
    pairs: Vec<String>,
    /// Frequency grid spacing for analytic profiles.
    #[arg(long)]
    frequency_dxi: Option<f64>,
}

pub const DEFAULT_PAIRS: [[&str; 2]; 3] = [
    ["bump:1:2", "bump:3:4"],
    ["bump:-1:0", "bump:0.5:1.5"],
    ["bump:-3:-2", "bump:2:3"],
];

/// Parse a profile spec; the returned string names its kind.
pub fn parse_profile(spec: &str, dxi: f64) -> Result<(FrequencyProfile, String)> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("profile {spec:?}: expected KIND:..."))?;
    let kind = kind.to_ascii_lowercase();
    if kind == "csv" {
        let f = fs::File::open(rest).with_context(|| format!("opening profile {rest}"))?;
        return Ok((FrequencyProfile::from_csv(f)?, "tabulated".into()));
    }
    let nums: Vec<f64> = rest
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("profile {spec:?}: bad number"))?;
    let [a, b] = nums[..] else {
        bail!("profile {spec:?}: expected two support endpoints");
    };
    let p = match kind.as_str() {
        "bump" => FrequencyProfile::bump(a, b, dxi)?,
        "semicircle" => FrequencyProfile::semicircle(a, b, dxi)?,
        _ => bail!("profile {spec:?}: unknown kind {kind:?}"),
    };
    Ok((p, kind))
}

pub fn bilinear(args: &BilinearArgs, r: &Resolved) -> Result<Verdict> {
    let s = &r.file.bilinear;
    let d = BilinearConfig::default();
    let ds = SpacetimeConfig::default();
    let cfg = BilinearConfig {
        frequency_dxi: args
            .frequency_dxi
            .or(s.frequency_dxi)
            .unwrap_or(d.frequency_dxi),
        spacetime: SpacetimeConfig {
            dx: s.dx.unwrap_or(ds.dx),
            dt: s.dt.unwrap_or(ds.dt),
            t_start: s.t_start.unwrap_or(ds.t_start),
            t_budget: s.t_budget.unwrap_or(ds.t_budget),
            tolerance: s.window_tolerance.unwrap_or(ds.tolerance),
            alias_tolerance: ds.alias_tolerance,
        },
        identity_tolerance: r.tolerance.unwrap_or(d.identity_tolerance),
    };
    let pairs: Vec<[String; 2]> = if !args.pairs.is_empty() {
        args.pairs
            .iter()
            .map(|p| {
                let (a, b) = p
                    .split_once(',')
                    .ok_or_else(|| anyhow!("--pair {p:?}: expected SPEC,SPEC"))?;
                Ok([a.to_string(), b.to_string()])
            })
            .collect::<Result<_>>()?
    } else if let Some(p) = &s.pairs {
        p.clone()
    } else {
        DEFAULT_PAIRS
            .iter()
            .map(|[a, b]| [a.to_string(), b.to_string()])
            .collect()
    };

    let mut profiles = Vec::new();
    for [a, b] in &pairs {
        let (p1, k1) = parse_profile(a, cfg.frequency_dxi)?;
        let (p2, k2) = parse_profile(b, cfg.frequency_dxi)?;
        if p1.overlaps(&p2) {
            bail!("profiles {a} and {b} have overlapping supports");
        }
        profiles.push((p1, k1, p2, k2));
    }
    create_out(&r.out)?;

    let mut reports = Vec::new();
    let mut ok = true;
    for (p1, k1, p2, k2) in &profiles {
        match bilinear::run_bilinear(p1, p2, [k1, k2], &cfg) {
            Ok(rep) => {
                println!(
                    "{:?} x {:?}: spacetime {:e}, frequency {:e}, discrepancy {:e}, bounds {:e} / {:e}",
                    rep.profiles[0].support,
                    rep.profiles[1].support,
                    rep.spacetime,
                    rep.frequency,
                    rep.relative_discrepancy,
                    rep.bound_a,
                    rep.bound_1
                );
                ok &= rep.passed();
                reports.push(rep);
            }
            Err(e @ BilinearError::NotConverged { .. }) => {
                eprintln!("{e}");
                ok = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut csv = String::from(bilinear::BilinearReport::csv_header());
    csv.push('\n');
    for rep in &reports {
        csv.push_str(&rep.csv_row());
        csv.push('\n');
    }
    fs::write(r.out.join("bilinear.csv"), csv)?;
    write_json(
        &r.out.join("bilinear.json"),
        &json!({ "seed": r.seed, "config": cfg, "reports": reports }),
    )?;
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Certificate JSON written by `certify`.
    path: PathBuf,
}

pub fn replay(args: &ReplayArgs, _r: &Resolved) -> Result<Verdict> {
    let cert = Certificate::read(&args.path)
        .with_context(|| format!("reading certificate {}", args.path.display()))?;
    match certifier::replay(&cert) {
        Ok(rep) => {
            println!(
                "{}: {} boxes replayed, smallest lower bound {:e}",
                rep.target, rep.boxes, rep.min_bound
            );
            Ok(Verdict::Pass)
        }
        Err(e) => {
            eprintln!("replay failed: {e}");
            Ok(Verdict::Fail)
        }
    }
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    /// `xi1` range as `LO,HI`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    xi1: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    xi2: Vec<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Points closer than this to the diagonal are skipped.
    #[arg(long)]
    min_gap: Option<f64>,
    /// Random points for the check of 1/J against both weights.
    #[arg(long)]
    ordering_samples: Option<usize>,
}

pub fn weights(args: &WeightsArgs, r: &Resolved) -> Result<Verdict> {
    let s = &r.file.weights;
    let range = |flag: &Vec<f64>, file: Option<[f64; 2]>| -> Result<(f64, f64)> {
        let v = if flag.len() == 2 {
            [flag[0], flag[1]]
        } else {
            file.unwrap_or([-5.0, 5.0])
        };
        if !(v[0] < v[1] && v[0].is_finite() && v[1].is_finite()) {
            bail!("range [{}, {}] is empty", v[0], v[1]);
        }
        Ok((v[0], v[1]))
    };
    let region = Rect {
        xi1: range(&args.xi1, s.xi1)?,
        xi2: range(&args.xi2, s.xi2)?,
    };
    let resolution = args.resolution.or(s.resolution).unwrap_or(101);
    let min_gap = args.min_gap.or(s.min_gap).unwrap_or(0.05);
    if resolution == 0 || min_gap.is_nan() || min_gap <= 0.0 {
        bail!("resolution must be positive and min_gap > 0");
    }
    let samples = args
        .ordering_samples
        .or(s.ordering_samples)
        .unwrap_or(1_000_000);
    create_out(&r.out)?;

    let map = bilinear::weight_comparison(region, resolution, min_gap)?;
    let mut csv = String::from("xi1,xi2,weight_a,weight_1,sign\n");
    for c in map.cells.iter().flatten() {
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?},{}\n",
            c.xi1, c.xi2, c.weight_a, c.weight_1, c.sign
        ));
    }
    fs::write(r.out.join("weights.csv"), csv)?;

    let ordering = bilinear::verify_pointwise_weight_ordering(samples, r.seed);
    println!(
        "weight A smaller at {} points, weight 1 smaller at {}, {} excluded; {} ordering violations in {} samples",
        map.a_tighter,
        map.thm1_tighter,
        map.excluded,
        ordering.violations.len(),
        samples
    );
    write_json(
        &r.out.join("weights.json"),
        &json!({
            "seed": r.seed,
            "region": map.region,
            "resolution": map.resolution,
            "min_gap": map.min_gap,
            "a_tighter": map.a_tighter,
            "thm1_tighter": map.thm1_tighter,
            "ties": map.ties,
            "excluded": map.excluded,
            "ordering": ordering,
        }),
    )?;
    Ok(if ordering.violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}
