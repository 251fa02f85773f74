use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BilinearError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `exp(-1/(1 - tau^2))`, smooth with compact support.
    Bump,
    /// `sqrt(1 - tau^2)`; only continuous, used to observe the trapezoid
    /// rule's second-order error.
    Semicircle,
}

/// A closed-form profile `amplitude * shape(tau) * exp(-i shift xi)`, where
/// `tau` maps the support `[a, b]` affinely onto `[-1, 1]`. The phase factor
/// translates the packet by `shift` in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticProfile {
    pub shape: Shape,
    pub support: (f64, f64),
    pub amplitude: Complex64,
    pub shift: f64,
}

impl AnalyticProfile {
    pub fn eval(&self, xi: f64) -> Complex64 {
        let (a, b) = self.support;
        let tau = (2.0 * xi - a - b) / (b - a);
        let s = 1.0 - tau * tau;
        if !(s > 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let base = match self.shape {
            Shape::Bump => (-1.0 / s).exp(),
            Shape::Semicircle => s.sqrt(),
        };
        self.amplitude * base * Complex64::from_polar(1.0, -self.shift * xi)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Analytic(AnalyticProfile),
    Tabulated,
}

/// Samples of `f^` on the uniform grid `xi_k = (m0 + k) * dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    m0: i64,
    dxi: f64,
    values: Vec<Complex64>,
    support: (f64, f64),
    source: Source,
}

/// Coarsest allowed grid spacing: eight points per unit of frequency.
pub const MAX_DXI: f64 = 0.125;

impl FrequencyProfile {
    /// Sample an analytic profile at every multiple of `dxi` inside its support.
    pub fn analytic(p: AnalyticProfile, dxi: f64) -> Result<Self, BilinearError> {
        let (a, b) = p.support;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BilinearError::BadProfile(format!(
                "support [{a}, {b}] is empty"
            )));
        }
        if !(dxi > 0.0 && dxi <= MAX_DXI) {
            return Err(BilinearError::BadProfile(format!(
                "grid spacing {dxi} must lie in (0, {MAX_DXI}]"
            )));
        }
        let lo = (a / dxi).ceil() as i64;
        let hi = (b / dxi).floor() as i64;
        let values = (lo..=hi).map(|m| p.eval(m as f64 * dxi)).collect();
        Ok(Self {
            m0: lo,
            dxi,
            values,
            support: (a, b),
            source: Source::Analytic(p),
        })
    }

    pub fn bump(a: f64, b: f64, dxi: f64) -> Result<Self, BilinearError> {
        Self::analytic(
            AnalyticProfile {
                shape: Shape::Bump,
                support: (a, b),
                amplitude: Complex64::new(1.0, 0.0),
                shift: 0.0,
            },
            dxi,
        )
    }

    pub fn semicircle(a: f64, b: f64, dxi: f64) -> Result<Self, BilinearError> {
        Self::analytic(
            AnalyticProfile {
                shape: Shape::Semicircle,
                support: (a, b),
                amplitude: Complex64::new(1.0, 0.0),
                shift: 0.0,
            },
            dxi,
        )
    }

    /// Read `xi,re,im` rows with uniform spacing. The support is the span of
    /// the rows. An optional header line is skipped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, BilinearError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows: Vec<(f64, Complex64)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| BilinearError::BadProfile(e.to_string()))?;
            let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], Complex64::new(v[1], v[2]))),
                _ if i == 0 => continue,
                _ => {
                    return Err(BilinearError::BadProfile(format!(
                        "row {}: expected three numbers xi,re,im",
                        i + 1
                    )))
                }
            }
        }
        Self::tabulated(rows)
    }

    /// A profile from explicit `(xi, value)` pairs on a uniform grid.
    pub fn tabulated(rows: Vec<(f64, Complex64)>) -> Result<Self, BilinearError> {
        if rows.len() < 2 {
            return Err(BilinearError::BadProfile(
                "need at least two samples".into(),
            ));
        }
        let dxi = rows[1].0 - rows[0].0;
        if !(dxi > 0.0 && dxi <= MAX_DXI) {
            return Err(BilinearError::BadProfile(format!(
                "grid spacing {dxi} must lie in (0, {MAX_DXI}]"
            )));
        }
        let m0f = rows[0].0 / dxi;
        let m0 = m0f.round() as i64;
        for (k, (xi, v)) in rows.iter().enumerate() {
            let expect = (m0 + k as i64) as f64 * dxi;
            if (xi - expect).abs() > 1e-9 * dxi.max(xi.abs()) {
                return Err(BilinearError::BadProfile(format!(
                    "sample {k} at xi = {xi} is off the uniform grid"
                )));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(BilinearError::BadProfile(format!(
                    "sample {k} is not finite"
                )));
            }
        }
        let support = (rows[0].0, rows[rows.len() - 1].0);
        Ok(Self {
            m0,
            dxi,
            values: rows.into_iter().map(|r| r.1).collect(),
            support,
            source: Source::Tabulated,
        })
    }

    /// The same profile on another grid spacing. Tabulated profiles can only
    /// be refined by an integer factor, through their linear interpolant.
    pub fn resample(&self, dxi: f64) -> Result<Self, BilinearError> {
        if (dxi - self.dxi).abs() <= 1e-12 * dxi && self.is_on_lattice(dxi) {
            return Ok(self.clone());
        }
        match &self.source {
            Source::Analytic(p) => Self::analytic(*p, dxi),
            Source::Tabulated => {
                let k = self.dxi / dxi;
                let kr = k.round();
                if kr < 1.0 || (k - kr).abs() > 1e-9 * k {
                    return Err(BilinearError::GridMismatch(format!(
                        "tabulated profile with spacing {} cannot be resampled to {dxi}",
                        self.dxi
                    )));
                }
                Ok(self.refined(kr as usize))
            }
        }
    }

    /// Linear interpolation onto spacing `dxi / k`.
    fn refined(&self, k: usize) -> Self {
        let n = (self.values.len() - 1) * k + 1;
        let values = (0..n)
            .map(|i| {
                let (j, r) = (i / k, i % k);
                if r == 0 {
                    return self.values[j];
                }
                let f = r as f64 / k as f64;
                self.values[j] * (1.0 - f) + self.values[j + 1] * f
            })
            .collect();
        Self {
            m0: self.m0 * k as i64,
            dxi: self.dxi / k as f64,
            values,
            support: self.support,
            source: Source::Tabulated,
        }
    }

    fn is_on_lattice(&self, dxi: f64) -> bool {
        let off = self.m0 as f64 * self.dxi / dxi;
        (off - off.round()).abs() < 1e-9
    }

    /// The same profile scaled by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        if let Source::Analytic(p) = &mut out.source {
            p.amplitude *= c;
        }
        out
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.source, Source::Tabulated)
    }

    /// Integer lattice index of the first sample.
    pub fn first_index(&self) -> i64 {
        self.m0
    }

    pub fn node(&self, k: usize) -> f64 {
        (self.m0 + k as i64) as f64 * self.dxi
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `(xi_k, f^(xi_k), trapezoid weight)` for every sample. Analytic
    /// profiles vanish at and beyond their support ends, so all weights are
    /// one; tabulated grids get halved end weights.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, Complex64, f64)> + '_ {
        let last = self.values.len() - 1;
        let tab = self.is_tabulated();
        self.values.iter().enumerate().map(move |(k, &v)| {
            let w = if tab && (k == 0 || k == last) {
                0.5
            } else {
                1.0
            };
            (self.node(k), v, w)
        })
    }

    /// `f^(xi)`: exact for analytic profiles, linear interpolation for
    /// tabulated ones, zero outside the support.
    pub fn sample(&self, xi: f64) -> Complex64 {
        match &self.source {
            Source::Analytic(p) => p.eval(xi),
            Source::Tabulated => {
                let pos = xi / self.dxi - self.m0 as f64;
                if pos < 0.0 || pos > (self.values.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = (pos.floor() as usize).min(self.values.len() - 2);
                let f = pos - k as f64;
                self.values[k] * (1.0 - f) + self.values[k + 1] * f
            }
        }
    }

    /// `(1/2pi) * sum |f^|^2 dxi`, the `L^2` norm squared of the data.
    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self.nodes().map(|(_, v, w)| w * v.norm_sqr()).sum();
        s * self.dxi / (2.0 * std::f64::consts::PI)
    }

    /// Largest group speed `|xi| / sqrt(1 + xi^2)` over the support.
    pub fn max_group_speed(&self) -> f64 {
        let (a, b) = self.support;
        let m = a.abs().max(b.abs());
        m / 1f64.hypot(m)
    }

    /// Spatial translation carried by the phase of an analytic profile.
    pub fn shift(&self) -> f64 {
        match &self.source {
            Source::Analytic(p) => p.shift,
            Source::Tabulated => 0.0,
        }
    }

    /// Supports closer than zero apart (touching or overlapping).
    pub fn overlaps(&self, other: &FrequencyProfile) -> bool {
        let (a1, b1) = self.support;
        let (a2, b2) = other.support;
        !(b1 < a2 || b2 < a1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_sampling() {
        let p = FrequencyProfile::bump(1.0, 2.0, 1.0 / 16.0).unwrap();
        assert_eq!(p.len(), 17);
        assert_eq!(p.values()[0].norm(), 0.0);
        assert!((p.values()[8].re - (-1f64).exp()).abs() < 1e-15);
        assert!(FrequencyProfile::bump(1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "xi,re,im\n0.0,0.0,0.0\n0.125,1.0,0.5\n0.25,0.0,0.0\n";
        let p = FrequencyProfile::from_csv(text.as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.support(), (0.0, 0.25));
        assert_eq!(p.sample(0.125), Complex64::new(1.0, 0.5));
        assert!(p.resample(0.1).is_err());
        let q = p.resample(0.0625).unwrap();
        assert_eq!(q.len(), 5);
        assert_eq!(q.values()[1], Complex64::new(0.5, 0.25));
        let bad = "0.0,0,0\n0.125,1,0\n0.3,0,0\n";
        assert!(FrequencyProfile::from_csv(bad.as_bytes()).is_err());
    }
}
