use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Contents of a `--config` file. Every key is optional; flags override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub certify: CertifySection,
    #[serde(default)]
    pub sharpness: SharpnessSection,
    #[serde(default)]
    pub bilinear: BilinearSection,
    #[serde(default)]
    pub weights: WeightsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub target: Option<String>,
    pub constant: Option<f64>,
    pub compose: Option<Vec<f64>>,
    pub max_depth: Option<u32>,
    pub min_width: Option<f64>,
    pub budget: Option<u64>,
    pub validation_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSection {
    pub exponents: Option<Vec<f64>>,
    pub constants: Option<Vec<f64>>,
    pub trace: Option<String>,
    pub trace_len: Option<usize>,
    pub scan_samples: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearSection {
    /// Profile pairs as `shape:a:b` or `csv:PATH`.
    pub pairs: Option<Vec<[String; 2]>>,
    pub frequency_dxi: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub t_start: Option<f64>,
    pub t_budget: Option<f64>,
    pub window_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub xi1: Option<[f64; 2]>,
    pub xi2: Option<[f64; 2]>,
    pub resolution: Option<usize>,
    pub min_gap: Option<f64>,
    pub ordering_samples: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("certify.min_width", self.certify.min_width),
            ("bilinear.frequency_dxi", self.bilinear.frequency_dxi),
            ("bilinear.dx", self.bilinear.dx),
            ("bilinear.dt", self.bilinear.dt),
            ("bilinear.window_tolerance", self.bilinear.window_tolerance),
            ("weights.min_gap", self.weights.min_gap),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive, got {v}");
                }
            }
        }
        Ok(())
    }
}
