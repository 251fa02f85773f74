use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::boxes::AngleBox;
use super::target::{Family, InequalityTarget};
use super::{CertConfig, CertError};
use crate::interval::Interval;

/// A double written as its shortest round-trip decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactF64(pub f64);

impl Serialize for ExactF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?}", self.0))
    }
}

impl<'de> Deserialize<'de> for ExactF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let v: f64 = text
            .parse()
            .map_err(|_| de::Error::custom(format!("not a decimal number: {text:?}")))?;
        if v.is_nan() {
            return Err(de::Error::custom("NaN is not allowed"));
        }
        Ok(ExactF64(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxStatus {
    Verified,
    BoundaryEqualityVerified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub family: Family,
    pub constant: ExactF64,
}

impl TargetRecord {
    pub fn target(&self) -> InequalityTarget {
        InequalityTarget::new(self.family, self.constant.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub max_depth: u32,
    pub min_width: ExactF64,
    pub workers: usize,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub t1: [ExactF64; 2],
    pub t2: [ExactF64; 2],
    /// Lower bound of the factored margin over the box.
    pub bound: ExactF64,
    pub status: BoxStatus,
}

impl BoxRecord {
    pub fn new(b: &AngleBox, bound: f64) -> Self {
        Self {
            t1: [ExactF64(b.t1.lo()), ExactF64(b.t1.hi())],
            t2: [ExactF64(b.t2.lo()), ExactF64(b.t2.hi())],
            bound: ExactF64(bound),
            status: BoxStatus::Verified,
        }
    }

    pub fn angle_box(&self) -> Result<AngleBox, CertError> {
        let t1 = Interval::new(self.t1[0].0, self.t1[1].0)?;
        let t2 = Interval::new(self.t2[0].0, self.t2[1].0)?;
        Ok(AngleBox::new(t1, t2))
    }
}

/// A tiling of the upper triangle by boxes on which the factored margin has
/// a nonnegative interval lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: TargetRecord,
    pub config: ConfigRecord,
    pub boxes: Vec<BoxRecord>,
    pub count: usize,
    /// Boxes evaluated during the search, including interior nodes.
    #[serde(default)]
    pub evaluated: u64,
    pub walltime_ms: u64,
}

impl Certificate {
    pub fn new(
        target: &InequalityTarget,
        config: &CertConfig,
        boxes: Vec<BoxRecord>,
        evaluated: u64,
        walltime_ms: u64,
    ) -> Self {
        Self {
            target: TargetRecord {
                family: target.family,
                constant: ExactF64(target.constant),
            },
            config: ConfigRecord {
                max_depth: config.max_depth,
                min_width: ExactF64(config.min_width),
                workers: config.workers,
                budget: config.budget,
            },
            count: boxes.len(),
            boxes,
            evaluated,
            walltime_ms,
        }
    }

    pub fn target(&self) -> InequalityTarget {
        self.target.target()
    }

    /// Smallest stored lower bound.
    pub fn min_bound(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| b.bound.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String, CertError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CertError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CertError> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| CertError::Io(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, CertError> {
        let text = std::fs::read_to_string(path).map_err(|e| CertError::Io(e.to_string()))?;
        Self::from_json(&text)
    }

    /// Same target, config and tiling; ignores timing and worker count.
    pub fn same_tiling(&self, other: &Certificate) -> bool {
        self.target == other.target
            && self.boxes == other.boxes
            && self.config.max_depth == other.config.max_depth
            && self.config.min_width == other.config.min_width
            && self.config.budget == other.config.budget
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} boxes, min bound {:e}, {} ms",
            self.target().id(),
            self.count,
            self.min_bound(),
            self.walltime_ms
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_strings_round_trip() {
        for v in [0.1, -1.5707963267948968, 1e-8, 5e-324, 1.0] {
            let s = serde_json::to_string(&ExactF64(v)).unwrap();
            let back: ExactF64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0.to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(serde_json::to_string(&ExactF64(1.0)).unwrap(), "\"1.0\"");
        assert!(serde_json::from_str::<ExactF64>("\"NaN\"").is_err());
    }

    #[test]
    fn status_spelling() {
        let s = serde_json::to_string(&BoxStatus::BoundaryEqualityVerified).unwrap();
        assert_eq!(s, "\"boundary-equality-verified\"");
    }
}
