//! Run configuration read from `--config <file.json>`. Command-line flags
//! override these values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; defaults to the available parallelism.
    pub workers: Option<usize>,
    pub tolerances: Tolerances,
    pub grid: GridDefaults,
    pub verify: VerifyDefaults,
    pub outputs: Outputs,
}

/// Pass thresholds of the `verify` suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub kepler_residual: f64,
    pub round_trip: f64,
    pub identity: f64,
    pub chain: f64,
    pub pipeline: f64,
    pub curvature_kepler: f64,
    pub curvature_rotating: f64,
    pub propagation: f64,
    pub elements: f64,
    pub l1: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kepler_residual: 1e-12,
            round_trip: 1e-9,
            identity: 1e-10,
            chain: 1e-10,
            pipeline: 1e-9,
            curvature_kepler: 1e-4,
            curvature_rotating: 1e-3,
            propagation: 1e-9,
            elements: 1e-10,
            l1: 1e-12,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 10] {
        [
            ("kepler_residual", self.kepler_residual),
            ("round_trip", self.round_trip),
            ("identity", self.identity),
            ("chain", self.chain),
            ("pipeline", self.pipeline),
            ("curvature_kepler", self.curvature_kepler),
            ("curvature_rotating", self.curvature_rotating),
            ("propagation", self.propagation),
            ("elements", self.elements),
            ("l1", self.l1),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridDefaults {
    pub extent: f64,
    pub n: usize,
    /// Number of multi-starts taken by `minimize`.
    pub top: usize,
}

impl Default for GridDefaults {
    fn default() -> Self {
        Self { extent: 1.5, n: 21, top: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyDefaults {
    /// Random samples per suite.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyDefaults {
    fn default() -> Self {
        Self { samples: 1000, seed: 20_241_016 }
    }
}

/// Default output paths per subcommand; `None` means stdout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub kepler_grid: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub orbit: Option<PathBuf>,
    pub scan: Option<PathBuf>,
    pub minimize: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        for (name, v) in self.tolerances.entries() {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        if !(self.grid.extent > 0.0) || self.grid.n < 3 {
            bail!("grid needs extent > 0 and n >= 3");
        }
        if self.verify.samples == 0 {
            bail!("verify.samples must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"workers": 2, "tolerances": {"pipeline": 1e-8}}"#).unwrap();
        assert_eq!(cfg.workers, Some(2));
        assert_eq!(cfg.tolerances.pipeline, 1e-8);
        assert_eq!(cfg.tolerances.identity, 1e-10);
        assert_eq!(cfg.grid.n, 21);
        cfg.validate().unwrap();
    }

    #[test]
    fn invalid_values_are_rejected() {
        let zero: RunConfig = serde_json::from_str(r#"{"workers": 0}"#).unwrap();
        assert!(zero.validate().is_err());
        let neg: RunConfig = serde_json::from_str(r#"{"tolerances": {"identity": -1}}"#).unwrap();
        assert!(neg.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"wrkers": 2}"#).is_err());
    }
}
