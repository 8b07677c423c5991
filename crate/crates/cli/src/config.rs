//! Job configuration read from a TOML file. Every key is optional; command-line
//! flags take precedence over whatever the file supplies.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ricci_rot::oracle::ValidationTolerances;
use ricci_rot::Branch;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub branch: Option<Branch>,
    /// Lower end of the sampling window.
    pub lo: Option<f64>,
    /// Upper end of the sampling window.
    pub hi: Option<f64>,
    pub n: Option<usize>,
    pub n_theta: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

/// Overrides for [`ValidationTolerances`]; unset keys keep the defaults.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub ode: Option<f64>,
    pub ricci_closed: Option<f64>,
    pub ricci_fd: Option<f64>,
    pub arclength: Option<f64>,
    pub k_fd: Option<f64>,
}

impl ToleranceConfig {
    pub fn resolve(&self) -> anyhow::Result<ValidationTolerances> {
        let def = ValidationTolerances::default();
        let t = ValidationTolerances {
            ode: self.ode.unwrap_or(def.ode),
            ricci_closed: self.ricci_closed.unwrap_or(def.ricci_closed),
            ricci_fd: self.ricci_fd.unwrap_or(def.ricci_fd),
            arclength: self.arclength.unwrap_or(def.arclength),
            k_fd: self.k_fd.unwrap_or(def.k_fd),
        };
        for (name, v) in [
            ("ode", t.ode),
            ("ricci_closed", t.ricci_closed),
            ("ricci_fd", t.ricci_fd),
            ("arclength", t.arclength),
            ("k_fd", t.k_fd),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        Ok(t)
    }
}

impl JobConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: JobConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.tolerances.resolve()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let cfg: JobConfig = toml::from_str(
            "a = 0.0\nb = 1.0\nc = 0.0\nd = 1.0\nbranch = \"minus\"\nn = 11\n[tolerances]\node = 1e-3\n",
        )
        .unwrap();
        assert_eq!(cfg.b, Some(1.0));
        assert_eq!(cfg.branch, Some(Branch::Minus));
        assert_eq!(cfg.tolerances.resolve().unwrap().ode, 1e-3);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<JobConfig>("a = 1.0\nalpha = 2.0\n").is_err());
        assert!(toml::from_str::<JobConfig>("[tolerances]\nfoo = 1.0\n").is_err());
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let cfg: JobConfig = toml::from_str("[tolerances]\nricci_fd = 0.0\n").unwrap();
        assert!(cfg.tolerances.resolve().is_err());
    }
}
