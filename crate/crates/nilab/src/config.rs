//! Experiment configuration: JSON schema
//! `{point:{d,gamma,alpha,space,index,s}, sigma, sweep, K, m, nt, mu, seed, out, ...}`
//! merged with CLI flag overrides.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use nilab_core::error::{Error, Result};
use nilab_core::norms::Space;
use nilab_core::rational::Rat;
use nilab_core::regimes::{RIndex, RegimePoint, Scheme};

/// Number or exact-rational string (`"2/3"`) or `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOrText {
    Number(f64),
    Text(String),
}

impl NumberOrText {
    pub fn as_rat(&self) -> Result<Rat> {
        match self {
            NumberOrText::Number(x) => {
                if !x.is_finite() {
                    return Err(Error::Config(format!("non-finite parameter {x}")));
                }
                Ok(Rat::from_f64(*x))
            }
            NumberOrText::Text(t) => parse_rat(t),
        }
    }

    pub fn as_index(&self) -> Result<RIndex> {
        match self {
            NumberOrText::Text(t) if t.trim() == "inf" => Ok(RIndex::Infinity),
            other => Ok(RIndex::Finite(other.as_rat()?)),
        }
    }
}

/// Parse `"a/b"`, an integer, or a float, exactly.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad rational '{t}'")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad rational '{t}'")))?;
        if d == 0 {
            return Err(Error::Config("zero denominator".into()));
        }
        Ok(Rat::ratio(n, d))
    } else {
        let x: f64 = t.parse().map_err(|_| Error::Config(format!("bad number '{t}'")))?;
        if !x.is_finite() {
            return Err(Error::Config(format!("non-finite parameter {x}")));
        }
        Ok(Rat::from_f64(x))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCfg {
    pub d: u32,
    pub gamma: NumberOrText,
    pub alpha: NumberOrText,
    pub space: Space,
    pub index: NumberOrText,
    pub s: NumberOrText,
}

impl PointCfg {
    pub fn to_point(&self) -> Result<RegimePoint> {
        RegimePoint::new_rational(
            self.d,
            self.gamma.as_rat()?,
            self.alpha.as_rat()?,
            self.space,
            self.index.as_index()?,
            self.s.as_rat()?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    Collinear,
    Resonant,
}

/// Exponent rules: derive a certificate automatically, or pin explicit
/// exponents (still re-verified; failures are recorded, not fatal, so control
/// runs like `s = 0` stay expressible).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentRules {
    Auto(String), // "auto"
    Explicit {
        scheme: Scheme,
        a: NumberOrText,
        r: NumberOrText,
        epsilon: NumberOrText,
    },
}

impl Default for ExponentRules {
    fn default() -> Self {
        ExponentRules::Auto("auto".into())
    }
}

fn default_k() -> u32 {
    7
}
fn default_m() -> u32 {
    4
}
fn default_nt() -> usize {
    32
}
fn default_mu() -> f64 {
    -1.0
}
fn default_window() -> f64 {
    0.01
}
fn default_dominance() -> f64 {
    2.0
}
fn default_smallness() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub point: PointCfg,
    pub sigma: SigmaKind,
    /// Frequency scales, strictly increasing.
    pub sweep: Vec<f64>,
    /// Truncation order of the Duhamel series (odd).
    #[serde(rename = "K", default = "default_k")]
    pub k_truncation: u32,
    /// Lattice cells per cube side.
    #[serde(default = "default_m")]
    pub m: u32,
    /// Time-quadrature nodes.
    #[serde(default = "default_nt")]
    pub nt: usize,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub exponents: ExponentRules,
    /// Constant in front of the certificate time `T = c · N^{−α−ε}` (resp.
    /// the shifted variant); keeps the phase `TΦ` coherent at desk scale.
    #[serde(default = "default_window")]
    pub window_const: f64,
    /// Dominance-flag factor: `‖U₃‖ ≥ factor · ‖U₁‖` resp. `factor · tail`.
    #[serde(default = "default_dominance")]
    pub dominance_factor: f64,
    /// Threshold on `T a^{γ−d} ‖ψ₀‖²_{FL¹}` for certified convergence.
    #[serde(default = "default_smallness")]
    pub smallness_threshold: f64,
    /// Extra low-frequency regularities σ measured on `Q_1` per record.
    #[serde(default)]
    pub sigma_probe: Vec<f64>,
    /// Directory for per-(k, time-node) grid snapshots.
    #[serde(default)]
    pub snapshot_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_truncation % 2 == 0 {
            return Err(Error::Config(format!(
                "truncation order K must be odd, got {}",
                self.k_truncation
            )));
        }
        if self.m < 4 {
            return Err(Error::Config(format!(
                "need at least 4 lattice cells per cube side, got {}",
                self.m
            )));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("empty N sweep".into()));
        }
        if self.sweep.windows(2).any(|w| w[1] <= w[0]) || self.sweep[0] <= 0.0 {
            return Err(Error::Config("sweep must be positive and strictly increasing".into()));
        }
        if !(self.window_const > 0.0) {
            return Err(Error::Config("window constant must be positive".into()));
        }
        self.point.to_point()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_config() {
        let text = r#"{
            "point": {"d": 1, "gamma": 1, "alpha": 2, "space": "FL", "index": 2, "s": -1},
            "sigma": "collinear",
            "sweep": [8, 16, 32, 64]
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.k_truncation, 7);
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.nt, 32);
        assert_eq!(cfg.mu, -1.0);
        assert!(matches!(cfg.exponents, ExponentRules::Auto(_)));
    }

    #[test]
    fn rational_strings_and_overrides() {
        let text = r#"{
            "point": {"d": 1, "gamma": "1/2", "alpha": 2, "space": "FL", "index": "inf", "s": "-1/3"},
            "sigma": "collinear",
            "sweep": [8, 16],
            "K": 3,
            "exponents": {"scheme": "ilr0", "a": 0, "r": "1/4", "epsilon": "1/8"}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let pt = cfg.point.to_point().unwrap();
        assert_eq!(pt.s, Rat::ratio(-1, 3));
        assert!(matches!(cfg.exponents, ExponentRules::Explicit { scheme: Scheme::Ilr0, .. }));
    }

    #[test]
    fn rejects_even_truncation_and_bad_sweep() {
        let text = r#"{
            "point": {"d": 1, "gamma": 1, "alpha": 2, "space": "FL", "index": 2, "s": -1},
            "sigma": "collinear",
            "sweep": [8, 16],
            "K": 4
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{
            "point": {"d": 1, "gamma": 1, "alpha": 2, "space": "FL", "index": 2, "s": -1},
            "sigma": "collinear",
            "sweep": [16, 8]
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }
}
