//! Run configuration: a strict TOML schema with rejected unknown keys.

use serde::{Deserialize, Serialize};
use tailwave::coefficients::{CoefficientProfile, ProfileKind};
use tailwave::evolution::{DataProfile, EvolveSpec, GridSpec, InitialData};
use tailwave::geometry::MetricParams;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}
impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    #[serde(rename = "M")]
    pub mass: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    pub delta: f64,
    pub h0: f64,
    pub kind: ProfileKind,
    pub cubic_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub du: f64,
    pub u_max: f64,
    pub v0: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub epsilon: f64,
    pub v_c: f64,
    pub sigma: f64,
    pub profile: DataProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    /// Fit windows in `t`.
    pub windows: Vec<(f64, f64)>,
    /// Upper-bound exponent for the weighted-sup check; omitted means
    /// `min(delta, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Noise floor relative to the data amplitude.
    pub noise_floor: f64,
}

/// One full run description. Unknown keys anywhere are rejected so typos in
/// physics parameters cannot pass silently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricBlock,
    pub profile: ProfileBlock,
    pub grid: GridBlock,
    pub data: DataBlock,
    pub observers: Vec<f64>,
    pub analysis: AnalysisBlock,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.metric.mass > 0.0) {
            return Err(ConfigError(format!(
                "metric.M must be > 0, got {}",
                self.metric.mass
            )));
        }
        if !(self.metric.a >= 0.0) {
            return Err(ConfigError(format!(
                "metric.a must be >= 0, got {}",
                self.metric.a
            )));
        }
        if !(self.profile.delta > 0.0) {
            return Err(ConfigError(format!(
                "profile.delta must be > 0, got {}",
                self.profile.delta
            )));
        }
        if !(self.profile.h0 >= 0.0) {
            return Err(ConfigError(format!(
                "profile.h0 must be >= 0, got {}",
                self.profile.h0
            )));
        }
        if !(self.profile.cubic_c >= 0.0) {
            return Err(ConfigError(format!(
                "profile.cubic_c must be >= 0, got {}",
                self.profile.cubic_c
            )));
        }
        if !(self.grid.du > 0.0) {
            return Err(ConfigError(format!(
                "grid.du must be > 0, got {}",
                self.grid.du
            )));
        }
        if !(self.data.epsilon >= 0.0) {
            return Err(ConfigError(format!(
                "data.epsilon must be >= 0, got {}",
                self.data.epsilon
            )));
        }
        if !(self.data.sigma > 0.0) {
            return Err(ConfigError(format!(
                "data.sigma must be > 0, got {}",
                self.data.sigma
            )));
        }
        if !(self.analysis.noise_floor > 0.0) {
            return Err(ConfigError(format!(
                "analysis.noise_floor must be > 0, got {}",
                self.analysis.noise_floor
            )));
        }
        for &(lo, hi) in &self.analysis.windows {
            if !(hi > lo && lo > 0.0) {
                return Err(ConfigError(format!("bad analysis window [{lo}, {hi}]")));
            }
        }
        if let Some(k) = self.analysis.kappa {
            if !(k > 0.0) {
                return Err(ConfigError(format!("analysis.kappa must be > 0, got {k}")));
            }
        }
        Ok(())
    }

    /// Effective upper-bound exponent.
    pub fn kappa(&self) -> f64 {
        self.analysis.kappa.unwrap_or(self.profile.delta.min(1.0))
    }

    /// Absolute noise floor for fits.
    pub fn floor_abs(&self) -> f64 {
        self.analysis.noise_floor * self.data.epsilon.max(f64::MIN_POSITIVE)
    }

    /// Build the solver spec. Domain errors surface as config errors.
    pub fn to_spec(&self) -> Result<EvolveSpec, ConfigError> {
        let params = MetricParams::new(self.metric.mass, self.metric.a)
            .map_err(|e| ConfigError(e.to_string()))?;
        let profile = CoefficientProfile::new(
            self.profile.delta,
            self.profile.h0,
            self.profile.kind,
            self.profile.cubic_c,
        )
        .map_err(|e| ConfigError(e.to_string()))?;
        let data = InitialData::new(
            self.data.epsilon,
            self.data.v_c,
            self.data.sigma,
            self.data.profile,
        )
        .map_err(|e| ConfigError(e.to_string()))?;
        let grid = GridSpec {
            du: self.grid.du,
            u_max: self.grid.u_max,
            v0: self.grid.v0,
            v_max: self.grid.v_max,
        };
        Ok(EvolveSpec::new(
            params,
            profile,
            data,
            grid,
            self.observers.clone(),
        ))
    }
}

/// The linear reference configuration: Schwarzschild, small Gaussian data,
/// one observer at r* = 10.
pub fn reference_linear() -> RunConfig {
    RunConfig {
        metric: MetricBlock { mass: 1.0, a: 0.0 },
        profile: ProfileBlock {
            delta: 0.5,
            h0: 0.0,
            kind: ProfileKind::LbarLbarOnly,
            cubic_c: 0.0,
        },
        grid: GridBlock {
            du: 0.0625,
            u_max: 2490.0,
            v0: -120.0,
            v_max: 2520.0,
        },
        data: DataBlock {
            epsilon: 1e-3,
            v_c: 20.0,
            sigma: 2.0,
            profile: DataProfile::GaussianBump,
        },
        observers: vec![10.0],
        analysis: AnalysisBlock {
            windows: vec![(800.0, 1400.0)],
            kappa: None,
            noise_floor: 1e-13,
        },
        seed: 42,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = reference_linear();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = reference_linear().to_toml();
        text.push_str("\n[extra]\nmystery = 1\n");
        assert!(RunConfig::from_toml(&text).is_err());

        let text = reference_linear().to_toml().replace("delta =", "detla =");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = reference_linear();
        cfg.profile.delta = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = reference_linear();
        cfg.metric.mass = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = reference_linear();
        cfg.analysis.windows = vec![(100.0, 50.0)];
        assert!(cfg.validate().is_err());
    }
}
