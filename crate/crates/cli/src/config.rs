//! Strict JSON scenario configs.
//!
//! Unknown fields are errors everywhere: a silently ignored typo in `xi` or
//! `p` would corrupt an experiment. Deserialisation goes through
//! `serde_path_to_error` so diagnostics name the offending field and the
//! line/column it came from.

use crate::{CliError, ExitCode};
use sa_lab_core::engine::{DiagnosticsConfig, Scenario};
use sa_lab_core::lyapunov::LyapunovFunction;
use sa_lab_core::noise::NoiseModel;
use sa_lab_core::operators::{self, CurvatureKind, Operator};
use sa_lab_core::schedules::StepSchedule;
use serde::Deserialize;
use std::path::Path;

/// Operator fragment.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    SelectorControl {},
    Contractive {
        gamma: f64,
        target: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Hurwitz {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    PlGradient {
        #[serde(default = "default_curvature")]
        kind: CurvatureConfig,
        spectrum: Vec<f64>,
        step: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Nonexpansive {
        spectrum: Vec<f64>,
        eta: f64,
    },
    ConstantMean {
        mu: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureConfig {
    Quadratic,
    RotatedQuadratic,
}

fn default_curvature() -> CurvatureConfig {
    CurvatureConfig::Quadratic
}

impl OperatorConfig {
    pub fn build(&self) -> Result<Operator, CliError> {
        let op = match self {
            OperatorConfig::SelectorControl {} => operators::make_selector_control(),
            OperatorConfig::Contractive {
                gamma,
                target,
                weights,
            } => operators::make_contractive_affine(*gamma, target.clone(), weights.clone())
                .map_err(config_err)?,
            OperatorConfig::Hurwitz { a, b } => {
                operators::make_hurwitz_linear(a, b.clone()).map_err(config_err)?
            }
            OperatorConfig::PlGradient {
                kind,
                spectrum,
                step,
                center,
            } => {
                let center = center
                    .clone()
                    .unwrap_or_else(|| vec![0.0; spectrum.len()]);
                let kind = match kind {
                    CurvatureConfig::Quadratic => CurvatureKind::Quadratic,
                    CurvatureConfig::RotatedQuadratic => CurvatureKind::RotatedQuadratic,
                };
                operators::make_pl_gradient(kind, spectrum.clone(), *step, center)
                    .map_err(config_err)?
            }
            OperatorConfig::Nonexpansive { spectrum, eta } => {
                operators::make_nonexpansive(spectrum.clone(), *eta).map_err(config_err)?
            }
            OperatorConfig::ConstantMean { mu } => operators::make_constant_mean(*mu),
        };
        Ok(op)
    }
}

/// Diagnostics fragment; `D` and `p` together enable upcrossing tracking.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsFragment {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub jump_threshold: Option<f64>,
    #[serde(default)]
    pub tail_fraction: Option<f64>,
    #[serde(rename = "D", default)]
    pub band_level: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

impl DiagnosticsFragment {
    pub fn build(&self) -> Result<DiagnosticsConfig, CliError> {
        let defaults = DiagnosticsConfig::default();
        let projection = match (self.band_level, self.p) {
            (Some(d), Some(p)) => Some((d, p)),
            (None, None) => None,
            _ => {
                return Err(CliError::new(
                    ExitCode::Config,
                    "diagnostics: D and p must be given together",
                ))
            }
        };
        Ok(DiagnosticsConfig {
            epsilon: self.epsilon,
            jump_threshold: self.jump_threshold.unwrap_or(defaults.jump_threshold),
            tail_fraction: self.tail_fraction.unwrap_or(defaults.tail_fraction),
            projection,
        })
    }
}

/// Top-level scenario config for `run` and `phase-scan`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub operator: OperatorConfig,
    pub noise: NoiseModel,
    pub schedule: StepSchedule,
    pub horizon: u64,
    pub n_trajectories: u64,
    pub seed: u64,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub diagnostics: DiagnosticsFragment,
    /// Exponent grid for `phase-scan`; the `--xi` flag overrides it.
    #[serde(default)]
    pub xi_list: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn build(&self) -> Result<Scenario, CliError> {
        if self.name.is_empty() || !is_safe_name(&self.name) {
            return Err(CliError::new(
                ExitCode::Config,
                format!(
                    "name: must be non-empty and limited to [A-Za-z0-9_.-], got {:?}",
                    self.name
                ),
            ));
        }
        let operator = self.operator.build()?;
        self.schedule.validate().map_err(config_err)?;
        let mut noise = self.noise.clone();
        noise.validate().map_err(config_err)?;
        if noise.dim() == 1 && operator.dim() > 1 {
            noise = noise.with_dim(operator.dim());
            noise.validate().map_err(config_err)?;
        }
        if noise.dim() != operator.dim() {
            return Err(CliError::new(
                ExitCode::Config,
                format!(
                    "noise: dimension {} does not match operator dimension {}",
                    noise.dim(),
                    operator.dim()
                ),
            ));
        }
        // Point a centre-less multiplicative wrapper at the operator's fixed
        // point, so its growth is measured from x*.
        if let NoiseModel::Multiplicative {
            lambda,
            base,
            center: None,
        } = &noise
        {
            if let Some(fp) = operator.fixed_point() {
                noise = NoiseModel::Multiplicative {
                    lambda: *lambda,
                    base: base.clone(),
                    center: Some(fp.to_vec()),
                };
            }
        }
        let x0 = match &self.x0 {
            Some(v) => v.clone(),
            None => vec![1.0; operator.dim()],
        };
        if x0.len() != operator.dim() {
            return Err(CliError::new(
                ExitCode::Config,
                format!(
                    "x0: length {} does not match operator dimension {}",
                    x0.len(),
                    operator.dim()
                ),
            ));
        }
        Ok(Scenario {
            name: self.name.clone(),
            operator,
            noise,
            schedule: self.schedule.clone(),
            x0,
            horizon: self.horizon,
            diagnostics: self.diagnostics.build()?,
        })
    }
}

/// Certification region fragment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFragment {
    pub r_min: f64,
    pub r_max: f64,
}

fn default_cert_samples() -> u64 {
    100_000
}

/// Top-level config for `certify`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub name: String,
    pub operator: OperatorConfig,
    pub lyapunov: LyapunovFunction,
    pub region: RegionFragment,
    #[serde(default = "default_cert_samples")]
    pub samples: u64,
    pub seed: u64,
}

impl CertifyConfig {
    pub fn build(&self) -> Result<(Operator, LyapunovFunction), CliError> {
        if self.name.is_empty() || !is_safe_name(&self.name) {
            return Err(CliError::new(
                ExitCode::Config,
                "name: must be non-empty and limited to [A-Za-z0-9_.-]",
            ));
        }
        let op = self.operator.build()?;
        self.lyapunov.validate().map_err(config_err)?;
        if self.lyapunov.dim() != op.dim() {
            return Err(CliError::new(
                ExitCode::Config,
                format!(
                    "lyapunov: dimension {} does not match operator dimension {}",
                    self.lyapunov.dim(),
                    op.dim()
                ),
            ));
        }
        Ok((op, self.lyapunov.clone()))
    }
}

fn is_safe_name(name: &str) -> bool {
    name.chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn config_err(e: sa_lab_core::Error) -> CliError {
    CliError::new(ExitCode::Config, e.to_string())
}

/// Reads and strictly deserialises a JSON config, naming the offending field
/// on failure.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(
            ExitCode::Io,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::new(
            ExitCode::Config,
            format!(
                "{}: invalid config at field `{}`: {}",
                path.display(),
                e.path(),
                e.inner()
            ),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_scenario(json: &str) -> Result<Scenario, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(json).expect("syntactically valid");
        cfg.build()
    }

    #[test]
    fn selector_scenario_builds_with_defaults() {
        let s = parse_scenario(
            r#"{
                "name": "sc",
                "operator": {"family": "selector_control"},
                "noise": {"family": "three_point", "alpha": 0.1, "K": 1, "xi": 0.8, "p": 1.6, "c": 0.5},
                "schedule": {"kind": "polynomial", "alpha": 0.1, "K": 1, "xi": 0.8},
                "horizon": 100,
                "n_trajectories": 2,
                "seed": 1
            }"#,
        )
        .unwrap();
        assert_eq!(s.operator.dim(), 2);
        assert_eq!(s.noise.dim(), 2, "1-d noise fragment widened to operator dim");
        assert_eq!(s.x0, vec![1.0, 1.0]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<ScenarioConfig, _> = serde_json::from_str(
            r#"{
                "name": "sc",
                "operator": {"family": "selector_control"},
                "noise": {"family": "zero"},
                "schedule": {"kind": "polynomial", "xi": 0.8},
                "horizon": 100,
                "n_trajectories": 2,
                "seed": 1,
                "horizonn": 5
            }"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn multiplicative_center_defaults_to_fixed_point() {
        let s = parse_scenario(
            r#"{
                "name": "m",
                "operator": {"family": "contractive", "gamma": 0.5, "target": [2.0, 0.0]},
                "noise": {"family": "multiplicative", "lambda": 0.5,
                          "base": {"family": "iid", "distribution": "gaussian", "sigma": 1.0}},
                "schedule": {"kind": "polynomial", "alpha": 0.1, "K": 1, "xi": 0.8},
                "horizon": 10,
                "n_trajectories": 1,
                "seed": 1
            }"#,
        )
        .unwrap();
        match &s.noise {
            NoiseModel::Multiplicative { center, .. } => {
                assert_eq!(center.as_deref(), Some(&[2.0, 0.0][..]));
            }
            other => panic!("unexpected noise {other:?}"),
        }
    }

    #[test]
    fn band_tracking_requires_both_parameters() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{
                "name": "sc",
                "operator": {"family": "selector_control"},
                "noise": {"family": "zero"},
                "schedule": {"kind": "polynomial", "alpha": 0.1, "K": 1, "xi": 0.8},
                "horizon": 100,
                "n_trajectories": 2,
                "seed": 1,
                "diagnostics": {"D": 0.5}
            }"#,
        )
        .unwrap();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn hostile_names_rejected() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{
                "name": "../escape",
                "operator": {"family": "selector_control"},
                "noise": {"family": "zero"},
                "schedule": {"kind": "polynomial", "alpha": 0.1, "K": 1, "xi": 0.8},
                "horizon": 100,
                "n_trajectories": 2,
                "seed": 1
            }"#,
        )
        .unwrap();
        assert!(cfg.build().is_err());
    }
}
