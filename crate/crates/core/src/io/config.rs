//! JSON run configuration.
//!
//! ```json
//! {
//!   "regime": "perfect", "E": 30, "m": 0.82, "sigma_Y0": 1.0,
//!   "dt": 1e-4, "t_end": 20,
//!   "initial": { "eps": 1.0 },
//!   "loading": { "kind": "free" }
//! }
//! ```
//!
//! Defaults: `K = H = omega = eta = 0`, `T0 = T`, `dt = 1e-4`, `t0 = 0`,
//! `stride = 1`, zero initial state, free loading, per-step localization.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::Tolerances;
use crate::convex::{Regime, YieldCriterion};
use crate::error::{Error, Result};
use crate::integrator::{EventLocalization, LoadingProgram, SimConfig};
use crate::models::{MaterialModel, MaterialState};

fn default_dt() -> f64 {
    1e-4
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialFile {
    pub eps: f64,
    pub v: f64,
    pub eps_p: f64,
    pub xi_i: f64,
    pub xi_k: f64,
    #[serde(rename = "S_e")]
    pub s_e: f64,
    #[serde(rename = "S_p")]
    pub s_p: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadingFile {
    #[default]
    Free,
    ExternalForce {
        amplitude: f64,
        angular_frequency: f64,
    },
    PrescribedStrain {
        knots: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationFile {
    #[default]
    PerStep,
    Bisection,
}

/// On-disk schema, one-to-one with the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub regime: Regime,
    #[serde(rename = "E")]
    pub young: f64,
    pub m: f64,
    #[serde(rename = "sigma_Y0")]
    pub sigma_y0: f64,
    #[serde(rename = "K", default)]
    pub isotropic_modulus: f64,
    #[serde(rename = "H", default)]
    pub kinematic_modulus: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(rename = "T0", default, skip_serializing_if = "Option::is_none")]
    pub reference_temperature: Option<f64>,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub initial: InitialFile,
    #[serde(default)]
    pub loading: LoadingFile,
    #[serde(default)]
    pub event_localization: LocalizationFile,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ConfigFile {
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let regime = self.regime;
        if !regime.is_thermo() {
            if self.omega != 0.0 {
                return Err(Error::config(
                    "omega",
                    format!("regime `{regime}` has no temperature law, omega must be 0"),
                ));
            }
            if self.temperature.is_some() || self.reference_temperature.is_some() {
                return Err(Error::config(
                    "T",
                    format!("regime `{regime}` is isothermal, T and T0 must be absent"),
                ));
            }
        }
        let mut criterion = YieldCriterion::new(regime, self.sigma_y0)?;
        let mut model = None;
        if regime.is_thermo() {
            let temperature = self.temperature.ok_or(Error::MissingTemperature(regime))?;
            let t0 = self.reference_temperature.unwrap_or(temperature);
            criterion = criterion.with_temperature_law(self.omega, t0)?;
            model = Some(
                MaterialModel::new(criterion, self.young, self.m)?.at_temperature(temperature)?,
            );
        }
        let model = match model {
            Some(m) => m,
            None => MaterialModel::new(criterion, self.young, self.m)?,
        }
        .with_isotropic_hardening(self.isotropic_modulus)?
        .with_kinematic_hardening(self.kinematic_modulus)?;

        let i = &self.initial;
        let initial = MaterialState {
            t: self.t0,
            eps: i.eps,
            v: i.v,
            eps_p: i.eps_p,
            xi_i: i.xi_i,
            xi_k: i.xi_k,
            s_e: i.s_e,
            s_p: i.s_p,
        };
        let loading = match &self.loading {
            LoadingFile::Free => LoadingProgram::Free,
            LoadingFile::ExternalForce {
                amplitude,
                angular_frequency,
            } => LoadingProgram::ExternalForce {
                amplitude: *amplitude,
                angular_frequency: *angular_frequency,
            },
            LoadingFile::PrescribedStrain { knots } => LoadingProgram::PrescribedStrain {
                knots: knots.iter().map(|[t, e]| (*t, *e)).collect(),
            },
        };
        let config = SimConfig {
            model,
            dt: self.dt,
            t_end: self.t_end,
            initial,
            loading,
            event_localization: match self.event_localization {
                LocalizationFile::PerStep => EventLocalization::PerStep,
                LocalizationFile::Bisection => EventLocalization::Bisection,
            },
            stride: self.stride,
            viscosity: self.eta,
            tolerances: self.tolerances,
        };
        config.validate()?;
        Ok(config)
    }

    /// Fully resolved schema for `config`, with every default spelled out.
    pub fn from_sim_config(config: &SimConfig) -> Self {
        let model = &config.model;
        let thermo = model.regime().is_thermo();
        let s = &config.initial;
        ConfigFile {
            regime: model.regime(),
            young: model.young,
            m: model.mass,
            sigma_y0: model.criterion.sigma_y0,
            isotropic_modulus: model.isotropic_modulus,
            kinematic_modulus: model.kinematic_modulus,
            omega: if thermo { model.criterion.omega } else { 0.0 },
            temperature: if thermo { model.temperature } else { None },
            reference_temperature: thermo.then_some(model.criterion.t0),
            eta: config.viscosity,
            dt: config.dt,
            t0: s.t,
            t_end: config.t_end,
            stride: config.stride,
            initial: InitialFile {
                eps: s.eps,
                v: s.v,
                eps_p: s.eps_p,
                xi_i: s.xi_i,
                xi_k: s.xi_k,
                s_e: s.s_e,
                s_p: s.s_p,
            },
            loading: match &config.loading {
                LoadingProgram::Free => LoadingFile::Free,
                LoadingProgram::ExternalForce {
                    amplitude,
                    angular_frequency,
                } => LoadingFile::ExternalForce {
                    amplitude: *amplitude,
                    angular_frequency: *angular_frequency,
                },
                LoadingProgram::PrescribedStrain { knots } => LoadingFile::PrescribedStrain {
                    knots: knots.iter().map(|(t, e)| [*t, *e]).collect(),
                },
            },
            event_localization: match config.event_localization {
                EventLocalization::PerStep => LocalizationFile::PerStep,
                EventLocalization::Bisection => LocalizationFile::Bisection,
            },
            tolerances: config.tolerances,
        }
    }
}

pub fn parse_config_value(value: Value) -> Result<SimConfig> {
    let file: ConfigFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    file.to_sim_config()
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| Error::config(".", e.to_string()))?;
    file.to_sim_config()
}

/// Resolved configuration as JSON; feeding it back to [`parse_config`]
/// reproduces `config` exactly.
pub fn config_echo(config: &SimConfig) -> Value {
    serde_json::to_value(ConfigFile::from_sim_config(config)).unwrap_or(Value::Null)
}

/// Sets a dotted key (`"K"`, `"initial.eps"`, `"loading.amplitude"`) in a
/// JSON document, creating intermediate objects.
pub fn set_key(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::config(key, "empty path component"));
        }
        let Value::Object(map) = node else {
            return Err(Error::config(key, "path goes through a non-object value"));
        };
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
