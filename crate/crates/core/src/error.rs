use std::path::PathBuf;

use thiserror::Error;

use crate::convex::Regime;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("yield surface collapsed: sigma_Y(T = {temperature}) = {yield_stress} <= 0")]
    CollapsedYieldSurface { temperature: f64, yield_stress: f64 },

    #[error("yield function is not differentiable at sigma = {sigma}, beta_k = {beta_k} (kink)")]
    NonDifferentiable { sigma: f64, beta_k: f64 },

    #[error("regime `{0}` needs an absolute temperature T > 0")]
    MissingTemperature(Regime),

    #[error(
        "closest-point projection reaches the apex of the yield surface (elastic range is empty)"
    )]
    ApexReturn,

    #[error("regime `{0}` carries no entropy variables")]
    NonThermoRegime(Regime),

    #[error("second-law violation: entropy production {gamma} < 0")]
    SecondLawViolation { gamma: f64 },

    #[error(
        "unstable time step dt = {dt}: dt*sqrt(E/m) = {value} violates the bound dt*sqrt(E/m) < 2"
    )]
    UnstableTimeStep { dt: f64, value: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("insufficient cycling: no strain reversal detected in the trajectory")]
    InsufficientCycling,
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
