//! Method configurations.

use serde::{Deserialize, Serialize};

use super::generators::Generator;
use crate::estimators::{EstimatorConfig, Schedule};
use crate::{Error, Result};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    check_positive("gamma", gamma)?;
    if gamma > 1.0 {
        return Err(Error::Config(format!(
            "gamma must be at most 1, got {gamma}"
        )));
    }
    Ok(())
}

fn check_estimator(e: &EstimatorConfig) -> Result<()> {
    check_positive("jacobian radius", e.jacobian_radius)
}

/// `x' = x − γη_t v`, `y' = y + η_t w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NstormConfig {
    pub gamma: f64,
    pub estimator: EstimatorConfig,
    /// Project iterates onto the feasible sets after every update.
    pub project_feasible: bool,
}

impl NstormConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        check_estimator(&self.estimator)
    }
}

/// `x' = x − γη_t v`, `y' = y + λη_t w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub estimator: EstimatorConfig,
    pub project_feasible: bool,
}

impl PlConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        check_positive("lambda", self.lambda)?;
        check_estimator(&self.estimator)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaNstormConfig {
    pub gamma: f64,
    pub lambda: f64,
    /// Moving-average factor in `(0, 1]`; `1` freezes the accumulators.
    pub tau: f64,
    /// Floor added to every adaptive-matrix entry.
    pub rho: f64,
    pub generator: Generator,
    pub estimator: EstimatorConfig,
    pub project_feasible: bool,
}

impl AdaNstormConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_positive("lambda", self.lambda)?;
        check_positive("rho", self.rho)?;
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!(
                "tau must be in (0, 1], got {}",
                self.tau
            )));
        }
        self.generator.validate()?;
        check_estimator(&self.estimator)
    }
}

/// Shared by both biased baselines; they reuse the NSTORM schedules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub gamma: f64,
    pub schedule: Schedule,
    pub project_feasible: bool,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Nstorm(NstormConfig),
    NstormPl(PlConfig),
    AdaNstorm(AdaNstormConfig),
    /// Moving-average inner value with raw sampled gradients.
    Scgda(BaselineConfig),
    /// Plugs the sampled inner value straight into the outer gradients.
    Sgda(BaselineConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Nstorm(_) => "nstorm",
            Method::NstormPl(_) => "nstorm_pl",
            Method::AdaNstorm(_) => "ada_nstorm",
            Method::Scgda(_) => "scgda",
            Method::Sgda(_) => "sgda",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Nstorm(c) => c.validate(),
            Method::NstormPl(c) => c.validate(),
            Method::AdaNstorm(c) => c.validate(),
            Method::Scgda(c) | Method::Sgda(c) => c.validate(),
        }
    }

    pub fn schedule(&self) -> Schedule {
        match self {
            Method::Nstorm(c) => c.estimator.schedule,
            Method::NstormPl(c) => c.estimator.schedule,
            Method::AdaNstorm(c) => c.estimator.schedule,
            Method::Scgda(c) | Method::Sgda(c) => c.schedule,
        }
    }

    pub fn project_feasible(&self) -> bool {
        match self {
            Method::Nstorm(c) => c.project_feasible,
            Method::NstormPl(c) => c.project_feasible,
            Method::AdaNstorm(c) => c.project_feasible,
            Method::Scgda(c) | Method::Sgda(c) => c.project_feasible,
        }
    }
}
