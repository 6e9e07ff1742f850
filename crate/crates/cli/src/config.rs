//! The JSON run configuration shared by all subcommands.
//!
//! Unknown keys are rejected everywhere so typos fail loudly before any
//! computation starts.

use std::path::Path;

use decay_lidar::baselines::endpoint::EndpointParams;
use decay_lidar::baselines::reflection::ReflectionPriors;
use decay_lidar::decay_map::MapPriors;
use decay_lidar::eval::EvalConfig;
use decay_lidar::mcl::{FilterConfig, OdometryNoise};
use decay_lidar::model::ModelKind;
use decay_lidar::simulator::{ScanSpec, TrajectorySpec, WorldSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Map-building parameters for all three models.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MappingParams {
    pub prior_rate: f64,
    pub unobserved_rate: f64,
    pub rate_cap: f64,
    pub prior_q: f64,
    pub unobserved_q: f64,
    pub sigma: f64,
    pub p_oor: f64,
}

impl Default for MappingParams {
    fn default() -> Self {
        let rates = MapPriors::default();
        let q = ReflectionPriors::default();
        let ep = EndpointParams::default();
        MappingParams {
            prior_rate: rates.prior_rate,
            unobserved_rate: rates.unobserved_rate,
            rate_cap: rates.rate_cap,
            prior_q: q.prior_q,
            unobserved_q: q.unobserved_q,
            sigma: ep.sigma,
            p_oor: ep.p_oor,
        }
    }
}

impl MappingParams {
    pub fn decay_priors(&self) -> MapPriors {
        MapPriors {
            prior_rate: self.prior_rate,
            unobserved_rate: self.unobserved_rate,
            rate_cap: self.rate_cap,
        }
    }

    pub fn reflection_priors(&self) -> ReflectionPriors {
        ReflectionPriors {
            prior_q: self.prior_q,
            unobserved_q: self.unobserved_q,
        }
    }

    pub fn endpoint_params(&self) -> EndpointParams {
        EndpointParams {
            sigma: self.sigma,
            p_oor: self.p_oor,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.prior_rate < 0.0 || self.unobserved_rate < 0.0 || self.rate_cap <= 0.0 {
            return Err(CliError::config(
                "mapping rates must be nonnegative and rate_cap positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.prior_q) || !(0.0..=1.0).contains(&self.unobserved_q) {
            return Err(CliError::config("mapping q priors must lie in [0, 1]"));
        }
        if self.sigma <= 0.0 {
            return Err(CliError::config("mapping sigma must be positive"));
        }
        if !(0.0 < self.p_oor && self.p_oor < 1.0) {
            return Err(CliError::config("mapping p_oor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for localization and evaluation randomness. The world carries
    /// its own seed for scan generation.
    pub seed: u64,
    pub world: Option<WorldSpec>,
    pub sensor: Option<ScanSpec>,
    pub trajectory: Option<TrajectorySpec>,
    pub mapping: MappingParams,
    pub filter: FilterConfig,
    pub odometry_noise: OdometryNoise,
    pub eval: EvalConfig,
    /// Default model for build-map and consistency check for localize.
    pub model: Option<ModelKind>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.mapping.validate()?;
        if let Some(sensor) = &self.sensor {
            sensor
                .validate()
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        self.filter
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        self.eval
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        if self.odometry_noise.translation < 0.0 || self.odometry_noise.rotation < 0.0 {
            return Err(CliError::config("odometry_noise values must be >= 0"));
        }
        Ok(())
    }

    pub fn world(&self) -> Result<&WorldSpec, CliError> {
        self.world
            .as_ref()
            .ok_or_else(|| CliError::config("config is missing the 'world' section"))
    }

    pub fn sensor(&self) -> Result<&ScanSpec, CliError> {
        self.sensor
            .as_ref()
            .ok_or_else(|| CliError::config("config is missing the 'sensor' section"))
    }

    pub fn trajectory(&self) -> Result<&TrajectorySpec, CliError> {
        self.trajectory
            .as_ref()
            .ok_or_else(|| CliError::config("config is missing the 'trajectory' section"))
    }

    /// Serialize the resolved configuration next to an output.
    pub fn write_echo(&self, output: &Path) -> Result<(), CliError> {
        let echo = echo_path(output);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::config(format!("cannot serialize config echo: {e}")))?;
        std::fs::write(&echo, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", echo.display())))?;
        Ok(())
    }
}

/// `foo.bin` -> `foo.bin.config.json`; directories get `config.echo.json`.
pub fn echo_path(output: &Path) -> std::path::PathBuf {
    if output.is_dir() {
        output.join("config.echo.json")
    } else {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".config.json");
        output.with_file_name(name)
    }
}
