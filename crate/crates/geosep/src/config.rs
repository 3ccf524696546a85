//! Flat TOML run configuration. Flags override the file, the file
//! overrides the defaults, and the effective result is echoed next to the
//! outputs.

use std::path::{Path, PathBuf};

use geosep_core::eval::MeasureConfig;
use geosep_core::separation::{Calibration, LambdaMin, ScheduleKind, SolverConfig};
use geosep_core::shearlets::ShearletSpec;
use geosep_core::subband::Weights;
use geosep_core::synth::{DEFAULT_SIGMA, DEFAULT_SIZE};
use geosep_core::wavelets::WaveletSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Every tunable of a run. Optional thresholds left unset mean "automatic".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: usize,
    pub lambda_max_factor: f64,
    pub lambda_min: Option<f64>,
    pub schedule: Schedule,
    /// shearlet / wavelet threshold ratio
    pub rho: Option<f64>,
    pub wavelet_levels: usize,
    pub scales: usize,
    pub fan_order: usize,
    pub levels: usize,
    pub weights: Vec<f64>,
    /// require non-decreasing weights
    pub monotone_weights: bool,
    pub sigma_g: f64,
    pub seed: u64,
    pub size: usize,
    pub sigma: f64,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub truth_points: Option<PathBuf>,
    pub truth_curves: Option<PathBuf>,
    pub est_points: Option<PathBuf>,
    pub est_curves: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Linear,
    #[value(alias = "exponential")]
    #[serde(alias = "exponential")]
    Exp,
}

impl From<Schedule> for ScheduleKind {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Linear => ScheduleKind::Linear,
            Schedule::Exp => ScheduleKind::Exponential,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            iterations: solver.iterations,
            lambda_max_factor: solver.lambda_max_factor,
            lambda_min: None,
            schedule: Schedule::Linear,
            rho: None,
            wavelet_levels: solver.wavelet.levels(),
            scales: solver.shearlet.scales(),
            fan_order: solver.shearlet.fan_order(),
            levels: solver.subband_levels,
            weights: solver.weights.values().to_vec(),
            monotone_weights: false,
            sigma_g: MeasureConfig::default().gaussian_sigma,
            seed: 0,
            size: DEFAULT_SIZE,
            sigma: DEFAULT_SIGMA,
            input: None,
            out: None,
            truth_points: None,
            truth_curves: None,
            est_points: None,
            est_curves: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let wavelet = WaveletSpec::cdf97(self.wavelet_levels)?;
        let shearlet = ShearletSpec::new(self.scales, self.fan_order, WaveletSpec::cdf97(self.scales)?)?;
        if self.weights.len() != self.levels + 1 {
            return Err(CliError::Config(format!(
                "{} subband levels need {} weights, got {}",
                self.levels,
                self.levels + 1,
                self.weights.len()
            )));
        }
        let weights = if self.monotone_weights {
            Weights::monotone(self.weights.clone())?
        } else {
            Weights::new(self.weights.clone())?
        };
        let config = SolverConfig {
            iterations: self.iterations,
            lambda_max_factor: self.lambda_max_factor,
            lambda_min: self.lambda_min.map_or(LambdaMin::Auto, LambdaMin::Fixed),
            schedule: self.schedule.into(),
            calibration: self.rho.map_or(Calibration::Auto, Calibration::Fixed),
            wavelet,
            shearlet,
            subband_levels: self.levels,
            weights,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn measure(&self) -> Result<MeasureConfig> {
        let m = MeasureConfig::with_sigma(self.sigma_g);
        m.validate()?;
        Ok(m)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
