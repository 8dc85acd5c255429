//! Run descriptor read from JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barrier::BarrierConfig;

use super::{CliError, Command, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the command given on the command line when present.
    #[serde(default)]
    pub command: Option<Command>,
    pub barrier: BarrierConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Option<Format>,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub traverse: TraverseOptions,
    #[serde(default)]
    pub tg: TgOptions,
    #[serde(default)]
    pub oracle: OracleOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    #[default]
    Linear,
    /// `count` uniform draws from `[start, stop]`, seeded.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub mode: SweepMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraverseOptions {
    /// `(n, m)` pairs; all `0 <= m < n <= N` when absent.
    #[serde(default)]
    pub pairs: Option<Vec<(u32, u32)>>,
    /// `pi` branch for high-frequency angles.
    #[serde(default = "default_branch")]
    pub branch: u32,
}

fn default_branch() -> u32 {
    1
}

impl Default for TraverseOptions {
    fn default() -> Self {
        Self {
            pairs: None,
            branch: default_branch(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TgOptions {
    #[serde(default = "default_cutoff")]
    pub cutoff_tol: f64,
}

fn default_cutoff() -> f64 {
    1e-6
}

impl Default for TgOptions {
    fn default() -> Self {
        Self {
            cutoff_tol: default_cutoff(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    /// Mean packet energy; defaults to `barrier.e_incident`.
    #[serde(default)]
    pub energy: Option<f64>,
    /// Energy standard deviation; chosen to minimise spreading when absent.
    #[serde(default)]
    pub energy_width: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub k_min: Option<f64>,
    #[serde(default)]
    pub k_max: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_points() -> usize {
    4096
}

fn default_samples() -> usize {
    400
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            energy: None,
            energy_width: None,
            points: default_points(),
            k_min: None,
            k_max: None,
            samples: default_samples(),
        }
    }
}

/// One evaluated configuration of a (possibly swept) run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// Value of the swept field, if any.
    pub value: Option<f64>,
    pub barrier: BarrierConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!(
                "config line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    /// Sweep values in evaluation (and output) order.
    pub fn sweep_values(&self, seed: u64) -> Result<Vec<f64>, CliError> {
        let Some(sweep) = &self.sweep else {
            return Ok(Vec::new());
        };
        if sweep.count < 2 {
            return Err(CliError::Validation(format!(
                "field `sweep.count`: must be at least 2, got {}",
                sweep.count
            )));
        }
        if !(sweep.start.is_finite() && sweep.stop.is_finite()) {
            return Err(CliError::Validation(
                "field `sweep.start`/`sweep.stop`: must be finite".into(),
            ));
        }
        let (lo, hi) = (sweep.start, sweep.stop);
        Ok(match sweep.mode {
            SweepMode::Linear => (0..sweep.count)
                .map(|i| lo + (hi - lo) * i as f64 / (sweep.count - 1) as f64)
                .collect(),
            SweepMode::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..sweep.count)
                    .map(|_| lo + (hi - lo) * rng.random::<f64>())
                    .collect()
            }
        })
    }

    /// Expands the sweep and validates every resulting barrier.
    pub fn points(&self, seed: u64) -> Result<Vec<SweepPoint>, CliError> {
        let Some(sweep) = &self.sweep else {
            self.barrier.validate().map_err(|e| CliError::Validation(e.to_string()))?;
            return Ok(vec![SweepPoint {
                index: 0,
                value: None,
                barrier: self.barrier,
            }]);
        };
        self.sweep_values(seed)?
            .into_iter()
            .enumerate()
            .map(|(index, value)| {
                let barrier = self
                    .barrier
                    .with_field(&sweep.parameter, value)
                    .and_then(|b| b.validate().map(|_| b))
                    .map_err(|e| {
                        CliError::Validation(format!("sweep point {index} ({} = {value}): {e}", sweep.parameter))
                    })?;
                Ok(SweepPoint {
                    index,
                    value: Some(value),
                    barrier,
                })
            })
            .collect()
    }
}
