//! Synthetic shuttered-counter campaigns with known ground truth.
//!
//! Counts are drawn from a Poisson law whose rate is frozen per interval:
//! a drifting dark rate, plus an injected light rate while the shutter is
//! open, plus an optional closed-shutter offset that models detector flash
//! photons reflected back off the shutter. Identical seeds give bit-identical
//! campaigns.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{CountInterval, CountSeries, SeriesSummary, Shutter, ShutterProtocol};
use crate::math::{non_negative, positive};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("closed-shutter mean rates must be positive to form a ratio (got {0} and {1})")]
    NonPositiveMean(f64, f64),
}

/// Dark-rate drift law. The drift models are stand-ins used to exercise the
/// drift-cancellation property of the differencing protocol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriftModel {
    #[default]
    None,
    RandomWalk { step_sd_per_hour: f64 },
    Sinusoid { amplitude: f64, period_hours: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkRateModel {
    /// Stationary dark count rate in counts per second.
    pub base_rate: f64,
    #[serde(default)]
    pub drift: DriftModel,
    /// Lower clamp keeping the instantaneous rate physical.
    #[serde(default)]
    pub clamp_min: f64,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dark: DarkRateModel,
    /// Light rate in counts per second, added only while the shutter is open.
    #[serde(default)]
    pub light_rate: f64,
    /// Closed-shutter rate offset from reflected flash photons.
    #[serde(default)]
    pub flash_closed_rate: f64,
    pub duration_hours: f64,
    #[serde(default)]
    pub protocol: ShutterProtocol,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !non_negative(self.dark.base_rate) {
            return Err(SimError::InvalidConfig("dark.base_rate must be >= 0".into()));
        }
        if !non_negative(self.dark.clamp_min) {
            return Err(SimError::InvalidConfig("dark.clamp_min must be >= 0".into()));
        }
        if !non_negative(self.light_rate) {
            return Err(SimError::InvalidConfig("light_rate must be >= 0".into()));
        }
        if !non_negative(self.flash_closed_rate) {
            return Err(SimError::InvalidConfig(
                "flash_closed_rate must be >= 0".into(),
            ));
        }
        if !positive(self.duration_hours) {
            return Err(SimError::InvalidConfig("duration_hours must be > 0".into()));
        }
        match self.dark.drift {
            DriftModel::RandomWalk { step_sd_per_hour } if !non_negative(step_sd_per_hour) => {
                return Err(SimError::InvalidConfig(
                    "random_walk step_sd_per_hour must be >= 0".into(),
                ))
            }
            DriftModel::Sinusoid {
                amplitude,
                period_hours,
            } if !non_negative(amplitude) || !positive(period_hours) => {
                return Err(SimError::InvalidConfig(
                    "sinusoid needs amplitude >= 0 and period_hours > 0".into(),
                ))
            }
            _ => {}
        }
        self.protocol
            .validate()
            .map_err(|e| SimError::InvalidConfig(e.to_string()))
    }
}

/// Generate a full campaign under the given configuration.
pub fn simulate_campaign(config: &SimConfig) -> Result<CountSeries, SimError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let step = config.protocol.interval_len as u64;
    let n_intervals = (config.duration_hours * 3600.0 / step as f64).floor() as u64;
    let block_len = config.protocol.block_len as u64;

    let step_sd_interval = match config.dark.drift {
        DriftModel::RandomWalk { step_sd_per_hour } => {
            step_sd_per_hour * (step as f64 / 3600.0).sqrt()
        }
        _ => 0.0,
    };
    let walk = Normal::new(0.0, step_sd_interval)
        .map_err(|e| SimError::InvalidConfig(format!("random walk step: {e}")))?;

    let mut dark = config.dark.base_rate.max(config.dark.clamp_min);
    let mut intervals = Vec::with_capacity(n_intervals as usize);
    for k in 0..n_intervals {
        let t_start = k * step;
        let shutter = if (k / block_len).is_multiple_of(2) {
            Shutter::Open
        } else {
            Shutter::Closed
        };

        let dark_now = match config.dark.drift {
            DriftModel::None => dark,
            DriftModel::RandomWalk { .. } => dark,
            DriftModel::Sinusoid {
                amplitude,
                period_hours,
            } => {
                let phase = 2.0 * std::f64::consts::PI * t_start as f64 / (period_hours * 3600.0);
                (config.dark.base_rate + amplitude * phase.sin()).max(config.dark.clamp_min)
            }
        };

        let mut rate = dark_now;
        match shutter {
            Shutter::Open => rate += config.light_rate,
            Shutter::Closed => rate += config.flash_closed_rate,
        }

        let mean = rate * step as f64;
        let counts = if mean > 0.0 {
            let draw: f64 = Poisson::new(mean)
                .map_err(|e| SimError::InvalidConfig(format!("poisson rate {mean}: {e}")))?
                .sample(&mut rng);
            draw as u32
        } else {
            0
        };
        intervals.push(CountInterval {
            t_start,
            shutter,
            counts,
        });

        if let DriftModel::RandomWalk { .. } = config.dark.drift {
            let jump: f64 = walk.sample(&mut rng);
            dark = (dark + jump).max(config.dark.clamp_min);
        }
    }

    Ok(CountSeries { intervals })
}

/// Ratio of mean closed-shutter rates between two campaigns.
pub fn estimate_q(
    closed_summary_b: &SeriesSummary,
    closed_summary_m: &SeriesSummary,
) -> Result<f64, SimError> {
    let (b, m) = (closed_summary_b.mean, closed_summary_m.mean);
    if !positive(b) || !positive(m) {
        return Err(SimError::NonPositiveMean(b, m));
    }
    Ok(b / m)
}
