//! IID per-frame random inputs: harvested energy and channel power gain.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::energy::Energy;
use crate::error::{Error, Result};

/// Energy harvested per frame, IID across frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalProcess {
    /// Exponential with the given rate (1/energy-unit); mean `1/rate`.
    Exponential { rate: f64 },
    /// Uniform draw from a fixed table of non-negative samples.
    Empirical { samples: Vec<f64> },
}

impl ArrivalProcess {
    pub fn exponential(rate: f64) -> Result<Self> {
        let p = ArrivalProcess::Exponential { rate };
        p.validate()?;
        Ok(p)
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        let p = ArrivalProcess::Empirical { samples };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArrivalProcess::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::Config(format!(
                        "arrival rate must be positive and finite, got {rate}"
                    )));
                }
            }
            ArrivalProcess::Empirical { samples } => validate_table("arrival", samples, true)?,
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            ArrivalProcess::Exponential { rate } => 1.0 / rate,
            ArrivalProcess::Empirical { samples } => table_mean(samples),
        }
    }

    /// Draws one frame's harvest `u(i)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Energy {
        match self {
            ArrivalProcess::Exponential { rate } => {
                let x: f64 = Exp1.sample(rng);
                Energy::from_raw(x / rate)
            }
            ArrivalProcess::Empirical { samples } => {
                Energy::from_raw(samples[rng.random_range(0..samples.len())])
            }
        }
    }
}

/// Channel power gain `h_pow(i)`, constant within a frame and IID across frames.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FadingProcess {
    /// Rayleigh envelope: exponential power with unit mean.
    #[default]
    UnitMeanExponential,
    Constant {
        gain: f64,
    },
    Empirical {
        samples: Vec<f64>,
    },
}

impl FadingProcess {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingProcess::UnitMeanExponential => Ok(()),
            FadingProcess::Constant { gain } => {
                if gain.is_finite() && *gain > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "constant channel gain must be positive, got {gain}"
                    )))
                }
            }
            FadingProcess::Empirical { samples } => validate_table("fading", samples, false),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FadingProcess::UnitMeanExponential => 1.0,
            FadingProcess::Constant { gain } => *gain,
            FadingProcess::Empirical { samples } => table_mean(samples),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingProcess::UnitMeanExponential => {
                // Exp1 can return exactly 0.0 with negligible probability.
                let x: f64 = Exp1.sample(rng);
                x.max(f64::MIN_POSITIVE)
            }
            FadingProcess::Constant { gain } => *gain,
            FadingProcess::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }
}

fn validate_table(what: &str, samples: &[f64], allow_zero: bool) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Config(format!("empirical {what} table is empty")));
    }
    let bad = samples
        .iter()
        .find(|&&s| !s.is_finite() || s < 0.0 || (!allow_zero && s == 0.0));
    match bad {
        Some(s) => Err(Error::Config(format!(
            "empirical {what} table has invalid entry {s}"
        ))),
        None => Ok(()),
    }
}

fn table_mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}
