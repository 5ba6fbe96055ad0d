//! Block-fading channel: demand policies, consumed energy, service rate.

use serde::{Deserialize, Serialize};

use crate::energy::Energy;
use crate::error::{Error, Result};

/// Symbols per frame `N` and noise power `sigma_w^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub n_symbols: u32,
    pub noise_power: f64,
}

impl Default for ChannelParams {
    /// `N = 100`, `sigma_w^2 = 1`. Assumed values; nothing in the model pins them.
    fn default() -> Self {
        ChannelParams {
            n_symbols: 100,
            noise_power: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn new(n_symbols: u32, noise_power: f64) -> Result<Self> {
        let ch = ChannelParams {
            n_symbols,
            noise_power,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(Error::Config("n_symbols must be at least 1".into()));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::Config(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        Ok(())
    }

    /// Total noise energy per frame, `N * sigma_w^2`.
    #[inline]
    pub fn frame_noise(&self) -> f64 {
        self.n_symbols as f64 * self.noise_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemandPolicy {
    /// Demand a fixed amount every frame.
    Constant(Energy),
    /// `N sigma^2 [1/epsilon - 1/h_pow]^+`: nothing below the cutoff gain.
    WaterFilling { epsilon: f64 },
    /// No battery: every harvested unit is spent in the frame it arrives.
    NoStorage,
}

impl DemandPolicy {
    pub fn constant(level: f64) -> Result<Self> {
        Ok(DemandPolicy::Constant(Energy::new(level)?))
    }

    pub fn water_filling(epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "water-filling cutoff must be positive, got {epsilon}"
            )));
        }
        Ok(DemandPolicy::WaterFilling { epsilon })
    }

    pub fn label(&self) -> &'static str {
        match self {
            DemandPolicy::Constant(_) => "constant",
            DemandPolicy::WaterFilling { .. } => "water_filling",
            DemandPolicy::NoStorage => "no_storage",
        }
    }

    /// Energy demanded for a frame with power gain `h_pow`.
    ///
    /// `None` for [`DemandPolicy::NoStorage`], which has no demand: it spends
    /// the harvest directly.
    #[inline]
    pub fn demand(&self, h_pow: f64, ch: &ChannelParams) -> Option<Energy> {
        match *self {
            DemandPolicy::Constant(p) => Some(p),
            DemandPolicy::WaterFilling { epsilon } => Some(Energy::from_raw(water_filling_level(
                epsilon,
                h_pow,
                ch.frame_noise(),
            ))),
            DemandPolicy::NoStorage => None,
        }
    }
}

#[inline]
pub(crate) fn water_filling_level(epsilon: f64, h_pow: f64, frame_noise: f64) -> f64 {
    frame_noise * (1.0 / epsilon - 1.0 / h_pow).max(0.0)
}

/// Energy the transmitter actually gets: the full demand if the battery can
/// cover the shortfall, otherwise the harvest plus everything left in the
/// battery after discharge losses.
pub fn consumed_energy(e_prev: Energy, u: Energy, p: Energy, beta: f64) -> Energy {
    let (e_prev, u, p) = (e_prev.get(), u.get(), p.get());
    if e_prev >= (p - u).max(0.0) / beta {
        Energy::from_raw(p)
    } else {
        Energy::from_raw(u + beta * e_prev)
    }
}

/// Bits per frame, `N log2(1 + p_c h_pow / (N sigma^2))`.
#[inline]
pub fn service_rate(consumed: Energy, h_pow: f64, ch: &ChannelParams) -> f64 {
    let snr = consumed.get() * h_pow / ch.frame_noise();
    ch.n_symbols as f64 * snr.ln_1p() / std::f64::consts::LN_2
}
