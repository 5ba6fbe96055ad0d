//! Discrete-time lossy battery.
//!
//! Per frame the transmitter demands `p` and harvests `u`. A surplus is
//! charged at efficiency `mu`; a deficit is drawn from the battery inflated
//! by `1/beta`. The stored level is clamped to `[0, e_max]`.

use serde::{Deserialize, Serialize};

use crate::energy::Energy;
use crate::error::{Error, Result};

/// Charging (`mu`) and discharging (`beta`) efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRates {
    pub mu: f64,
    pub beta: f64,
}

impl LossRates {
    pub fn new(mu: f64, beta: f64) -> Result<Self> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(mu) || !open_unit(beta) {
            return Err(Error::Config(format!(
                "loss rates must lie in (0, 1): mu = {mu}, beta = {beta}"
            )));
        }
        Ok(LossRates { mu, beta })
    }

    /// `mu = beta = 1`. Only meant for checking against a lossless buffer.
    pub const LOSSLESS: LossRates = LossRates { mu: 1.0, beta: 1.0 };

    /// Signed net energy flow `z` into the battery for harvest `u` and demand `p`.
    #[inline]
    pub fn net_flow(&self, u: f64, p: f64) -> f64 {
        if u >= p {
            self.mu * (u - p)
        } else {
            (u - p) / self.beta
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryParams {
    e_max: Energy,
    e_min: Energy,
    losses: LossRates,
}

impl BatteryParams {
    pub fn new(e_max: f64, e_min: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::with_losses(e_max, e_min, LossRates::new(mu, beta)?)
    }

    /// Perfect battery (`mu = beta = 1`).
    pub fn lossless(e_max: f64, e_min: f64) -> Result<Self> {
        Self::with_losses(e_max, e_min, LossRates::LOSSLESS)
    }

    fn with_losses(e_max: f64, e_min: f64, losses: LossRates) -> Result<Self> {
        let e_max = Energy::new(e_max)?;
        let e_min = Energy::new(e_min)?;
        if e_min >= e_max {
            return Err(Error::Config(format!(
                "need 0 <= e_min < e_max, got e_min = {e_min}, e_max = {e_max}"
            )));
        }
        Ok(BatteryParams {
            e_max,
            e_min,
            losses,
        })
    }

    pub fn e_max(&self) -> Energy {
        self.e_max
    }

    pub fn e_min(&self) -> Energy {
        self.e_min
    }

    /// Feasible capacity `E_c = e_max - e_min`.
    pub fn e_c(&self) -> Energy {
        self.e_max - self.e_min
    }

    pub fn losses(&self) -> LossRates {
        self.losses
    }

    pub fn mu(&self) -> f64 {
        self.losses.mu
    }

    pub fn beta(&self) -> f64 {
        self.losses.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub energy: Energy,
    pub frame_index: u64,
}

impl BatteryState {
    pub fn full(params: &BatteryParams) -> Self {
        BatteryState {
            energy: params.e_max,
            frame_index: 0,
        }
    }

    pub fn with_energy(energy: f64, params: &BatteryParams) -> Result<Self> {
        let energy = Energy::new(energy)?;
        if energy > params.e_max {
            return Err(Error::Config(format!(
                "initial energy {energy} exceeds e_max {}",
                params.e_max
            )));
        }
        Ok(BatteryState {
            energy,
            frame_index: 0,
        })
    }
}

/// Space left to store more energy, `e_max - E(i)`.
#[inline]
pub fn available_space(state: &BatteryState, params: &BatteryParams) -> Energy {
    params.e_max - state.energy
}

/// The available-space recursion `min{[space - z]^+, e_max}`, the dual of
/// the stored-energy recursion.
#[inline]
pub fn next_available_space(space: f64, z: f64, e_max: f64) -> f64 {
    (space - z).max(0.0).min(e_max)
}

/// Everything that happened to the energy in one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOutcome {
    /// Energy delivered to the transmitter, `p_c(i)`.
    pub consumed: Energy,
    /// Charged energy dissipated because the battery hit `e_max`.
    pub overflow_loss: Energy,
    /// Energy actually banked this frame.
    pub stored: Energy,
    /// Gross energy removed from the battery.
    pub drawn: Energy,
    pub charging_loss: Energy,
    pub discharging_loss: Energy,
    /// Post-step stored energy at or below `e_min`.
    pub underflow: bool,
    /// The battery could not cover the demand shortfall.
    pub outage: bool,
    pub demand_met: bool,
}

/// Advances the battery by one frame.
pub fn step(
    state: BatteryState,
    u: Energy,
    p: Energy,
    params: &BatteryParams,
) -> (BatteryState, StepOutcome) {
    let (u, p, e_prev) = (u.get(), p.get(), state.energy.get());
    let LossRates { mu, beta } = params.losses;
    let e_max = params.e_max.get();

    let z = params.losses.net_flow(u, p);
    let surplus = (u - p).max(0.0);
    let needed = (p - u).max(0.0) / beta;

    let outage = e_prev < needed;
    let (consumed, drawn) = if outage {
        (u + beta * e_prev, e_prev)
    } else {
        (p, needed)
    };

    let raw = e_prev + z;
    let overflow = (raw - e_max).max(0.0);
    let energy = raw.max(0.0).min(e_max);
    let charged = mu * surplus;

    let next = BatteryState {
        energy: Energy::from_raw(energy),
        frame_index: state.frame_index + 1,
    };
    let outcome = StepOutcome {
        consumed: Energy::from_raw(consumed),
        overflow_loss: Energy::from_raw(overflow),
        stored: Energy::from_raw(charged - overflow),
        drawn: Energy::from_raw(drawn),
        charging_loss: Energy::from_raw(surplus - charged),
        discharging_loss: Energy::from_raw(drawn - beta * drawn),
        underflow: energy <= params.e_min.get(),
        outage,
        demand_met: !outage,
    };
    (next, outcome)
}
