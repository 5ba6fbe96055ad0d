use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-negative, finite amount of energy in abstract energy units.
///
/// Energy is continuous; any discretisation grid is a special case.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Energy(f64);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Energy(value))
        } else {
            Err(Error::Config(format!(
                "energy amount must be finite and non-negative, got {value}"
            )))
        }
    }

    /// Wraps a value already known to be valid. Negative zero and tiny
    /// round-off below zero are folded to `0.0`.
    #[inline]
    pub(crate) fn from_raw(value: f64) -> Self {
        debug_assert!(value.is_finite() && value > -1e-9, "bad energy {value}");
        Energy(value.max(0.0))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Energy {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Energy::new(value)
    }
}

impl From<Energy> for f64 {
    fn from(e: Energy) -> f64 {
        e.0
    }
}

impl Add for Energy {
    type Output = Energy;

    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

/// Saturating difference: never goes below zero.
impl Sub for Energy {
    type Output = Energy;

    fn sub(self, rhs: Energy) -> Energy {
        Energy((self.0 - rhs.0).max(0.0))
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
