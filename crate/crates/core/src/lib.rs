//! Energy-harvesting transmitter with a lossy, finite battery: a frame-level
//! simulator and the large-deviation analysis of battery underflow.

pub mod analysis;
pub mod battery;
pub mod channel;
pub mod energy;
pub mod error;
pub mod harness;
pub mod process;
pub mod rng;

pub use battery::{step, BatteryParams, BatteryState, LossRates, StepOutcome};
pub use channel::{consumed_energy, service_rate, ChannelParams, DemandPolicy};
pub use energy::Energy;
pub use error::{Error, Result};
pub use process::{ArrivalProcess, FadingProcess};
pub use rng::RngHandle;
