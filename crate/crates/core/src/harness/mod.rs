//! Monte Carlo experiments: traces, sweeps over capacity and decay rate,
//! policy comparisons, and their CSV output.

pub mod compare;
pub mod config;
pub mod output;
pub mod sweep;
pub mod trace;

pub use compare::{compare_policies, CompareRow};
pub use config::{
    resolve_policy, CapacityAxis, ComparePlan, ConfigFile, PolicyKind, PolicySpec, ResolvedPolicy,
    ScenarioConfig, SweepPlan,
};
pub use sweep::{run_sweep, SweepPoint, SweepRow};
pub use trace::{run_resolved, run_trace, EnergyLedger, TraceCounts, TraceStats};

use crate::error::{Error, Result};

/// A rayon pool with exactly `workers` threads.
pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}
