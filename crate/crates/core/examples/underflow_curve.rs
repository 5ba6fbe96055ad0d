//! Simulated underflow probability against the exponential approximation
//! over a grid of feasible capacities (fixed E_max, E_min = E_max - E_c).

use ehstore::analysis::PolicyFamily;
use ehstore::harness::{run_sweep, CapacityAxis, PolicySpec, ScenarioConfig, SweepPlan};
use ehstore::BatteryParams;

fn main() -> ehstore::Result<()> {
    let mut base = ScenarioConfig::new(
        BatteryParams::new(1.5e4, 0.0, 0.85, 0.80)?,
        PolicySpec::Solved {
            family: PolicyFamily::Constant,
            theta: 4.6e-4,
        },
    );
    base.frames = 2_050_000;
    base.burn_in = 50_000;
    let plan = SweepPlan {
        e_c: vec![1e3, 2e3, 4e3, 6e3, 8e3],
        theta: vec![4.6e-4, 9.2e-4],
        axis: CapacityAxis::FixedMax,
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!(
        "{:>10} {:>8} {:>12} {:>12} {:>7}",
        "theta", "E_c", "empirical", "exp(-thE_c)", "events"
    );
    for row in run_sweep(&base, &plan, workers)? {
        let p = row.result.map_err(|(_, msg)| ehstore::Error::Config(msg))?;
        println!(
            "{:>10.1e} {:>8.0} {:>12.4e} {:>12.4e} {:>7}{}",
            row.theta.unwrap_or(f64::NAN),
            row.e_c,
            p.empirical_underflow,
            p.approx_exp,
            p.events,
            if p.low_confidence {
                "  (low confidence)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
