//! When the whole battery is the feasible capacity it is seldom full, and the
//! full-battery probability becomes the prefactor that corrects the plain
//! exponential approximation.

use ehstore::analysis::PolicyFamily;
use ehstore::harness::{run_sweep, CapacityAxis, PolicySpec, ScenarioConfig, SweepPlan};
use ehstore::BatteryParams;

fn main() -> ehstore::Result<()> {
    let mut base = ScenarioConfig::new(
        BatteryParams::new(1e3, 0.0, 0.85, 0.80)?,
        PolicySpec::Solved {
            family: PolicyFamily::Constant,
            theta: 4.6e-4,
        },
    );
    base.frames = 2_050_000;
    base.burn_in = 50_000;
    let plan = SweepPlan {
        e_c: vec![500.0, 1e3, 2e3, 4e3],
        theta: vec![4.6e-4],
        axis: CapacityAxis::FixedMin,
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>12}",
        "E_c", "delta_hat", "empirical", "exp", "refined"
    );
    for row in run_sweep(&base, &plan, workers)? {
        let p = row.result.map_err(|(_, msg)| ehstore::Error::Config(msg))?;
        println!(
            "{:>6.0} {:>10.4} {:>10.4e} {:>12.4e} {:>12.4e}",
            row.e_c, p.delta_hat, p.empirical_underflow, p.approx_exp, p.approx_refined
        );
    }
    Ok(())
}
