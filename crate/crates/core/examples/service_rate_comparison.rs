//! Mean service rate of constant demand, water-filling and no storage as the
//! battery grows (E_min = 0, E_max = E_c).

use ehstore::analysis::PolicyFamily;
use ehstore::harness::{
    compare_policies, CapacityAxis, ComparePlan, PolicyKind, PolicySpec, ScenarioConfig,
};
use ehstore::BatteryParams;

fn main() -> ehstore::Result<()> {
    let mut base = ScenarioConfig::new(
        BatteryParams::new(1e3, 0.0, 0.85, 0.80)?,
        PolicySpec::Solved {
            family: PolicyFamily::Constant,
            theta: 4.6e-4,
        },
    );
    base.frames = 1_050_000;
    base.burn_in = 50_000;
    let plan = ComparePlan {
        policies: vec![
            PolicyKind::Constant,
            PolicyKind::WaterFilling,
            PolicyKind::NoStorage,
        ],
        theta: vec![4.6e-4, 13.8e-4],
        e_c: vec![100.0, 500.0, 2e3, 1e4],
        axis: CapacityAxis::FixedMin,
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for row in compare_policies(&base, &plan, workers)? {
        let theta = row.theta.map_or("-".to_string(), |t| format!("{t:.1e}"));
        match row.mean_service_rate() {
            Some(r) => println!(
                "{:<14} theta {theta:<8} E_c {:>6.0}: {r:.3} bits/frame",
                row.policy.label(),
                row.e_c
            ),
            None => println!(
                "{:<14} theta {theta:<8} E_c {:>6.0}: failed",
                row.policy.label(),
                row.e_c
            ),
        }
    }
    Ok(())
}
