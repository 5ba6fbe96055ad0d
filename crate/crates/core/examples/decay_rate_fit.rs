//! Recovers the decay rate from the simulated tail of the available space.

use ehstore::analysis::PolicyFamily;
use ehstore::harness::{run_trace, PolicySpec, ScenarioConfig};
use ehstore::BatteryParams;

fn main() -> ehstore::Result<()> {
    let theta = 4.6e-4;
    let mut c = ScenarioConfig::new(
        BatteryParams::new(1.5e4, 5e3, 0.85, 0.80)?,
        PolicySpec::Solved {
            family: PolicyFamily::Constant,
            theta,
        },
    );
    c.frames = 3_050_000;
    c.burn_in = 50_000;
    let stats = run_trace(&c, 1)?;
    let fit = stats.tail.map_err(ehstore::Error::Config)?;
    for (x, lp) in fit.thresholds.iter().zip(&fit.log_probs) {
        println!("Pr{{space >= {x:>6.0}}} = {:.4e}", lp.exp());
    }
    println!(
        "theta_hat = {:.4e} (target {theta:.4e}), R^2 = {:.4}, delta_hat = {:.4}",
        fit.theta_hat, fit.fit_r_squared, fit.delta_hat
    );
    Ok(())
}
