//! Solves the balance equation for the constant demand level at three decay
//! rates and shows how battery losses lower the sustainable level.

use ehstore::analysis::{solve_constant_demand, theta_from_constraint};
use ehstore::LossRates;

fn main() -> ehstore::Result<()> {
    let lambda = 0.01;
    let lossy = LossRates::new(0.85, 0.80)?;
    let ideal = LossRates::LOSSLESS;
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>10}",
        "q", "theta", "p* lossy", "p* ideal", "E{z}"
    );
    for q in [1e-2, 1e-4, 1e-6] {
        let theta = theta_from_constraint(q, 1e4)?.theta;
        let s = solve_constant_demand(theta, lambda, lossy)?;
        let p_ideal = solve_constant_demand(theta, lambda, ideal)?.policy_parameter;
        println!(
            "{q:>8.0e} {theta:>12.4e} {:>12.5} {p_ideal:>12.5} {:>10.4}",
            s.policy_parameter, s.mean_net_flow
        );
    }
    Ok(())
}
