//! Finds the water-filling cutoff that meets each decay rate and prints the
//! demand it induces at a few channel gains.

use ehstore::analysis::{solve_policy, FlowModel, PolicyFamily};
use ehstore::{ArrivalProcess, ChannelParams, FadingProcess, LossRates};

fn main() -> ehstore::Result<()> {
    let model = FlowModel {
        arrival: ArrivalProcess::exponential(0.01)?,
        fading: FadingProcess::UnitMeanExponential,
        channel: ChannelParams::default(),
        losses: LossRates::new(0.85, 0.80)?,
    };
    for theta in [4.6e-4, 9.2e-4, 13.8e-4] {
        let s = solve_policy(PolicyFamily::WaterFilling, theta, &model)?;
        let policy = s.policy(PolicyFamily::WaterFilling)?;
        let demand: Vec<String> = [0.2, 0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|&h| {
                let p = policy.demand(h, &model.channel).map_or(0.0, |e| e.get());
                format!("p({h})={p:.1}")
            })
            .collect();
        println!(
            "theta {theta:.1e}: epsilon = {:.6}, |MGF - 1| = {:.1e}, {}",
            s.policy_parameter,
            s.mgf_residual,
            demand.join(" ")
        );
    }
    Ok(())
}
