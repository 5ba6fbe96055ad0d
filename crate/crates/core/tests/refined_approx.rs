use ehstore::analysis::{refined_underflow_approx, underflow_prob_approx, PolicyFamily};
use ehstore::harness::{run_trace, PolicySpec, ScenarioConfig};
use ehstore::BatteryParams;

/// With the whole battery as the feasible capacity (E_min = 0) the battery
/// is rarely full, and the full-battery prefactor is what brings the
/// exponential approximation into line with the simulated frequency.
#[test]
fn refined_approximation_in_the_small_capacity_regime() {
    let (theta, e_c) = (4.6e-4, 2e3);
    let mut c = ScenarioConfig::new(
        BatteryParams::new(e_c, 0.0, 0.85, 0.8).unwrap(),
        PolicySpec::Solved {
            family: PolicyFamily::Constant,
            theta,
        },
    );
    c.frames = 4_100_000;
    c.burn_in = 100_000;
    let s = run_trace(&c, 1).unwrap();
    assert!(s.underflow_events() >= 100);

    let refined = refined_underflow_approx(theta, e_c, s.delta_hat).unwrap();
    let ratio = s.underflow_freq / refined;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "empirical / refined = {ratio}"
    );

    let plain = s.underflow_freq / underflow_prob_approx(theta, e_c);
    assert!(plain < 0.1, "empirical / plain = {plain}");
}
