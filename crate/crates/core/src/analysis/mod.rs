//! Large-deviation analysis of the battery's available space.

pub mod mgf;
pub mod quad;
pub mod root;
pub mod solve;
pub mod tail;

pub use mgf::{
    expect_over_arrivals, mean_net_flow, mgf_constant_demand, mgf_numeric, net_flow_density,
    FlowModel, MgfEstimate, MgfMethod, NetFlowMean,
};
pub use solve::{
    decay_rate_for_policy, solve_constant_demand, solve_constant_level, solve_policy,
    solve_waterfilling_cutoff, stability_limit_constant, BalanceSolution, PolicyFamily,
};
pub use tail::{
    default_threshold_grid, estimate_decay_rate, refined_underflow_approx, theta_from_constraint,
    underflow_prob_approx, DecayRateTarget, TailEstimate, TailSample,
};
