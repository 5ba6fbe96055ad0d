//! Solving the balance equation `E{exp(-theta z)} = 1` for a policy
//! parameter (given theta), or for theta (given a policy).

use super::mgf::{
    check_theta, inner_mean, inner_mgf, mean_net_flow, mgf_numeric, FlowModel, MgfMethod,
};
use super::root::{bisect, expand};
use crate::battery::LossRates;
use crate::channel::{ChannelParams, DemandPolicy};
use crate::error::{Error, Result};
use crate::process::{ArrivalProcess, FadingProcess};

/// Required |MGF - 1| at a constant-demand solution.
pub const CONSTANT_RESIDUAL_TOL: f64 = 1e-10;
/// Required |MGF - 1| at a water-filling solution (limited by quadrature).
pub const WATER_FILLING_RESIDUAL_TOL: f64 = 1e-6;

const MAX_BISECTIONS: usize = 400;
const MAX_EXPANSIONS: usize = 200;
const UNIQUENESS_GRID: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyFamily {
    Constant,
    WaterFilling,
}

impl PolicyFamily {
    pub fn label(self) -> &'static str {
        match self {
            PolicyFamily::Constant => "constant",
            PolicyFamily::WaterFilling => "water_filling",
        }
    }

    /// Name of the solved parameter.
    pub fn parameter_name(self) -> &'static str {
        match self {
            PolicyFamily::Constant => "level",
            PolicyFamily::WaterFilling => "epsilon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSolution {
    pub theta: f64,
    /// `p*` for constant demand, `epsilon` for water-filling, or `theta*`
    /// when solving for the decay rate of a given policy.
    pub policy_parameter: f64,
    pub mgf_residual: f64,
    pub mean_net_flow: f64,
    pub stable: bool,
}

/// Constant demand `p*` meeting decay rate `theta` under exponential arrivals.
pub fn solve_constant_demand(
    theta: f64,
    lambda_u: f64,
    losses: LossRates,
) -> Result<BalanceSolution> {
    let model = FlowModel {
        arrival: ArrivalProcess::exponential(lambda_u)?,
        fading: FadingProcess::UnitMeanExponential,
        channel: ChannelParams::default(),
        losses,
    };
    solve_constant_level(theta, &model)
}

/// Constant demand `p*` for any arrival process in `model`.
pub fn solve_constant_level(theta: f64, model: &FlowModel) -> Result<BalanceSolution> {
    check_theta(theta)?;
    model.validate()?;
    let excess = |p: f64| Ok(inner_mgf(theta, p, model) - 1.0);
    let at_zero = excess(0.0)?;
    if at_zero >= 0.0 {
        return Err(Error::Solver {
            reason: "MGF at zero demand is not below one (arrivals are identically zero?)".into(),
            lo_value: at_zero,
            hi_value: at_zero,
        });
    }
    let start = model.arrival.mean().max(1.0);
    let (hi, _) = expand(excess, start, 2.0, MAX_EXPANSIONS, |v| v > 0.0)?;
    let root = bisect(excess, 0.0, hi, 1e-13, MAX_BISECTIONS)?;
    if root.residual.abs() > CONSTANT_RESIDUAL_TOL {
        return Err(Error::Numerical {
            what: format!("constant-demand balance at p = {}", root.x),
            error_estimate: root.residual.abs(),
            tolerance: CONSTANT_RESIDUAL_TOL,
        });
    }
    let mean = inner_mean(root.x, model);
    Ok(BalanceSolution {
        theta,
        policy_parameter: root.x,
        mgf_residual: root.residual.abs(),
        mean_net_flow: mean,
        stable: mean > 0.0,
    })
}

fn water_filling_excess(theta: f64, epsilon: f64, model: &FlowModel) -> Result<f64> {
    let policy = DemandPolicy::WaterFilling { epsilon };
    Ok(mgf_numeric(theta, &policy, model, MgfMethod::Quadrature)?.value - 1.0)
}

fn sign_changes(values: &[f64]) -> usize {
    values
        .windows(2)
        .filter(|w| w[0] != 0.0 && w[1] != 0.0 && w[0].signum() != w[1].signum())
        .count()
}

/// Water-filling cutoff `epsilon` meeting decay rate `theta`.
///
/// The MGF falls as the cutoff rises, so the search runs over `ln epsilon`.
pub fn solve_waterfilling_cutoff(theta: f64, model: &FlowModel) -> Result<BalanceSolution> {
    check_theta(theta)?;
    model.validate()?;
    let g = |ln_eps: f64| water_filling_excess(theta, ln_eps.exp(), model);

    // Large cutoff: little demand, MGF below one.
    let (eps_hi, _) = expand(
        |e: f64| water_filling_excess(theta, e, model),
        1.0,
        2.0,
        MAX_EXPANSIONS,
        |v| v < 0.0,
    )?;
    let (eps_lo, _) = expand(
        |e: f64| water_filling_excess(theta, e, model),
        eps_hi,
        0.5,
        MAX_EXPANSIONS,
        |v| v > 0.0,
    )?;
    let (x_lo, x_hi) = (eps_lo.ln(), eps_hi.ln());

    let grid = (0..UNIQUENESS_GRID)
        .map(|k| g(x_lo + (x_hi - x_lo) * k as f64 / (UNIQUENESS_GRID - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let changes = sign_changes(&grid);
    if changes != 1 {
        return Err(Error::Solver {
            reason: format!(
                "expected one sign change of MGF - 1 on epsilon in [{eps_lo}, {eps_hi}], found {changes}"
            ),
            lo_value: grid[0],
            hi_value: grid[UNIQUENESS_GRID - 1],
        });
    }

    let root = bisect(g, x_lo, x_hi, 1e-12, MAX_BISECTIONS)?;
    if root.residual.abs() > WATER_FILLING_RESIDUAL_TOL {
        return Err(Error::Numerical {
            what: format!("water-filling balance at epsilon = {}", root.x.exp()),
            error_estimate: root.residual.abs(),
            tolerance: WATER_FILLING_RESIDUAL_TOL,
        });
    }
    let epsilon = root.x.exp();
    let mean = mean_net_flow(&DemandPolicy::WaterFilling { epsilon }, model)?;
    Ok(BalanceSolution {
        theta,
        policy_parameter: epsilon,
        mgf_residual: root.residual.abs(),
        mean_net_flow: mean.value,
        stable: mean.stable,
    })
}

/// Dispatches to the solver for `family`.
pub fn solve_policy(
    family: PolicyFamily,
    theta: f64,
    model: &FlowModel,
) -> Result<BalanceSolution> {
    match family {
        PolicyFamily::Constant => solve_constant_level(theta, model),
        PolicyFamily::WaterFilling => solve_waterfilling_cutoff(theta, model),
    }
}

impl BalanceSolution {
    /// The solved policy, for a solution of the given family.
    pub fn policy(&self, family: PolicyFamily) -> Result<DemandPolicy> {
        match family {
            PolicyFamily::Constant => DemandPolicy::constant(self.policy_parameter),
            PolicyFamily::WaterFilling => DemandPolicy::water_filling(self.policy_parameter),
        }
    }
}

/// Decay rate `theta*` implied by a fixed policy: the positive root of
/// `E{exp(-theta z)} = 1`, or infinity when the policy never drains the
/// battery. Refuses unstable policies.
pub fn decay_rate_for_policy(policy: &DemandPolicy, model: &FlowModel) -> Result<BalanceSolution> {
    let mean = mean_net_flow(policy, model)?;
    if !mean.stable {
        return Err(Error::Unstable {
            mean_net_flow: mean.value,
        });
    }
    let excess = |theta: f64| -> Result<f64> {
        match policy {
            DemandPolicy::Constant(p) => Ok(inner_mgf(theta, p.get(), model) - 1.0),
            _ => Ok(mgf_numeric(theta, policy, model, MgfMethod::Quadrature)?.value - 1.0),
        }
    };
    let theta_hi = match expand(excess, 1e-6, 2.0, MAX_EXPANSIONS, |v| v > 0.0) {
        Ok((t, _)) => t,
        // The battery never drains (z >= 0 almost surely): the tail is empty.
        Err(Error::Solver { hi_value, .. }) if hi_value < 0.0 => {
            return Ok(BalanceSolution {
                theta: f64::INFINITY,
                policy_parameter: f64::INFINITY,
                mgf_residual: 0.0,
                mean_net_flow: mean.value,
                stable: true,
            })
        }
        Err(e) => return Err(e),
    };
    let (theta_lo, _) = expand(excess, theta_hi, 0.5, MAX_EXPANSIONS, |v| v < 0.0)?;
    let root = bisect(
        |x: f64| excess(x.exp()),
        theta_lo.ln(),
        theta_hi.ln(),
        1e-13,
        MAX_BISECTIONS,
    )?;
    let theta = root.x.exp();
    Ok(BalanceSolution {
        theta,
        policy_parameter: theta,
        mgf_residual: root.residual.abs(),
        mean_net_flow: mean.value,
        stable: true,
    })
}

/// Largest constant demand with `E{z} >= 0`; above it the battery drains.
pub fn stability_limit_constant(model: &FlowModel) -> Result<f64> {
    model.validate()?;
    let mean = |p: f64| Ok(inner_mean(p, model));
    let start = model.arrival.mean().max(1.0);
    let (hi, _) = expand(mean, start, 2.0, MAX_EXPANSIONS, |v| v < 0.0)?;
    Ok(bisect(mean, 0.0, hi, 0.0, MAX_BISECTIONS)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mgf::mgf_constant_demand;

    fn reference_losses() -> LossRates {
        LossRates::new(0.85, 0.80).unwrap()
    }

    fn reference_model(fading: FadingProcess) -> FlowModel {
        FlowModel {
            arrival: ArrivalProcess::exponential(0.01).unwrap(),
            fading,
            channel: ChannelParams::default(),
            losses: reference_losses(),
        }
    }

    #[test]
    fn constant_demand_root_lies_between_84_and_85() {
        let s = solve_constant_demand(4.6e-4, 0.01, reference_losses()).unwrap();
        assert!(s.policy_parameter > 84.0 && s.policy_parameter < 85.0);
        assert!(s.mgf_residual <= CONSTANT_RESIDUAL_TOL);
        assert!(s.mean_net_flow > 0.0 && s.stable);
    }

    #[test]
    fn lossless_limit_approaches_mean_arrival() {
        let s = solve_constant_demand(1e-9, 0.01, LossRates::LOSSLESS).unwrap();
        assert!(
            (s.policy_parameter - 100.0).abs() < 1e-3,
            "{}",
            s.policy_parameter
        );
    }

    #[test]
    fn losses_lower_the_demand() {
        for theta in [4.6e-4, 9.2e-4, 13.8e-4] {
            let lossy = solve_constant_demand(theta, 0.01, reference_losses()).unwrap();
            let perfect = solve_constant_demand(theta, 0.01, LossRates::LOSSLESS).unwrap();
            assert!(lossy.policy_parameter < perfect.policy_parameter);
        }
    }

    #[test]
    fn tighter_theta_lowers_demand() {
        let p: Vec<f64> = [4.6e-4, 9.2e-4, 13.8e-4]
            .iter()
            .map(|&t| {
                solve_constant_demand(t, 0.01, reference_losses())
                    .unwrap()
                    .policy_parameter
            })
            .collect();
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn water_filling_solution() {
        let model = reference_model(FadingProcess::UnitMeanExponential);
        let s = solve_waterfilling_cutoff(4.6e-4, &model).unwrap();
        assert!(s.mgf_residual <= WATER_FILLING_RESIDUAL_TOL);
        assert!(s.stable);
        assert!(s.policy_parameter > 0.3 && s.policy_parameter < 0.6);
    }

    #[test]
    fn water_filling_constant_gain_reduces_to_constant_demand() {
        let gain = 2.0;
        let model = reference_model(FadingProcess::Constant { gain });
        let theta = 9.2e-4;
        let wf = solve_waterfilling_cutoff(theta, &model).unwrap();
        let c = solve_constant_demand(theta, 0.01, reference_losses()).unwrap();
        let level = 100.0 * (1.0 / wf.policy_parameter - 1.0 / gain).max(0.0);
        assert!(
            (level - c.policy_parameter).abs() < 1e-6,
            "{level} vs {}",
            c.policy_parameter
        );
    }

    #[test]
    fn decay_rate_inverts_demand_solver() {
        let model = reference_model(FadingProcess::UnitMeanExponential);
        for theta in [4.6e-4, 9.2e-4, 13.8e-4] {
            let s = solve_constant_level(theta, &model).unwrap();
            let back =
                decay_rate_for_policy(&s.policy(PolicyFamily::Constant).unwrap(), &model).unwrap();
            assert!((back.theta / theta - 1.0).abs() < 1e-6);
        }
        let wf = solve_waterfilling_cutoff(9.2e-4, &model).unwrap();
        let back =
            decay_rate_for_policy(&wf.policy(PolicyFamily::WaterFilling).unwrap(), &model).unwrap();
        assert!((back.theta / 9.2e-4 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_demand_has_infinite_decay_rate() {
        let model = reference_model(FadingProcess::UnitMeanExponential);
        let s = decay_rate_for_policy(&DemandPolicy::constant(0.0).unwrap(), &model).unwrap();
        assert_eq!(s.theta, f64::INFINITY);
    }

    #[test]
    fn unstable_policy_is_refused() {
        let model = reference_model(FadingProcess::UnitMeanExponential);
        let limit = stability_limit_constant(&model).unwrap();
        let p_star = solve_constant_level(4.6e-4, &model)
            .unwrap()
            .policy_parameter;
        assert!(limit > p_star);
        let over = DemandPolicy::constant(limit + 1.0).unwrap();
        assert!(matches!(
            decay_rate_for_policy(&over, &model),
            Err(Error::Unstable { .. })
        ));
        let m = mean_net_flow(&DemandPolicy::constant(limit).unwrap(), &model).unwrap();
        assert!(m.value.abs() < 1e-9);
    }

    #[test]
    fn solution_residual_is_real() {
        let s = solve_constant_demand(13.8e-4, 0.01, reference_losses()).unwrap();
        let v = mgf_constant_demand(13.8e-4, s.policy_parameter, 0.01, reference_losses()).unwrap();
        assert!((v - 1.0).abs() <= CONSTANT_RESIDUAL_TOL);
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(matches!(
            solve_constant_demand(0.0, 0.01, reference_losses()),
            Err(Error::Domain(_))
        ));
    }
}
