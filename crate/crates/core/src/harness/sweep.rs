//! Underflow probability over a grid of capacities and decay rates.

use log::warn;
use rayon::prelude::*;

use super::config::{resolve_policy, PolicySpec, ResolvedPolicy, ScenarioConfig, SweepPlan};
use super::pool;
use super::trace::{run_resolved, TraceStats};
use crate::analysis::{refined_underflow_approx, underflow_prob_approx};
use crate::error::{Error, Result};

/// Minimum underflow episodes for a point to count as well sampled.
pub const MIN_EVENTS: u64 = 50;
/// Minimum expected underflow frames, `exp(-theta e_c) * frames`.
pub const MIN_EXPECTED_FRAMES: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub empirical_underflow: f64,
    pub approx_exp: f64,
    pub approx_refined: f64,
    pub delta_hat: f64,
    /// Underflow episodes observed.
    pub events: u64,
    pub low_confidence: bool,
    pub stats: TraceStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub e_c: f64,
    pub theta: Option<f64>,
    /// The point, or the error that prevented it.
    pub result: std::result::Result<SweepPoint, (i32, String)>,
}

/// True when the estimate at this point rests on too few underflow events.
pub fn is_low_confidence(events: u64, approx_exp: f64, frames_counted: u64) -> bool {
    events < MIN_EVENTS || approx_exp * (frames_counted as f64) < MIN_EXPECTED_FRAMES
}

fn point(stats: TraceStats) -> Result<SweepPoint> {
    let (approx_exp, approx_refined) = match stats.theta {
        Some(theta) => (
            underflow_prob_approx(theta, stats.e_c),
            refined_underflow_approx(theta, stats.e_c, stats.delta_hat)?,
        ),
        None => (f64::NAN, f64::NAN),
    };
    let events = stats.underflow_events();
    let low_confidence = if approx_exp.is_nan() {
        events < MIN_EVENTS
    } else {
        is_low_confidence(events, approx_exp, stats.frames_counted)
    };
    Ok(SweepPoint {
        empirical_underflow: stats.underflow_freq,
        approx_exp,
        approx_refined,
        delta_hat: stats.delta_hat,
        events,
        low_confidence,
        stats,
    })
}

/// Runs one trace per `(theta, e_c)` pair, theta-major. Every row uses the
/// base seed, so rows do not depend on the order or size of the grid, and a
/// failing row does not stop the others.
pub fn run_sweep(base: &ScenarioConfig, plan: &SweepPlan, workers: usize) -> Result<Vec<SweepRow>> {
    base.validate()?;
    let specs: Vec<PolicySpec> = if plan.theta.is_empty() {
        vec![base.policy]
    } else {
        let family = match base.policy {
            PolicySpec::Solved { family, .. } => family,
            PolicySpec::Fixed(p) => {
                return Err(Error::Config(format!(
                    "sweep over theta needs a constraint-form policy, got fixed {}",
                    p.label()
                )))
            }
        };
        plan.theta
            .iter()
            .map(|&theta| PolicySpec::Solved { family, theta })
            .collect()
    };
    let model = base.flow_model();
    let resolved: Vec<Result<ResolvedPolicy>> =
        specs.iter().map(|s| resolve_policy(s, &model)).collect();

    let jobs: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|k| plan.e_c.iter().map(move |&e_c| (k, e_c)))
        .collect();
    let run_row = |&(k, e_c): &(usize, f64)| -> SweepRow {
        let theta = match (&resolved[k], specs[k]) {
            (Ok(r), _) => r.theta,
            (Err(_), PolicySpec::Solved { theta, .. }) => Some(theta),
            (Err(_), PolicySpec::Fixed(_)) => None,
        };
        let result = match &resolved[k] {
            Err(e) => Err((e.exit_code(), e.to_string())),
            Ok(r) => {
                let mut c = base.clone();
                plan.axis
                    .apply(&base.battery, e_c)
                    .and_then(|b| {
                        c.battery = b;
                        run_resolved(&c, r, 1)
                    })
                    .and_then(point)
                    .map_err(|e| (e.exit_code(), e.to_string()))
            }
        };
        if let Err((_, msg)) = &result {
            warn!("sweep row e_c = {e_c}, theta = {theta:?} failed: {msg}");
        }
        SweepRow { e_c, theta, result }
    };
    let rows = if workers == 1 {
        jobs.iter().map(run_row).collect()
    } else {
        pool(workers)?.install(|| jobs.par_iter().map(run_row).collect())
    };
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PolicyFamily;
    use crate::battery::BatteryParams;
    use crate::channel::DemandPolicy;
    use crate::harness::config::CapacityAxis;

    fn base(frames: u64) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(
            BatteryParams::new(3000.0, 0.0, 0.85, 0.8).unwrap(),
            PolicySpec::Solved {
                family: PolicyFamily::Constant,
                theta: 4.6e-4,
            },
        );
        c.frames = frames;
        c.burn_in = frames / 10;
        c
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let plan = SweepPlan {
            e_c: vec![],
            theta: vec![4.6e-4],
            axis: CapacityAxis::FixedMax,
        };
        assert!(run_sweep(&base(1000), &plan, 1).unwrap().is_empty());
    }

    #[test]
    fn rows_do_not_depend_on_grid_or_workers() {
        let plan = SweepPlan {
            e_c: vec![500.0, 1000.0, 2000.0],
            theta: vec![4.6e-4, 9.2e-4],
            axis: CapacityAxis::FixedMax,
        };
        let full = run_sweep(&base(50_000), &plan, 1).unwrap();
        assert_eq!(full.len(), 6);
        let single = SweepPlan {
            e_c: vec![1000.0],
            theta: vec![9.2e-4],
            axis: CapacityAxis::FixedMax,
        };
        let one = run_sweep(&base(50_000), &single, 2).unwrap();
        assert_eq!(one[0], full[4]);
        let parallel = run_sweep(&base(50_000), &plan, 3).unwrap();
        assert_eq!(parallel, full);
    }

    #[test]
    fn bad_rows_are_recorded() {
        let plan = SweepPlan {
            e_c: vec![1000.0, 5000.0],
            theta: vec![4.6e-4],
            axis: CapacityAxis::FixedMax,
        };
        let rows = run_sweep(&base(20_000), &plan, 1).unwrap();
        assert!(rows[0].result.is_ok());
        assert_eq!(rows[1].result.as_ref().unwrap_err().0, 1);
    }

    #[test]
    fn fixed_policy_gets_its_decay_rate() {
        let mut c = base(20_000);
        c.policy = PolicySpec::Fixed(DemandPolicy::constant(80.0).unwrap());
        let plan = SweepPlan {
            e_c: vec![1000.0],
            theta: vec![],
            axis: CapacityAxis::FixedMax,
        };
        let rows = run_sweep(&c, &plan, 1).unwrap();
        let theta = rows[0].theta.unwrap();
        assert!(theta > 4.6e-4, "{theta}");
        let with_theta = SweepPlan {
            theta: vec![1e-4],
            ..plan
        };
        assert!(run_sweep(&c, &with_theta, 1).is_err());
    }

    #[test]
    fn low_confidence_rule() {
        assert!(is_low_confidence(49, 0.5, 1_000_000));
        assert!(is_low_confidence(500, 1e-5, 10_000_000));
        assert!(!is_low_confidence(500, 1e-4, 10_000_000));
    }
}
