//! Mean service rate of several policies over a capacity grid.

use log::warn;
use rayon::prelude::*;

use super::config::{
    resolve_policy, CapacityAxis, ComparePlan, PolicyKind, PolicySpec, ResolvedPolicy,
    ScenarioConfig,
};
use super::pool;
use super::trace::{run_resolved, TraceStats};
use crate::channel::DemandPolicy;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub policy: PolicyKind,
    /// Target decay rate; `None` for the no-storage baseline.
    pub theta: Option<f64>,
    pub e_c: f64,
    pub result: std::result::Result<TraceStats, (i32, String)>,
}

impl CompareRow {
    pub fn mean_service_rate(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|s| s.mean_service_rate)
    }
}

/// Simulates every `(policy, theta, e_c)` combination on common random
/// numbers: all rows share the base seed, so arrivals and fading gains are
/// the same frame by frame. The no-storage baseline ignores theta and gets
/// one row per capacity.
pub fn compare_policies(
    base: &ScenarioConfig,
    plan: &ComparePlan,
    workers: usize,
) -> Result<Vec<CompareRow>> {
    base.validate()?;
    let model = base.flow_model();
    let mut lines: Vec<(PolicyKind, Option<f64>, Result<ResolvedPolicy>)> = Vec::new();
    for &kind in &plan.policies {
        match kind.family() {
            None => lines.push((
                kind,
                None,
                resolve_policy(&PolicySpec::Fixed(DemandPolicy::NoStorage), &model),
            )),
            Some(family) => {
                for &theta in &plan.theta {
                    let spec = PolicySpec::Solved { family, theta };
                    lines.push((kind, Some(theta), resolve_policy(&spec, &model)));
                }
            }
        }
    }
    let jobs: Vec<(usize, f64)> = (0..lines.len())
        .flat_map(|k| plan.e_c.iter().map(move |&e_c| (k, e_c)))
        .collect();
    let run_row = |&(k, e_c): &(usize, f64)| -> CompareRow {
        let (policy, theta, resolved) = &lines[k];
        let result = match resolved {
            Err(e) => Err((e.exit_code(), e.to_string())),
            Ok(r) => run_point(base, plan.axis, r, e_c).map_err(|e| (e.exit_code(), e.to_string())),
        };
        if let Err((_, msg)) = &result {
            warn!("compare row {} e_c = {e_c} failed: {msg}", policy.label());
        }
        CompareRow {
            policy: *policy,
            theta: *theta,
            e_c,
            result,
        }
    };
    let rows = if workers == 1 {
        jobs.iter().map(run_row).collect()
    } else {
        pool(workers)?.install(|| jobs.par_iter().map(run_row).collect())
    };
    Ok(rows)
}

fn run_point(
    base: &ScenarioConfig,
    axis: CapacityAxis,
    resolved: &ResolvedPolicy,
    e_c: f64,
) -> Result<TraceStats> {
    let mut c = base.clone();
    c.battery = axis.apply(&base.battery, e_c)?;
    run_resolved(&c, resolved, 1)
}
