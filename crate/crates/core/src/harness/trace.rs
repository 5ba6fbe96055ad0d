//! Frame-by-frame simulation of one scenario.

use log::debug;
use rayon::prelude::*;

use super::config::{ResolvedPolicy, ScenarioConfig};
use super::pool;
use crate::analysis::{default_threshold_grid, estimate_decay_rate, TailEstimate, TailSample};
use crate::battery::{step, BatteryParams, BatteryState};
use crate::channel::{service_rate, ChannelParams, DemandPolicy};
use crate::error::{Error, Result};
use crate::process::{ArrivalProcess, FadingProcess};
use crate::rng::RngHandle;

/// Batches used for the batch-means standard error of the underflow frequency.
pub const UNDERFLOW_BATCHES: u64 = 64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }
}

/// Energy bookkeeping over a whole trace, burn-in included.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub harvested: CompensatedSum,
    pub consumed: CompensatedSum,
    pub overflow: CompensatedSum,
    pub charging_loss: CompensatedSum,
    pub discharging_loss: CompensatedSum,
    /// Sum over traces of `final - initial` stored energy.
    pub battery_delta: CompensatedSum,
}

impl EnergyLedger {
    /// `harvested - (consumed + overflow + losses + battery delta)`.
    pub fn imbalance(&self) -> f64 {
        let mut out = CompensatedSum::default();
        for part in [
            &self.consumed,
            &self.overflow,
            &self.charging_loss,
            &self.discharging_loss,
            &self.battery_delta,
        ] {
            out.merge(part);
        }
        self.harvested.value() - out.value()
    }

    pub fn relative_imbalance(&self) -> f64 {
        self.imbalance().abs() / self.harvested.value().max(f64::MIN_POSITIVE)
    }

    fn merge(&mut self, o: &EnergyLedger) {
        self.harvested.merge(&o.harvested);
        self.consumed.merge(&o.consumed);
        self.overflow.merge(&o.overflow);
        self.charging_loss.merge(&o.charging_loss);
        self.discharging_loss.merge(&o.discharging_loss);
        self.battery_delta.merge(&o.battery_delta);
    }
}

/// Raw post-burn-in counts; additive across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCounts {
    pub frames: u64,
    pub underflow_frames: u64,
    /// Entries into underflow.
    pub underflow_episodes: u64,
    pub outage_frames: u64,
    pub full_frames: u64,
    pub overflow_total: f64,
    pub rate_total: f64,
    pub consumed_total: f64,
    /// Underflow frequency of each batch, in trace order.
    pub batch_underflow: Vec<f64>,
    /// Exceedances of the available space over the tail grid.
    pub tail: TailSample,
    pub ledger: EnergyLedger,
}

impl TraceCounts {
    fn merge(&mut self, o: &TraceCounts) -> Result<()> {
        self.frames += o.frames;
        self.underflow_frames += o.underflow_frames;
        self.underflow_episodes += o.underflow_episodes;
        self.outage_frames += o.outage_frames;
        self.full_frames += o.full_frames;
        self.overflow_total += o.overflow_total;
        self.rate_total += o.rate_total;
        self.consumed_total += o.consumed_total;
        self.batch_underflow.extend_from_slice(&o.batch_underflow);
        self.tail.merge(&o.tail)?;
        self.ledger.merge(&o.ledger);
        Ok(())
    }
}

/// Summary statistics of a simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStats {
    pub policy: DemandPolicy,
    pub theta: Option<f64>,
    pub e_c: f64,
    pub frames_counted: u64,
    /// Fraction of frames with the stored energy at or below `e_min`.
    pub underflow_freq: f64,
    /// Batch-means standard error of `underflow_freq`.
    pub underflow_se: f64,
    pub outage_freq: f64,
    /// Fraction of frames with a full battery.
    pub delta_hat: f64,
    pub overflow_loss_rate: f64,
    pub mean_service_rate: f64,
    pub mean_consumed: f64,
    /// Fitted tail, or why the fit was not possible.
    pub tail: std::result::Result<TailEstimate, String>,
    pub counts: TraceCounts,
}

impl TraceStats {
    fn from_counts(counts: TraceCounts, resolved: &ResolvedPolicy, e_c: f64) -> Self {
        let n = counts.frames as f64;
        let batches = &counts.batch_underflow;
        let underflow_se = if batches.len() > 1 {
            let m = batches.iter().sum::<f64>() / batches.len() as f64;
            let var =
                batches.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (batches.len() - 1) as f64;
            (var / batches.len() as f64).sqrt()
        } else {
            f64::NAN
        };
        TraceStats {
            policy: resolved.policy,
            theta: resolved.theta,
            e_c,
            frames_counted: counts.frames,
            underflow_freq: counts.underflow_frames as f64 / n,
            underflow_se,
            outage_freq: counts.outage_frames as f64 / n,
            delta_hat: counts.full_frames as f64 / n,
            overflow_loss_rate: counts.overflow_total / n,
            mean_service_rate: counts.rate_total / n,
            mean_consumed: counts.consumed_total / n,
            tail: estimate_decay_rate(&counts.tail).map_err(|e| e.to_string()),
            counts,
        }
    }

    pub fn underflow_events(&self) -> u64 {
        self.counts.underflow_episodes
    }
}

/// Inputs of a single trace, shared by all its replications.
struct TraceJob<'a> {
    battery: &'a BatteryParams,
    arrival: &'a ArrivalProcess,
    fading: &'a FadingProcess,
    channel: &'a ChannelParams,
    policy: DemandPolicy,
    frames: u64,
    burn_in: u64,
    outage_zero_rate: bool,
    thresholds: &'a [f64],
}

fn run_one(job: &TraceJob, seed: u64, replication: u64) -> Result<TraceCounts> {
    let mut arrivals = RngHandle::new(seed, 2 * replication);
    let mut fading = RngHandle::new(seed, 2 * replication + 1);
    let counted = job.frames - job.burn_in;
    let batch_len = counted.div_ceil(UNDERFLOW_BATCHES).max(1);
    let e_max = job.battery.e_max().get();

    let mut counts = TraceCounts {
        frames: 0,
        underflow_frames: 0,
        underflow_episodes: 0,
        outage_frames: 0,
        full_frames: 0,
        overflow_total: 0.0,
        rate_total: 0.0,
        consumed_total: 0.0,
        batch_underflow: Vec::with_capacity(UNDERFLOW_BATCHES as usize),
        tail: TailSample::new(job.thresholds.to_vec())?,
        ledger: EnergyLedger::default(),
    };
    let mut state = BatteryState::full(job.battery);
    let initial = state.energy.get();
    let mut was_underflow = false;
    let mut batch_hits = 0u64;
    let mut batch_frames = 0u64;

    for i in 0..job.frames {
        let h = job.fading.sample(&mut fading);
        let demand = job.policy.demand(h, job.channel);
        let u = job.arrival.sample(&mut arrivals);
        let ledger = &mut counts.ledger;
        ledger.harvested.add(u.get());

        let (consumed, overflow, underflow, outage) = match demand {
            None => {
                ledger.consumed.add(u.get());
                (u, 0.0, false, false)
            }
            Some(p) => {
                let (next, out) = step(state, u, p, job.battery);
                state = next;
                ledger.consumed.add(out.consumed.get());
                ledger.overflow.add(out.overflow_loss.get());
                ledger.charging_loss.add(out.charging_loss.get());
                ledger.discharging_loss.add(out.discharging_loss.get());
                (
                    out.consumed,
                    out.overflow_loss.get(),
                    out.underflow,
                    out.outage,
                )
            }
        };

        if i < job.burn_in {
            was_underflow = underflow;
            continue;
        }
        let rate = if outage && job.outage_zero_rate {
            0.0
        } else {
            service_rate(consumed, h, job.channel)
        };
        let deficit = e_max - state.energy.get();
        counts.frames += 1;
        counts.rate_total += rate;
        counts.consumed_total += consumed.get();
        counts.overflow_total += overflow;
        if outage {
            counts.outage_frames += 1;
        }
        if deficit <= 0.0 {
            counts.full_frames += 1;
        }
        if underflow {
            counts.underflow_frames += 1;
            batch_hits += 1;
            if !was_underflow {
                counts.underflow_episodes += 1;
            }
        }
        was_underflow = underflow;
        counts.tail.record(deficit);

        batch_frames += 1;
        if batch_frames == batch_len {
            counts
                .batch_underflow
                .push(batch_hits as f64 / batch_frames as f64);
            batch_hits = 0;
            batch_frames = 0;
        }
    }
    if batch_frames > 0 {
        counts
            .batch_underflow
            .push(batch_hits as f64 / batch_frames as f64);
    }
    counts
        .ledger
        .battery_delta
        .add(state.energy.get() - initial);
    debug!(
        "replication {replication}: {} frames, {} underflow episodes",
        counts.frames, counts.underflow_episodes
    );
    Ok(counts)
}

/// Simulates `config` with an already-resolved policy. Replications use the
/// stream pair `(2r, 2r + 1)` of `config.seed` and are merged in order, so
/// the result does not depend on `workers`.
pub fn run_resolved(
    config: &ScenarioConfig,
    resolved: &ResolvedPolicy,
    workers: usize,
) -> Result<TraceStats> {
    config.validate()?;
    let e_c = config.battery.e_c().get();
    let thresholds = default_threshold_grid(e_c);
    let job = TraceJob {
        battery: &config.battery,
        arrival: &config.arrival,
        fading: &config.fading,
        channel: &config.channel,
        policy: resolved.policy,
        frames: config.frames,
        burn_in: config.burn_in,
        outage_zero_rate: config.outage_zero_rate,
        thresholds: &thresholds,
    };
    let reps = config.replications as u64;
    let parts: Vec<TraceCounts> = if reps == 1 {
        vec![run_one(&job, config.seed, 0)?]
    } else {
        pool(workers)?.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|r| run_one(&job, config.seed, r))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let mut parts = parts.into_iter();
    let mut counts = parts.next().expect("at least one replication");
    for p in parts {
        counts.merge(&p)?;
    }
    Ok(TraceStats::from_counts(counts, resolved, e_c))
}

/// Resolves the configured policy (solving for it if needed) and simulates.
/// Refuses policies with non-positive mean net flow.
pub fn run_trace(config: &ScenarioConfig, workers: usize) -> Result<TraceStats> {
    config.validate()?;
    let resolved = config.resolve_policy()?;
    if let Some(s) = resolved.solution {
        if !s.stable {
            return Err(Error::Unstable {
                mean_net_flow: s.mean_net_flow,
            });
        }
    }
    run_resolved(config, &resolved, workers)
}
