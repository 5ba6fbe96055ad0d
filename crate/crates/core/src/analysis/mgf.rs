//! Moment generating function of the per-frame net flow `z`, evaluated at
//! `-theta`: `E{exp(-theta z)}`. The balance equation sets this to one.

use rayon::prelude::*;

use super::quad::Quadrature;
use crate::battery::LossRates;
use crate::channel::{water_filling_level, ChannelParams, DemandPolicy};
use crate::error::{Error, Result};
use crate::process::{ArrivalProcess, FadingProcess};
use crate::rng::RngHandle;

/// Everything about a frame that the transmitter does not control.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowModel {
    pub arrival: ArrivalProcess,
    pub fading: FadingProcess,
    pub channel: ChannelParams,
    pub losses: LossRates,
}

impl FlowModel {
    pub fn validate(&self) -> Result<()> {
        self.arrival.validate()?;
        self.fading.validate()?;
        self.channel.validate()?;
        check_losses(self.losses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfMethod {
    Quadrature,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfEstimate {
    pub value: f64,
    /// Quadrature error bound, or the standard error for Monte Carlo.
    pub error: f64,
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "decay rate theta must be positive and finite, got {theta}"
        )))
    }
}

fn check_losses(l: LossRates) -> Result<()> {
    let ok = |x: f64| x > 0.0 && x <= 1.0;
    if ok(l.mu) && ok(l.beta) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "loss rates must lie in (0, 1]: mu = {}, beta = {}",
            l.mu, l.beta
        )))
    }
}

/// Closed-form `E{exp(-theta z)}` for a constant demand `p` and exponential
/// arrivals with rate `lambda_u`.
pub fn mgf_constant_demand(theta: f64, p: f64, lambda_u: f64, losses: LossRates) -> Result<f64> {
    check_theta(theta)?;
    check_losses(losses)?;
    if lambda_u.is_nan() || lambda_u <= 0.0 || p.is_nan() || p < 0.0 {
        return Err(Error::Domain(format!(
            "need lambda_u > 0 and p >= 0, got lambda_u = {lambda_u}, p = {p}"
        )));
    }
    Ok(exponential_inner_mgf(theta, p, lambda_u, losses))
}

#[inline]
fn exponential_inner_mgf(theta: f64, p: f64, lambda: f64, l: LossRates) -> f64 {
    let LossRates { mu, beta } = l;
    let no_arrival_cover = (-lambda * p).exp();
    // exp(theta p / beta) - exp(-lambda p), written to keep precision as p -> 0.
    let bracket = ((theta / beta + lambda) * p).exp_m1() * no_arrival_cover;
    lambda * beta / (lambda * beta + theta) * bracket
        + lambda / (lambda + theta * mu) * no_arrival_cover
}

/// Density of `z` for constant demand `p`, given the arrival density `f_u`.
/// Deficit frames (`z < 0`) land in `[-p/beta, 0)`.
pub fn net_flow_density<F: Fn(f64) -> f64>(z: f64, p: f64, losses: LossRates, f_u: F) -> f64 {
    let LossRates { mu, beta } = losses;
    if z < 0.0 {
        if z >= -p / beta {
            beta * f_u(beta * z + p)
        } else {
            0.0
        }
    } else {
        f_u(z / mu + p) / mu
    }
}

/// `E_u{g(u)}` for the arrival process, by quadrature or exact table average.
pub fn expect_over_arrivals<G: Fn(f64) -> f64>(arrival: &ArrivalProcess, g: G) -> Result<f64> {
    match arrival {
        ArrivalProcess::Exponential { rate } => {
            let q = Quadrature::default();
            let r = q.integrate_to_infinity(|u| rate * (-rate * u).exp() * g(u), 0.0)?;
            Ok(r.value)
        }
        ArrivalProcess::Empirical { samples } => {
            Ok(samples.iter().map(|&u| g(u)).sum::<f64>() / samples.len() as f64)
        }
    }
}

/// `E_u{exp(-theta z)}` at a fixed demand level.
pub(crate) fn inner_mgf(theta: f64, p: f64, model: &FlowModel) -> f64 {
    match &model.arrival {
        ArrivalProcess::Exponential { rate } => {
            exponential_inner_mgf(theta, p, *rate, model.losses)
        }
        ArrivalProcess::Empirical { samples } => {
            samples
                .iter()
                .map(|&u| (-theta * model.losses.net_flow(u, p)).exp())
                .sum::<f64>()
                / samples.len() as f64
        }
    }
}

/// `E_u{z}` at a fixed demand level.
pub(crate) fn inner_mean(p: f64, model: &FlowModel) -> f64 {
    let LossRates { mu, beta } = model.losses;
    match &model.arrival {
        ArrivalProcess::Exponential { rate } => {
            let tail = (-rate * p).exp();
            // E[(u-p)^+] = e^{-lambda p}/lambda, E[(p-u)^+] = p - (1 - e^{-lambda p})/lambda
            let surplus = tail / rate;
            let deficit = p + (-rate * p).exp_m1() / rate;
            mu * surplus - deficit / beta
        }
        ArrivalProcess::Empirical { samples } => {
            samples
                .iter()
                .map(|&u| model.losses.net_flow(u, p))
                .sum::<f64>()
                / samples.len() as f64
        }
    }
}

/// `E_h{g(p(h))}` where `p(h)` is the policy's demand. Returns value and
/// numerical error bound.
fn demand_expectation<G: Fn(f64) -> f64>(
    policy: &DemandPolicy,
    fading: &FadingProcess,
    channel: &ChannelParams,
    g: G,
) -> Result<(f64, f64)> {
    match *policy {
        DemandPolicy::Constant(p) => Ok((g(p.get()), 0.0)),
        DemandPolicy::NoStorage => Err(Error::Domain(
            "the no-storage policy bypasses the battery and has no net flow".into(),
        )),
        DemandPolicy::WaterFilling { epsilon } => {
            let noise = channel.frame_noise();
            let level = |h: f64| water_filling_level(epsilon, h, noise);
            match fading {
                FadingProcess::Constant { gain } => Ok((g(level(*gain)), 0.0)),
                FadingProcess::Empirical { samples } => Ok((
                    samples.iter().map(|&h| g(level(h))).sum::<f64>() / samples.len() as f64,
                    0.0,
                )),
                FadingProcess::UnitMeanExponential => {
                    // Below the cutoff nothing is demanded.
                    let idle = -(-epsilon).exp_m1() * g(0.0);
                    let q = Quadrature::default();
                    let active = q.integrate_to_infinity(|h| (-h).exp() * g(level(h)), epsilon)?;
                    Ok((idle + active.value, active.error))
                }
            }
        }
    }
}

/// Numerical `E{exp(-theta z)}` for any policy and input distributions.
///
/// With quadrature, a constant policy under exponential arrivals integrates
/// `exp(-theta z)` against the two-piece density of `z` directly, giving a
/// route independent of the closed form. Water-filling integrates the
/// closed-form inner expectation over the channel gain.
pub fn mgf_numeric(
    theta: f64,
    policy: &DemandPolicy,
    model: &FlowModel,
    method: MgfMethod,
) -> Result<MgfEstimate> {
    check_theta(theta)?;
    model.validate()?;
    if matches!(policy, DemandPolicy::NoStorage) {
        return Err(Error::Domain(
            "the no-storage policy bypasses the battery and has no net flow".into(),
        ));
    }
    match method {
        MgfMethod::Quadrature => mgf_quadrature(theta, policy, model),
        MgfMethod::MonteCarlo { samples, seed } => {
            mgf_monte_carlo(theta, policy, model, samples, seed)
        }
    }
}

fn mgf_quadrature(theta: f64, policy: &DemandPolicy, model: &FlowModel) -> Result<MgfEstimate> {
    if let (DemandPolicy::Constant(p), ArrivalProcess::Exponential { rate }) =
        (policy, &model.arrival)
    {
        let (p, rate) = (p.get(), *rate);
        let f_u = |u: f64| {
            if u < 0.0 {
                0.0
            } else {
                rate * (-rate * u).exp()
            }
        };
        let integrand = |z: f64| (-theta * z).exp() * net_flow_density(z, p, model.losses, f_u);
        let q = Quadrature::default();
        let deficit = q.integrate(integrand, -p / model.losses.beta, 0.0)?;
        let surplus = q.integrate_to_infinity(integrand, 0.0)?;
        return Ok(MgfEstimate {
            value: deficit.value + surplus.value,
            error: deficit.error + surplus.error,
        });
    }
    let (value, error) = demand_expectation(policy, &model.fading, &model.channel, |p| {
        inner_mgf(theta, p, model)
    })?;
    Ok(MgfEstimate { value, error })
}

const MC_CHUNK: u64 = 1 << 16;

fn mgf_monte_carlo(
    theta: f64,
    policy: &DemandPolicy,
    model: &FlowModel,
    samples: u64,
    seed: u64,
) -> Result<MgfEstimate> {
    if samples < 2 {
        return Err(Error::Config(
            "Monte Carlo MGF needs at least 2 samples".into(),
        ));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    // One stream per chunk; partial sums are merged in chunk order, so the
    // result does not depend on how many threads ran.
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngHandle::new(seed, c);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let h = model.fading.sample(&mut rng);
                let p = policy
                    .demand(h, &model.channel)
                    .expect("no-storage rejected above")
                    .get();
                let u = model.arrival.sample(&mut rng).get();
                let w = (-theta * model.losses.net_flow(u, p)).exp();
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s, s2)| (a + s, b + s2));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MgfEstimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}

/// `E{z}` under the policy, and whether it is positive (the stability
/// condition for the decay rate to exist).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetFlowMean {
    pub value: f64,
    pub stable: bool,
}

pub fn mean_net_flow(policy: &DemandPolicy, model: &FlowModel) -> Result<NetFlowMean> {
    model.validate()?;
    let (value, _) = demand_expectation(policy, &model.fading, &model.channel, |p| {
        inner_mean(p, model)
    })?;
    Ok(NetFlowMean {
        value,
        stable: value > 0.0,
    })
}
