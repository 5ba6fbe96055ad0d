//! Scenario files (TOML) and their validated in-memory form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    decay_rate_for_policy, mean_net_flow, solve_policy, theta_from_constraint, BalanceSolution,
    FlowModel, PolicyFamily,
};
use crate::battery::{BatteryParams, LossRates};
use crate::channel::{ChannelParams, DemandPolicy};
use crate::error::{Error, Result};
use crate::process::{ArrivalProcess, FadingProcess};

pub const DEFAULT_BURN_IN: u64 = 100_000;
pub const DEFAULT_FRAMES: u64 = 10_000_000 + DEFAULT_BURN_IN;
pub const DEFAULT_SEED: u64 = 1;

/// How a swept capacity `E_c` is turned into battery limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityAxis {
    /// Keep `e_max`, set `e_min = e_max - e_c`.
    #[default]
    FixedMax,
    /// Keep `e_min`, set `e_max = e_min + e_c`.
    FixedMin,
}

impl CapacityAxis {
    pub fn apply(self, base: &BatteryParams, e_c: f64) -> Result<BatteryParams> {
        let l = base.losses();
        let (e_max, e_min) = match self {
            CapacityAxis::FixedMax => (base.e_max().get(), base.e_max().get() - e_c),
            CapacityAxis::FixedMin => (base.e_min().get() + e_c, base.e_min().get()),
        };
        if e_min < 0.0 {
            return Err(Error::Config(format!(
                "capacity {e_c} exceeds e_max = {} on the fixed_max axis",
                base.e_max()
            )));
        }
        if l == LossRates::LOSSLESS {
            BatteryParams::lossless(e_max, e_min)
        } else {
            BatteryParams::new(e_max, e_min, l.mu, l.beta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Constant,
    WaterFilling,
    NoStorage,
}

impl PolicyKind {
    pub fn family(self) -> Option<PolicyFamily> {
        match self {
            PolicyKind::Constant => Some(PolicyFamily::Constant),
            PolicyKind::WaterFilling => Some(PolicyFamily::WaterFilling),
            PolicyKind::NoStorage => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Constant => "constant",
            PolicyKind::WaterFilling => "water_filling",
            PolicyKind::NoStorage => "no_storage",
        }
    }
}

/// A policy as configured: either fully specified, or a family plus the
/// decay rate its parameter must achieve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Fixed(DemandPolicy),
    Solved { family: PolicyFamily, theta: f64 },
}

impl PolicySpec {
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Fixed(p) => p.label(),
            PolicySpec::Solved { family, .. } => family.label(),
        }
    }
}

/// A policy ready to simulate, with the decay rate it achieves (none for
/// the no-storage baseline) and the balance solution when one was solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPolicy {
    pub policy: DemandPolicy,
    pub theta: Option<f64>,
    pub solution: Option<BalanceSolution>,
}

/// Resolves `spec` under `model`, refusing policies with `E{z} <= 0`.
pub fn resolve_policy(spec: &PolicySpec, model: &FlowModel) -> Result<ResolvedPolicy> {
    match *spec {
        PolicySpec::Fixed(DemandPolicy::NoStorage) => Ok(ResolvedPolicy {
            policy: DemandPolicy::NoStorage,
            theta: None,
            solution: None,
        }),
        PolicySpec::Fixed(policy) => {
            let mean = mean_net_flow(&policy, model)?;
            if !mean.stable {
                return Err(Error::Unstable {
                    mean_net_flow: mean.value,
                });
            }
            let s = decay_rate_for_policy(&policy, model)?;
            Ok(ResolvedPolicy {
                policy,
                theta: Some(s.theta),
                solution: Some(s),
            })
        }
        PolicySpec::Solved { family, theta } => {
            let s = solve_policy(family, theta, model)?;
            if !s.stable {
                return Err(Error::Unstable {
                    mean_net_flow: s.mean_net_flow,
                });
            }
            Ok(ResolvedPolicy {
                policy: s.policy(family)?,
                theta: Some(theta),
                solution: Some(s),
            })
        }
    }
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub battery: BatteryParams,
    pub arrival: ArrivalProcess,
    pub fading: FadingProcess,
    pub channel: ChannelParams,
    pub policy: PolicySpec,
    /// Total frames simulated, burn-in included.
    pub frames: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Zero the service rate of outage frames instead of sending with the
    /// partial energy.
    pub outage_zero_rate: bool,
    /// Independent traces merged into one set of statistics.
    pub replications: u32,
}

impl ScenarioConfig {
    /// Exponential arrivals with mean 100, unit-mean exponential fading,
    /// default channel, and the default run length.
    pub fn new(battery: BatteryParams, policy: PolicySpec) -> Self {
        ScenarioConfig {
            battery,
            arrival: ArrivalProcess::Exponential { rate: 0.01 },
            fading: FadingProcess::default(),
            channel: ChannelParams::default(),
            policy,
            frames: DEFAULT_FRAMES,
            burn_in: DEFAULT_BURN_IN,
            seed: DEFAULT_SEED,
            outage_zero_rate: false,
            replications: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arrival.validate()?;
        self.fading.validate()?;
        self.channel.validate()?;
        if self.frames <= self.burn_in {
            return Err(Error::Config(format!(
                "frames ({}) must exceed burn_in ({})",
                self.frames, self.burn_in
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        match self.policy {
            PolicySpec::Solved { theta, .. } if !(theta.is_finite() && theta > 0.0) => Err(
                Error::Config(format!("policy theta must be positive, got {theta}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn flow_model(&self) -> FlowModel {
        FlowModel {
            arrival: self.arrival.clone(),
            fading: self.fading.clone(),
            channel: self.channel,
            losses: self.battery.losses(),
        }
    }

    pub fn resolve_policy(&self) -> Result<ResolvedPolicy> {
        resolve_policy(&self.policy, &self.flow_model())
    }

    pub fn frames_counted(&self) -> u64 {
        self.frames - self.burn_in
    }
}

/// A parsed scenario file: the scenario plus optional sweep and compare plans.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub scenario: ScenarioConfig,
    pub sweep: Option<SweepPlan>,
    pub compare: Option<ComparePlan>,
}

/// Grid of `(theta, e_c)` rows. An empty `theta` list keeps the scenario's
/// policy as configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub e_c: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub axis: CapacityAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparePlan {
    pub policies: Vec<PolicyKind>,
    pub theta: Vec<f64>,
    pub e_c: Vec<f64>,
    #[serde(default = "fixed_min")]
    pub axis: CapacityAxis,
}

fn fixed_min() -> CapacityAxis {
    CapacityAxis::FixedMin
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_frames")]
    frames: u64,
    #[serde(default = "default_burn_in")]
    burn_in: u64,
    #[serde(default)]
    outage_zero_rate: bool,
    #[serde(default = "default_replications")]
    replications: u32,
    battery: RawBattery,
    #[serde(default = "default_arrival")]
    arrival: ArrivalProcess,
    #[serde(default)]
    fading: FadingProcess,
    #[serde(default)]
    channel: ChannelParams,
    policy: RawPolicy,
    sweep: Option<SweepPlan>,
    compare: Option<ComparePlan>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_frames() -> u64 {
    DEFAULT_FRAMES
}
fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}
fn default_replications() -> u32 {
    1
}
fn default_arrival() -> ArrivalProcess {
    ArrivalProcess::Exponential { rate: 0.01 }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBattery {
    e_max: f64,
    e_min: Option<f64>,
    e_c: Option<f64>,
    mu: Option<f64>,
    beta: Option<f64>,
    #[serde(default)]
    perfect: bool,
}

impl RawBattery {
    fn build(&self) -> Result<BatteryParams> {
        let e_min = match (self.e_min, self.e_c) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "battery: give at most one of e_min and e_c".into(),
                ))
            }
            (Some(m), None) => m,
            (None, Some(c)) => self.e_max - c,
            (None, None) => 0.0,
        };
        if self.perfect {
            if self.mu.is_some() || self.beta.is_some() {
                return Err(Error::Config(
                    "battery: perfect = true excludes mu and beta".into(),
                ));
            }
            return BatteryParams::lossless(self.e_max, e_min);
        }
        match (self.mu, self.beta) {
            (Some(mu), Some(beta)) => BatteryParams::new(self.e_max, e_min, mu, beta),
            _ => Err(Error::Config(
                "battery: mu and beta are required unless perfect = true".into(),
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: PolicyKind,
    level: Option<f64>,
    epsilon: Option<f64>,
    theta: Option<f64>,
    target_prob: Option<f64>,
    /// Capacity the target probability refers to; defaults to the battery's.
    e_c: Option<f64>,
}

impl RawPolicy {
    fn build(&self, battery_e_c: f64) -> Result<PolicySpec> {
        let constraint = match (self.theta, self.target_prob) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "policy: give theta or target_prob, not both".into(),
                ))
            }
            (Some(theta), None) => Some(theta),
            (None, Some(q)) => {
                Some(theta_from_constraint(q, self.e_c.unwrap_or(battery_e_c))?.theta)
            }
            (None, None) => None,
        };
        if self.e_c.is_some() && self.target_prob.is_none() {
            return Err(Error::Config(
                "policy: e_c only applies with target_prob".into(),
            ));
        }
        let fixed = match self.kind {
            PolicyKind::Constant => {
                if self.epsilon.is_some() {
                    return Err(Error::Config(
                        "policy: epsilon applies to water_filling".into(),
                    ));
                }
                self.level.map(DemandPolicy::constant).transpose()?
            }
            PolicyKind::WaterFilling => {
                if self.level.is_some() {
                    return Err(Error::Config("policy: level applies to constant".into()));
                }
                self.epsilon.map(DemandPolicy::water_filling).transpose()?
            }
            PolicyKind::NoStorage => {
                if self.level.is_some() || self.epsilon.is_some() || constraint.is_some() {
                    return Err(Error::Config(
                        "policy: no_storage takes no parameters".into(),
                    ));
                }
                Some(DemandPolicy::NoStorage)
            }
        };
        match (fixed, constraint, self.kind.family()) {
            (Some(p), None, _) => Ok(PolicySpec::Fixed(p)),
            (None, Some(theta), Some(family)) => Ok(PolicySpec::Solved { family, theta }),
            (Some(_), Some(_), _) => Err(Error::Config(
                "policy: give either an explicit parameter or a constraint, not both".into(),
            )),
            _ => Err(Error::Config(format!(
                "policy: {} needs {} or a constraint (theta / target_prob)",
                self.kind.label(),
                if self.kind == PolicyKind::Constant {
                    "level"
                } else {
                    "epsilon"
                }
            ))),
        }
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let battery = raw.battery.build()?;
        let policy = raw.policy.build(battery.e_c().get())?;
        let scenario = ScenarioConfig {
            battery,
            arrival: raw.arrival,
            fading: raw.fading,
            channel: raw.channel,
            policy,
            frames: raw.frames,
            burn_in: raw.burn_in,
            seed: raw.seed,
            outage_zero_rate: raw.outage_zero_rate,
            replications: raw.replications,
        };
        scenario.validate()?;
        if let Some(c) = &raw.compare {
            if c.policies.is_empty() {
                return Err(Error::Config("compare: policies list is empty".into()));
            }
        }
        Ok(ConfigFile {
            scenario,
            sweep: raw.sweep,
            compare: raw.compare,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}
