//! Underflow-probability approximations and empirical tail fitting.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Episodes required at each threshold before it enters the tail fit.
pub const MIN_TAIL_EPISODES: u64 = 50;
/// Thresholds required for a tail fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRateTarget {
    pub theta: f64,
    /// `(target_prob, e_c)` when built by [`theta_from_constraint`].
    pub constraint: Option<(f64, f64)>,
}

impl DecayRateTarget {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Domain(format!(
                "decay rate must be positive, got {theta}"
            )));
        }
        Ok(DecayRateTarget {
            theta,
            constraint: None,
        })
    }
}

/// Decay rate that puts the exponential approximation at `target_prob` for
/// capacity `e_c`: `theta = -ln(q) / e_c`.
pub fn theta_from_constraint(target_prob: f64, e_c: f64) -> Result<DecayRateTarget> {
    if !(target_prob > 0.0 && target_prob < 1.0) {
        return Err(Error::Domain(format!(
            "target underflow probability must lie in (0, 1), got {target_prob}"
        )));
    }
    if !(e_c.is_finite() && e_c > 0.0) {
        return Err(Error::Domain(format!(
            "capacity must be positive, got {e_c}"
        )));
    }
    Ok(DecayRateTarget {
        theta: -target_prob.ln() / e_c,
        constraint: Some((target_prob, e_c)),
    })
}

/// `exp(-theta e_c)`. Warns outside the regime where it is meaningful.
pub fn underflow_prob_approx(theta: f64, e_c: f64) -> f64 {
    if theta <= 0.0 {
        warn!("decay rate {theta} is not positive; the exponential approximation is vacuous");
    } else if theta * e_c < 1.0 {
        warn!(
            "theta * e_c = {:.3} < 1: capacity too small for the exponential approximation, \
             consider the delta-weighted form",
            theta * e_c
        );
    }
    (-theta * e_c).exp().min(1.0)
}

/// `delta * exp(-theta e_c)` with `delta` the probability of a full battery.
pub fn refined_underflow_approx(theta: f64, e_c: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    Ok(delta * underflow_prob_approx(theta, e_c))
}

/// Eight evenly spaced thresholds over `[0.2, 0.8] * e_c`.
pub fn default_threshold_grid(e_c: f64) -> Vec<f64> {
    let n = 8;
    (0..n)
        .map(|k| e_c * (0.2 + 0.6 * k as f64 / (n - 1) as f64))
        .collect()
}

/// Running exceedance counts of the deficit `E_max - E` over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSample {
    pub thresholds: Vec<f64>,
    /// Frames with deficit `>= threshold`.
    pub exceedances: Vec<u64>,
    /// Entries into `deficit >= threshold` from below.
    pub episodes: Vec<u64>,
    /// Frames with a full battery (deficit 0).
    pub full_frames: u64,
    pub frames: u64,
    #[serde(skip)]
    above: Vec<bool>,
}

impl TailSample {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.windows(2).any(|w| w[0].is_nan() || w[0] >= w[1]) {
            return Err(Error::Config(
                "tail thresholds must be strictly increasing".into(),
            ));
        }
        if thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config("tail thresholds must be positive".into()));
        }
        let n = thresholds.len();
        Ok(TailSample {
            thresholds,
            exceedances: vec![0; n],
            episodes: vec![0; n],
            full_frames: 0,
            frames: 0,
            above: vec![false; n],
        })
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(
        thresholds: Vec<f64>,
        deficits: I,
    ) -> Result<Self> {
        let mut s = Self::new(thresholds)?;
        for d in deficits {
            s.record(d);
        }
        Ok(s)
    }

    #[inline]
    pub fn record(&mut self, deficit: f64) {
        self.frames += 1;
        if deficit <= 0.0 {
            self.full_frames += 1;
        }
        for k in 0..self.thresholds.len() {
            let above = deficit >= self.thresholds[k];
            if above {
                self.exceedances[k] += 1;
                if !self.above[k] {
                    self.episodes[k] += 1;
                }
            }
            self.above[k] = above;
        }
    }

    /// Adds the counts of `other`, which must share the threshold grid.
    pub fn merge(&mut self, other: &TailSample) -> Result<()> {
        if self.thresholds != other.thresholds {
            return Err(Error::Config(
                "cannot merge tail samples over different grids".into(),
            ));
        }
        for k in 0..self.thresholds.len() {
            self.exceedances[k] += other.exceedances[k];
            self.episodes[k] += other.episodes[k];
        }
        self.full_frames += other.full_frames;
        self.frames += other.frames;
        Ok(())
    }

    pub fn probability(&self, k: usize) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.exceedances[k] as f64 / self.frames as f64
    }

    pub fn delta_hat(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.full_frames as f64 / self.frames as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub thresholds: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub theta_hat: f64,
    pub fit_r_squared: f64,
    pub delta_hat: f64,
}

/// Least-squares fit of `ln Pr{deficit >= x}` against `x`.
pub fn estimate_decay_rate(sample: &TailSample) -> Result<TailEstimate> {
    if sample.thresholds.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "tail fit needs at least {MIN_FIT_POINTS} thresholds, got {}",
            sample.thresholds.len()
        )));
    }
    for (k, &x) in sample.thresholds.iter().enumerate() {
        if sample.episodes[k] < MIN_TAIL_EPISODES {
            return Err(Error::UnderSampled {
                threshold: x,
                events: sample.episodes[k],
                required: MIN_TAIL_EPISODES,
            });
        }
    }
    let xs = &sample.thresholds;
    let ys: Vec<f64> = (0..xs.len()).map(|k| sample.probability(k).ln()).collect();

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::DegenerateTail { slope });
    }
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(TailEstimate {
        thresholds: xs.clone(),
        log_probs: ys,
        theta_hat: -slope,
        fit_r_squared: r_squared,
        delta_hat: sample.delta_hat(),
    })
}
