//! Arm-selection strategies.
//!
//! Every policy keeps a [`PolicyState`] of per-arm sufficient statistics and
//! implements [`Policy`]. Randomized policies draw only from the
//! [`RngStream`] handed to `select_arm`, and policies that sample from a
//! weight vector consume exactly one uniform per round.

mod bpr;
mod index;
mod thompson;

pub use bpr::{bpr2_weights, bprk_log_weights, bprk_weights, two_point_log_ratio, BprPolicy, TwoArmBprPolicy};
pub use index::{moss_index, moss_select, ucb_index, ucb_select, MossPolicy, OraclePolicy, UcbPolicy};
pub use thompson::{BetaThompson, FinitePosterior, FiniteThompson};

use crate::environments::RngStream;
use crate::error::{Error, Result};
use crate::model::{ArmStatistics, BanditInstance, RewardFamily};

/// Slack allowed when matching policy constants against a configured instance.
const CONSTANT_MATCH_TOL: f64 = 1e-12;

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn state(&self) -> &PolicyState;

    /// Chooses the arm for the current round.
    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize>;

    /// Records the reward of the arm played this round and advances the round.
    fn observe(&mut self, arm: usize, reward: f64) -> Result<()>;

    fn arms(&self) -> usize {
        self.state().arms()
    }
}

/// History of an episode through its sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub per_arm: Vec<ArmStatistics>,
    /// One-based index of the round about to be played.
    pub round: usize,
}

impl PolicyState {
    pub fn new(arms: usize) -> Self {
        Self {
            per_arm: vec![ArmStatistics::default(); arms],
            round: 1,
        }
    }

    pub fn arms(&self) -> usize {
        self.per_arm.len()
    }

    pub fn record(&mut self, arm: usize, reward: f64) -> Result<()> {
        let arms = self.arms();
        self.per_arm
            .get_mut(arm)
            .ok_or(Error::Index { arm, arms })?
            .update(reward)?;
        self.round += 1;
        Ok(())
    }

    pub fn total_pulls(&self) -> u64 {
        self.per_arm.iter().map(|s| s.pulls).sum()
    }
}

/// First index attaining the maximum; `+inf` entries compare equal.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A policy description, turned into a fresh policy for every episode.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Thompson Sampling with independent Beta priors on Bernoulli arms.
    ThompsonBeta { alpha: Vec<f64>, beta: Vec<f64> },
    /// Thompson Sampling with a finite-support prior over instances.
    ThompsonFinite { atoms: Vec<(BanditInstance, f64)> },
    /// Posterior-weight policy for two arms with known best mean and gap.
    TwoArmBpr { mu_star: f64, delta: f64 },
    /// Posterior-weight policy for `K` arms with known best mean and minimum gap.
    Bpr { mu_star: f64, epsilon: f64 },
    Moss,
    Ucb,
    /// Always plays the best arm of the true instance.
    Oracle,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::ThompsonBeta { .. } => "ts-beta",
            PolicySpec::ThompsonFinite { .. } => "ts-finite",
            PolicySpec::TwoArmBpr { .. } => "bpr2",
            PolicySpec::Bpr { .. } => "bprk",
            PolicySpec::Moss => "moss",
            PolicySpec::Ucb => "ucb",
            PolicySpec::Oracle => "oracle",
        }
    }

    /// Checks the constants against `instance` and builds a fresh policy.
    pub fn build(&self, instance: &BanditInstance, horizon: usize) -> Result<Box<dyn Policy>> {
        let k = instance.arms();
        let gaps = instance.gap_profile();
        Ok(match self {
            PolicySpec::ThompsonBeta { alpha, beta } => {
                if instance.family() != RewardFamily::Bernoulli {
                    return Err(Error::Config("ts-beta requires Bernoulli rewards".into()));
                }
                if alpha.len() != k || beta.len() != k {
                    return Err(Error::Config(format!(
                        "ts-beta has {} prior parameters for {k} arms",
                        alpha.len()
                    )));
                }
                Box::new(BetaThompson::new(alpha.clone(), beta.clone())?)
            }
            PolicySpec::ThompsonFinite { atoms } => {
                let posterior = FinitePosterior::new(atoms)?;
                if posterior.arms() != k || posterior.family() != instance.family() {
                    return Err(Error::Config(
                        "ts-finite atoms do not match the environment's arms or reward family"
                            .into(),
                    ));
                }
                Box::new(FiniteThompson::new(posterior))
            }
            PolicySpec::TwoArmBpr { mu_star, delta } => {
                if k != 2 {
                    return Err(Error::Config(format!("bpr2 needs exactly 2 arms, got {k}")));
                }
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(Error::Config(format!("bpr2 delta must be positive, got {delta}")));
                }
                let other = gaps.gaps[1 - gaps.best_arm];
                if (gaps.mu_star - mu_star).abs() > CONSTANT_MATCH_TOL
                    || (other - delta).abs() > CONSTANT_MATCH_TOL
                {
                    return Err(Error::Config(format!(
                        "bpr2 constants (mu_star={mu_star}, delta={delta}) do not match instance \
                         means {:?}",
                        instance.means()
                    )));
                }
                Box::new(TwoArmBprPolicy::new(*mu_star, *delta)?)
            }
            PolicySpec::Bpr { mu_star, epsilon } => {
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(Error::Config(format!(
                        "bprk epsilon must be positive, got {epsilon}"
                    )));
                }
                let at_top = instance
                    .means()
                    .iter()
                    .filter(|&&m| (m - mu_star).abs() <= CONSTANT_MATCH_TOL)
                    .count();
                let rest_ok = instance.means().iter().all(|&m| {
                    (m - mu_star).abs() <= CONSTANT_MATCH_TOL
                        || m <= mu_star - epsilon + CONSTANT_MATCH_TOL
                });
                if at_top != 1 || !rest_ok {
                    return Err(Error::Config(format!(
                        "instance means {:?} violate the known-mean contract (one arm at \
                         {mu_star}, all others at most {})",
                        instance.means(),
                        mu_star - epsilon
                    )));
                }
                Box::new(BprPolicy::new(*mu_star, *epsilon, k)?)
            }
            PolicySpec::Moss => {
                if horizon < k {
                    return Err(Error::Config(format!(
                        "moss needs horizon >= arms, got n={horizon} < K={k}"
                    )));
                }
                Box::new(MossPolicy::new(k, horizon))
            }
            PolicySpec::Ucb => Box::new(UcbPolicy::new(k)),
            PolicySpec::Oracle => Box::new(OraclePolicy::new(k, gaps.best_arm)),
        })
    }
}
