use super::{argmax, Policy, PolicyState};
use crate::environments::RngStream;
use crate::error::Result;
use crate::model::ArmStatistics;
use crate::numerics::log_plus;

/// MOSS index `mean + sqrt(log+(n / (K T)) / T)`; `+inf` for an unpulled arm.
pub fn moss_index(stats: &ArmStatistics, horizon: usize, arms: usize) -> f64 {
    let Some(mean) = stats.mean() else {
        return f64::INFINITY;
    };
    let t = stats.pulls as f64;
    let ratio = horizon as f64 / (arms as f64 * t);
    // ratio > 0 because horizon, arms and t are all positive.
    let bonus = log_plus(ratio).unwrap_or(0.0);
    mean + (bonus / t).sqrt()
}

/// UCB index `mean + sqrt(2 log t / T)` at round `t`; `+inf` for an unpulled arm.
pub fn ucb_index(stats: &ArmStatistics, round: usize) -> f64 {
    let Some(mean) = stats.mean() else {
        return f64::INFINITY;
    };
    mean + (2.0 * (round as f64).ln() / stats.pulls as f64).sqrt()
}

pub fn moss_select(state: &PolicyState, horizon: usize, arms: usize) -> usize {
    let idx: Vec<f64> = state.per_arm.iter().map(|s| moss_index(s, horizon, arms)).collect();
    argmax(&idx)
}

pub fn ucb_select(state: &PolicyState) -> usize {
    let idx: Vec<f64> = state.per_arm.iter().map(|s| ucb_index(s, state.round)).collect();
    argmax(&idx)
}

#[derive(Debug, Clone)]
pub struct MossPolicy {
    state: PolicyState,
    horizon: usize,
}

impl MossPolicy {
    pub fn new(arms: usize, horizon: usize) -> Self {
        Self {
            state: PolicyState::new(arms),
            horizon,
        }
    }
}

impl Policy for MossPolicy {
    fn name(&self) -> &'static str {
        "moss"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(moss_select(&self.state, self.horizon, self.arms()))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

#[derive(Debug, Clone)]
pub struct UcbPolicy {
    state: PolicyState,
}

impl UcbPolicy {
    pub fn new(arms: usize) -> Self {
        Self { state: PolicyState::new(arms) }
    }
}

impl Policy for UcbPolicy {
    fn name(&self) -> &'static str {
        "ucb"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(ucb_select(&self.state))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// Plays a fixed arm; with the true best arm this is the zero-regret reference.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    state: PolicyState,
    arm: usize,
}

impl OraclePolicy {
    pub fn new(arms: usize, arm: usize) -> Self {
        Self { state: PolicyState::new(arms), arm }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(self.arm)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}
