//! Episode runner and Monte Carlo regret estimation.
//!
//! Episode `i` of an experiment always uses stream `i` of the master seed, and
//! consumes it in a fixed order: the instance draw (Bayesian mode only), then
//! for every round the policy's draws followed by the reward draw. Episodes run
//! in parallel and are merged in stream order, so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;

use crate::environments::{sample_instance, sample_reward, RngStream, GAUSSIAN_SAMPLER, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::model::{BanditInstance, PriorSpec, RegretTrace};
use crate::policies::{Policy, PolicySpec};

/// What the episodes are played against.
#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    /// A fixed instance: estimates the individual regret `R_n(theta)`.
    Fixed(BanditInstance),
    /// A prior: `theta` is redrawn every episode, estimating the Bayesian regret.
    Prior(PriorSpec),
}

impl Environment {
    pub fn arms(&self) -> usize {
        match self {
            Environment::Fixed(inst) => inst.arms(),
            Environment::Prior(prior) => prior.arms(),
        }
    }

    /// Short, comma-free description used in CSV output.
    pub fn descriptor(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match self {
            Environment::Fixed(inst) => {
                format!("instance({};{})", inst.family().name(), join(inst.means()))
            }
            Environment::Prior(PriorSpec::ProductBeta { alpha, beta }) => {
                format!("product-beta(alpha={};beta={})", join(alpha), join(beta))
            }
            Environment::Prior(PriorSpec::TwoPointPermutation { mu_star, delta }) => {
                format!("two-point(mu_star={mu_star};delta={delta})")
            }
            Environment::Prior(PriorSpec::BprUniformGap { mu_star, epsilon, arms, gap_max }) => {
                format!(
                    "bpr-uniform-gap(mu_star={mu_star};epsilon={epsilon};arms={arms};gap_max={gap_max})"
                )
            }
            Environment::Prior(PriorSpec::FiniteSupport { atoms }) => {
                format!("finite(atoms={})", atoms.len())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub policy: PolicySpec,
    pub environment: Environment,
    pub horizon: usize,
    pub episodes: usize,
    pub master_seed: u64,
    /// Sorted, distinct rounds in `1..=horizon` at which regret is recorded.
    pub checkpoints: Vec<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.environment.arms();
        if let Environment::Prior(prior) = &self.environment {
            prior.validate()?;
        }
        if self.horizon < k {
            return Err(Error::Config(format!(
                "horizon {} is smaller than the number of arms {k}",
                self.horizon
            )));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("at least one checkpoint is required".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints[0] < 1 || *self.checkpoints.last().unwrap() > self.horizon {
            return Err(Error::Config(format!(
                "checkpoints must lie in [1, {}]",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// `{ceil(n / 2^j) : j >= 0}` in increasing order.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let t = horizon.div_ceil(1usize << j);
        if out.last() != Some(&t) {
            out.push(t);
        }
        if t <= 1 || j >= 63 {
            break;
        }
        j += 1;
    }
    out.reverse();
    out
}

/// Plays `horizon` rounds of `policy` against `instance`.
pub fn run_episode(
    policy: &mut dyn Policy,
    instance: &BanditInstance,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<RegretTrace> {
    let k = instance.arms();
    if policy.arms() != k {
        return Err(Error::Config(format!(
            "policy has {} arms but the instance has {k}",
            policy.arms()
        )));
    }
    if policy.state().round != 1 {
        return Err(Error::Config("policy has already been played".into()));
    }
    let profile = instance.gap_profile();
    let mut instant = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let arm = policy.select_arm(rng)?;
        if arm >= k {
            return Err(Error::Index { arm, arms: k });
        }
        let reward = sample_reward(instance, arm, rng)?;
        policy.observe(arm, reward)?;
        instant.push(profile.gaps[arm]);
    }
    Ok(RegretTrace::from_instant(
        rng.seed(),
        rng.stream_id(),
        instant,
        profile,
    ))
}

/// Runs episode `stream_id` of an experiment from scratch.
pub fn run_config_episode(config: &ExperimentConfig, stream_id: u64) -> Result<RegretTrace> {
    let mut rng = RngStream::new(config.master_seed, stream_id);
    let instance = match &config.environment {
        Environment::Fixed(inst) => inst.clone(),
        Environment::Prior(prior) => sample_instance(prior, &mut rng)?,
    };
    let mut policy = config.policy.build(&instance, config.horizon)?;
    run_episode(policy.as_mut(), &instance, config.horizon, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointStat {
    pub t: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: f64,
}

/// Monte Carlo estimate of cumulative regret at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub experiment_id: String,
    pub policy: String,
    pub environment: String,
    pub horizon: usize,
    pub episodes: usize,
    pub master_seed: u64,
    pub checkpoints: Vec<CheckpointStat>,
    /// Sampler and generator identifiers, so traces can be matched to code.
    pub metadata: Vec<(String, String)>,
}

impl RegretSummary {
    pub fn at(&self, t: usize) -> Option<&CheckpointStat> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

/// Mean, standard error (`sd / sqrt(m)`) and 95% half-width (`1.96 SE`).
pub fn summarize(t: usize, values: &[f64]) -> CheckpointStat {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    CheckpointStat { t, mean, stderr, ci95: 1.96 * stderr }
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Episode {
                stream_id: i as u64,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Every episode's full trace, in stream order.
pub fn run_traces(config: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<RegretTrace>> {
    config.validate()?;
    let results = in_pool(workers, || {
        (0..config.episodes as u64)
            .into_par_iter()
            .map(|id| run_config_episode(config, id))
            .collect::<Vec<_>>()
    })?;
    first_error(results)
}

/// Estimates the regret curve of `config`; `workers = None` uses the global pool.
pub fn estimate_regret(config: &ExperimentConfig, workers: Option<usize>) -> Result<RegretSummary> {
    config.validate()?;
    let results = in_pool(workers, || {
        (0..config.episodes as u64)
            .into_par_iter()
            .map(|id| {
                let trace = run_config_episode(config, id)?;
                Ok(config
                    .checkpoints
                    .iter()
                    .map(|&t| trace.cumulative_regret[t - 1])
                    .collect::<Vec<f64>>())
            })
            .collect::<Vec<Result<Vec<f64>>>>()
    })?;
    let per_episode = first_error(results)?;

    let checkpoints = config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let column: Vec<f64> = per_episode.iter().map(|row| row[j]).collect();
            summarize(t, &column)
        })
        .collect();

    Ok(RegretSummary {
        experiment_id: config.experiment_id.clone(),
        policy: config.policy.name().to_string(),
        environment: config.environment.descriptor(),
        horizon: config.horizon,
        episodes: config.episodes,
        master_seed: config.master_seed,
        checkpoints,
        metadata: vec![
            ("rng".into(), RNG_ALGORITHM.into()),
            ("gaussian".into(), GAUSSIAN_SAMPLER.into()),
        ],
    })
}
