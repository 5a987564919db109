//! Random instances drawn from priors, and rewards drawn from instances.
//!
//! Every random draw in an episode comes from one [`RngStream`]: a ChaCha12
//! generator keyed by the master seed with the episode index as its stream
//! number. Streams with different ids share a key but never overlap, and a
//! given `(seed, stream_id)` pair always replays the same sequence.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{BanditInstance, PriorSpec, RewardFamily};

/// Random-number construction recorded in experiment metadata.
pub const RNG_ALGORITHM: &str = "chacha12(seed_from_u64(seed), stream=stream_id)";
/// Gaussian sampler recorded in experiment metadata.
pub const GAUSSIAN_SAMPLER: &str = "ziggurat(rand_distr::StandardNormal)";
/// Beta sampler recorded in experiment metadata.
pub const BETA_SAMPLER: &str = "rand_distr::Beta";

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn beta(&mut self, alpha: f64, beta: f64) -> Result<f64> {
        let dist = Beta::new(alpha, beta)
            .map_err(|e| Error::InvalidInput(format!("Beta({alpha}, {beta}): {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws `theta` from the prior.
pub fn sample_instance(prior: &PriorSpec, rng: &mut RngStream) -> Result<BanditInstance> {
    prior.validate()?;
    match prior {
        PriorSpec::ProductBeta { alpha, beta } => {
            let means = alpha
                .iter()
                .zip(beta)
                .map(|(&a, &b)| rng.beta(a, b))
                .collect::<Result<Vec<_>>>()?;
            BanditInstance::bernoulli(means)
        }
        PriorSpec::TwoPointPermutation { mu_star, delta } => {
            let low = mu_star - delta;
            let means = if rng.uniform() < 0.5 {
                vec![*mu_star, low]
            } else {
                vec![low, *mu_star]
            };
            BanditInstance::gaussian(means)
        }
        PriorSpec::BprUniformGap {
            mu_star,
            epsilon,
            arms,
            gap_max,
        } => {
            let best = rng.random_range(0..*arms);
            let means = (0..*arms)
                .map(|i| {
                    if i == best {
                        *mu_star
                    } else {
                        // gap >= epsilon, so the mean rounds to at most mu_star - epsilon.
                        let gap = epsilon + (gap_max - epsilon) * rng.uniform();
                        mu_star - gap
                    }
                })
                .collect();
            BanditInstance::gaussian(means)
        }
        PriorSpec::FiniteSupport { atoms } => {
            let u = rng.uniform();
            let mut cdf = 0.0;
            for (inst, p) in atoms {
                cdf += p;
                if u < cdf {
                    return Ok(inst.clone());
                }
            }
            let last = atoms
                .iter()
                .rev()
                .find(|(_, p)| *p > 0.0)
                .ok_or_else(|| Error::Config("finite-support prior has no mass".into()))?;
            Ok(last.0.clone())
        }
    }
}

pub fn sample_reward(instance: &BanditInstance, arm: usize, rng: &mut RngStream) -> Result<f64> {
    let mean = *instance.means().get(arm).ok_or(Error::Index {
        arm,
        arms: instance.arms(),
    })?;
    Ok(match instance.family() {
        RewardFamily::Bernoulli => {
            if rng.uniform() < mean {
                1.0
            } else {
                0.0
            }
        }
        RewardFamily::GaussianUnitVariance => mean + rng.standard_normal(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RngStream::new(7, 4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        let n = 100_000;
        let mut r0 = RngStream::new(1, 0);
        let mut r1 = RngStream::new(1, 1);
        let (mut sxy, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y) = (r0.uniform() - 0.5, r1.uniform() - 0.5);
            sxy += x * y;
            sx += x;
            sy += y;
        }
        let cov = sxy / n as f64 - (sx / n as f64) * (sy / n as f64);
        let corr = cov / (1.0 / 12.0);
        // 5 standard errors of a sample correlation under independence.
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr={corr}");
    }

    #[test]
    fn two_point_prior_is_balanced() {
        let prior = PriorSpec::TwoPointPermutation { mu_star: 0.0, delta: 1.0 };
        let mut rng = RngStream::new(42, 0);
        let n = 100_000;
        let mut first = 0;
        for _ in 0..n {
            let inst = sample_instance(&prior, &mut rng).unwrap();
            match inst.means() {
                [a, b] if *a == 0.0 && *b == -1.0 => first += 1,
                [a, b] if *a == -1.0 && *b == 0.0 => {}
                other => panic!("unexpected instance {other:?}"),
            }
        }
        let frac = first as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "frac={frac}");
    }

    #[test]
    fn single_atom_prior() {
        let inst = BanditInstance::bernoulli(vec![0.2, 0.7]).unwrap();
        let prior = PriorSpec::FiniteSupport { atoms: vec![(inst.clone(), 1.0)] };
        let mut rng = RngStream::new(1, 9);
        for _ in 0..100 {
            assert_eq!(sample_instance(&prior, &mut rng).unwrap(), inst);
        }
    }

    #[test]
    fn uniform_beta_prior_means() {
        let prior = PriorSpec::ProductBeta { alpha: vec![1.0; 3], beta: vec![1.0; 3] };
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let inst = sample_instance(&prior, &mut rng).unwrap();
            for (s, m) in sums.iter_mut().zip(inst.means()) {
                *s += m;
            }
        }
        for s in sums {
            // Beta(1,1) has mean 1/2 and sd 1/sqrt(12); 0.01 is > 10 standard errors.
            assert!((s / n as f64 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn bpr_prior_respects_contract() {
        let prior = PriorSpec::BprUniformGap { mu_star: 0.3, epsilon: 0.25, arms: 6, gap_max: 1.0 };
        let mut rng = RngStream::new(8, 2);
        let mut best_counts = [0usize; 6];
        let n = 60_000;
        for _ in 0..n {
            let inst = sample_instance(&prior, &mut rng).unwrap();
            let best: Vec<usize> = (0..6).filter(|&i| inst.means()[i] == 0.3).collect();
            assert_eq!(best.len(), 1);
            best_counts[best[0]] += 1;
            for (i, &m) in inst.means().iter().enumerate() {
                if i != best[0] {
                    assert!(m <= 0.3 - 0.25);
                    assert!(m >= 0.3 - 1.0 - 1e-12);
                }
            }
        }
        for c in best_counts {
            assert!((c as f64 / n as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }

    #[test]
    fn bernoulli_rewards() {
        let inst = BanditInstance::bernoulli(vec![1.0, 0.3]).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..1000 {
            assert_eq!(sample_reward(&inst, 0, &mut rng).unwrap(), 1.0);
        }
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let r = sample_reward(&inst, 1, &mut rng).unwrap();
            assert!(r == 0.0 || r == 1.0);
            sum += r;
        }
        assert!((sum / n as f64 - 0.3).abs() < 0.002);
        assert_eq!(
            sample_reward(&inst, 2, &mut rng),
            Err(Error::Index { arm: 2, arms: 2 })
        );
    }

    #[test]
    fn gaussian_rewards() {
        let inst = BanditInstance::gaussian(vec![-2.0, 0.0]).unwrap();
        let mut rng = RngStream::new(4, 1);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_reward(&inst, 0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((mean + 2.0).abs() < 0.004, "mean={mean}");
        assert!((var - 1.0).abs() < 0.01, "var={var}");
    }

    #[test]
    fn instances_and_rewards_replay_bit_exactly() {
        let prior = PriorSpec::bpr_uniform_gap(0.0, 0.5, 4);
        let run = |id| {
            let mut rng = RngStream::new(99, id);
            let inst = sample_instance(&prior, &mut rng).unwrap();
            let rewards: Vec<u64> = (0..50)
                .map(|t| sample_reward(&inst, t % 4, &mut rng).unwrap().to_bits())
                .collect();
            (inst, rewards)
        };
        assert_eq!(run(12), run(12));
        assert_ne!(run(12).1, run(13).1);
    }
}
