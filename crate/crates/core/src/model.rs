//! Domain types shared by every other module: bandit instances, priors over
//! them, per-arm sufficient statistics and regret traces.

use crate::error::{Error, Result};

/// Reward distribution attached to every arm of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardFamily {
    /// Rewards in `{0, 1}` with `P(1) = mean`.
    Bernoulli,
    /// `Normal(mean, 1)`; rewards are not clipped.
    GaussianUnitVariance,
}

impl RewardFamily {
    pub fn name(self) -> &'static str {
        match self {
            RewardFamily::Bernoulli => "bernoulli",
            RewardFamily::GaussianUnitVariance => "gaussian",
        }
    }
}

/// A fixed environment: one mean per arm plus the reward family.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    family: RewardFamily,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, family: RewardFamily) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::Config(format!(
                "an instance needs at least 2 arms, got {}",
                means.len()
            )));
        }
        for (i, &m) in means.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::Config(format!("mean of arm {} is not finite", i + 1)));
            }
            if family == RewardFamily::Bernoulli && !(0.0..=1.0).contains(&m) {
                return Err(Error::Config(format!(
                    "Bernoulli mean of arm {} is {m}, outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(Self { means, family })
    }

    pub fn bernoulli(means: Vec<f64>) -> Result<Self> {
        Self::new(means, RewardFamily::Bernoulli)
    }

    pub fn gaussian(means: Vec<f64>) -> Result<Self> {
        Self::new(means, RewardFamily::GaussianUnitVariance)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn gap_profile(&self) -> GapProfile {
        gap_profile(self)
    }
}

/// Best arm, best mean and the gap of every arm.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    /// Zero-based index of the best arm; ties go to the lowest index.
    pub best_arm: usize,
    pub mu_star: f64,
    pub gaps: Vec<f64>,
}

impl GapProfile {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    /// Number of arms whose mean equals the best mean.
    pub fn optimal_arms(&self) -> usize {
        self.gaps.iter().filter(|&&g| g == 0.0).count()
    }
}

pub fn gap_profile(instance: &BanditInstance) -> GapProfile {
    let means = instance.means();
    let mut best_arm = 0;
    for (i, &m) in means.iter().enumerate().skip(1) {
        if m > means[best_arm] {
            best_arm = i;
        }
    }
    let mu_star = means[best_arm];
    GapProfile {
        best_arm,
        mu_star,
        gaps: means.iter().map(|&m| mu_star - m).collect(),
    }
}

/// A distribution over bandit instances.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Independent `Beta(alpha_i, beta_i)` means with Bernoulli rewards.
    ProductBeta { alpha: Vec<f64>, beta: Vec<f64> },
    /// Two Gaussian instances `(mu*, mu*-delta)` and `(mu*-delta, mu*)`, each
    /// with mass 1/2.
    TwoPointPermutation { mu_star: f64, delta: f64 },
    /// Gaussian instances with a uniformly placed best arm at `mu_star` and
    /// every other mean drawn uniformly from `[mu_star - gap_max, mu_star - epsilon]`.
    BprUniformGap {
        mu_star: f64,
        epsilon: f64,
        arms: usize,
        gap_max: f64,
    },
    /// Arbitrary finite support with explicit probabilities.
    FiniteSupport { atoms: Vec<(BanditInstance, f64)> },
}

impl PriorSpec {
    /// `gap_max` defaults to ten times the minimum gap.
    pub fn bpr_uniform_gap(mu_star: f64, epsilon: f64, arms: usize) -> Self {
        PriorSpec::BprUniformGap {
            mu_star,
            epsilon,
            arms,
            gap_max: 10.0 * epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriorSpec::ProductBeta { alpha, beta } => {
                if alpha.len() != beta.len() {
                    return Err(Error::Config(format!(
                        "product Beta prior has {} alpha and {} beta parameters",
                        alpha.len(),
                        beta.len()
                    )));
                }
                if alpha.len() < 2 {
                    return Err(Error::Config("product Beta prior needs at least 2 arms".into()));
                }
                if alpha.iter().chain(beta).any(|&p| !(p.is_finite() && p > 0.0)) {
                    return Err(Error::Config(
                        "Beta parameters must be finite and positive".into(),
                    ));
                }
            }
            PriorSpec::TwoPointPermutation { mu_star, delta } => {
                if !mu_star.is_finite() {
                    return Err(Error::Config("mu_star must be finite".into()));
                }
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(Error::Config(format!("delta must be positive, got {delta}")));
                }
            }
            PriorSpec::BprUniformGap {
                mu_star,
                epsilon,
                arms,
                gap_max,
            } => {
                if !mu_star.is_finite() {
                    return Err(Error::Config("mu_star must be finite".into()));
                }
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
                }
                if !(gap_max.is_finite() && gap_max >= epsilon) {
                    return Err(Error::Config(format!(
                        "gap_max ({gap_max}) must be finite and at least epsilon ({epsilon})"
                    )));
                }
                if *arms < 2 {
                    return Err(Error::Config(format!("need at least 2 arms, got {arms}")));
                }
            }
            PriorSpec::FiniteSupport { atoms } => {
                let first = atoms
                    .first()
                    .ok_or_else(|| Error::Config("finite-support prior has no atoms".into()))?;
                let (k, family) = (first.0.arms(), first.0.family());
                let mut total = 0.0;
                for (inst, p) in atoms {
                    if inst.arms() != k || inst.family() != family {
                        return Err(Error::Config(
                            "finite-support atoms must share arm count and reward family".into(),
                        ));
                    }
                    if !(p.is_finite() && *p >= 0.0) {
                        return Err(Error::Config(format!("atom probability {p} is invalid")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "atom probabilities sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn arms(&self) -> usize {
        match self {
            PriorSpec::ProductBeta { alpha, .. } => alpha.len(),
            PriorSpec::TwoPointPermutation { .. } => 2,
            PriorSpec::BprUniformGap { arms, .. } => *arms,
            PriorSpec::FiniteSupport { atoms } => atoms.first().map_or(0, |a| a.0.arms()),
        }
    }

    pub fn family(&self) -> RewardFamily {
        match self {
            PriorSpec::ProductBeta { .. } => RewardFamily::Bernoulli,
            PriorSpec::TwoPointPermutation { .. } | PriorSpec::BprUniformGap { .. } => {
                RewardFamily::GaussianUnitVariance
            }
            PriorSpec::FiniteSupport { atoms } => atoms
                .first()
                .map_or(RewardFamily::GaussianUnitVariance, |a| a.0.family()),
        }
    }

    /// The support as explicit atoms, for priors that have a finite one.
    pub fn finite_atoms(&self) -> Option<Vec<(BanditInstance, f64)>> {
        match self {
            PriorSpec::TwoPointPermutation { mu_star, delta } => {
                let low = mu_star - delta;
                Some(vec![
                    (
                        BanditInstance::gaussian(vec![*mu_star, low]).ok()?,
                        0.5,
                    ),
                    (
                        BanditInstance::gaussian(vec![low, *mu_star]).ok()?,
                        0.5,
                    ),
                ])
            }
            PriorSpec::FiniteSupport { atoms } => Some(atoms.clone()),
            _ => None,
        }
    }
}

/// Sufficient statistics of the rewards observed on one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStatistics {
    pub pulls: u64,
    pub reward_sum: f64,
    /// Sum of squared deviations from the running mean.
    pub centered_sq_sum: f64,
}

impl ArmStatistics {
    /// Folds one reward in with Welford's recurrence.
    pub fn update(&mut self, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::InvalidInput(format!("reward {reward} is not finite")));
        }
        if self.pulls == 0 {
            self.pulls = 1;
            self.reward_sum = reward;
            self.centered_sq_sum = 0.0;
            return Ok(());
        }
        let old_mean = self.reward_sum / self.pulls as f64;
        self.pulls += 1;
        self.reward_sum += reward;
        let new_mean = self.reward_sum / self.pulls as f64;
        self.centered_sq_sum += (reward - old_mean) * (reward - new_mean);
        if self.centered_sq_sum < 0.0 {
            self.centered_sq_sum = 0.0;
        }
        Ok(())
    }

    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }

    /// `sum_s (x_s - c)^2`, recovered from the sufficient statistics.
    pub fn sq_dist_sum(&self, c: f64) -> f64 {
        match self.mean() {
            Some(m) => self.pulls as f64 * (m - c) * (m - c) + self.centered_sq_sum,
            None => 0.0,
        }
    }
}

pub fn update_statistics(mut stats: ArmStatistics, reward: f64) -> Result<ArmStatistics> {
    stats.update(reward)?;
    Ok(stats)
}

/// Per-round regret of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub episode_seed: u64,
    pub stream_id: u64,
    pub horizon: usize,
    pub instant_regret: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
    pub theta_summary: GapProfile,
}

impl RegretTrace {
    pub fn from_instant(
        episode_seed: u64,
        stream_id: u64,
        instant_regret: Vec<f64>,
        theta_summary: GapProfile,
    ) -> Self {
        let cumulative_regret = prefix_sums(&instant_regret);
        Self {
            episode_seed,
            stream_id,
            horizon: instant_regret.len(),
            instant_regret,
            cumulative_regret,
            theta_summary,
        }
    }

    /// Cumulative regret after round `t` (one-based).
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.cumulative_regret.get(i).copied())
    }
}

pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gap_profile_examples() {
        let g = gap_profile(&BanditInstance::gaussian(vec![0.5, 0.5 - 0.2]).unwrap());
        assert_eq!(g.best_arm, 0);
        assert_eq!(g.gaps[0], 0.0);
        assert!((g.gaps[1] - 0.2).abs() < 1e-15);

        let g = gap_profile(&BanditInstance::bernoulli(vec![0.3, 0.3]).unwrap());
        assert_eq!(g.best_arm, 0);
        assert_eq!(g.gaps, vec![0.0, 0.0]);

        let g = gap_profile(&BanditInstance::bernoulli(vec![0.1, 0.9, 0.4]).unwrap());
        assert_eq!(g.best_arm, 1);
        assert!((g.gaps[0] - 0.8).abs() < 1e-15);
        assert_eq!(g.gaps[1], 0.0);
        assert!((g.gaps[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn instance_validation() {
        assert!(BanditInstance::bernoulli(vec![0.5]).is_err());
        assert!(BanditInstance::bernoulli(vec![0.5, 1.2]).is_err());
        assert!(BanditInstance::gaussian(vec![0.5, f64::NAN]).is_err());
        assert!(BanditInstance::gaussian(vec![-3.0, 7.5]).is_ok());
    }

    #[test]
    fn prior_validation() {
        let bad = PriorSpec::TwoPointPermutation { mu_star: 0.0, delta: 0.0 };
        assert!(bad.validate().is_err());
        let atoms = vec![
            (BanditInstance::gaussian(vec![0.0, 1.0]).unwrap(), 0.3),
            (BanditInstance::gaussian(vec![1.0, 0.0]).unwrap(), 0.6),
        ];
        assert!(PriorSpec::FiniteSupport { atoms }.validate().is_err());
        assert!(PriorSpec::bpr_uniform_gap(0.0, 0.5, 4).validate().is_ok());
        let beta = PriorSpec::ProductBeta { alpha: vec![1.0; 3], beta: vec![1.0; 2] };
        assert!(beta.validate().is_err());
    }

    #[test]
    fn statistics_small_cases() {
        let s = update_statistics(ArmStatistics::default(), 1.0).unwrap();
        assert_eq!((s.pulls, s.mean(), s.centered_sq_sum), (1, Some(1.0), 0.0));
        let s = update_statistics(s, 0.0).unwrap();
        assert_eq!((s.pulls, s.mean(), s.centered_sq_sum), (2, Some(0.5), 0.5));
        assert!(update_statistics(s, f64::INFINITY).is_err());
        assert!(update_statistics(s, f64::NAN).is_err());
    }

    fn batch(xs: &[f64]) -> (f64, f64) {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let css = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        (mean, css)
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-14
    }

    #[test]
    fn statistics_match_two_pass_on_normal_draws() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut s = ArmStatistics::default();
        for &x in &xs {
            s.update(x).unwrap();
        }
        let (mean, css) = batch(&xs);
        assert!(rel_close(s.mean().unwrap(), mean, 1e-10));
        assert!(rel_close(s.centered_sq_sum, css, 1e-10));
    }

    proptest! {
        #[test]
        fn incremental_equals_batch(xs in proptest::collection::vec(-1e3f64..1e3, 1..200)) {
            let mut s = ArmStatistics::default();
            for &x in &xs {
                s.update(x).unwrap();
            }
            let (mean, css) = batch(&xs);
            prop_assert!(rel_close(s.mean().unwrap(), mean, 1e-10));
            // Rounding in either form scales with the raw second moment.
            let scale: f64 = xs.iter().map(|x| x * x).sum();
            prop_assert!((s.centered_sq_sum - css).abs() <= 1e-10 * scale);
        }

        #[test]
        fn gap_profile_permutation_equivariant(
            means in proptest::collection::vec(-5.0f64..5.0, 2..8),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..means.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted: Vec<f64> = perm.iter().map(|&j| means[j]).collect();
            let g = gap_profile(&BanditInstance::gaussian(means.clone()).unwrap());
            let gp = gap_profile(&BanditInstance::gaussian(permuted).unwrap());
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_eq!(gp.gaps[i], g.gaps[j]);
            }
            prop_assert_eq!(means[perm[gp.best_arm]], g.mu_star);
            prop_assert!(g.gaps.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn trace_cumulative_reproducible(xs in proptest::collection::vec(0.0f64..2.0, 1..300)) {
            let g = GapProfile { best_arm: 0, mu_star: 0.0, gaps: vec![0.0, 2.0] };
            let trace = RegretTrace::from_instant(1, 0, xs.clone(), g);
            let again = prefix_sums(&trace.instant_regret);
            prop_assert_eq!(&trace.cumulative_regret, &again);
            prop_assert!(trace.cumulative_regret.windows(2).all(|w| w[1] >= w[0]));
            for (t, c) in trace.cumulative_regret.iter().enumerate() {
                prop_assert!(*c <= (t + 1) as f64 * 2.0 + 1e-9);
            }
        }
    }
}
