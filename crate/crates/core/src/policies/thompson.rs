use super::{argmax, Policy, PolicyState};
use crate::environments::RngStream;
use crate::error::{Error, Result};
use crate::model::{BanditInstance, RewardFamily};
use crate::numerics::{normalize, sample_index};

/// Beta-Bernoulli Thompson Sampling with independent per-arm priors.
#[derive(Debug, Clone)]
pub struct BetaThompson {
    state: PolicyState,
    alpha0: Vec<f64>,
    beta0: Vec<f64>,
}

impl BetaThompson {
    pub fn new(alpha0: Vec<f64>, beta0: Vec<f64>) -> Result<Self> {
        if alpha0.len() != beta0.len() || alpha0.len() < 2 {
            return Err(Error::Config("Beta prior needs matching parameters for >= 2 arms".into()));
        }
        if alpha0.iter().chain(&beta0).any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::Config("Beta parameters must be finite and positive".into()));
        }
        Ok(Self {
            state: PolicyState::new(alpha0.len()),
            alpha0,
            beta0,
        })
    }

    pub fn uniform(arms: usize) -> Result<Self> {
        Self::new(vec![1.0; arms], vec![1.0; arms])
    }

    /// Current `(alpha, beta)` of the arm's posterior.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        let s = &self.state.per_arm[arm];
        let successes = s.reward_sum;
        let failures = s.pulls as f64 - successes;
        (self.alpha0[arm] + successes, self.beta0[arm] + failures)
    }
}

impl Policy for BetaThompson {
    fn name(&self) -> &'static str {
        "ts-beta"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        let draws = (0..self.arms())
            .map(|i| {
                let (a, b) = self.posterior(i);
                rng.beta(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(argmax(&draws))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        if reward != 0.0 && reward != 1.0 {
            return Err(Error::InvalidInput(format!(
                "Beta-Bernoulli update needs a reward in {{0, 1}}, got {reward}"
            )));
        }
        self.state.record(arm, reward)
    }
}

/// Posterior over a finite set of instances, kept as unnormalized log masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePosterior {
    atoms: Vec<BanditInstance>,
    best_arms: Vec<usize>,
    log_mass: Vec<f64>,
}

impl FinitePosterior {
    pub fn new(atoms: &[(BanditInstance, f64)]) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::Config("finite posterior needs at least one atom".into()))?;
        let (k, family) = (first.0.arms(), first.0.family());
        if atoms.iter().any(|(a, _)| a.arms() != k || a.family() != family) {
            return Err(Error::Config(
                "finite posterior atoms must share arm count and reward family".into(),
            ));
        }
        if atoms.iter().any(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Config("atom probabilities must be finite and >= 0".into()));
        }
        let log_mass: Vec<f64> = atoms.iter().map(|(_, p)| p.ln()).collect();
        if log_mass.iter().all(|&m| m == f64::NEG_INFINITY) {
            return Err(Error::DegeneratePosterior);
        }
        Ok(Self {
            best_arms: atoms.iter().map(|(a, _)| a.gap_profile().best_arm).collect(),
            atoms: atoms.iter().map(|(a, _)| a.clone()).collect(),
            log_mass,
        })
    }

    pub fn arms(&self) -> usize {
        self.atoms[0].arms()
    }

    pub fn family(&self) -> RewardFamily {
        self.atoms[0].family()
    }

    pub fn atoms(&self) -> &[BanditInstance] {
        &self.atoms
    }

    pub fn log_mass(&self) -> &[f64] {
        &self.log_mass
    }

    /// Normalized posterior probability of every atom.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        normalize(&self.log_mass).map_err(|_| Error::DegeneratePosterior)
    }

    /// Probability that Thompson Sampling plays each arm.
    pub fn arm_distribution(&self) -> Result<Vec<f64>> {
        let probs = self.probabilities()?;
        let mut out = vec![0.0; self.arms()];
        for (p, &best) in probs.iter().zip(&self.best_arms) {
            out[best] += p;
        }
        Ok(out)
    }

    /// Draws an atom from the posterior with one uniform and returns its best arm.
    pub fn select(&self, rng: &mut RngStream) -> Result<usize> {
        let probs = self.probabilities()?;
        Ok(self.best_arms[sample_index(&probs, rng.uniform())])
    }

    /// Multiplies in the likelihood of `reward` observed on `arm`.
    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        let arms = self.arms();
        if arm >= arms {
            return Err(Error::Index { arm, arms });
        }
        if !reward.is_finite() {
            return Err(Error::InvalidInput(format!("reward {reward} is not finite")));
        }
        let family = self.family();
        if family == RewardFamily::Bernoulli && reward != 0.0 && reward != 1.0 {
            return Err(Error::InvalidInput(format!(
                "Bernoulli likelihood needs a reward in {{0, 1}}, got {reward}"
            )));
        }
        for (mass, atom) in self.log_mass.iter_mut().zip(&self.atoms) {
            let mu = atom.means()[arm];
            *mass += match family {
                RewardFamily::GaussianUnitVariance => -0.5 * (reward - mu) * (reward - mu),
                RewardFamily::Bernoulli if reward == 1.0 => mu.ln(),
                RewardFamily::Bernoulli => (1.0 - mu).ln(),
            };
        }
        if self.log_mass.iter().all(|&m| m == f64::NEG_INFINITY) {
            return Err(Error::DegeneratePosterior);
        }
        Ok(())
    }
}

/// Thompson Sampling over a finite-support prior.
#[derive(Debug, Clone)]
pub struct FiniteThompson {
    state: PolicyState,
    posterior: FinitePosterior,
}

impl FiniteThompson {
    pub fn new(posterior: FinitePosterior) -> Self {
        Self {
            state: PolicyState::new(posterior.arms()),
            posterior,
        }
    }

    pub fn posterior(&self) -> &FinitePosterior {
        &self.posterior
    }
}

impl Policy for FiniteThompson {
    fn name(&self) -> &'static str {
        "ts-finite"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        self.posterior.select(rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.posterior.observe(arm, reward)?;
        self.state.record(arm, reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PriorSpec;

    #[test]
    fn concentrated_posterior_dominates() {
        let mut ts = BetaThompson::new(vec![1e6, 1.0], vec![1.0, 1e6]).unwrap();
        let mut rng = RngStream::new(1, 0);
        let n = 10_000;
        let first = (0..n).filter(|_| ts.select_arm(&mut rng).unwrap() == 0).count();
        assert!(first as f64 / n as f64 >= 0.999);
    }

    #[test]
    fn symmetric_prior_selects_uniformly() {
        let k = 4;
        let mut ts = BetaThompson::uniform(k).unwrap();
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[ts.select_arm(&mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / k as f64).abs() < 0.02);
        }
    }

    #[test]
    fn conjugate_update() {
        let mut ts = BetaThompson::uniform(2).unwrap();
        ts.observe(0, 1.0).unwrap();
        assert_eq!(ts.posterior(0), (2.0, 1.0));
        ts.observe(0, 0.0).unwrap();
        assert_eq!(ts.posterior(0), (2.0, 2.0));
        assert_eq!(ts.posterior(1), (1.0, 1.0));
        assert!(matches!(ts.observe(1, 0.5), Err(Error::InvalidInput(_))));
    }

    fn two_point(mu_star: f64, delta: f64) -> FinitePosterior {
        let atoms = PriorSpec::TwoPointPermutation { mu_star, delta }.finite_atoms().unwrap();
        FinitePosterior::new(&atoms).unwrap()
    }

    #[test]
    fn two_point_prior_without_data_is_fair() {
        let post = two_point(0.0, 1.0);
        assert_eq!(post.arm_distribution().unwrap(), vec![0.5, 0.5]);
        let mut rng = RngStream::new(3, 0);
        let n = 100_000;
        let first = (0..n).filter(|_| post.select(&mut rng).unwrap() == 0).count();
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn two_point_posterior_ratio() {
        let mut post = two_point(0.0, 1.0);
        post.observe(0, 0.0).unwrap();
        post.observe(1, -1.0).unwrap();
        let lm = post.log_mass();
        assert!((lm[1] - lm[0] - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn posterior_is_order_independent() {
        let data = [(0, 0.3), (1, -1.2), (0, 2.5), (1, 0.1), (0, -0.7)];
        let mut a = two_point(0.5, 0.8);
        let mut b = two_point(0.5, 0.8);
        for &(arm, x) in &data {
            a.observe(arm, x).unwrap();
        }
        for &(arm, x) in data.iter().rev() {
            b.observe(arm, x).unwrap();
        }
        for (x, y) in a.log_mass().iter().zip(b.log_mass()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn impossible_bernoulli_outcomes() {
        let atoms = vec![
            (BanditInstance::bernoulli(vec![1.0, 0.0]).unwrap(), 0.5),
            (BanditInstance::bernoulli(vec![0.0, 1.0]).unwrap(), 0.5),
        ];
        let mut post = FinitePosterior::new(&atoms).unwrap();
        post.observe(0, 1.0).unwrap();
        assert_eq!(post.log_mass()[1], f64::NEG_INFINITY);
        assert_eq!(post.arm_distribution().unwrap(), vec![1.0, 0.0]);
        assert_eq!(post.observe(1, 1.0), Err(Error::DegeneratePosterior));
    }
}
