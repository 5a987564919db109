//! Posterior-weight policies for the setting where the best mean is known,
//! together with a lower bound on (or the exact value of) the gap.

use super::{Policy, PolicyState};
use crate::environments::RngStream;
use crate::error::{Error, Result};
use crate::model::ArmStatistics;
use crate::numerics::{log_trunc_gauss_integral, normalize, sample_index};

/// `log[p_t(2) / p_t(1)]` for the two-arm policy, written through the
/// deviations `gamma_1 = mu* - mean_1` and `gamma_2 = mean_2 - (mu* - delta)`:
///
/// `-(T1 + T2) delta^2 / 2 + T1 delta gamma_1 + T2 delta gamma_2`.
///
/// Arms without samples contribute nothing.
pub fn two_point_log_ratio(stats: [&ArmStatistics; 2], mu_star: f64, delta: f64) -> f64 {
    let low = mu_star - delta;
    let (t1, t2) = (stats[0].pulls as f64, stats[1].pulls as f64);
    let gamma1 = stats[0].mean().map_or(0.0, |m| mu_star - m);
    let gamma2 = stats[1].mean().map_or(0.0, |m| m - low);
    -(t1 + t2) * delta * delta / 2.0 + t1 * delta * gamma1 + t2 * delta * gamma2
}

/// `(p_t(1), p_t(2))` of the two-arm policy: the Gaussian posterior of the
/// two instances `(mu*, mu* - delta)` and `(mu* - delta, mu*)`.
pub fn bpr2_weights(stats: [&ArmStatistics; 2], mu_star: f64, delta: f64) -> Result<[f64; 2]> {
    let low = mu_star - delta;
    let log_first = -0.5 * (stats[0].sq_dist_sum(mu_star) + stats[1].sq_dist_sum(low));
    let log_second = -0.5 * (stats[0].sq_dist_sum(low) + stats[1].sq_dist_sum(mu_star));
    let p = normalize(&[log_first, log_second])?;
    Ok([p[0], p[1]])
}

/// Unnormalized log-weight of one arm for the `K`-arm policy:
///
/// `-(1/3) sum_s (x_s - mu*)^2 - log int_{-inf}^{mu* - eps} exp(-(1/3) sum_s (x_s - v)^2) dv`.
///
/// Completing the square, `sum_s (x_s - v)^2 = T (v - mean)^2 + css`, and the
/// centered sum `css` cancels between numerator and denominator.
fn bprk_log_weight(stats: &ArmStatistics, mu_star: f64, epsilon: f64) -> Result<f64> {
    let mean = stats.mean().ok_or_else(|| {
        Error::Precondition("every arm needs at least one sample before weighting".into())
    })?;
    let t = stats.pulls as f64;
    let log_numerator = -(t / 3.0) * (mean - mu_star) * (mean - mu_star);
    let log_denominator = log_trunc_gauss_integral(mean, mu_star - epsilon, stats.pulls)?;
    Ok(log_numerator - log_denominator)
}

/// Unnormalized log-weights of the `K`-arm policy. Every arm needs `T_i >= 1`.
pub fn bprk_log_weights(stats: &[ArmStatistics], mu_star: f64, epsilon: f64) -> Result<Vec<f64>> {
    stats
        .iter()
        .map(|s| bprk_log_weight(s, mu_star, epsilon))
        .collect()
}

/// Selection probabilities of the `K`-arm policy. Every arm needs `T_i >= 1`.
pub fn bprk_weights(stats: &[ArmStatistics], mu_star: f64, epsilon: f64) -> Result<Vec<f64>> {
    normalize(&bprk_log_weights(stats, mu_star, epsilon)?)
}

/// Two-armed policy with known best mean `mu_star` and gap `delta`.
///
/// Rounds 1 and 2 play arms 1 and 2; afterwards the arm is drawn from
/// [`bpr2_weights`] with a single uniform.
#[derive(Debug, Clone)]
pub struct TwoArmBprPolicy {
    state: PolicyState,
    mu_star: f64,
    delta: f64,
}

impl TwoArmBprPolicy {
    pub fn new(mu_star: f64, delta: f64) -> Result<Self> {
        if !mu_star.is_finite() || !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!(
                "need finite mu_star and delta > 0, got ({mu_star}, {delta})"
            )));
        }
        Ok(Self {
            state: PolicyState::new(2),
            mu_star,
            delta,
        })
    }

    pub fn weights(&self) -> Result<[f64; 2]> {
        let s = &self.state.per_arm;
        bpr2_weights([&s[0], &s[1]], self.mu_star, self.delta)
    }
}

impl Policy for TwoArmBprPolicy {
    fn name(&self) -> &'static str {
        "bpr2"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        if self.state.round <= 2 {
            return Ok(self.state.round - 1);
        }
        let w = self.weights()?;
        Ok(sample_index(&w, rng.uniform()))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// `K`-armed policy with known best mean `mu_star` and minimum gap `epsilon`.
///
/// Rounds `1..=K` play each arm once; afterwards the arm is drawn from
/// [`bprk_weights`] with a single uniform.
#[derive(Debug, Clone)]
pub struct BprPolicy {
    state: PolicyState,
    mu_star: f64,
    epsilon: f64,
}

impl BprPolicy {
    pub fn new(mu_star: f64, epsilon: f64, arms: usize) -> Result<Self> {
        if !mu_star.is_finite() || !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!(
                "need finite mu_star and epsilon > 0, got ({mu_star}, {epsilon})"
            )));
        }
        if arms < 2 {
            return Err(Error::Config(format!("need at least 2 arms, got {arms}")));
        }
        Ok(Self {
            state: PolicyState::new(arms),
            mu_star,
            epsilon,
        })
    }

    pub fn weights(&self) -> Result<Vec<f64>> {
        bprk_weights(&self.state.per_arm, self.mu_star, self.epsilon)
    }
}

impl Policy for BprPolicy {
    fn name(&self) -> &'static str {
        "bprk"
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        if self.state.round <= self.arms() {
            return Ok(self.state.round - 1);
        }
        let w = self.weights()?;
        Ok(sample_index(&w, rng.uniform()))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature;
    use crate::policies::FinitePosterior;
    use crate::model::PriorSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn stats_of(xs: &[f64]) -> ArmStatistics {
        let mut s = ArmStatistics::default();
        for &x in xs {
            s.update(x).unwrap();
        }
        s
    }

    /// `log p(2)/p(1)` straight from the Gaussian likelihood products.
    fn exact_bayes_log_ratio(x1: &[f64], x2: &[f64], mu_star: f64, delta: f64) -> f64 {
        let low = mu_star - delta;
        let ll = |xs: &[f64], mu: f64| xs.iter().map(|x| -0.5 * (x - mu) * (x - mu)).sum::<f64>();
        (ll(x1, low) + ll(x2, mu_star)) - (ll(x1, mu_star) + ll(x2, low))
    }

    #[test]
    fn log_ratio_examples() {
        let empty = ArmStatistics::default();
        assert_eq!(two_point_log_ratio([&empty, &empty], 0.0, 1.0), 0.0);
        let (a, b) = (stats_of(&[0.0]), stats_of(&[-1.0]));
        assert!((two_point_log_ratio([&a, &b], 0.0, 1.0) + 1.0).abs() < 1e-15);
        assert!((exact_bayes_log_ratio(&[0.0], &[-1.0], 0.0, 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_ratio_matches_exact_bayes_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let mu_star: f64 = rng.random_range(-2.0..2.0);
            let delta: f64 = rng.random_range(0.05..2.0);
            let x1: Vec<f64> = (0..rng.random_range(0..40)).map(|_| rng.random_range(-4.0..4.0)).collect();
            let x2: Vec<f64> = (0..rng.random_range(0..40)).map(|_| rng.random_range(-4.0..4.0)).collect();
            let closed = two_point_log_ratio([&stats_of(&x1), &stats_of(&x2)], mu_star, delta);
            let exact = exact_bayes_log_ratio(&x1, &x2, mu_star, delta);
            assert!((closed - exact).abs() < 1e-10, "{closed} vs {exact}");
        }
    }

    #[test]
    fn bpr2_weight_examples() {
        let (a, b) = (stats_of(&[0.0]), stats_of(&[-1.0]));
        let w = bpr2_weights([&a, &b], 0.0, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((w[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((w[1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((w[0] - 0.73106).abs() < 1e-5);

        // Mirrored histories with mirrored roles swap the weights.
        let (c, d) = (stats_of(&[0.4, -0.3]), stats_of(&[1.1]));
        let w1 = bpr2_weights([&c, &d], 0.2, 0.7).unwrap();
        let w2 = bpr2_weights([&d, &c], 0.2, 0.7).unwrap();
        assert!((w1[0] - w2[1]).abs() < 1e-15 && (w1[1] - w2[0]).abs() < 1e-15);
    }

    #[test]
    fn bpr2_bad_pull_probability_decays() {
        let delta = 0.5;
        for t1 in [10u64, 50, 200] {
            let a = stats_of(&vec![0.0; t1 as usize]);
            let b = stats_of(&[-delta]);
            let w = bpr2_weights([&a, &b], 0.0, delta).unwrap();
            // gamma_1 = 0 and arm 2 sits exactly at its mean: the ratio is exp(-(T1+1) delta^2 / 2).
            assert!(w[1] <= (-(t1 as f64) * delta * delta / 2.0).exp());
        }
    }

    #[test]
    fn bpr2_equals_finite_thompson_distribution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let mu_star: f64 = rng.random_range(-1.0..1.0);
            let delta: f64 = rng.random_range(0.1..1.5);
            let atoms = PriorSpec::TwoPointPermutation { mu_star, delta }.finite_atoms().unwrap();
            let mut post = FinitePosterior::new(&atoms).unwrap();
            let mut s = [ArmStatistics::default(); 2];
            for _ in 0..rng.random_range(0..60) {
                let arm = rng.random_range(0..2);
                let x = rng.random_range(-3.0..3.0);
                post.observe(arm, x).unwrap();
                s[arm].update(x).unwrap();
            }
            let w = bpr2_weights([&s[0], &s[1]], mu_star, delta).unwrap();
            let d = post.arm_distribution().unwrap();
            let tv = 0.5 * ((w[0] - d[0]).abs() + (w[1] - d[1]).abs());
            assert!(tv <= 1e-10, "tv={tv}");
        }
    }

    #[test]
    fn bprk_symmetric_case() {
        let s = vec![stats_of(&[0.3]); 5];
        let w = bprk_weights(&s, 0.3, 0.5).unwrap();
        for p in w {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn bprk_requires_samples() {
        let s = vec![stats_of(&[0.3]), ArmStatistics::default()];
        assert!(matches!(bprk_weights(&s, 0.0, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn bprk_far_below_threshold_is_suppressed() {
        let (mu_star, eps) = (0.0, 0.5);
        let low = stats_of(&vec![mu_star - eps - 1.0; 50]);
        let top = stats_of(&vec![mu_star; 50]);
        let w = bprk_weights(&[low, top], mu_star, eps).unwrap();
        assert!(w[0] < 1e-3 * w[1]);
    }

    /// Log-weight of one arm from the raw samples, by quadrature of the
    /// un-completed-square integrand.
    fn raw_log_weight(xs: &[f64], mu_star: f64, eps: f64) -> f64 {
        let upper = mu_star - eps;
        let t = xs.len() as f64;
        let sq = |v: f64| xs.iter().map(|x| (x - v) * (x - v)).sum::<f64>() / 3.0;
        let mean = xs.iter().sum::<f64>() / t;
        let peak = mean.min(upper);
        let shift = sq(peak);
        let lo = peak - 60.0 * (1.5 / t).sqrt();
        let f = |v: f64| (-sq(v) + shift).exp();
        let rough = quadrature(f, lo, upper, 1.0).unwrap();
        let integral = quadrature(f, lo, upper, 1e-13 * rough).unwrap();
        -sq(mu_star) - (integral.ln() - shift)
    }

    #[test]
    fn bprk_matches_quadrature_of_raw_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let (mu_star, eps) = (0.0, 0.5);
            let gen = |rng: &mut rand_chacha::ChaCha8Rng, mean: f64| -> Vec<f64> {
                let t = rng.random_range(1..=100);
                (0..t).map(|_| mean + rng.random_range(-1.7..1.7)).collect()
            };
            let x1 = gen(&mut rng, 0.0);
            let x2 = gen(&mut rng, -0.8);
            let w = bprk_weights(&[stats_of(&x1), stats_of(&x2)], mu_star, eps).unwrap();
            let closed = (w[1] / w[0]).ln();
            let oracle = raw_log_weight(&x2, mu_star, eps) - raw_log_weight(&x1, mu_star, eps);
            assert!((closed - oracle).abs() < 1e-8, "{closed} vs {oracle}");
        }
    }

    #[test]
    fn forced_initial_rounds() {
        let mut rng = RngStream::new(0, 0);
        let mut p = TwoArmBprPolicy::new(0.0, 1.0).unwrap();
        assert_eq!(p.select_arm(&mut rng).unwrap(), 0);
        p.observe(0, 0.1).unwrap();
        assert_eq!(p.select_arm(&mut rng).unwrap(), 1);
        p.observe(1, -0.9).unwrap();

        let mut q = BprPolicy::new(0.0, 0.5, 4).unwrap();
        for t in 0..4 {
            assert_eq!(q.select_arm(&mut rng).unwrap(), t);
            q.observe(t, -0.2).unwrap();
        }
        assert!(q.select_arm(&mut rng).unwrap() < 4);
    }

    proptest! {
        #[test]
        fn bprk_is_shift_invariant(
            xs in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 1..30), 2..6),
            c in -50.0f64..50.0,
            eps in 0.05f64..1.0,
        ) {
            let stats: Vec<ArmStatistics> = xs.iter().map(|x| stats_of(x)).collect();
            let shifted: Vec<ArmStatistics> = xs
                .iter()
                .map(|x| stats_of(&x.iter().map(|v| v + c).collect::<Vec<_>>()))
                .collect();
            let w = bprk_weights(&stats, 0.0, eps).unwrap();
            let ws = bprk_weights(&shifted, c, eps).unwrap();
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for (a, b) in w.iter().zip(&ws) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }

        #[test]
        fn bprk_is_permutation_equivariant(
            xs in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 1..30), 2..6),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let mut perm: Vec<usize> = (0..xs.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let stats: Vec<ArmStatistics> = xs.iter().map(|x| stats_of(x)).collect();
            let permuted: Vec<ArmStatistics> = perm.iter().map(|&j| stats[j]).collect();
            let w = bprk_weights(&stats, 0.0, 0.3).unwrap();
            let wp = bprk_weights(&permuted, 0.0, 0.3).unwrap();
            for (i, &j) in perm.iter().enumerate() {
                prop_assert!((wp[i] - w[j]).abs() < 1e-14);
            }
        }
    }
}
