//! Experiment configuration files.
//!
//! One experiment per TOML file, with flat keys:
//!
//! ```toml
//! experiment_id = "two-arm-0.2"
//! policy = "bpr2"            # ts-beta | ts-finite | bpr2 | bprk | moss | ucb | oracle
//! environment = "two-point"  # instance | product-beta | two-point | bpr-uniform-gap | finite
//! mu_star = 0.0
//! delta = 0.2
//! horizon = 100000
//! episodes = 200
//! seed = 7
//! checkpoints = [1000, 10000, 50000, 100000]   # optional
//! ```
//!
//! Environment keys: `instance` takes `means` and `family` (`gaussian`, the
//! default, or `bernoulli`); `product-beta` takes `alpha`/`beta` or `arms`
//! (uniform priors); `two-point` takes `mu_star`, `delta`; `bpr-uniform-gap`
//! takes `mu_star`, `epsilon`, `arms` and optionally `gap_max`; `finite` takes
//! `atoms` (one list of means per atom), `probabilities` and `family`.
//!
//! Policy keys: `ts-beta` uses `alpha`/`beta` (default all ones); `ts-finite`
//! uses `atoms`/`probabilities` when given and the environment's own finite
//! support otherwise; `bpr2` needs `mu_star`, `delta`; `bprk` needs `mu_star`,
//! `epsilon`.

use std::path::Path;

use serde::Deserialize;

use crate::model::{BanditInstance, PriorSpec, RewardFamily};
use crate::policies::PolicySpec;
use crate::simulation::{default_checkpoints, Environment, ExperimentConfig};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment_id: String,
    pub policy: String,
    pub environment: String,
    pub family: Option<String>,
    pub means: Option<Vec<f64>>,
    pub mu_star: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub gap_max: Option<f64>,
    pub arms: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub atoms: Option<Vec<Vec<f64>>>,
    pub probabilities: Option<Vec<f64>>,
    pub horizon: usize,
    pub episodes: usize,
    pub seed: u64,
    pub checkpoints: Option<Vec<usize>>,
}

/// A configuration problem, reported with the offending field where known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

fn missing(field: &str, what: &str) -> ConfigError {
    ConfigError(format!("missing field `{field}` (required by {what})"))
}

fn require<T: Clone>(value: &Option<T>, field: &str, what: &str) -> Res<T> {
    value.clone().ok_or_else(|| missing(field, what))
}

fn family(name: Option<&str>) -> Res<RewardFamily> {
    match name.unwrap_or("gaussian") {
        "gaussian" => Ok(RewardFamily::GaussianUnitVariance),
        "bernoulli" => Ok(RewardFamily::Bernoulli),
        other => Err(ConfigError(format!(
            "field `family`: unknown reward family {other:?} (expected gaussian or bernoulli)"
        ))),
    }
}

fn atoms(file: &ConfigFile, what: &str) -> Res<Vec<(BanditInstance, f64)>> {
    let means = require(&file.atoms, "atoms", what)?;
    let probs = require(&file.probabilities, "probabilities", what)?;
    if means.len() != probs.len() {
        return Err(ConfigError(format!(
            "field `probabilities`: {} probabilities for {} atoms",
            probs.len(),
            means.len()
        )));
    }
    let fam = family(file.family.as_deref())?;
    means
        .into_iter()
        .zip(probs)
        .map(|(m, p)| {
            BanditInstance::new(m, fam)
                .map(|inst| (inst, p))
                .map_err(|e| ConfigError(format!("field `atoms`: {e}")))
        })
        .collect()
}

impl ConfigFile {
    pub fn parse(text: &str) -> Res<Self> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    fn environment(&self) -> Res<Environment> {
        let what = format!("environment {:?}", self.environment);
        let what = what.as_str();
        let env = match self.environment.as_str() {
            "instance" => {
                let means = require(&self.means, "means", what)?;
                let fam = family(self.family.as_deref())?;
                Environment::Fixed(
                    BanditInstance::new(means, fam)
                        .map_err(|e| ConfigError(format!("field `means`: {e}")))?,
                )
            }
            "product-beta" => {
                let (alpha, beta) = match (&self.alpha, &self.beta, self.arms) {
                    (Some(a), Some(b), _) => (a.clone(), b.clone()),
                    (None, None, Some(k)) => (vec![1.0; k], vec![1.0; k]),
                    (None, None, None) => return Err(missing("arms", what)),
                    _ => {
                        return Err(ConfigError(
                            "fields `alpha` and `beta` must be given together".into(),
                        ))
                    }
                };
                Environment::Prior(PriorSpec::ProductBeta { alpha, beta })
            }
            "two-point" => Environment::Prior(PriorSpec::TwoPointPermutation {
                mu_star: require(&self.mu_star, "mu_star", what)?,
                delta: require(&self.delta, "delta", what)?,
            }),
            "bpr-uniform-gap" => {
                let mu_star = require(&self.mu_star, "mu_star", what)?;
                let epsilon = require(&self.epsilon, "epsilon", what)?;
                let arms = require(&self.arms, "arms", what)?;
                let mut prior = PriorSpec::bpr_uniform_gap(mu_star, epsilon, arms);
                if let (Some(g), PriorSpec::BprUniformGap { gap_max, .. }) = (self.gap_max, &mut prior) {
                    *gap_max = g;
                }
                Environment::Prior(prior)
            }
            "finite" => Environment::Prior(PriorSpec::FiniteSupport { atoms: atoms(self, what)? }),
            other => {
                return Err(ConfigError(format!(
                    "field `environment`: unknown environment {other:?}"
                )))
            }
        };
        if let Environment::Prior(prior) = &env {
            prior
                .validate()
                .map_err(|e| ConfigError(format!("field `environment`: {e}")))?;
        }
        Ok(env)
    }

    fn policy(&self, env: &Environment) -> Res<PolicySpec> {
        let what = format!("policy {:?}", self.policy);
        let what = what.as_str();
        Ok(match self.policy.as_str() {
            "ts-beta" => {
                let k = env.arms();
                PolicySpec::ThompsonBeta {
                    alpha: self.alpha.clone().unwrap_or_else(|| vec![1.0; k]),
                    beta: self.beta.clone().unwrap_or_else(|| vec![1.0; k]),
                }
            }
            "ts-finite" => {
                let atoms = if self.atoms.is_some() {
                    atoms(self, what)?
                } else {
                    match env {
                        Environment::Prior(prior) => prior.finite_atoms().ok_or_else(|| {
                            ConfigError(format!(
                                "missing field `atoms` (required by {what} unless the environment has finite support)"
                            ))
                        })?,
                        Environment::Fixed(_) => return Err(missing("atoms", what)),
                    }
                };
                PolicySpec::ThompsonFinite { atoms }
            }
            "bpr2" => PolicySpec::TwoArmBpr {
                mu_star: require(&self.mu_star, "mu_star", what)?,
                delta: require(&self.delta, "delta", what)?,
            },
            "bprk" => PolicySpec::Bpr {
                mu_star: require(&self.mu_star, "mu_star", what)?,
                epsilon: require(&self.epsilon, "epsilon", what)?,
            },
            "moss" => PolicySpec::Moss,
            "ucb" => PolicySpec::Ucb,
            "oracle" => PolicySpec::Oracle,
            other => return Err(ConfigError(format!("field `policy`: unknown policy {other:?}"))),
        })
    }

    /// Resolves the file into a validated experiment.
    pub fn to_experiment(&self) -> Res<ExperimentConfig> {
        let environment = self.environment()?;
        let policy = self.policy(&environment)?;
        let config = ExperimentConfig {
            experiment_id: self.experiment_id.clone(),
            policy,
            environment,
            horizon: self.horizon,
            episodes: self.episodes,
            master_seed: self.seed,
            checkpoints: self
                .checkpoints
                .clone()
                .unwrap_or_else(|| default_checkpoints(self.horizon)),
        };
        config.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(config)
    }
}
