//! Thompson-Sampling bandit policies and the machinery to evaluate them.
//!
//! The crate covers three things:
//!
//! * policies: Beta-Bernoulli and finite-support Thompson Sampling, the
//!   posterior-weight policies for the known-optimal-mean setting (two arms
//!   with a known gap, and `K` arms with a known minimum gap), MOSS and UCB;
//! * seeded, parallel Monte Carlo estimation of individual and Bayesian
//!   regret whose output does not depend on the number of worker threads;
//! * closed-form regret bounds together with numerical checks of the
//!   integrals and concentration inequalities behind them.
//!
//! The `tsbandit` binary wraps all of it behind a small CLI that writes CSV
//! tables and SVG regret curves.

pub mod bounds;
pub mod cli;
pub mod environments;
pub mod error;
pub mod model;
pub mod numerics;
pub mod policies;
pub mod simulation;

pub use error::{Error, Result};
pub use model::{ArmStatistics, BanditInstance, GapProfile, PriorSpec, RegretTrace, RewardFamily};
