//! C ABI for `tsbandit`.
//!
//! Every fallible function returns a [`TsbStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`tsb_last_error_message`]. Objects are opaque handles created by
//! `*_new`/`*_from_*` functions and released by the matching `*_free`.
//! Panics never cross the boundary; they are reported as `TSB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tsbandit::bounds;
use tsbandit::cli::config::ConfigFile;
use tsbandit::cli::output::{to_csv_string, OutputRecord};
use tsbandit::environments::{sample_instance, RngStream};
use tsbandit::numerics;
use tsbandit::policies::Policy;
use tsbandit::simulation::{estimate_regret, Environment, ExperimentConfig, RegretSummary};
use tsbandit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsbStatus {
    Ok = 0,
    /// An argument is outside the function's domain.
    InvalidArgument = 1,
    /// The experiment configuration is malformed or inconsistent.
    ConfigError = 2,
    /// A simulation or numerical routine failed.
    RuntimeError = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// An internal panic was caught.
    Panic = 5,
}

/// An experiment parsed from a configuration file.
pub struct TsbExperiment {
    config: ExperimentConfig,
}

/// Regret estimates of a finished experiment.
pub struct TsbSummary {
    summary: RegretSummary,
}

/// A single policy instance that the caller drives round by round.
pub struct TsbPolicy {
    policy: Box<dyn Policy>,
    rng: RngStream,
}

/// One checkpoint of a [`TsbSummary`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TsbCheckpoint {
    pub t: u64,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (TsbStatus, String);

fn status_of(e: &Error) -> TsbStatus {
    match e {
        Error::Config(_) => TsbStatus::ConfigError,
        Error::InvalidInput(_) | Error::Domain(_) | Error::Index { .. } | Error::Precondition(_) => {
            TsbStatus::InvalidArgument
        }
        Error::Episode { source, .. } if matches!(**source, Error::Config(_)) => TsbStatus::ConfigError,
        _ => TsbStatus::RuntimeError,
    }
}

fn lib_err(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> Failure {
    (TsbStatus::NullPointer, format!("`{name}` is null"))
}

/// Runs `body`, turning errors and panics into a status and a stored message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TsbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TsbStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            TsbStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `handle` must be null or a live pointer produced by this library.
unsafe fn borrow<'a, T>(handle: *const T, name: &str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failure on this thread, or null if there was none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tsb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Prior-free Bayesian regret bound `14 sqrt(n K)`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn tsb_thm1_bound(n: u64, k: u64, out: *mut f64) -> TsbStatus {
    guard(|| write_out(out, bounds::thm1_bound(n, k).map_err(lib_err)?, "out"))
}

/// Minimax lower bound `sqrt(n K) / 20`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn tsb_minimax_lower_bound(n: u64, k: u64, out: *mut f64) -> TsbStatus {
    guard(|| write_out(out, bounds::minimax_lower_bound(n, k).map_err(lib_err)?, "out"))
}

/// Two-armed known-gap bound `delta + 578 / delta`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn tsb_thm2_bound(delta: f64, out: *mut f64) -> TsbStatus {
    guard(|| write_out(out, bounds::thm2_bound(delta).map_err(lib_err)?, "out"))
}

/// `K`-armed bound for `len` gaps and minimum gap `epsilon`.
///
/// # Safety
/// `gaps` must point to `len` doubles (or be null when `len` is 0); `out`
/// must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn tsb_thm3_bound(gaps: *const f64, len: usize, epsilon: f64, out: *mut f64) -> TsbStatus {
    guard(|| {
        let gaps = match (gaps.is_null(), len) {
            (_, 0) => &[][..],
            (true, _) => return Err(null("gaps")),
            (false, _) => std::slice::from_raw_parts(gaps, len),
        };
        write_out(out, bounds::thm3_bound(gaps, epsilon).map_err(lib_err)?, "out")
    })
}

/// `log int_{-inf}^{upper} exp(-(samples/3)(center - v)^2) dv`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn tsb_log_trunc_gauss_integral(
    center: f64,
    upper: f64,
    samples: u64,
    out: *mut f64,
) -> TsbStatus {
    guard(|| {
        let v = numerics::log_trunc_gauss_integral(center, upper, samples).map_err(lib_err)?;
        write_out(out, v, "out")
    })
}

/// Normalizes `len` log-weights into probabilities written to `probs`.
///
/// # Safety
/// `log_weights` must point to `len` doubles and `probs` must be valid for
/// writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tsb_normalize_log_weights(
    log_weights: *const f64,
    len: usize,
    probs: *mut f64,
) -> TsbStatus {
    guard(|| {
        if log_weights.is_null() {
            return Err(null("log_weights"));
        }
        if probs.is_null() {
            return Err(null("probs"));
        }
        let lw = std::slice::from_raw_parts(log_weights, len);
        let p = numerics::normalize(lw).map_err(lib_err)?;
        ptr::copy_nonoverlapping(p.as_ptr(), probs, len);
        Ok(())
    })
}

/// Parses an experiment from configuration text (the CLI's TOML format).
///
/// # Safety
/// `config_text` must be a NUL-terminated UTF-8 string; `out` must be valid
/// for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn tsb_experiment_from_toml(
    config_text: *const c_char,
    out: *mut *mut TsbExperiment,
) -> TsbStatus {
    guard(|| {
        if config_text.is_null() {
            return Err(null("config_text"));
        }
        let text = CStr::from_ptr(config_text)
            .to_str()
            .map_err(|e| (TsbStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let config = ConfigFile::parse(text)
            .and_then(|f| f.to_experiment())
            .map_err(|e| (TsbStatus::ConfigError, e.0))?;
        write_out(out, Box::into_raw(Box::new(TsbExperiment { config })), "out")
    })
}

/// Overrides the master seed of an experiment.
///
/// # Safety
/// `experiment` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsb_experiment_set_seed(experiment: *mut TsbExperiment, seed: u64) -> TsbStatus {
    guard(|| {
        let exp = experiment.as_mut().ok_or_else(|| null("experiment"))?;
        exp.config.master_seed = seed;
        Ok(())
    })
}

/// Number of arms of the experiment's environment.
///
/// # Safety
/// `experiment` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_experiment_arms(experiment: *const TsbExperiment, out: *mut usize) -> TsbStatus {
    guard(|| write_out(out, borrow(experiment, "experiment")?.config.environment.arms(), "out"))
}

/// Runs every episode; `workers == 0` uses all cores. The result does not
/// depend on `workers`.
///
/// # Safety
/// `experiment` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_experiment_run(
    experiment: *const TsbExperiment,
    workers: usize,
    out: *mut *mut TsbSummary,
) -> TsbStatus {
    guard(|| {
        let exp = borrow(experiment, "experiment")?;
        let workers = (workers > 0).then_some(workers);
        let summary = estimate_regret(&exp.config, workers).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(TsbSummary { summary })), "out")
    })
}

/// # Safety
/// `experiment` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsb_experiment_free(experiment: *mut TsbExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Number of checkpoints in the summary.
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_summary_len(summary: *const TsbSummary, out: *mut usize) -> TsbStatus {
    guard(|| write_out(out, borrow(summary, "summary")?.summary.checkpoints.len(), "out"))
}

/// Copies checkpoint `index` into `out`.
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_summary_checkpoint(
    summary: *const TsbSummary,
    index: usize,
    out: *mut TsbCheckpoint,
) -> TsbStatus {
    guard(|| {
        let s = &borrow(summary, "summary")?.summary;
        let c = s.checkpoints.get(index).ok_or_else(|| {
            (
                TsbStatus::InvalidArgument,
                format!("checkpoint {index} out of range for {}", s.checkpoints.len()),
            )
        })?;
        let value = TsbCheckpoint {
            t: c.t as u64,
            mean: c.mean,
            std_error: c.stderr,
            ci95: c.ci95,
        };
        write_out(out, value, "out")
    })
}

/// The summary as CSV text, identical to the CLI's output. Release the string
/// with [`tsb_string_free`].
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_summary_to_csv(summary: *const TsbSummary, out: *mut *mut c_char) -> TsbStatus {
    guard(|| {
        let s = &borrow(summary, "summary")?.summary;
        let csv = to_csv_string(&OutputRecord::from_summary(s));
        let c = CString::new(csv).map_err(|e| (TsbStatus::RuntimeError, e.to_string()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `summary` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsb_summary_free(summary: *mut TsbSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates the experiment's policy for episode `stream_id`. Under a prior the
/// instance is drawn from that stream first, exactly as the simulator does,
/// so the policy's own draws line up with episode `stream_id`.
///
/// # Safety
/// `experiment` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_policy_new(
    experiment: *const TsbExperiment,
    stream_id: u64,
    out: *mut *mut TsbPolicy,
) -> TsbStatus {
    guard(|| {
        let cfg = &borrow(experiment, "experiment")?.config;
        let mut rng = RngStream::new(cfg.master_seed, stream_id);
        let instance = match &cfg.environment {
            Environment::Fixed(inst) => inst.clone(),
            Environment::Prior(prior) => sample_instance(prior, &mut rng).map_err(lib_err)?,
        };
        let policy = cfg.policy.build(&instance, cfg.horizon).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(TsbPolicy { policy, rng })), "out")
    })
}

/// Chooses the arm (zero-based) for the current round.
///
/// # Safety
/// `policy` must be a live handle; `arm` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_policy_select(policy: *mut TsbPolicy, arm: *mut usize) -> TsbStatus {
    guard(|| {
        let p = policy.as_mut().ok_or_else(|| null("policy"))?;
        let chosen = p.policy.select_arm(&mut p.rng).map_err(lib_err)?;
        write_out(arm, chosen, "arm")
    })
}

/// Records the reward of `arm` and advances to the next round.
///
/// # Safety
/// `policy` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsb_policy_observe(policy: *mut TsbPolicy, arm: usize, reward: f64) -> TsbStatus {
    guard(|| {
        let p = policy.as_mut().ok_or_else(|| null("policy"))?;
        p.policy.observe(arm, reward).map_err(lib_err)
    })
}

/// Pull count of `arm` so far.
///
/// # Safety
/// `policy` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tsb_policy_pulls(policy: *const TsbPolicy, arm: usize, out: *mut u64) -> TsbStatus {
    guard(|| {
        let state = borrow(policy, "policy")?.policy.state();
        let arms = state.arms();
        let stats = state
            .per_arm
            .get(arm)
            .ok_or_else(|| lib_err(Error::Index { arm, arms }))?;
        write_out(out, stats.pulls, "out")
    })
}

/// # Safety
/// `policy` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsb_policy_free(policy: *mut TsbPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}
