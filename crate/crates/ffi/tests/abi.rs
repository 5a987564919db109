use std::ffi::{CStr, CString};
use std::ptr;

use tsbandit_ffi::*;

const CONFIG: &str = r#"experiment_id = "ffi"
policy = "bpr2"
environment = "two-point"
mu_star = 0.0
delta = 0.5
horizon = 300
episodes = 16
seed = 3
checkpoints = [10, 300]
"#;

fn last_error() -> String {
    let p = tsb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn experiment(text: &str) -> *mut TsbExperiment {
    let text = CString::new(text).unwrap();
    let mut exp = ptr::null_mut();
    let status = unsafe { tsb_experiment_from_toml(text.as_ptr(), &mut exp) };
    assert_eq!(status, TsbStatus::Ok);
    exp
}

#[test]
fn bounds_through_the_abi() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(tsb_thm1_bound(2000, 10, &mut v), TsbStatus::Ok);
        assert!((v - 14.0 * 20000f64.sqrt()).abs() < 1e-9);
        assert_eq!(tsb_thm2_bound(0.2, &mut v), TsbStatus::Ok);
        assert!((v - 2890.2).abs() < 1e-9);
        assert_eq!(tsb_minimax_lower_bound(100, 4, &mut v), TsbStatus::Ok);
        assert!((v - 1.0).abs() < 1e-15);
        let gaps = [0.0, 0.5];
        assert_eq!(tsb_thm3_bound(gaps.as_ptr(), 2, 0.5, &mut v), TsbStatus::Ok);
        assert!((v - 160.5).abs() < 1e-12);
        assert_eq!(tsb_thm3_bound(ptr::null(), 0, 0.5, &mut v), TsbStatus::Ok);
        assert_eq!(v, 0.0);

        assert_eq!(tsb_thm2_bound(-1.0, &mut v), TsbStatus::InvalidArgument);
        assert!(last_error().contains("delta"));
        assert_eq!(tsb_thm1_bound(10, 2, ptr::null_mut()), TsbStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(tsb_thm3_bound(ptr::null(), 2, 0.5, &mut v), TsbStatus::NullPointer);
    }
}

#[test]
fn numerics_through_the_abi() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(tsb_log_trunc_gauss_integral(0.0, 0.0, 1, &mut v), TsbStatus::Ok);
        assert!((v - ((3.0 * std::f64::consts::PI).sqrt() / 2.0).ln()).abs() < 1e-14);
        assert_eq!(tsb_log_trunc_gauss_integral(0.0, 0.0, 0, &mut v), TsbStatus::InvalidArgument);

        let lw = [0.0, 2f64.ln(), f64::NEG_INFINITY];
        let mut p = [0.0; 3];
        assert_eq!(tsb_normalize_log_weights(lw.as_ptr(), 3, p.as_mut_ptr()), TsbStatus::Ok);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15 && p[2] == 0.0);
        let dead = [f64::NEG_INFINITY; 2];
        assert_eq!(tsb_normalize_log_weights(dead.as_ptr(), 2, p.as_mut_ptr()), TsbStatus::RuntimeError);
    }
}

#[test]
fn experiment_run_matches_library() {
    let exp = experiment(CONFIG);
    unsafe {
        let mut arms = 0;
        assert_eq!(tsb_experiment_arms(exp, &mut arms), TsbStatus::Ok);
        assert_eq!(arms, 2);

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(tsb_experiment_run(exp, 1, &mut a), TsbStatus::Ok);
        assert_eq!(tsb_experiment_run(exp, 0, &mut b), TsbStatus::Ok);

        let mut len = 0;
        assert_eq!(tsb_summary_len(a, &mut len), TsbStatus::Ok);
        assert_eq!(len, 2);
        let mut c = TsbCheckpoint::default();
        assert_eq!(tsb_summary_checkpoint(a, 1, &mut c), TsbStatus::Ok);
        assert_eq!(c.t, 300);
        assert!(c.mean >= 0.0 && (c.ci95 - 1.96 * c.std_error).abs() < 1e-12);
        assert_eq!(tsb_summary_checkpoint(a, 2, &mut c), TsbStatus::InvalidArgument);

        let (mut csv_a, mut csv_b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(tsb_summary_to_csv(a, &mut csv_a), TsbStatus::Ok);
        assert_eq!(tsb_summary_to_csv(b, &mut csv_b), TsbStatus::Ok);
        let text_a = CStr::from_ptr(csv_a).to_str().unwrap().to_string();
        assert_eq!(text_a, CStr::from_ptr(csv_b).to_str().unwrap());
        assert!(text_a.starts_with("experiment_id,policy,"));
        assert_eq!(text_a.lines().count(), 3);

        let file = tsbandit::cli::config::ConfigFile::parse(CONFIG).unwrap();
        let summary = tsbandit::simulation::estimate_regret(&file.to_experiment().unwrap(), Some(2)).unwrap();
        let expected = tsbandit::cli::output::to_csv_string(
            &tsbandit::cli::output::OutputRecord::from_summary(&summary),
        );
        assert_eq!(text_a, expected);

        assert_eq!(tsb_experiment_set_seed(exp, 4), TsbStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(tsb_experiment_run(exp, 2, &mut d), TsbStatus::Ok);
        let mut csv_d = ptr::null_mut();
        tsb_summary_to_csv(d, &mut csv_d);
        assert_ne!(CStr::from_ptr(csv_d).to_str().unwrap(), text_a);

        for s in [csv_a, csv_b, csv_d] {
            tsb_string_free(s);
        }
        for s in [a, b, d] {
            tsb_summary_free(s);
        }
        tsb_experiment_free(exp);
        tsb_summary_free(ptr::null_mut());
        tsb_experiment_free(ptr::null_mut());
    }
}

#[test]
fn config_errors_are_reported() {
    let text = CString::new(CONFIG.replace("horizon = 300\n", "")).unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(tsb_experiment_from_toml(text.as_ptr(), &mut exp), TsbStatus::ConfigError);
        assert!(exp.is_null());
        assert!(last_error().contains("horizon"));
        assert_eq!(tsb_experiment_from_toml(ptr::null(), &mut exp), TsbStatus::NullPointer);
    }
}

#[test]
fn policy_driven_by_caller() {
    let exp = experiment(CONFIG);
    unsafe {
        let mut policy = ptr::null_mut();
        assert_eq!(tsb_policy_new(exp, 0, &mut policy), TsbStatus::Ok);
        // The two-arm policy opens with arm 0 then arm 1.
        for (expected, reward) in [(0usize, 0.1), (1, -0.4)] {
            let mut arm = 99;
            assert_eq!(tsb_policy_select(policy, &mut arm), TsbStatus::Ok);
            assert_eq!(arm, expected);
            assert_eq!(tsb_policy_observe(policy, arm, reward), TsbStatus::Ok);
        }
        for _ in 0..50 {
            let mut arm = 0;
            assert_eq!(tsb_policy_select(policy, &mut arm), TsbStatus::Ok);
            let reward = if arm == 0 { 0.0 } else { -0.5 };
            assert_eq!(tsb_policy_observe(policy, arm, reward), TsbStatus::Ok);
        }
        let (mut p0, mut p1) = (0, 0);
        assert_eq!(tsb_policy_pulls(policy, 0, &mut p0), TsbStatus::Ok);
        assert_eq!(tsb_policy_pulls(policy, 1, &mut p1), TsbStatus::Ok);
        assert_eq!(p0 + p1, 52);
        assert!(p0 > p1);
        assert_eq!(tsb_policy_observe(policy, 5, 0.0), TsbStatus::InvalidArgument);
        assert_eq!(tsb_policy_pulls(policy, 2, &mut p0), TsbStatus::InvalidArgument);
        tsb_policy_free(policy);
        tsb_experiment_free(exp);
    }
}
