use fractrunc::rayleigh::{log_grid, minimize, profile_quotient, random_test_profiles, DiscreteProfile, OptimizerConfig};
use fractrunc::{at_profile, Params};

fn canonical() -> Params {
    Params::new(1, 0.3, 2.0, 0.0).unwrap()
}

fn grid() -> Vec<f64> {
    log_grid(1e-4, 1e7, 353)
}

#[test]
fn history_is_non_increasing() {
    let res = minimize(&DiscreteProfile::hat(canonical(), 1.0, grid()).unwrap(), &OptimizerConfig::default()).unwrap();
    assert!(res.converged);
    assert!(res.quotient_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(res.quotient_history.last().unwrap() < &res.quotient_history[0]);
}

#[test]
fn scaling_the_initial_profile_changes_nothing() {
    let cfg = OptimizerConfig::default();
    let init = DiscreteProfile::hat(canonical(), 1.0, grid()).unwrap();
    let a = minimize(&init, &cfg).unwrap();
    let b = minimize(&init.scaled(10.0), &cfg).unwrap();
    for (x, y) in a.minimizer.values.iter().zip(&b.minimizer.values) {
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12), "{x} vs {y}");
    }
}

#[test]
fn at_start_barely_moves_and_inits_agree() {
    let cfg = OptimizerConfig::default();
    let from_at = minimize(&DiscreteProfile::from_profile(&at_profile(canonical()), grid()).unwrap(), &cfg).unwrap();
    let first = from_at.quotient_history[0];
    let last = *from_at.quotient_history.last().unwrap();
    assert!((first - last) / first < 0.02, "{first} -> {last}");
    let from_hat = minimize(&DiscreteProfile::hat(canonical(), 0.3, grid()).unwrap(), &cfg).unwrap();
    assert!((from_at.s_est / from_hat.s_est - 1.0).abs() < 0.02);
}

#[test]
fn random_profiles_stay_above_the_estimate() {
    let cfg = OptimizerConfig::default();
    let res = minimize(&DiscreteProfile::hat(canonical(), 1.0, grid()).unwrap(), &cfg).unwrap();
    for u in random_test_profiles(canonical(), 8, 11).unwrap() {
        let q = profile_quotient(&u, &cfg.quad).unwrap();
        assert!(q >= res.s_est * 0.98, "{q} < {}", res.s_est);
    }
}

#[test]
fn other_exponent_runs_and_reports_a_finite_quotient() {
    let params = Params::new(1, 0.3, 1.8, 0.1).unwrap();
    let res = minimize(&DiscreteProfile::hat(params, 1.0, log_grid(1e-3, 1e5, 200)).unwrap(), &OptimizerConfig::default()).unwrap();
    assert!(res.s_est.is_finite() && res.s_est > 0.0);
    let at = profile_quotient(&at_profile(params), &OptimizerConfig::<f64>::default().quad).unwrap();
    assert!(at.is_finite());
}
