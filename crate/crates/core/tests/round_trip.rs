use fractrunc::lab::{run_sweep, rows_to_csv};
use fractrunc::rayleigh::{log_grid, minimize, DiscreteProfile, OptimizerConfig, OptimizerResult};
use fractrunc::truncation::{find_theta_bar, truncated_family};
use fractrunc::{at_profile, Error, ExperimentPlan, Params, Profile, SweepMode};

fn canonical() -> Params {
    Params::new(1, 0.3, 2.0, 0.0).unwrap()
}

#[test]
fn plan_json_round_trip() {
    let mut plan = ExperimentPlan::standard(canonical(), vec![1.2, 1.6]);
    plan.sweep_mode = SweepMode::EpsEqualsDeltaPowBeta { beta: 2.0 };
    let back = ExperimentPlan::from_json(&plan.to_json().unwrap()).unwrap();
    assert_eq!(plan, back);
}

#[test]
fn plan_with_inconsistent_r_is_rejected() {
    let text = r#"{"params": {"n": 1, "s": 0.3, "p": 2, "alpha": 0, "r": 4},
        "q_list": [2], "sweep_mode": {"mode": "fix_delta_sweep_eps"}, "eps_values": [0.1]}"#;
    assert!(matches!(ExperimentPlan::<f64>::from_json(text), Err(Error::InvalidConfig(_))));
}

#[test]
fn truncated_profile_json_round_trip() {
    let base = at_profile(canonical());
    let (_, _, v) = truncated_family(&base, find_theta_bar(&base).unwrap(), 0.05, 1.0).unwrap();
    let back = Profile::from_json(&v.to_json().unwrap()).unwrap();
    assert_eq!(v, back);
    for rho in [0.0, 0.3, 1.0, 2.5, 7.0, 9.0] {
        assert_eq!(v.evaluate(rho), back.evaluate(rho));
    }
}

#[test]
fn optimizer_result_json_round_trip() {
    let init = DiscreteProfile::hat(canonical(), 1.0, log_grid(1e-3, 1e4, 60)).unwrap();
    let cfg = OptimizerConfig { max_iters: 5, ..OptimizerConfig::default() };
    let res = minimize(&init, &cfg).unwrap();
    let text = serde_json::to_string(&res).unwrap();
    assert!(text.contains("\"S_est\""));
    let back: OptimizerResult<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(res, back);
    assert_eq!(res.history_csv().lines().count(), res.quotient_history.len() + 1);
}

#[test]
fn sweep_csv_is_reproducible() {
    let mut plan = ExperimentPlan::standard(canonical(), vec![2.0]);
    plan.eps_values = vec![0.5, 0.25, 0.125];
    plan.deficits = false;
    let a = rows_to_csv(&run_sweep(&plan).unwrap().rows).unwrap();
    let b = rows_to_csv(&run_sweep(&plan).unwrap().rows).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("eps,delta,q,seminorm,err,converged,deficit1,deficit2,besov_sigma_t,gagliardo_s_t"));
}

#[test]
fn generic_scalar_runs_in_single_precision() {
    let params = fractrunc::FractionalParams::<f32>::new(1, 0.3, 2.0, 0.0).unwrap();
    let u = at_profile(params);
    let theta = find_theta_bar(&u).unwrap();
    assert!((theta - 63f32.sqrt()).abs() < 1e-2);
    let v = fractrunc::seminorm::hardy_norm(&u, params.r(), 0.0, &Default::default()).unwrap();
    assert!((v.integral - std::f32::consts::PI).abs() < 1e-3);
}
