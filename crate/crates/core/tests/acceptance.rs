//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every tolerance used below is a named constant in this file.

use std::time::{Duration, Instant};

use fractrunc::lab::{
    choose_interpolation_params, interpolation_audit, sigma_bar, threshold_dichotomy, verify_lemma21,
    verify_local_case, verify_nu, verify_st1, Report, SlopeCheck,
};
use fractrunc::rayleigh::{default_test_bumps, el_residual, log_grid, minimize, random_test_profiles, DiscreteProfile, OptimizerConfig};
use fractrunc::scalar::ball_volume;
use fractrunc::seminorm::{besov, brute_force_oracle_with, gagliardo, hardy_norm, BesovOrder};
use fractrunc::truncation::{find_theta_bar, support_check, truncate_by_multiplication, truncated_family};
use fractrunc::{at_profile, ExperimentPlan, Params, Profile, Quadrature};

// criterion 1
const ORACLE_REL_TOL: f64 = 1e-2;
const ORACLE_TIME: Duration = Duration::from_secs(10);
const ORACLE_BASE_CELLS: usize = 4096;
const ORACLE_REFINEMENT: usize = 2;
/// `[hat]_{0.3,q}^q` on the line by mpmath: 1D quadrature in the offset of
/// the exact inner integral.
const HAT_INTEGRALS: [(f64, f64); 3] = [(1.2, 13.951621472778380), (1.6, 9.0182716358332817), (2.0, 6.3394426740653623)];
const HAT_REF_TOL: f64 = 1e-5;
// criterion 2
const ST1_SLOPE_SLACK: f64 = 0.05;
const ST1_STDERR_MULT: f64 = 3.0;
const ST1_SPREAD: f64 = 3.0;
const ST1_TIME: Duration = Duration::from_secs(600);
// criterion 3
const NU_MIN_SLOPE: f64 = 0.10;
const NU_SPREAD: f64 = 10.0;
// criterion 4
const DEFICIT_TOL: f64 = 1e-6;
const D1_MIN_SLOPE: f64 = 0.3;
const D2_MIN_SLOPE: f64 = 0.9;
// criterion 7
const BPQ_SIGMA: f64 = 0.5;
const BPQ_EPS: f64 = 0.01;
// criterion 8
const SIGMA_BAR_TOL: f64 = 1e-12;
const EXPONENT_TOL: f64 = 1e-12;
const AUDIT_SPREAD: f64 = 10.0;
// criterion 9
const LOCAL_SLOPE_TOL: f64 = 0.1;
// criterion 10
/// Sharp constant for `(N, s, p) = (1, 0.3, 2)` from Lieb's closed form,
/// evaluated with mpmath.
const SHARP_QUOTIENT: f64 = 6.6400950850343371;
const QUOTIENT_TOL: f64 = 0.02;
const NORMALIZATION_TOL: f64 = 1e-3;
const EL_TOL: f64 = 0.05;
// criterion 11
const THETA_BAR_TOL: f64 = 1e-2;
const M_MAX: f64 = 2.0;

fn canonical() -> Params {
    Params::new(1, 0.3, 2.0, 0.0).unwrap()
}

fn secondary() -> Params {
    Params::new(2, 0.75, 2.0, 0.5).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn find<'a>(report: &'a Report<f64>, label: &str) -> &'a SlopeCheck<f64> {
    report.checks.iter().find(|c| c.label == label).unwrap_or_else(|| panic!("no check {label}"))
}

fn oracle_equivalence() -> Outcome {
    let params = canonical();
    let cfg = Quadrature::default();
    let base = at_profile(params);
    let theta = find_theta_bar(&base).unwrap();
    let (_, _, truncated) = truncated_family(&base, theta, 0.01, 1.0).unwrap();
    let hat = Profile::hat(params, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut pass = true;
    for (u, half_width) in [(&hat, 1.0001), (&truncated, theta * 1.0001)] {
        for &(q, reference) in &HAT_INTEGRALS {
            let t = Instant::now();
            let engine = gagliardo(u, params.s, q, &cfg).unwrap();
            slowest = slowest.max(t.elapsed());
            let exponents = [q * (1.0 - params.s), 2.0, q * (1.0 - params.s) + 1.0];
            let t = Instant::now();
            let oracle = brute_force_oracle_with(
                |x: f64| u.evaluate(x.abs()),
                half_width,
                params.s,
                q,
                ORACLE_BASE_CELLS,
                ORACLE_REFINEMENT,
                &exponents,
            );
            slowest = slowest.max(t.elapsed());
            let d = rel(engine.value, oracle);
            worst = worst.max(d);
            pass &= engine.converged && d < ORACLE_REL_TOL;
            if std::ptr::eq(u, &hat) {
                pass &= rel(engine.integral, reference) < HAT_REF_TOL;
            }
        }
    }
    pass &= slowest < ORACLE_TIME;
    outcome(pass, format!("max rel diff {worst:.2e}, slowest evaluation {slowest:.2?}"))
}

fn st1() -> Outcome {
    let t = Instant::now();
    let report = verify_st1(&ExperimentPlan::standard(canonical(), vec![1.6, 2.0])).unwrap();
    let elapsed = t.elapsed();
    let mut pass = elapsed < ST1_TIME;
    let mut parts = Vec::new();
    for q in [1.6, 2.0] {
        let c = find(&report, &format!("q={q}"));
        let fit = c.fit.unwrap();
        let theory = 1.0 / q - 0.5;
        let spread = c.ratio_spread.unwrap();
        pass &= (fit.slope - theory).abs() <= ST1_SLOPE_SLACK + ST1_STDERR_MULT * fit.stderr && spread < ST1_SPREAD;
        parts.push(format!("q={q}: slope {:.4}+/-{:.4} vs {theory:.4}, spread {spread:.3}", fit.slope, fit.stderr));
    }
    outcome(pass, format!("{} ({elapsed:.1?})", parts.join("; ")))
}

fn nu() -> Outcome {
    let report = verify_nu(&ExperimentPlan::standard(canonical(), vec![1.2])).unwrap();
    let c = find(&report, "q=1.2");
    let slope = c.fit.unwrap().slope;
    let spread = c.ratio_spread.unwrap();
    outcome(slope >= NU_MIN_SLOPE && spread < NU_SPREAD, format!("slope {slope:.4}, ratio spread {spread:.3}"))
}

fn lemma21() -> Outcome {
    let plan = ExperimentPlan::standard(canonical(), vec![2.0]);
    let report = verify_lemma21(&plan).unwrap();
    let base = at_profile(canonical());
    let s_norm = {
        let cfg = Quadrature::default();
        let g = gagliardo(&base, 0.3, 2.0, &cfg).unwrap().integral;
        let h = hardy_norm(&base, 5.0, 0.0, &cfg).unwrap().integral;
        let (_, c) = base.normalize(g, h).unwrap();
        g * c * c
    };
    let floor = -DEFICIT_TOL * s_norm;
    let rows: Vec<_> = report.rows.iter().filter(|r| r.eps <= r.delta / 2.0).collect();
    let signs = !rows.is_empty()
        && rows.iter().all(|r| r.deficit1.is_some_and(|d| d >= floor) && r.deficit2.is_some_and(|d| d >= floor));
    let d1 = find(&report, "D1").fit.unwrap().slope;
    let d2 = find(&report, "D2").fit.unwrap().slope;
    let pass = signs && report.violations.is_empty() && d1 >= D1_MIN_SLOPE && d2 >= D2_MIN_SLOPE;
    outcome(pass, format!("{} rows non-negative: {signs}; D1 slope {d1:.4}, D2 slope {d2:.4}", rows.len()))
}

fn dichotomy() -> Outcome {
    let report = threshold_dichotomy(&canonical(), &[1.6, 1.2], 0.01, &Quadrature::default()).unwrap();
    let e = &report.entries;
    let pass = e[0].converged && e[0].consistent && e[1].diverged && e[1].consistent;
    outcome(pass, report.summary_lines().join("; "))
}

fn besov_equivalence() -> Outcome {
    let cfg = Quadrature::default();
    let params = canonical();
    let base = at_profile(params);
    let theta = find_theta_bar(&base).unwrap();
    let (u_eps, _, truncated) = truncated_family(&base, theta, 0.1, 1.0).unwrap();
    let sec = at_profile(secondary());
    let (_, _, sec_truncated) = truncated_family(&sec, find_theta_bar(&sec).unwrap(), 0.1, 1.0).unwrap();
    let profiles = vec![
        Profile::hat(params, 1.0).unwrap(),
        truncated,
        truncate_by_multiplication(&u_eps, 1.0).unwrap(),
        sec_truncated,
        random_test_profiles(params, 1, 3).unwrap().remove(0),
    ];
    let mut pass = true;
    let (mut low, mut high): (f64, f64) = (f64::INFINITY, f64::INFINITY);
    for u in &profiles {
        for sigma in [0.3, 0.5, 0.7] {
            let first = besov(u, sigma, 2.0, BesovOrder::First, &cfg).unwrap();
            let second = besov(u, sigma, 2.0, BesovOrder::Second, &cfg).unwrap();
            let bar = 1.0 + first.est_rel_error + second.est_rel_error;
            let lower = 0.5 * second.value;
            let upper = second.value / (2.0 - 2f64.powf(sigma));
            pass &= lower <= first.value * bar && first.value <= upper * bar;
            low = low.min(first.value / lower);
            high = high.min(upper / first.value);
        }
    }
    outcome(pass, format!("{} profiles x 3 sigma; min margins {low:.3} (lower), {high:.3} (upper)", profiles.len()))
}

fn bpq() -> Outcome {
    let cfg = Quadrature::default();
    let params = canonical();
    let (q, p) = (1.2, params.p);
    let a = 1.0 / q - 1.0 / p;
    let n = params.n;
    let constant = (2f64.powf(a) * ball_volume::<f64>(n).powf(a)).max((ball_volume::<f64>(n) * 4f64.powi(n as i32)).powf(a));
    let base = at_profile(params);
    let theta = find_theta_bar(&base).unwrap();
    let mut pass = true;
    let mut ratios = Vec::new();
    for delta in [0.25, 1.0, 4.0] {
        let (_, _, v) = truncated_family(&base, theta, BPQ_EPS, delta).unwrap();
        let radius = theta * delta;
        pass &= v.support_radius().is_some_and(|r| r <= radius * (1.0 + 1e-12));
        let lhs = besov(&v, BPQ_SIGMA, q, BesovOrder::First, &cfg).unwrap();
        let rhs = besov(&v, BPQ_SIGMA, p, BesovOrder::First, &cfg).unwrap();
        let bound = constant * radius.powf(n as f64 * a) * rhs.value;
        pass &= lhs.value <= bound * (1.0 + lhs.est_rel_error + rhs.est_rel_error);
        ratios.push(format!("{:.3}", lhs.value / bound));
    }
    outcome(pass, format!("C = {constant:.4}; lhs/rhs = {}", ratios.join(", ")))
}

fn interpolation() -> Outcome {
    let params = canonical();
    let sb = sigma_bar(&params);
    let tr = choose_interpolation_params(&params, 1.2, 0.05).unwrap();
    let exponent = (1.0 - tr.mu) * (1.0 / tr.t - 0.5) - tr.mu * (tr.sigma - params.s);
    let audit = interpolation_audit(&ExperimentPlan::standard(params, vec![1.2]), tr.sigma, tr.t, tr.mu).unwrap();
    let pass = (sb - 0.6).abs() < SIGMA_BAR_TOL
        && exponent >= 0.15 - EXPONENT_TOL
        && audit.skipped.is_empty()
        && audit.ratio_spread < AUDIT_SPREAD;
    outcome(
        pass,
        format!(
            "sigma_bar {sb}; (t, mu, sigma) = ({:.4}, {:.4}, {:.4}), exponent {exponent:.6}; audit spread {:.3} over {} rows",
            tr.t,
            tr.mu,
            tr.sigma,
            audit.ratio_spread,
            audit.checks.len()
        ),
    )
}

fn local_case() -> Outcome {
    let params = Params::local(3, 2.0, 0.0).unwrap();
    let report = verify_local_case(&ExperimentPlan::standard(params, vec![1.6, 1.2])).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (q, theory) in [(1.6, 3.0 / 1.6 - 1.5), (1.2, 0.5)] {
        let slope = find(&report, &format!("q={q}")).fit.unwrap().slope;
        pass &= (slope - theory).abs() <= LOCAL_SLOPE_TOL;
        parts.push(format!("q={q}: {slope:.4} vs {theory:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn optimizer() -> Outcome {
    let params = canonical();
    let cfg = OptimizerConfig::default();
    let init = DiscreteProfile::hat(params, 1.0, log_grid(1e-4, 1e7, 529)).unwrap();
    let res = minimize(&init, &cfg).unwrap();
    let (normalized, _) = res.minimizer.el_normalized(&cfg.quad).unwrap();
    let u = normalized.to_radial().unwrap();
    let g = gagliardo(&u, params.s, params.p, &cfg.quad).unwrap().integral;
    let h = hardy_norm(&u, params.r(), params.alpha, &cfg.quad).unwrap().integral;
    let gap = (g - h).abs() / g;
    let residual = el_residual(&normalized, &default_test_bumps(normalized.half_radius()), &cfg.quad).unwrap();
    let quotient_gap = rel(res.s_est, SHARP_QUOTIENT);
    let pass = res.converged && quotient_gap < QUOTIENT_TOL && gap < NORMALIZATION_TOL && residual < EL_TOL;
    outcome(
        pass,
        format!(
            "{} iterations, quotient {:.5} (gap {quotient_gap:.2e}), normalization gap {gap:.1e}, residual {residual:.1e}",
            res.iterations, res.s_est
        ),
    )
}

fn truncation() -> Outcome {
    let base = at_profile(canonical());
    let theta = find_theta_bar(&base).unwrap();
    let mut pass = (theta - 63f64.sqrt()).abs() < THETA_BAR_TOL;
    let mut m_max: f64 = 0.0;
    let mut tuples = 0;
    for delta in [0.25, 1.0, 4.0] {
        for k in 2..=12 {
            let eps = 2f64.powi(-k);
            if eps > delta {
                continue;
            }
            let (u_eps, spec, v) = truncated_family(&base, theta, eps, delta).unwrap();
            let cut = truncate_by_multiplication(&u_eps, delta).unwrap();
            pass &= support_check(&v, &u_eps, delta, spec.outer_radius());
            pass &= support_check(&cut, &u_eps, delta, 2.0 * delta);
            m_max = m_max.max(spec.m);
            tuples += 1;
        }
    }
    pass &= m_max <= M_MAX;
    outcome(pass, format!("theta_bar {theta:.4}; {tuples} tuples, max m {m_max:.4}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("concentration rate above the threshold", st1),
        ("rate below the threshold", nu),
        ("deficit signs and rates", lemma21),
        ("threshold dichotomy", dichotomy),
        ("Besov equivalence", besov_equivalence),
        ("support-radius Besov embedding", bpq),
        ("sigma_bar and interpolation", interpolation),
        ("local case", local_case),
        ("optimizer", optimizer),
        ("truncation structure", truncation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        println!("criterion {:>2} {}: {name}: {} [{:.1?}]", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed());
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
