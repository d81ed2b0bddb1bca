use std::path::Path;

use clap::ValueEnum;
use fractrunc::lab::{
    choose_interpolation_params, interpolation_audit, rows_to_csv, run_sweep, threshold_dichotomy, verify_lemma21,
    verify_local_case, verify_nu, verify_st1, Report, SweepRow,
};
use fractrunc::rayleigh::{log_grid, minimize, profile_quotient, DiscreteProfile};
use fractrunc::report::{plot_svg, write_atomic};
use fractrunc::scalar::geomspace;
use fractrunc::seminorm::{gagliardo, local_gradient_norm};
use fractrunc::truncation::{build_g, find_theta_bar, support_check, truncate_by_multiplication, truncated_family};
use fractrunc::{at_profile, Error, ExperimentPlan, Params, Result, Verdict};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    St1,
    Nu,
    Lemma21,
    Interpolation,
    Local,
    Dichotomy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Hat,
    At,
}

/// Collected artifacts, written only once the computation has finished.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, cfg: &RunConfig, format: Format, name: String, body: impl Into<Vec<u8>>) {
        if cfg.wants(format) {
            self.files.push((name, body.into()));
        }
    }

    fn json<S: Serialize>(&mut self, cfg: &RunConfig, name: &str, value: &S) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.add(cfg, Format::Json, format!("{name}.json"), text + "\n");
        Ok(())
    }

    pub fn write(self, dir: &Path) -> Result<Vec<String>> {
        if self.files.is_empty() {
            return Ok(Vec::new());
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut names = Vec::new();
        for (name, body) in self.files {
            let path = dir.join(&name);
            write_atomic(&path, &body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            names.push(name);
        }
        Ok(names)
    }
}

/// Printed lines, artifacts and the verdict that decides the exit status.
pub struct Outcome {
    pub lines: Vec<String>,
    pub artifacts: Artifacts,
    pub verdict: Option<Verdict>,
}

impl Outcome {
    fn new() -> Self {
        Self { lines: Vec::new(), artifacts: Artifacts::default(), verdict: None }
    }
}

pub fn profile(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new();
    let u = at_profile(cfg.params);
    let theta = find_theta_bar(&u)?;
    let decay = u.decay_fit(10.0, 1e4)?;
    out.lines.push(format!(
        "profile: r={} tail exponent {:.4} (fit {:.4} +/- {:.1e}) theta_bar={theta:.4}",
        cfg.params.r(),
        cfg.params.tail_exponent(),
        decay.measured_exponent,
        decay.stderr
    ));
    let radii = geomspace(1e-3, 1e4, 141);
    out.artifacts.add(cfg, Format::Csv, "profile.csv".into(), u.to_csv(&radii));
    out.artifacts.json(cfg, "profile", &json!({ "profile": u, "theta_bar": theta, "decay": decay }))?;
    Ok(out)
}

pub fn seminorm(cfg: &RunConfig, q: Option<f64>, eps: Option<f64>, delta: Option<f64>) -> Result<Outcome> {
    let params = cfg.params;
    let q = q.unwrap_or(params.p);
    let base = at_profile(params);
    let (target, u) = match (eps, delta) {
        (None, None) => ("U".to_string(), base),
        (Some(e), None) => (format!("U_eps(eps={e})"), base.rescale(e)),
        (Some(e), Some(d)) => {
            let theta = find_theta_bar(&base)?;
            let (_, _, v) = truncated_family(&base, theta, e, d)?;
            (format!("U_eps,delta(eps={e}, delta={d})"), v)
        }
        (None, Some(_)) => return Err(Error::InvalidConfig("--delta needs --eps".into())),
    };
    let v = if params.is_local() {
        local_gradient_norm(&u, q, &cfg.quad)?
    } else {
        gagliardo(&u, params.s, q, &cfg.quad)?
    };
    let mut out = Outcome::new();
    out.lines.push(format!(
        "seminorm {target} q={q}: {} (rel err {:.1e}, {})",
        v.value,
        v.est_rel_error,
        if v.diverged { "diverged" } else if v.converged { "converged" } else { "unresolved" }
    ));
    out.artifacts.json(cfg, "seminorm", &json!({ "target": target, "q": q, "params": params, "result": v }))?;
    Ok(out)
}

pub fn truncate(cfg: &RunConfig, eps: f64, delta: f64) -> Result<Outcome> {
    let base = at_profile(cfg.params);
    let theta = find_theta_bar(&base)?;
    let (u_eps, spec, v) = truncated_family(&base, theta, eps, delta)?;
    let cut = truncate_by_multiplication(&u_eps, delta)?;
    let composed_ok = support_check(&v, &u_eps, delta, spec.outer_radius());
    let multiplied_ok = support_check(&cut, &u_eps, delta, 2.0 * delta);
    let lipschitz = build_g(&spec).lipschitz();
    let mut out = Outcome::new();
    out.lines.push(format!(
        "truncate eps={eps} delta={delta}: theta_bar={theta:.4} m={:.4} support composition={} multiplication={}",
        spec.m,
        if composed_ok { "ok" } else { "FAILED" },
        if multiplied_ok { "ok" } else { "FAILED" }
    ));
    let radii = geomspace(delta * 1e-3, spec.outer_radius() * 10.0, 161);
    let mut csv = String::from("rho,u_eps,composition,multiplication\n");
    for r in &radii {
        csv += &format!("{r},{},{},{}\n", u_eps.evaluate(*r), v.evaluate(*r), cut.evaluate(*r));
    }
    out.artifacts.add(cfg, Format::Csv, "truncate.csv".into(), csv);
    out.artifacts.json(
        cfg,
        "truncate",
        &json!({
            "params": cfg.params,
            "theta_bar": theta,
            "spec": spec,
            "lipschitz": lipschitz,
            "support_composition": composed_ok,
            "support_multiplication": multiplied_ok,
        }),
    )?;
    if !(composed_ok && multiplied_ok) {
        out.verdict = Some(Verdict::Violated);
    }
    Ok(out)
}

fn plan_for(cfg: &RunConfig, q_list: &[f64], default_q: &[f64]) -> Result<ExperimentPlan<f64>> {
    let mut plan = match &cfg.plan {
        Some(p) => p.clone(),
        None => {
            let mut p = ExperimentPlan::standard(cfg.params, default_q.to_vec());
            p.quad = cfg.quad;
            p
        }
    };
    if !q_list.is_empty() {
        plan.q_list = q_list.to_vec();
    }
    plan.validate()?;
    Ok(plan)
}

pub fn sweep(cfg: &RunConfig, q_list: &[f64]) -> Result<Outcome> {
    let plan = plan_for(cfg, q_list, &[cfg.params.p])?;
    let table = run_sweep(&plan)?;
    let mut out = Outcome::new();
    let converged = table.rows.iter().filter(|r| r.converged).count();
    out.lines.push(format!("sweep: {} rows, {converged} converged", table.rows.len()));
    out.artifacts.add(cfg, Format::Csv, "sweep.csv".into(), rows_to_csv(&table.rows)?);
    out.artifacts.json(cfg, "sweep", &json!({ "plan": plan, "table": table }))?;
    Ok(out)
}

pub struct OptimizeArgs {
    pub init: InitArg,
    pub nodes: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

pub fn optimize(cfg: &RunConfig, args: &OptimizeArgs) -> Result<Outcome> {
    let params = cfg.params;
    if params.is_local() {
        return Err(Error::InvalidParams("the optimizer needs 0 < s < 1".into()));
    }
    if args.nodes < 8 || !(args.rho_min > 0.0 && args.rho_max > args.rho_min) {
        return Err(Error::InvalidConfig("need nodes >= 8 and 0 < rho_min < rho_max".into()));
    }
    let grid = log_grid(args.rho_min, args.rho_max, args.nodes);
    let init = match args.init {
        InitArg::Hat => DiscreteProfile::hat(params, 1.0, grid)?,
        InitArg::At => DiscreteProfile::from_profile(&at_profile(params), grid)?,
    };
    let res = minimize(&init, &cfg.optimizer)?;
    let at = profile_quotient(&at_profile(params), &cfg.quad)?;
    let gap = res.s_est / at - 1.0;
    let mut out = Outcome::new();
    out.lines.push(format!(
        "optimize: S_est={:.6} after {} iterations ({}), AT quotient {at:.6}, relative gap {gap:+.3e}",
        res.s_est,
        res.iterations,
        if res.converged { "converged" } else { "not converged" }
    ));
    out.artifacts.add(cfg, Format::Csv, "optimize_history.csv".into(), res.history_csv());
    out.artifacts.add(cfg, Format::Csv, "optimize_minimizer.csv".into(), res.minimizer.to_csv());
    out.artifacts.json(cfg, "optimize", &json!({ "result": res, "at_quotient": at, "relative_gap": gap }))?;
    Ok(out)
}

fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn report_artifacts(cfg: &RunConfig, name: &str, report: &Report<f64>, out: &mut Outcome) -> Result<()> {
    out.lines.extend(report.summary_lines());
    out.artifacts.add(cfg, Format::Csv, format!("{name}.csv"), rows_to_csv(&report.rows)?);
    out.artifacts.json(cfg, name, report)?;
    if cfg.wants(Format::Svg) {
        for check in &report.checks {
            let rows: Vec<&SweepRow<f64>> =
                report.rows.iter().filter(|r| check.q.map_or(true, |q| r.q == q)).collect();
            let mut points: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| Some((r.get(check.x)?, r.get(check.y)?))).collect();
            points.dedup();
            if let Ok(svg) = plot_svg(&points, check.theoretical_exponent, &format!("{name} {}", check.label)) {
                out.artifacts.add(cfg, Format::Svg, format!("{name}_{}.svg", slug(&check.label)), svg);
            }
        }
    }
    out.verdict = Some(report.verdict);
    Ok(())
}

pub fn verify(cfg: &RunConfig, theorem: TheoremArg, q_list: &[f64], eps: f64) -> Result<Outcome> {
    let mut out = Outcome::new();
    let params: Params = cfg.params;
    match theorem {
        TheoremArg::St1 => report_artifacts(cfg, "verify_st1", &verify_st1(&plan_for(cfg, q_list, &[1.6, 2.0])?)?, &mut out)?,
        TheoremArg::Nu => report_artifacts(cfg, "verify_nu", &verify_nu(&plan_for(cfg, q_list, &[1.2])?)?, &mut out)?,
        TheoremArg::Lemma21 => {
            report_artifacts(cfg, "verify_lemma21", &verify_lemma21(&plan_for(cfg, q_list, &[params.p])?)?, &mut out)?
        }
        TheoremArg::Local => {
            report_artifacts(cfg, "verify_local", &verify_local_case(&plan_for(cfg, q_list, &[1.6, 1.2])?)?, &mut out)?
        }
        TheoremArg::Interpolation => {
            let plan = plan_for(cfg, q_list, &[1.2])?;
            let mut audits = Vec::new();
            let mut verdict = Verdict::Consistent;
            for &q in &plan.q_list {
                let triple = choose_interpolation_params(&params, q, plan.nu)?;
                let single = ExperimentPlan { q_list: vec![q], ..plan.clone() };
                let audit = interpolation_audit(&single, triple.sigma, triple.t, triple.mu)?;
                out.lines.push(format!(
                    "interpolation q={q}: t={:.4} mu={:.4} sigma={:.4} exponent {:.4}, ratio spread {:.3} over {} rows -> {}",
                    triple.t,
                    triple.mu,
                    triple.sigma,
                    audit.exponent,
                    audit.ratio_spread,
                    audit.checks.len(),
                    if audit.bounded { "bound_satisfied" } else { "violated" }
                ));
                if !audit.bounded {
                    verdict = Verdict::Violated;
                } else if verdict == Verdict::Consistent {
                    verdict = Verdict::BoundSatisfied;
                }
                audits.push(audit);
            }
            out.artifacts.json(cfg, "verify_interpolation", &json!({ "params": params, "nu": plan.nu, "audits": audits }))?;
            out.verdict = Some(verdict);
        }
        TheoremArg::Dichotomy => {
            let q = if q_list.is_empty() { vec![1.6, 1.2] } else { q_list.to_vec() };
            let report = threshold_dichotomy(&params, &q, eps, &cfg.quad)?;
            out.lines.extend(report.summary_lines());
            out.artifacts.json(cfg, "verify_dichotomy", &report)?;
            out.verdict = Some(report.verdict);
        }
    }
    Ok(out)
}
