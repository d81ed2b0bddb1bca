//! Slope and boundedness checks of the scaling laws along a sweep.

use serde::{Deserialize, Serialize};

use super::interp::spread;
use super::sweep::{fit_table, run_sweep, Column, SweepRow, SweepTable};
use super::ExperimentPlan;
use crate::error::{Error, Result};
use crate::fit::{ScalingFit, Verdict};
use crate::params::FractionalParams;
use crate::profile::at_profile;
use crate::scalar::Real;
use crate::seminorm::{gagliardo, QuadratureConfig};

/// Largest `max / min` of the normalized seminorm above the threshold.
pub const ST1_SPREAD_LIMIT: f64 = 3.0;
/// Largest `max / min` of the seminorm over the full bound below it.
pub const NU_SPREAD_LIMIT: f64 = 10.0;
/// Relative change allowed between a converged seminorm and its refinement.
pub const REFINEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    St1,
    Nu,
    Lemma21,
    Interpolation,
    Local,
    Dichotomy,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::St1 => "st1",
            Theorem::Nu => "nu",
            Theorem::Lemma21 => "lemma21",
            Theorem::Interpolation => "interpolation",
            Theorem::Local => "local",
            Theorem::Dichotomy => "dichotomy",
        }
    }
}

/// A fitted slope, optionally with a boundedness check on the ratio of the
/// measured quantity to its theoretical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SlopeCheck<T> {
    pub label: String,
    pub q: Option<T>,
    pub x: Column,
    pub y: Column,
    pub theoretical_exponent: T,
    pub fit: Option<ScalingFit<T>>,
    pub ratio_min: Option<T>,
    pub ratio_max: Option<T>,
    pub ratio_spread: Option<T>,
    pub spread_limit: Option<T>,
    pub passed: bool,
    #[serde(default)]
    pub note: String,
}

impl<T: Real> SlopeCheck<T> {
    pub fn verdict(&self) -> Verdict {
        match &self.fit {
            Some(f) if self.passed => f.verdict,
            _ => Verdict::Violated,
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut out = format!("{}: ", self.label);
        match &self.fit {
            Some(f) => out += &format!(
                "slope {:.4} +/- {:.4} vs {:.4}",
                f.slope.to_f64_lossy(),
                f.stderr.to_f64_lossy(),
                self.theoretical_exponent.to_f64_lossy()
            ),
            None => out += "no fit",
        }
        if let (Some(s), Some(l)) = (self.ratio_spread, self.spread_limit) {
            out += &format!(", ratio spread {:.3} (limit {})", s.to_f64_lossy(), l.to_f64_lossy());
        }
        out += &format!(" -> {}", self.verdict().as_str());
        if !self.note.is_empty() {
            out += &format!(" [{}]", self.note);
        }
        out
    }
}

/// Outcome of one verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Report<T> {
    pub theorem: Theorem,
    pub params: FractionalParams<T>,
    pub checks: Vec<SlopeCheck<T>>,
    /// Pointwise violations (negative deficits, excluded tuples and so on).
    pub violations: Vec<String>,
    pub notes: Vec<String>,
    pub rows: Vec<SweepRow<T>>,
    pub verdict: Verdict,
}

impl<T: Real> Report<T> {
    fn assemble(theorem: Theorem, params: FractionalParams<T>, table: SweepTable<T>, checks: Vec<SlopeCheck<T>>) -> Self {
        let mut r = Self { theorem, params, checks, violations: Vec::new(), notes: Vec::new(), rows: table.rows, verdict: Verdict::Consistent };
        r.settle();
        r
    }

    fn settle(&mut self) {
        let verdicts: Vec<Verdict> = self.checks.iter().map(|c| c.verdict()).collect();
        self.verdict = if !self.violations.is_empty() || verdicts.contains(&Verdict::Violated) {
            Verdict::Violated
        } else if verdicts.iter().all(|v| *v == Verdict::Consistent) {
            Verdict::Consistent
        } else {
            Verdict::BoundSatisfied
        };
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.checks.iter().map(|c| format!("{} {}", self.theorem.as_str(), c.summary())).collect();
        out.extend(self.violations.iter().map(|v| format!("{} violation: {v}", self.theorem.as_str())));
        out
    }
}

/// Fit `y` against `x` on the rows for one `q`, with an optional ratio of
/// the seminorm to `bound(row)`.
fn slope_check<T: Real>(
    rows: &[SweepRow<T>],
    label: String,
    q: Option<T>,
    (x, y): (Column, Column),
    theory: T,
    bound: Option<(&dyn Fn(&SweepRow<T>) -> T, T)>,
) -> SlopeCheck<T> {
    let selected: Vec<SweepRow<T>> = rows.iter().filter(|r| q.map_or(true, |q| r.q == q)).cloned().collect();
    let (fit, note) = match fit_table(&selected, x, y, theory) {
        Ok(f) => (Some(f), String::new()),
        Err(e) => (None, e.to_string()),
    };
    let mut check = SlopeCheck {
        label,
        q,
        x,
        y,
        theoretical_exponent: theory,
        fit,
        ratio_min: None,
        ratio_max: None,
        ratio_spread: None,
        spread_limit: None,
        passed: false,
        note,
    };
    let mut bounded = true;
    if let Some((f, limit)) = bound {
        let ratios: Vec<T> = selected.iter().filter_map(|r| r.get(y).map(|v| v / f(r))).collect();
        let s = spread(ratios.iter().copied());
        check.ratio_min = ratios.iter().copied().reduce(T::min);
        check.ratio_max = ratios.iter().copied().reduce(T::max);
        check.ratio_spread = Some(s);
        check.spread_limit = Some(limit);
        bounded = s < limit;
    }
    check.passed = bounded && check.fit.map_or(false, |f| f.verdict != Verdict::Violated);
    check
}

fn q_label<T: Real>(q: T) -> String {
    format!("q={}", q.to_f64_lossy())
}

fn above_checks<T: Real>(params: &FractionalParams<T>, q_list: &[T], rows: &[SweepRow<T>]) -> Vec<SlopeCheck<T>> {
    let n = params.dim();
    q_list
        .iter()
        .map(|&q| {
            let theory = n / q - n / params.p;
            let bound = move |r: &SweepRow<T>| r.eps.powf(theory);
            slope_check(rows, q_label(q), Some(q), (Column::Eps, Column::Seminorm), theory, Some((&bound, T::c(ST1_SPREAD_LIMIT))))
        })
        .collect()
}

fn below_checks<T: Real>(params: &FractionalParams<T>, q_list: &[T], rows: &[SweepRow<T>], theory: T) -> Vec<SlopeCheck<T>> {
    let n = params.dim();
    q_list
        .iter()
        .map(|&q| {
            let bound = move |r: &SweepRow<T>| r.delta.powf(n / q - n / params.p) * (r.eps / r.delta).powf(theory);
            slope_check(
                rows,
                q_label(q),
                Some(q),
                (Column::EpsOverDelta, Column::Seminorm),
                theory,
                Some((&bound, T::c(NU_SPREAD_LIMIT))),
            )
        })
        .collect()
}

/// Above the threshold: `[U_{eps,delta}]_{s,q} <= C eps^(N/q - N/p)`, checked
/// as a slope in `log eps` and a bounded normalized ratio.
pub fn verify_st1<T: Real>(plan: &ExperimentPlan<T>) -> Result<Report<T>> {
    if plan.params.is_local() || !plan.all_above_threshold() {
        return Err(Error::InvalidRange(format!(
            "every q must exceed the threshold {} for this check",
            plan.params.threshold()
        )));
    }
    let mut run = plan.clone();
    run.deficits = false;
    let table = run_sweep(&run)?;
    let checks = above_checks(&plan.params, &plan.q_list, &table.rows);
    Ok(Report::assemble(Theorem::St1, plan.params, table, checks))
}

/// At or below the threshold:
/// `[U_{eps,delta}]_{s,q} <= C_nu delta^(N/q - N/p) (eps/delta)^(limit - nu)`.
pub fn verify_nu<T: Real>(plan: &ExperimentPlan<T>) -> Result<Report<T>> {
    if plan.params.is_local() || !plan.all_at_or_below_threshold() {
        return Err(Error::InvalidRange(format!(
            "every q must lie at or below the threshold {} for this check",
            plan.params.threshold()
        )));
    }
    let mut run = plan.clone();
    run.deficits = false;
    let table = run_sweep(&run)?;
    let theory = plan.params.limit_exponent() - plan.nu;
    let checks = below_checks(&plan.params, &plan.q_list, &table.rows, theory);
    Ok(Report::assemble(Theorem::Nu, plan.params, table, checks))
}

/// Sign and decay of the two deficits
/// `D1 = [U_{eps,delta}]_{s,p}^p - S_norm` and `D2 = S_norm - ||U_{eps,delta}||_{r,alpha}^r`.
pub fn verify_lemma21<T: Real>(plan: &ExperimentPlan<T>) -> Result<Report<T>> {
    let params = plan.params;
    if params.is_local() {
        return Err(Error::InvalidParams("the deficit bounds need 0 < s < 1".into()));
    }
    let mut run = plan.clone();
    run.deficits = true;
    run.interpolation = None;
    if run.q_list.is_empty() {
        run.q_list = vec![params.p];
    }
    let table = run_sweep(&run)?;
    let s_norm = table.s_norm.unwrap_or(T::zero());
    let floor = plan.quad.target_rel_tol * s_norm;

    let mut violations = Vec::new();
    let mut notes = Vec::new();
    let mut admissible = Vec::new();
    for (i, (eps, delta)) in run.tuples().into_iter().enumerate() {
        let rows: Vec<&SweepRow<T>> = table.rows.iter().filter(|r| r.eps == eps && r.delta == delta).collect();
        if eps > delta * T::half() {
            notes.push(format!("eps = {eps}, delta = {delta}: eps <= delta / 2 fails, excluded"));
            continue;
        }
        let (e1, e2) = table.deficit_errors.get(i).copied().unwrap_or((T::nan(), T::nan()));
        let Some(row) = rows.first() else { continue };
        for (name, d, e) in [("D1", row.deficit1, e1), ("D2", row.deficit2, e2)] {
            let tol = floor.max(if e.is_finite() { e } else { T::zero() });
            match d {
                Some(d) if d < -tol => {
                    violations.push(format!("{name} = {d} < -{tol} at eps = {eps}, delta = {delta}"))
                }
                None => notes.push(format!("{name} unavailable at eps = {eps}: {}", row.note)),
                _ => {}
            }
        }
        admissible.extend(rows.into_iter().cloned());
    }

    let n = params.dim();
    let d1_theory = (n - params.p * params.s) / (params.p - T::one());
    let d2_theory = (n - params.alpha) / (params.p - T::one());
    let checks = vec![
        slope_check(&admissible, "D1".into(), None, (Column::EpsOverDelta, Column::Deficit1), d1_theory, None),
        slope_check(&admissible, "D2".into(), None, (Column::EpsOverDelta, Column::Deficit2), d2_theory, None),
    ];
    let mut report = Report::assemble(Theorem::Lemma21, params, table, checks);
    report.violations = violations;
    report.notes = notes;
    report.notes.push(format!("S_norm = {s_norm}"));
    report.settle();
    Ok(report)
}

/// The `s = 1` family with gradient norms: slope `N/q - N/p` above
/// `N (p - 1) / (N - 1)` and `(N - p) / (p (p - 1))` below it.
pub fn verify_local_case<T: Real>(plan: &ExperimentPlan<T>) -> Result<Report<T>> {
    let params = plan.params;
    if !params.is_local() {
        return Err(Error::InvalidParams("the local comparison needs s = 1".into()));
    }
    if params.p >= params.dim() {
        return Err(Error::InvalidParams(format!("p < N fails: p = {}, N = {}", params.p, params.n)));
    }
    if params.alpha != T::zero() {
        return Err(Error::InvalidParams(format!("alpha = 0 required, got {}", params.alpha)));
    }
    let mut run = plan.clone();
    run.deficits = false;
    run.interpolation = None;
    let table = run_sweep(&run)?;
    let th = params.threshold();
    let (above, below): (Vec<T>, Vec<T>) = plan.q_list.iter().partition(|&&q| q > th);
    let mut checks = above_checks(&params, &above, &table.rows);
    checks.extend(below_checks(&params, &below, &table.rows, params.limit_exponent()));
    Ok(Report::assemble(Theorem::Local, params, table, checks))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DichotomyEntry<T> {
    pub q: T,
    pub above_threshold: bool,
    pub converged: bool,
    pub diverged: bool,
    pub value: T,
    /// Value on the refined configuration, when the first run converged.
    pub refined_value: Option<T>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DichotomyReport<T> {
    pub params: FractionalParams<T>,
    pub eps: T,
    pub threshold: T,
    pub entries: Vec<DichotomyEntry<T>>,
    pub verdict: Verdict,
}

impl<T: Real> DichotomyReport<T> {
    pub fn summary_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "dichotomy q={}: {} (expected {}) -> {}",
                    e.q.to_f64_lossy(),
                    if e.diverged { "diverged" } else if e.converged { "converged" } else { "unresolved" },
                    if e.above_threshold { "converged" } else { "diverged" },
                    if e.consistent { "consistent" } else { "violated" }
                )
            })
            .collect()
    }
}

/// Untruncated `U_eps`: `[U_eps]_{s,q}` must converge, stably under a finer
/// grid, above the threshold and be flagged divergent below it.
pub fn threshold_dichotomy<T: Real>(
    params: &FractionalParams<T>,
    q_list: &[T],
    eps: T,
    cfg: &QuadratureConfig<T>,
) -> Result<DichotomyReport<T>> {
    if params.is_local() {
        return Err(Error::InvalidParams("the dichotomy check needs 0 < s < 1".into()));
    }
    let u = at_profile(*params).rescale(eps);
    let th = params.threshold();
    let fine = QuadratureConfig { grid_points: cfg.grid_points * 2, diagonal_levels: cfg.diagonal_levels + 4, ..*cfg };
    let mut entries = Vec::new();
    for &q in q_list {
        let v = gagliardo(&u, params.s, q, cfg)?;
        let above = q > th;
        let refined_value = if v.converged { Some(gagliardo(&u, params.s, q, &fine)?.value) } else { None };
        let stable = refined_value.map_or(false, |r| ((r - v.value) / v.value).abs() < T::c(REFINEMENT_TOL));
        let consistent = if above { v.converged && stable } else { v.diverged };
        entries.push(DichotomyEntry {
            q,
            above_threshold: above,
            converged: v.converged,
            diverged: v.diverged,
            value: v.value,
            refined_value,
            consistent,
        });
    }
    let verdict = if entries.iter().all(|e| e.consistent) { Verdict::Consistent } else { Verdict::Violated };
    Ok(DichotomyReport { params: *params, eps, threshold: th, entries, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn canonical() -> FractionalParams<f64> {
        make_params(1, 0.3, 2.0, 0.0).unwrap()
    }

    #[test]
    fn preconditions_partition_q() {
        let plan = ExperimentPlan::standard(canonical(), vec![1.2]);
        assert!(matches!(verify_st1(&plan), Err(Error::InvalidRange(_))));
        let plan = ExperimentPlan::standard(canonical(), vec![1.6]);
        assert!(matches!(verify_nu(&plan), Err(Error::InvalidRange(_))));
        assert!(matches!(verify_local_case(&plan), Err(Error::InvalidParams(_))));
        let wide = FractionalParams::<f64>::local(3, 2.0, 0.5).unwrap();
        assert!(matches!(verify_local_case(&ExperimentPlan::standard(wide, vec![1.2])), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn st1_on_short_sweep_is_consistent() {
        let mut plan = ExperimentPlan::standard(canonical(), vec![2.0]);
        plan.eps_values = (2..=6).map(|k| 2f64.powi(-k)).collect();
        let r = verify_st1(&plan).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.checks[0].passed, "{}", r.checks[0].summary());
        assert_ne!(r.verdict, Verdict::Violated);
        assert!(r.checks[0].theoretical_exponent.abs() < 1e-15);
    }

    #[test]
    fn lemma21_excludes_large_ratios() {
        let mut plan = ExperimentPlan::standard(canonical(), vec![]);
        plan.eps_values = vec![0.75, 0.25, 0.125, 0.0625, 0.03125];
        let r = verify_lemma21(&plan).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("excluded")));
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.rows.len(), 5);
    }
}
