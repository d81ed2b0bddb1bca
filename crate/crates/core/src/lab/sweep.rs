use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentPlan;
use crate::error::Result;
use crate::fit::{fit_slope, ScalingFit};
use crate::profile::{at_profile, RadialProfile};
use crate::scalar::Real;
use crate::seminorm::{
    besov, deficit_gagliardo, deficit_hardy, gagliardo, hardy_norm, local_gradient_norm, BesovOrder, SeminormValue,
};
use crate::truncation::{find_theta_bar, truncated_family};

/// One `(eps, delta, q)` tuple of a sweep. Missing values are `None`; the
/// reason, if any, is in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepRow<T> {
    pub eps: T,
    pub delta: T,
    pub q: T,
    /// `[U_{eps,delta}]_{s,q}`, or `||grad U_{eps,delta}||_q` when `s = 1`.
    pub seminorm: Option<T>,
    /// Absolute error estimate of `seminorm`.
    pub err: Option<T>,
    pub converged: bool,
    /// `[U_{eps,delta}]_{s,p}^p - S_norm`.
    pub deficit1: Option<T>,
    /// `S_norm - ||U_{eps,delta}||_{r,alpha}^r`.
    pub deficit2: Option<T>,
    pub besov_sigma_t: Option<T>,
    pub gagliardo_s_t: Option<T>,
    #[serde(default)]
    pub note: String,
}

/// Rows in plan order (`eps` outer, `q` inner) with the quantities shared by
/// the whole sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepTable<T> {
    pub rows: Vec<SweepRow<T>>,
    /// `[U]_{s,p}^p` of the normalized base profile.
    pub s_norm: Option<T>,
    pub theta_bar: Option<T>,
    /// Absolute error estimates of the two deficits, per `eps`.
    pub deficit_errors: Vec<(T, T)>,
}

/// Columns usable as fit coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Eps,
    Delta,
    EpsOverDelta,
    Seminorm,
    Deficit1,
    Deficit2,
    BesovSigmaT,
    GagliardoST,
}

impl Column {
    fn depends_on_q(self) -> bool {
        matches!(self, Column::Seminorm | Column::BesovSigmaT | Column::GagliardoST)
    }
}

impl<T: Real> SweepRow<T> {
    fn empty(eps: T, delta: T, q: T, note: String) -> Self {
        Self {
            eps,
            delta,
            q,
            seminorm: None,
            err: None,
            converged: false,
            deficit1: None,
            deficit2: None,
            besov_sigma_t: None,
            gagliardo_s_t: None,
            note,
        }
    }

    /// Value of `col`; the seminorm only counts when converged.
    pub fn get(&self, col: Column) -> Option<T> {
        match col {
            Column::Eps => Some(self.eps),
            Column::Delta => Some(self.delta),
            Column::EpsOverDelta => Some(self.eps / self.delta),
            Column::Seminorm => self.seminorm.filter(|_| self.converged),
            Column::Deficit1 => self.deficit1,
            Column::Deficit2 => self.deficit2,
            Column::BesovSigmaT => self.besov_sigma_t,
            Column::GagliardoST => self.gagliardo_s_t,
        }
    }
}

struct Family<T> {
    base: RadialProfile<T>,
    theta_bar: T,
    s_norm: Option<T>,
}

fn family<T: Real>(plan: &ExperimentPlan<T>) -> Result<Family<T>> {
    let params = plan.params;
    let u = at_profile(params);
    if params.is_local() {
        let theta_bar = find_theta_bar(&u)?;
        return Ok(Family { base: u, theta_bar, s_norm: None });
    }
    let g = gagliardo(&u, params.s, params.p, &plan.quad)?;
    let h = hardy_norm(&u, params.r(), params.alpha, &plan.quad)?;
    let (base, c) = u.normalize(g.integral, h.integral)?;
    let theta_bar = find_theta_bar(&base)?;
    Ok(Family { base, theta_bar, s_norm: Some(g.integral * c.powf(params.p)) })
}

fn describe<T: Real>(v: &SeminormValue<T>) -> Option<String> {
    if v.diverged {
        Some("diverged".into())
    } else if !v.converged {
        Some(format!("not converged (rel err {:.2e})", v.est_rel_error.to_f64_lossy()))
    } else {
        None
    }
}

struct EpsOutcome<T> {
    rows: Vec<SweepRow<T>>,
    deficit_errors: (T, T),
}

fn rows_for_eps<T: Real>(plan: &ExperimentPlan<T>, fam: &Family<T>, eps: T, delta: T) -> EpsOutcome<T> {
    let params = plan.params;
    let cfg = &plan.quad;
    let nan = (T::nan(), T::nan());
    let (u_eps, _spec, v) = match truncated_family(&fam.base, fam.theta_bar, eps, delta) {
        Ok(f) => f,
        Err(e) => {
            let rows = plan.q_list.iter().map(|&q| SweepRow::empty(eps, delta, q, e.to_string())).collect();
            return EpsOutcome { rows, deficit_errors: nan };
        }
    };

    let mut deficits = (None, None);
    let mut deficit_errors = nan;
    let mut shared_notes = Vec::new();
    if plan.deficits && !params.is_local() {
        match deficit_gagliardo(&v, &u_eps, params.n, params.s, params.p, delta, cfg) {
            Ok((d, e)) => {
                deficits.0 = Some(d);
                deficit_errors.0 = e;
            }
            Err(e) => shared_notes.push(format!("deficit1: {e}")),
        }
        match deficit_hardy(&v, &u_eps, params.n, params.r(), params.alpha, delta, cfg) {
            Ok((d, e)) => {
                deficits.1 = Some(d);
                deficit_errors.1 = e;
            }
            Err(e) => shared_notes.push(format!("deficit2: {e}")),
        }
    }

    let rows = plan
        .q_list
        .iter()
        .map(|&q| {
            let mut row = SweepRow::empty(eps, delta, q, String::new());
            let mut notes = shared_notes.clone();
            row.deficit1 = deficits.0;
            row.deficit2 = deficits.1;
            let value = if params.is_local() {
                local_gradient_norm(&v, q, cfg)
            } else {
                gagliardo(&v, params.s, q, cfg)
            };
            match value {
                Ok(val) => {
                    row.seminorm = Some(val.value);
                    row.err = Some(val.value * val.est_rel_error);
                    row.converged = val.converged;
                    notes.extend(describe(&val));
                }
                Err(e) => notes.push(e.to_string()),
            }
            if let (Some(set), false) = (plan.interpolation, params.is_local()) {
                match besov(&v, set.sigma, set.t, BesovOrder::Second, cfg) {
                    Ok(b) => row.besov_sigma_t = Some(b.value),
                    Err(e) => notes.push(format!("besov: {e}")),
                }
                match gagliardo(&v, params.s, set.t, cfg) {
                    Ok(g) => row.gagliardo_s_t = Some(g.value),
                    Err(e) => notes.push(format!("gagliardo_s_t: {e}")),
                }
            }
            row.note = notes.join("; ");
            row
        })
        .collect();
    EpsOutcome { rows, deficit_errors }
}

/// Evaluates every `(eps, delta, q)` tuple of the plan. Per-tuple failures
/// are recorded on the rows; only an invalid plan or a base profile that
/// cannot be normalized aborts.
pub fn run_sweep<T: Real>(plan: &ExperimentPlan<T>) -> Result<SweepTable<T>> {
    plan.validate()?;
    if plan.eps_values.is_empty() {
        return Ok(SweepTable { rows: Vec::new(), s_norm: None, theta_bar: None, deficit_errors: Vec::new() });
    }
    let fam = family(plan)?;
    let outcomes: Vec<EpsOutcome<T>> =
        plan.tuples().into_par_iter().map(|(eps, delta)| rows_for_eps(plan, &fam, eps, delta)).collect();
    let deficit_errors = outcomes.iter().map(|o| o.deficit_errors).collect();
    let rows = outcomes.into_iter().flat_map(|o| o.rows).collect();
    Ok(SweepTable { rows, s_norm: fam.s_norm, theta_bar: Some(fam.theta_bar), deficit_errors })
}

/// Log-log fit of `y` against `x` over the rows where both are available.
/// Columns that do not depend on `q` use one row per `(eps, delta)`.
pub fn fit_table<T: Real>(rows: &[SweepRow<T>], x: Column, y: Column, theory: T) -> Result<ScalingFit<T>> {
    let per_q = x.depends_on_q() || y.depends_on_q();
    let mut seen: Vec<(T, T)> = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in rows {
        if !per_q {
            if seen.iter().any(|&(e, d)| e == row.eps && d == row.delta) {
                continue;
            }
            seen.push((row.eps, row.delta));
        }
        if let (Some(a), Some(b)) = (row.get(x), row.get(y)) {
            xs.push(a);
            ys.push(b);
        }
    }
    fit_slope(&xs, &ys, theory)
}

/// The rows as CSV with a header line.
pub fn rows_to_csv<T: Real>(rows: &[SweepRow<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record([
            "eps",
            "delta",
            "q",
            "seminorm",
            "err",
            "converged",
            "deficit1",
            "deficit2",
            "besov_sigma_t",
            "gagliardo_s_t",
            "note",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
