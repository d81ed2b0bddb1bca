//! Besov smoothness gain and the interpolation step below the threshold.

use serde::{Deserialize, Serialize};

use super::sweep::{run_sweep, SweepRow};
use super::{ExperimentPlan, InterpolationSetting};
use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::scalar::Real;

/// Ratio spread tolerated by the audit before it reports unboundedness.
pub const AUDIT_SPREAD_LIMIT: f64 = 10.0;

/// Gap kept between `sigma` and `min(sigma_bar, 1)`.
const SIGMA_MARGIN: f64 = 1e-3;

/// `sigma_bar = p s / (p - theta)` for `p >= 2` and `2 s / (2 - theta)`
/// otherwise, with `theta = min(1, p (1 - alpha / N))`.
pub fn sigma_bar<T: Real>(params: &FractionalParams<T>) -> T {
    let (p, s) = (params.p, params.s);
    let theta = T::one().min(p * (T::one() - params.alpha / params.dim()));
    let out = if p >= T::two() { p * s / (p - theta) } else { T::two() * s / (T::two() - theta) };
    debug_assert!(out > s);
    out
}

/// `(1 - mu)(N/t - N/p) - mu (sigma - s)`: the power of `eps / delta` the
/// interpolation bound delivers.
pub fn interpolation_exponent<T: Real>(params: &FractionalParams<T>, t: T, mu: T, sigma: T) -> T {
    let a = params.dim() / t - params.dim() / params.p;
    (T::one() - mu) * a - mu * (sigma - params.s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InterpolationTriple<T> {
    pub t: T,
    pub mu: T,
    pub sigma: T,
}

/// `sigma = min(sigma_bar, 1) - 1e-3`; `t = threshold (1 + eta)` with `eta`
/// halved from the midpoint of `(threshold, p)` until the exponent can be
/// brought down to `limit - nu` by some `mu` in `(0, 1)`.
pub fn choose_interpolation_params<T: Real>(
    params: &FractionalParams<T>,
    q: T,
    nu: T,
) -> Result<InterpolationTriple<T>> {
    let th = params.threshold();
    if !(q > T::one() && q <= th) {
        return Err(Error::InvalidRange(format!("q = {q} must lie in (1, {th}]")));
    }
    if !(nu > T::zero()) {
        return Err(Error::InvalidRange(format!("nu must be positive, got {nu}")));
    }
    let limit = params.limit_exponent();
    if nu >= limit {
        return Err(Error::NoSolution(format!("nu = {nu} >= limit exponent {limit}")));
    }
    let target = limit - nu;
    let sigma = sigma_bar(params).min(T::one()) - T::c(SIGMA_MARGIN);
    let b = sigma - params.s;
    let (n, p) = (params.dim(), params.p);
    let mut eta = (p / th - T::one()) * T::half();
    for _ in 0..64 {
        let t = th * (T::one() + eta);
        let a = n / t - n / p;
        let mu = (a - target) / (a + b);
        if mu > T::zero() && mu < T::one() {
            return Ok(InterpolationTriple { t, mu, sigma });
        }
        eta = eta * T::half();
    }
    Err(Error::NoSolution(format!("no admissible t found for nu = {nu}")))
}

/// One row of the interpolation audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InterpolationCheck<T> {
    pub eps: T,
    pub delta: T,
    pub q: T,
    pub sigma: T,
    pub t: T,
    pub mu: T,
    /// `[U_{eps,delta}]_{s,q}`.
    pub lhs: T,
    /// `(delta^(N/q - N/t + mu (sigma - s)), [.]_{B^sigma_{t,inf}}^mu, [.]_{s,t}^(1 - mu))`.
    pub rhs_factors: (T, T, T),
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InterpolationAudit<T> {
    pub triple: InterpolationTriple<T>,
    /// Power of `eps / delta` the triple delivers.
    pub exponent: T,
    pub checks: Vec<InterpolationCheck<T>>,
    /// Rows whose factors could not all be evaluated.
    pub skipped: Vec<SweepRow<T>>,
    pub ratio_spread: T,
    pub bounded: bool,
}

fn check_row<T: Real>(params: &FractionalParams<T>, tr: InterpolationTriple<T>, row: &SweepRow<T>) -> Option<InterpolationCheck<T>> {
    let lhs = row.seminorm.filter(|_| row.converged)?;
    let (besov, gag) = (row.besov_sigma_t?, row.gagliardo_s_t?);
    let n = params.dim();
    let dpow = row.delta.powf(n / row.q - n / tr.t + tr.mu * (tr.sigma - params.s));
    let factors = (dpow, besov.powf(tr.mu), gag.powf(T::one() - tr.mu));
    let rhs = factors.0 * factors.1 * factors.2;
    let ratio = lhs / rhs;
    (ratio.is_finite() && ratio > T::zero()).then_some(InterpolationCheck {
        eps: row.eps,
        delta: row.delta,
        q: row.q,
        sigma: tr.sigma,
        t: tr.t,
        mu: tr.mu,
        lhs,
        rhs_factors: factors,
        ratio,
    })
}

/// Evaluates both sides of the interpolation inequality along the plan's
/// sweep for a fixed `(sigma, t, mu)` and reports the spread of their ratio.
pub fn interpolation_audit<T: Real>(plan: &ExperimentPlan<T>, sigma: T, t: T, mu: T) -> Result<InterpolationAudit<T>> {
    let params = plan.params;
    if params.is_local() {
        return Err(Error::InvalidParams("the interpolation audit needs 0 < s < 1".into()));
    }
    let th = params.threshold();
    if !(t > th && t < params.p) {
        return Err(Error::InvalidRange(format!("t = {t} outside ({th}, {})", params.p)));
    }
    let top = sigma_bar(&params).min(T::one());
    if !(sigma > params.s && sigma <= top && sigma < T::one()) {
        return Err(Error::InvalidRange(format!("sigma = {sigma} outside ({}, {top}]", params.s)));
    }
    if !(mu > T::zero() && mu < T::one()) {
        return Err(Error::InvalidRange(format!("mu = {mu} outside (0, 1)")));
    }
    let triple = InterpolationTriple { t, mu, sigma };
    let mut run = plan.clone();
    run.deficits = false;
    run.interpolation = Some(InterpolationSetting { sigma, t });
    let table = run_sweep(&run)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for row in table.rows {
        match check_row(&params, triple, &row) {
            Some(c) => checks.push(c),
            None => skipped.push(row),
        }
    }
    let ratio_spread = spread(checks.iter().map(|c| c.ratio));
    Ok(InterpolationAudit {
        triple,
        exponent: interpolation_exponent(&params, t, mu, sigma),
        bounded: !checks.is_empty() && ratio_spread < T::c(AUDIT_SPREAD_LIMIT),
        checks,
        skipped,
        ratio_spread,
    })
}

/// `max / min` of positive finite values; infinite when there are none.
pub(crate) fn spread<T: Real>(values: impl Iterator<Item = T>) -> T {
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    for v in values.filter(|v| v.is_finite() && *v > T::zero()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi > T::zero() {
        hi / lo
    } else {
        T::infinity()
    }
}
