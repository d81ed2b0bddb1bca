//! Sweeps over the truncated family and the scaling checks built on them.

mod interp;
mod sweep;
mod verify;

use serde::{Deserialize, Serialize};

pub use interp::{
    choose_interpolation_params, interpolation_audit, interpolation_exponent, sigma_bar, InterpolationAudit,
    InterpolationCheck, InterpolationTriple,
};
pub use sweep::{fit_table, rows_to_csv, run_sweep, Column, SweepRow, SweepTable};
pub use verify::{
    threshold_dichotomy, verify_lemma21, verify_local_case, verify_nu, verify_st1, DichotomyEntry, DichotomyReport,
    Report, SlopeCheck, Theorem,
};

use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::scalar::Real;
use crate::seminorm::QuadratureConfig;

/// How `delta` is tied to `eps` along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", bound = "T: Real")]
pub enum SweepMode<T> {
    /// `delta` is the plan's fixed value.
    FixDeltaSweepEps,
    /// `delta = eps / ratio`.
    FixRatio { ratio: T },
    /// `eps = delta^beta`, i.e. `delta = eps^(1/beta)`.
    EpsEqualsDeltaPowBeta { beta: T },
}

/// Besov and Gagliardo exponents evaluated alongside the seminorm for the
/// interpolation audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InterpolationSetting<T> {
    pub sigma: T,
    pub t: T,
}

/// A sweep over `(eps, delta, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExperimentPlan<T> {
    pub params: FractionalParams<T>,
    pub q_list: Vec<T>,
    pub sweep_mode: SweepMode<T>,
    pub eps_values: Vec<T>,
    #[serde(default = "one")]
    pub delta: T,
    #[serde(default = "default_nu")]
    pub nu: T,
    #[serde(default)]
    pub quad: QuadratureConfig<T>,
    #[serde(default)]
    pub seed: u64,
    /// Compute the energy and Hardy-mass deficits on every row.
    #[serde(default = "yes")]
    pub deficits: bool,
    #[serde(default)]
    pub interpolation: Option<InterpolationSetting<T>>,
}

fn one<T: Real>() -> T {
    T::one()
}

fn default_nu<T: Real>() -> T {
    T::c(0.05)
}

fn yes() -> bool {
    true
}

impl<T: Real> ExperimentPlan<T> {
    /// `delta = 1`, `eps = 2^-k` for `k = 2..=12`, `nu = 0.05`.
    pub fn standard(params: FractionalParams<T>, q_list: Vec<T>) -> Self {
        Self {
            params,
            q_list,
            sweep_mode: SweepMode::FixDeltaSweepEps,
            eps_values: (2..=12).map(|k| T::two().powi(-k)).collect(),
            delta: T::one(),
            nu: default_nu(),
            quad: QuadratureConfig::default(),
            seed: 0,
            deficits: true,
            interpolation: None,
        }
    }

    pub fn delta_for(&self, eps: T) -> T {
        match self.sweep_mode {
            SweepMode::FixDeltaSweepEps => self.delta,
            SweepMode::FixRatio { ratio } => eps / ratio,
            SweepMode::EpsEqualsDeltaPowBeta { beta } => eps.powf(T::one() / beta),
        }
    }

    /// `(eps, delta)` pairs in plan order.
    pub fn tuples(&self) -> Vec<(T, T)> {
        self.eps_values.iter().map(|&e| (e, self.delta_for(e))).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        let p = self.params.p;
        if let Some(q) = self.q_list.iter().find(|&&q| !(q > T::one() && q <= p)) {
            return Err(Error::InvalidRange(format!("q = {q} outside (1, p = {p}]")));
        }
        match self.sweep_mode {
            SweepMode::FixDeltaSweepEps if !(self.delta > T::zero() && self.delta.is_finite()) => {
                return Err(Error::InvalidRange(format!("delta must be positive, got {}", self.delta)));
            }
            SweepMode::FixRatio { ratio } if !(ratio > T::zero() && ratio <= T::one()) => {
                return Err(Error::InvalidRange(format!("eps / delta ratio must lie in (0, 1], got {ratio}")));
            }
            SweepMode::EpsEqualsDeltaPowBeta { beta } if !(beta > T::zero() && beta.is_finite()) => {
                return Err(Error::InvalidRange(format!("beta must be positive, got {beta}")));
            }
            _ => {}
        }
        for (eps, delta) in self.tuples() {
            if !(eps > T::zero() && eps.is_finite()) {
                return Err(Error::InvalidRange(format!("eps must be positive, got {eps}")));
            }
            if !(eps <= delta) {
                return Err(Error::InvalidRange(format!("eps <= delta fails: eps = {eps}, delta = {delta}")));
            }
        }
        if !(self.nu > T::zero()) {
            return Err(Error::InvalidRange(format!("nu must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    /// Whether every `q` is above the threshold `N (p - 1) / (N - s)`.
    pub fn all_above_threshold(&self) -> bool {
        let th = self.params.threshold();
        self.q_list.iter().all(|&q| q > th)
    }

    pub fn all_at_or_below_threshold(&self) -> bool {
        let th = self.params.threshold();
        self.q_list.iter().all(|&q| q <= th)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(plan)
    }
}
