//! Log-log slope fits with a three-way verdict against a theoretical exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slope tolerance added to three standard errors in verdicts.
pub const SLOPE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line<T> {
    pub slope: T,
    pub intercept: T,
    pub slope_stderr: T,
    pub r_squared: T,
}

/// Ordinary least squares `y = intercept + slope x`.
pub(crate) fn least_squares<T: Real>(xy: &[(T, T)]) -> Line<T> {
    let n = T::from_usize_lossy(xy.len());
    let mx = xy.iter().map(|p| p.0).sum::<T>() / n;
    let my = xy.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = xy.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let intercept = my - slope * mx;
    let sse: T = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = xy.len().saturating_sub(2).max(1);
    let slope_stderr = if sxx > T::zero() {
        (sse / T::from_usize_lossy(dof) / sxx).sqrt()
    } else {
        T::infinity()
    };
    let r_squared = if syy > T::zero() { T::one() - sse / syy } else { T::one() };
    Line { slope, intercept, slope_stderr, r_squared }
}

/// Outcome of comparing a fitted slope with theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Slope within `0.05 + 3 stderr` of the theoretical exponent.
    Consistent,
    /// Slope exceeds the exponent: the upper bound holds with room to spare.
    BoundSatisfied,
    /// Slope below `theory - 3 stderr - 0.05`.
    Violated,
}

impl Verdict {
    pub fn judge<T: Real>(slope: T, stderr: T, theory: T) -> Self {
        let band = T::c(SLOPE_SLACK) + T::c(3.0) * stderr;
        if slope < theory - band {
            Verdict::Violated
        } else if slope <= theory + band {
            Verdict::Consistent
        } else {
            Verdict::BoundSatisfied
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::BoundSatisfied => "bound_satisfied",
            Verdict::Violated => "violated",
        }
    }
}

/// Fitted log-log slope against a theoretical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingFit<T> {
    pub slope: T,
    pub intercept: T,
    pub stderr: T,
    pub r_squared: T,
    pub theoretical_exponent: T,
    pub verdict: Verdict,
    pub points: usize,
}

/// Least squares of `log y` on `log x` over the rows with positive finite
/// coordinates; needs at least four of them.
pub fn fit_slope<T: Real>(x: &[T], y: &[T], theoretical_exponent: T) -> Result<ScalingFit<T>> {
    let xy: Vec<(T, T)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > T::zero() && **b > T::zero() && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if xy.len() < 4 {
        return Err(Error::InsufficientData(format!("{} usable rows, need at least 4", xy.len())));
    }
    let line = least_squares(&xy);
    Ok(ScalingFit {
        slope: line.slope,
        intercept: line.intercept,
        stderr: line.slope_stderr,
        r_squared: line.r_squared,
        theoretical_exponent,
        verdict: Verdict::judge(line.slope, line.slope_stderr, theoretical_exponent),
        points: xy.len(),
    })
}
