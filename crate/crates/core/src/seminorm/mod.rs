//! Gagliardo, Hardy, Besov and gradient (semi)norms of radial functions.

mod besov;
mod driver;
mod gagliardo;
mod hardy;
pub mod oracle;

use serde::{Deserialize, Serialize};

pub use besov::{besov, besov_on_grid, default_h_grid, BesovOrder};
pub use driver::KernelCache;
pub use gagliardo::{gagliardo_radial, deficit_gagliardo, gagliardo, gagliardo_pairing, mixed_energy, MixedEnergy};
pub use hardy::{deficit_hardy, hardy_norm, hardy_pairing, local_gradient_norm, weighted_power_integral};
pub use oracle::{brute_force_oracle, brute_force_oracle_with};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Resolution and accuracy targets shared by every quadrature in the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct QuadratureConfig<T> {
    /// Outer panels per 64 octaves of radius; at least 64.
    pub grid_points: usize,
    /// Radius, in units of the profile's outer scale, where the fixed block
    /// of outer panels ends and tail doubling starts.
    pub domain_cut: T,
    /// Dyadic bands resolved towards the diagonal `rho = tau`.
    pub diagonal_levels: usize,
    pub target_rel_tol: T,
    /// Minimum number of angular panels in the Besov integrals for `N >= 2`.
    pub angular_points: usize,
    /// Cap on tail doublings before a sum is declared exhausted.
    pub max_doublings: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            grid_points: 128,
            domain_cut: T::c(64.0),
            diagonal_levels: 36,
            target_rel_tol: T::c(1e-6),
            angular_points: 16,
            max_doublings: 400,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 64 {
            return Err(Error::InvalidConfig(format!("grid_points >= 64 fails: {}", self.grid_points)));
        }
        if self.diagonal_levels < 2 {
            return Err(Error::InvalidConfig(format!("diagonal_levels >= 2 fails: {}", self.diagonal_levels)));
        }
        if !(self.target_rel_tol > T::zero() && self.target_rel_tol < T::c(0.1)) {
            return Err(Error::InvalidConfig(format!("target_rel_tol must lie in (0, 0.1), got {}", self.target_rel_tol)));
        }
        if !(self.domain_cut > T::one()) || !self.domain_cut.is_finite() {
            return Err(Error::InvalidConfig(format!("domain_cut must exceed 1, got {}", self.domain_cut)));
        }
        if self.angular_points == 0 || self.max_doublings < 4 {
            return Err(Error::InvalidConfig("angular_points >= 1 and max_doublings >= 4 required".into()));
        }
        Ok(())
    }

    pub fn with_tol(self, tol: T) -> Self {
        Self { target_rel_tol: tol, ..self }
    }

    pub(crate) fn panels_per_octave(&self) -> usize {
        (self.grid_points / 64).max(1)
    }
}

/// A computed (semi)norm with its error estimate and convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SeminormValue<T> {
    /// The norm itself, i.e. the `q`-th root of the underlying integral.
    pub value: T,
    /// The integral before taking the root.
    pub integral: T,
    pub est_rel_error: T,
    pub converged: bool,
    /// Set when the tail grows without bound under radius doubling.
    pub diverged: bool,
    pub evaluations: usize,
    /// Share of the integral from radii above half the last radius reached.
    pub tail_contribution: T,
    /// Step `|h|` attaining a Besov supremum.
    pub argmax_h: Option<T>,
    /// Besov supremum attained at the edge of the step grid.
    pub boundary_warning: bool,
}

impl<T: Real> SeminormValue<T> {
    /// `value^q`.
    pub fn power(&self, q: T) -> T {
        self.value.powf(q)
    }
}

pub(crate) fn check_fractional(s: impl Real, q: impl Real) -> Result<()> {
    let (s, q) = (s.to_f64_lossy(), q.to_f64_lossy());
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidExponent(format!("0 < s < 1 fails: s = {s}")));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("q >= 1 fails: q = {q}")));
    }
    Ok(())
}
