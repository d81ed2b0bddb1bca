//! Minimization of the Hardy-Sobolev quotient `[u]_{s,p}^p / ||u||_{r,alpha}^p`
//! over radial profiles sampled on a log grid.

mod descent;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use descent::{minimize, OptimizerConfig, OptimizerResult};

use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::profile::RadialProfile;
use crate::radial::{LogBump, RadialFunction};
use crate::scalar::{geomspace, Real};
use crate::seminorm::{gagliardo, gagliardo_pairing, hardy_norm, hardy_pairing, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// As constructed.
    Raw,
    /// Unit discrete Hardy mass.
    HardyUnit,
    /// `[u]_{s,p}^p = ||u||_{r,alpha}^r`.
    ElNormalized,
}

/// Non-negative node values of a radial profile on a grid of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscreteProfile<T> {
    pub params: FractionalParams<T>,
    pub radii: Vec<T>,
    pub values: Vec<T>,
    pub normalization: Normalization,
}

impl<T: Real> DiscreteProfile<T> {
    pub fn new(params: FractionalParams<T>, radii: Vec<T>, values: Vec<T>, normalization: Normalization) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "need >= 2 radii matching the values ({} radii, {} values)",
                radii.len(),
                values.len()
            )));
        }
        if !(radii[0] > T::zero()) || radii.windows(2).any(|w| !(w[1] > w[0])) || !radii[radii.len() - 1].is_finite() {
            return Err(Error::InvalidConfig("radii must be positive, finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidConfig("values must be finite and non-negative".into()));
        }
        if !values.iter().any(|v| *v > T::zero()) {
            return Err(Error::DegenerateNorm("profile vanishes identically".into()));
        }
        Ok(Self { params, radii, values, normalization })
    }

    /// Samples a continuous profile on `radii`.
    pub fn from_profile(profile: &RadialProfile<T>, radii: Vec<T>) -> Result<Self> {
        let values = radii.iter().map(|&r| profile.evaluate(r)).collect();
        Self::new(profile.params, radii, values, Normalization::Raw)
    }

    /// The hat function of the given radius on `radii`.
    pub fn hat(params: FractionalParams<T>, radius: T, radii: Vec<T>) -> Result<Self> {
        Self::from_profile(&RadialProfile::hat(params, radius)?, radii)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * c).collect(), normalization: Normalization::Raw, ..self.clone() }
    }

    /// Interpolating profile through the non-increasing envelope of the
    /// values, continued beyond the grid by the optimizer's power tail.
    pub fn to_radial(&self) -> Result<RadialProfile<T>> {
        let mut env = self.values.clone();
        for i in 1..env.len() {
            env[i] = env[i].min(env[i - 1]);
        }
        let origin = env[0];
        RadialProfile::sampled(self.params, self.radii.clone(), env, Some(origin), self.params.tail_exponent())
    }

    /// Rescales so that `[u]_{s,p}^p = ||u||_{r,alpha}^r` for the continuous
    /// interpolant; returns the factor.
    pub fn el_normalized(&self, cfg: &QuadratureConfig<T>) -> Result<(Self, T)> {
        let u = self.to_radial()?;
        let g = gagliardo(&u, self.params.s, self.params.p, cfg)?;
        let h = hardy_norm(&u, self.params.r(), self.params.alpha, cfg)?;
        let (_, c) = u.normalize(g.integral, h.integral)?;
        let mut out = self.scaled(c);
        out.normalization = Normalization::ElNormalized;
        Ok((out, c))
    }

    /// Radius where the values first drop to half of the leading one.
    pub fn half_radius(&self) -> T {
        let top = self.values[0];
        let i = self.values.iter().position(|&v| v <= T::half() * top).unwrap_or(self.values.len() - 1);
        self.radii[i]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,value\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            out += &format!("{r},{v}\n");
        }
        out
    }
}

/// `n` radii log-spaced over `[rho_min, rho_max]`.
pub fn log_grid<T: Real>(rho_min: T, rho_max: T, n: usize) -> Vec<T> {
    geomspace(rho_min, rho_max, n)
}

/// `[u]_{s,p}^p / ||u||_{r,alpha}^p` of the continuous interpolant.
pub fn rayleigh_quotient<T: Real>(profile: &DiscreteProfile<T>, cfg: &QuadratureConfig<T>) -> Result<T> {
    profile_quotient(&profile.to_radial()?, cfg)
}

/// The quotient for any profile.
pub fn profile_quotient<T: Real>(u: &RadialProfile<T>, cfg: &QuadratureConfig<T>) -> Result<T> {
    let params = u.params;
    let h = hardy_norm(u, params.r(), params.alpha, cfg)?;
    if !(h.value > T::zero()) || !h.value.is_finite() {
        return Err(Error::DegenerateNorm(format!("Hardy norm {}", h.value)));
    }
    let g = gagliardo(u, params.s, params.p, cfg)?;
    if g.diverged {
        return Ok(T::infinity());
    }
    Ok(g.integral / h.value.powf(params.p))
}

/// Five log bumps of width one octave-pair centred at `scale * 2^k`,
/// `k = -2..=2`.
pub fn default_test_bumps<T: Real>(scale: T) -> Vec<LogBump<T>> {
    (-2..=2).map(|k| LogBump { center: scale * T::two().powi(k), width: T::one() }).collect()
}

/// `max_phi |A(U, phi) - B(U, phi)| / A(U, U)` with `A` the Gagliardo pairing
/// and `B(U, phi) = int |x|^-alpha U^(r-1) phi`.
pub fn el_residual<T: Real, P: RadialFunction<T>>(
    profile: &DiscreteProfile<T>,
    tests: &[P],
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    if profile.normalization != Normalization::ElNormalized {
        return Err(Error::InvalidConfig("the residual needs an el_normalized profile".into()));
    }
    let params = profile.params;
    let u = profile.to_radial()?;
    let auu = gagliardo(&u, params.s, params.p, cfg)?.integral;
    if !(auu > T::zero()) {
        return Err(Error::DegenerateNorm("A(U, U) vanishes".into()));
    }
    let mut worst = T::zero();
    for phi in tests {
        let (a, _) = gagliardo_pairing(&u, phi, params.n, params.s, params.p, cfg)?;
        let (b, _) = hardy_pairing(&u, phi, params.n, params.r(), params.alpha, cfg)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst / auu)
}

/// Seeded random non-increasing profiles with compact support, for
/// spot checks of the Hardy-Sobolev inequality.
pub fn random_test_profiles<T: Real>(params: FractionalParams<T>, count: usize, seed: u64) -> Result<Vec<RadialProfile<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let nodes = rng.gen_range(6..=24);
            let outer: f64 = rng.gen_range(0.5..8.0);
            let radii = geomspace(T::c(outer * 1e-2), T::c(outer), nodes);
            let mut level = 1.0f64;
            let mut values: Vec<T> = (0..nodes)
                .map(|_| {
                    let out = T::c(level);
                    level *= rng.gen_range(0.3..1.0);
                    out
                })
                .collect();
            values[nodes - 1] = T::zero();
            RadialProfile::sampled(params, radii, values, None, params.tail_exponent())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::profile::at_profile;

    fn canonical() -> FractionalParams<f64> {
        make_params(1, 0.3, 2.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_zero_profile() {
        let r = DiscreteProfile::new(canonical(), vec![1.0, 2.0], vec![0.0, 0.0], Normalization::Raw);
        assert!(matches!(r, Err(Error::DegenerateNorm(_))));
    }

    #[test]
    fn quotient_is_homogeneous_and_dilation_invariant() {
        let cfg = QuadratureConfig::default();
        let grid = log_grid(1e-3, 10.0, 200);
        let hat = DiscreteProfile::hat(canonical(), 1.0, grid.clone()).unwrap();
        let q = rayleigh_quotient(&hat, &cfg).unwrap();
        let q10 = rayleigh_quotient(&hat.scaled(10.0), &cfg).unwrap();
        assert!((q / q10 - 1.0).abs() < 1e-9);
        let wide = DiscreteProfile::hat(canonical(), 3.0, grid.iter().map(|r| r * 3.0).collect()).unwrap();
        let qw = rayleigh_quotient(&wide, &cfg).unwrap();
        assert!((q / qw - 1.0).abs() < 1e-6, "{q} {qw}");
    }

    #[test]
    fn random_profiles_are_deterministic() {
        let a = random_test_profiles(canonical(), 3, 7).unwrap();
        let b = random_test_profiles(canonical(), 3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|u| u.support_radius().is_some()));
    }

    #[test]
    fn el_gap_vanishes_for_zero_test_and_needs_normalization() {
        let cfg = QuadratureConfig::default();
        let u = DiscreteProfile::from_profile(&at_profile(canonical()), log_grid(1e-4, 1e6, 400)).unwrap();
        let zero = RadialProfile::constant(canonical(), 0.0);
        assert!(el_residual(&u, &[zero.clone()], &cfg).is_err());
        let (n, _) = u.el_normalized(&cfg).unwrap();
        assert_eq!(el_residual(&n, &[zero], &cfg).unwrap(), 0.0);
    }
}
