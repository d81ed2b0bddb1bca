//! Truncation of the concentrating family: by composition with the piecewise
//! linear map `G_{eps,delta}`, and by multiplication with a smooth cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{RadialProfile, Representation};
use crate::radial::RadialFunction;
use crate::scalar::{geomspace, Real};

const SPEC_MATCH_TOL: f64 = 1e-10;
const THETA_TOL: f64 = 1e-3;
const THETA_MAX: f64 = 1e6;

/// Scales and levels defining `G_{eps,delta}`:
/// `t_low = U_eps(theta_bar delta)`, `t_high = U_eps(delta)` and
/// `m = t_high / (t_high - t_low)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec<T>", bound = "T: Real")]
pub struct TruncationSpec<T> {
    pub eps: T,
    pub delta: T,
    pub theta_bar: T,
    pub t_low: T,
    pub t_high: T,
    pub m: T,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawSpec<T> {
    eps: T,
    delta: T,
    theta_bar: T,
    t_low: T,
    t_high: T,
    #[serde(default)]
    m: Option<T>,
}

impl<T: Real> TryFrom<RawSpec<T>> for TruncationSpec<T> {
    type Error = Error;

    fn try_from(raw: RawSpec<T>) -> Result<Self> {
        let spec = TruncationSpec::from_levels(raw.eps, raw.delta, raw.theta_bar, raw.t_low, raw.t_high)?;
        if let Some(m) = raw.m {
            if (m - spec.m).abs() > T::c(1e-9) * spec.m {
                return Err(Error::InvalidConfig(format!("slope m = {m} disagrees with the levels ({})", spec.m)));
            }
        }
        Ok(spec)
    }
}

impl<T: Real> TruncationSpec<T> {
    /// Spec for the rescaled profile `u_eps`, reading the levels off it.
    pub fn new(u_eps: &RadialProfile<T>, eps: T, delta: T, theta_bar: T) -> Result<Self> {
        let t_high = u_eps.evaluate(delta);
        let t_low = u_eps.evaluate(theta_bar * delta);
        Self::from_levels(eps, delta, theta_bar, t_low, t_high)
    }

    pub fn from_levels(eps: T, delta: T, theta_bar: T, t_low: T, t_high: T) -> Result<Self> {
        if !(eps > T::zero()) || !(delta > T::zero()) || !eps.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidConfig(format!("eps and delta must be positive, got {eps}, {delta}")));
        }
        if eps > delta {
            return Err(Error::InvalidConfig(format!("eps <= delta fails: eps = {eps}, delta = {delta}")));
        }
        if !(theta_bar > T::one()) || !theta_bar.is_finite() {
            return Err(Error::InvalidConfig(format!("theta_bar must exceed 1, got {theta_bar}")));
        }
        if !(t_low >= T::zero()) || !(t_low < t_high) || !t_high.is_finite() {
            return Err(Error::InvalidConfig(format!("levels must satisfy 0 <= t_low < t_high, got {t_low}, {t_high}")));
        }
        let m = t_high / (t_high - t_low);
        Ok(Self { eps, delta, theta_bar, t_low, t_high, m })
    }

    /// Radius `theta_bar delta` beyond which the truncation vanishes.
    pub fn outer_radius(&self) -> T {
        self.theta_bar * self.delta
    }

    /// `G_{eps,delta}(t)`.
    #[inline]
    pub fn apply(&self, t: T) -> T {
        if t <= self.t_low {
            T::zero()
        } else if t >= self.t_high {
            t
        } else {
            self.m * (t - self.t_low)
        }
    }

    /// `G'(t)` away from the two knots.
    #[inline]
    pub fn slope_at(&self, t: T) -> T {
        if t <= self.t_low {
            T::zero()
        } else if t >= self.t_high {
            T::one()
        } else {
            self.m
        }
    }

    /// Spec of the profile rescaled by `lambda`, whose values scale by `factor`.
    pub(crate) fn rescaled(&self, lambda: T, factor: T) -> Self {
        Self {
            eps: self.eps * lambda,
            delta: self.delta * lambda,
            t_low: self.t_low * factor,
            t_high: self.t_high * factor,
            ..*self
        }
    }
}

/// The scalar map `G_{eps,delta}` on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationMap<T> {
    pub t_low: T,
    pub t_high: T,
    pub m: T,
}

impl<T: Real> TruncationMap<T> {
    pub fn apply(&self, t: T) -> T {
        if t <= self.t_low {
            T::zero()
        } else if t >= self.t_high {
            t
        } else {
            self.m * (t - self.t_low)
        }
    }

    pub fn lipschitz(&self) -> T {
        self.m.max(T::one())
    }
}

pub fn build_g<T: Real>(spec: &TruncationSpec<T>) -> TruncationMap<T> {
    TruncationMap { t_low: spec.t_low, t_high: spec.t_high, m: spec.m }
}

fn halves<T: Real>(u: &RadialProfile<T>, theta: T, grid: &[T]) -> bool {
    let limit = theta.powf(-u.tail_exponent);
    if limit > T::half() {
        return false;
    }
    grid.iter().all(|&rho| {
        let base = u.evaluate(rho);
        base == T::zero() || u.evaluate(theta * rho) <= T::half() * base
    })
}

/// Smallest `theta` (to within 1e-3) with `U(theta rho) <= U(rho) / 2` for
/// all `rho >= 1`, checked on 64 points per decade of `[1, 1e6]` together with
/// the power-law limit `theta^(-tail_exponent)`.
pub fn find_theta_bar<T: Real>(profile: &RadialProfile<T>) -> Result<T> {
    if !(profile.tail_exponent > T::zero()) || profile.amplitude == T::zero() {
        return Err(Error::NoDecay(format!(
            "tail exponent {} gives no decay of U(theta rho) / U(rho)",
            profile.tail_exponent
        )));
    }
    let grid = geomspace(T::one(), T::c(1e6), 6 * 64 + 1);
    let mut hi = T::two();
    while !halves(profile, hi, &grid) {
        hi = hi * T::two();
        if hi > T::c(THETA_MAX) {
            return Err(Error::NoDecay("ratio never falls below 1/2 for theta <= 1e6".into()));
        }
    }
    let mut lo = T::one();
    while hi - lo > T::c(THETA_TOL) {
        let mid = (lo + hi) * T::half();
        if halves(profile, mid, &grid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `U_{eps,delta} = G_{eps,delta} o U_eps`.
///
/// The composition stays symbolic for every base representation, so the core
/// on `[0, delta]` is reproduced exactly and `delta`, `theta_bar delta` are
/// reported as knots.
pub fn truncate_by_composition<T: Real>(u_eps: &RadialProfile<T>, spec: &TruncationSpec<T>) -> Result<RadialProfile<T>> {
    let outer = spec.outer_radius();
    let (high, low) = (u_eps.evaluate(spec.delta), u_eps.evaluate(outer));
    let tol = T::c(SPEC_MATCH_TOL);
    if (high - spec.t_high).abs() > tol * spec.t_high.abs() || (low - spec.t_low).abs() > tol * spec.t_high.abs() {
        return Err(Error::SpecMismatch(format!(
            "U_eps(delta) = {high}, U_eps(theta delta) = {low}; spec has {} and {}",
            spec.t_high, spec.t_low
        )));
    }
    Ok(RadialProfile {
        params: u_eps.params,
        repr: Representation::Composed { base: Box::new(u_eps.clone()), spec: *spec },
        amplitude: T::one(),
        tail_exponent: u_eps.tail_exponent,
    })
}

/// `phi(rho / delta) U_eps(rho)` with `phi = 1` on `[0, 1]`, `0` on `[2, inf)`
/// and the cubic smoothstep in between.
pub fn truncate_by_multiplication<T: Real>(u_eps: &RadialProfile<T>, delta: T) -> Result<RadialProfile<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    Ok(RadialProfile {
        params: u_eps.params,
        repr: Representation::CutOff { base: Box::new(u_eps.clone()), delta },
        amplitude: T::one(),
        tail_exponent: u_eps.tail_exponent,
    })
}

/// Whether `truncated` vanishes on `[outer, 1e3 outer]` and agrees with
/// `original` to 1e-12 on `[0, inner]`, audited on 1024 radii.
pub fn support_check<T: Real>(truncated: &RadialProfile<T>, original: &RadialProfile<T>, inner: T, outer: T) -> bool {
    let n = 512;
    let agree = (0..n).all(|i| {
        let rho = inner * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
        let (a, b) = (truncated.evaluate(rho), original.evaluate(rho));
        (a - b).abs() <= T::c(1e-12) * b.abs().max(T::one())
    });
    agree && geomspace(outer, outer * T::c(1e3), n).into_iter().all(|rho| truncated.evaluate(rho) == T::zero())
}

/// The truncated family member for a base profile: returns `U_eps`, the spec
/// and `U_{eps,delta}`.
pub fn truncated_family<T: Real>(
    base: &RadialProfile<T>,
    theta_bar: T,
    eps: T,
    delta: T,
) -> Result<(RadialProfile<T>, TruncationSpec<T>, RadialProfile<T>)> {
    let u_eps = base.rescale(eps);
    let spec = TruncationSpec::new(&u_eps, eps, delta, theta_bar)?;
    let v = truncate_by_composition(&u_eps, &spec)?;
    Ok((u_eps, spec, v))
}

impl<T: Real> RadialProfile<T> {
    /// The truncation spec, if this is a composed profile.
    pub fn truncation_spec(&self) -> Option<&TruncationSpec<T>> {
        match &self.repr {
            Representation::Composed { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// Radius of the ball outside which the profile vanishes, if any.
    pub fn support_radius(&self) -> Option<T> {
        RadialFunction::support(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::profile::at_profile;
    use proptest::prelude::*;

    fn canonical() -> RadialProfile<f64> {
        at_profile(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap())
    }

    #[test]
    fn theta_bar_values() {
        let t = find_theta_bar(&canonical()).unwrap();
        assert!((t - 63f64.sqrt()).abs() < 2e-3, "{t}");
        let pure = RadialProfile::power_law(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap(), 0.4).unwrap();
        let t = find_theta_bar(&pure).unwrap();
        assert!((t - 2f64.powf(2.5)).abs() < 2e-3, "{t}");
        let flat = RadialProfile::power_law(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap(), 0.0).unwrap();
        assert!(matches!(find_theta_bar(&flat), Err(Error::NoDecay(_))));
    }

    #[test]
    fn g_map_examples() {
        let spec = TruncationSpec::from_levels(0.1, 1.0, 3.0, 0.5, 1.0).unwrap();
        let g = build_g(&spec);
        assert_eq!(spec.m, 2.0);
        assert_eq!(g.apply(0.5), 0.0);
        assert_eq!(g.apply(1.0), 1.0);
        assert_eq!(g.apply(2.0), 2.0);
        assert_eq!(g.apply(0.75), 0.5);
        assert!(TruncationSpec::from_levels(2.0, 1.0, 3.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn composition_structure() {
        let theta = find_theta_bar(&canonical()).unwrap();
        let (u_eps, spec, v) = truncated_family(&canonical(), theta, 0.05, 1.0).unwrap();
        assert_eq!(v.evaluate(0.5), u_eps.evaluate(0.5));
        assert_eq!(v.evaluate(2.0 * theta), 0.0);
        assert!(support_check(&v, &u_eps, 1.0, theta));
        assert!(!support_check(&v, &u_eps, 1.0, 2.0));
        assert!(spec.m <= 2.0);
        let mid = 0.5 * (spec.t_low + spec.t_high);
        assert!((build_g(&spec).apply(mid) - spec.m * (spec.t_high - spec.t_low) / 2.0).abs() < 1e-14);
        let bad = TruncationSpec { t_high: spec.t_high * 1.01, ..spec };
        assert!(matches!(truncate_by_composition(&u_eps, &bad), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn multiplication_structure() {
        let u_eps = canonical().rescale(0.1);
        let v = truncate_by_multiplication(&u_eps, 1.0).unwrap();
        assert_eq!(v.evaluate(0.7), u_eps.evaluate(0.7));
        assert_eq!(v.evaluate(2.0), 0.0);
        assert!((v.evaluate(1.5) - u_eps.evaluate(1.5) / 2.0).abs() < 1e-15);
        assert!(support_check(&v, &u_eps, 1.0, 2.0));
    }

    #[test]
    fn sampled_truncation_inserts_knots() {
        let theta = find_theta_bar(&canonical()).unwrap();
        let u_eps = canonical().rescale(0.01).sample_default().unwrap();
        let spec = TruncationSpec::new(&u_eps, 0.01, 1.0, theta).unwrap();
        let v = truncate_by_composition(&u_eps, &spec).unwrap();
        let knots = v.knots();
        assert!(knots.contains(&1.0) && knots.contains(&theta));
        assert!(matches!(&v.repr, Representation::Composed { base, .. } if base.is_sampled()));
        assert!(support_check(&v, &u_eps, 1.0, theta));
    }

    #[test]
    fn rescaling_a_truncation_moves_its_scales() {
        let theta = find_theta_bar(&canonical()).unwrap();
        let (_, _, v) = truncated_family(&canonical(), theta, 0.05, 1.0).unwrap();
        let (_, _, w) = truncated_family(&canonical(), theta, 0.1, 2.0).unwrap();
        let vr = v.rescale(2.0);
        for &rho in &[0.01, 0.5, 1.9, 3.0, 9.0, 20.0] {
            assert!((vr.evaluate(rho) - w.evaluate(rho)).abs() < 1e-12, "rho={rho}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = TruncationSpec::new(&canonical().rescale(0.1), 0.1, 1.0, 7.94).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<TruncationSpec<f64>>(&text).unwrap(), spec);
    }

    proptest! {
        #[test]
        fn slope_at_most_two(k in 0u32..14, j in 0u32..4) {
            let theta = 63f64.sqrt() + 1e-3;
            let delta = 2f64.powi(j as i32 - 2);
            let eps = delta * 2f64.powi(-(k as i32));
            let (_, spec, _) = truncated_family(&canonical(), theta, eps, delta).unwrap();
            prop_assert!(spec.m >= 1.0 && spec.m <= 2.0 + 1e-12);
        }

        #[test]
        fn lipschitz_transfer(x in -20.0f64..20.0, h in -5.0f64..5.0) {
            let theta = 63f64.sqrt() + 1e-3;
            let (u_eps, spec, v) = truncated_family(&canonical(), theta, 0.05, 1.0).unwrap();
            let dv = (v.evaluate(x.abs()) - v.evaluate((x + h).abs())).abs();
            let du = (u_eps.evaluate(x.abs()) - u_eps.evaluate((x + h).abs())).abs();
            prop_assert!(dv <= spec.m * du * (1.0 + 1e-12) + 1e-15);
            prop_assert!(v.evaluate(x.abs()) <= u_eps.evaluate(x.abs()));
            prop_assert!(v.evaluate(x.abs()) >= 0.0);
        }
    }
}
