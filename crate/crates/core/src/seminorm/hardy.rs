//! One-dimensional radial norms: weighted Hardy norms and gradient norms.

use super::driver::{log_radial_integral, Layout, RadialOutcome};
use super::gagliardo::finish;
use super::{QuadratureConfig, SeminormValue};
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::radial::RadialFunction;
use crate::scalar::{abs_pow, sphere_area, Real};

/// `|S^{N-1}| int_start^inf f(rho) rho^{N-1-alpha} drho` for an integrand
/// `f` laid out like `layout`, signed and unclamped.
fn weighted_raw<T: Real, F: Fn(T) -> T + Sync>(
    f: F,
    layout: &Layout<T>,
    n: usize,
    alpha: T,
    cfg: &QuadratureConfig<T>,
    root: T,
) -> RadialOutcome<T> {
    let w = T::from_usize_lossy(n) - alpha;
    let g = |rho: T| {
        let v = f(rho);
        if v == T::zero() {
            T::zero()
        } else {
            v * rho.powf(w)
        }
    };
    let mut out = log_radial_integral(&g, layout, cfg, root, false);
    let omega = sphere_area::<T>(n - 1);
    out.value = out.value * omega;
    out.error = out.error * omega;
    out
}

/// As [`weighted_raw`], packaged as a norm with `root` used by the
/// divergence test.
fn weighted_integral<T: Real, F: Fn(T) -> T + Sync>(
    f: F,
    layout: &Layout<T>,
    n: usize,
    alpha: T,
    cfg: &QuadratureConfig<T>,
    root: T,
) -> SeminormValue<T> {
    finish(weighted_raw(f, layout, n, alpha, cfg, root), root, cfg.target_rel_tol)
}

/// `(int |u|^r |x|^-alpha dx)^(1/r)` for a radial function on `R^n`.
pub fn weighted_power_integral<T: Real, R: RadialFunction<T>>(
    u: &R,
    n: usize,
    r: T,
    alpha: T,
    cfg: &QuadratureConfig<T>,
) -> Result<SeminormValue<T>> {
    if !(r >= T::one()) || !r.is_finite() {
        return Err(Error::InvalidExponent(format!("r >= 1 fails: r = {r}")));
    }
    if !(alpha >= T::zero()) || !(alpha < T::from_usize_lossy(n)) {
        return Err(Error::InvalidExponent(format!("0 <= alpha < N fails: alpha = {alpha}")));
    }
    cfg.validate()?;
    Ok(weighted_integral(|rho| abs_pow(u.value(rho), r), &Layout::of(u), n, alpha, cfg, r))
}

/// `||u||_{r,alpha} = (int |u|^r |x|^-alpha dx)^(1/r)`.
pub fn hardy_norm<T: Real>(profile: &RadialProfile<T>, r: T, alpha: T, cfg: &QuadratureConfig<T>) -> Result<SeminormValue<T>> {
    weighted_power_integral(profile, profile.params.n, r, alpha, cfg)
}

/// `int |x|^-alpha u^(r-1) phi dx`.
pub fn hardy_pairing<T: Real, R: RadialFunction<T>, P: RadialFunction<T>>(
    u: &R,
    phi: &P,
    n: usize,
    r: T,
    alpha: T,
    cfg: &QuadratureConfig<T>,
) -> Result<(T, T)> {
    cfg.validate()?;
    let layout = Layout::of(u).merge(Layout::of(phi));
    let f = |rho: T| {
        let v = u.value(rho);
        abs_pow(v, r - T::one()) * v.signum() * phi.value(rho)
    };
    let out = weighted_raw(f, &layout, n, alpha, cfg, T::one());
    Ok((out.value, out.error))
}

/// `||u||_{r,alpha}^r - ||v||_{r,alpha}^r` for two functions that coincide on
/// `[0, start]`, integrated over `rho > start` only.
pub fn deficit_hardy<T: Real, V: RadialFunction<T>, U: RadialFunction<T>>(
    v: &V,
    u: &U,
    n: usize,
    r: T,
    alpha: T,
    start: T,
    cfg: &QuadratureConfig<T>,
) -> Result<(T, T)> {
    cfg.validate()?;
    if !(start > T::zero()) {
        return Err(Error::InvalidConfig(format!("deficit start must be positive, got {start}")));
    }
    let mut layout = Layout::of(u).merge(Layout::of(v));
    layout.start = Some(start);
    let f = |rho: T| abs_pow(u.value(rho), r) - abs_pow(v.value(rho), r);
    let out = weighted_raw(f, &layout, n, alpha, cfg, T::one());
    Ok((out.value, out.error))
}

/// `||grad u||_{L^q} = (|S^{N-1}| int |u'(rho)|^q rho^{N-1} drho)^(1/q)`.
pub fn local_gradient_norm<T: Real>(profile: &RadialProfile<T>, q: T, cfg: &QuadratureConfig<T>) -> Result<SeminormValue<T>> {
    if !(q >= T::one()) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("q >= 1 fails: q = {q}")));
    }
    cfg.validate()?;
    let f = |rho: T| abs_pow(profile.derivative(rho), q);
    Ok(weighted_integral(f, &Layout::of(profile), profile.params.n, T::zero(), cfg, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_params, FractionalParams};
    use crate::profile::at_profile;
    use crate::quadrature::integrate_adaptive;

    #[test]
    fn canonical_hardy_mass_is_pi() {
        let u = at_profile(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap());
        let h = hardy_norm(&u, 5.0, 0.0, &QuadratureConfig::default()).unwrap();
        assert!(h.converged);
        assert!((h.integral - std::f64::consts::PI).abs() < 1e-7, "{}", h.integral);
        assert!((h.value - std::f64::consts::PI.powf(0.2)).abs() < 1e-8);
    }

    #[test]
    fn hardy_is_scale_invariant() {
        let u = at_profile(make_params::<f64>(2, 0.75, 2.0, 0.5).unwrap());
        let cfg = QuadratureConfig::default();
        let a = hardy_norm(&u, 6.0, 0.5, &cfg).unwrap();
        let b = hardy_norm(&u.rescale(0.01), 6.0, 0.5, &cfg).unwrap();
        assert!(((a.value - b.value) / a.value).abs() < 1e-7);
    }

    #[test]
    fn zero_profile() {
        let p = make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap();
        let z = RadialProfile::constant(p, 0.0);
        let h = hardy_norm(&z, 5.0, 0.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(h.value, 0.0);
        assert!(h.converged);
    }

    #[test]
    fn local_gradient_of_three_dimensional_bubble() {
        // |U'| = rho (1+rho^2)^{-3/2}; int_0^inf |U'|^2 rho^2 4 pi = 4 pi * 3 pi / 16
        let l = FractionalParams::<f64>::local(3, 2.0, 0.0).unwrap();
        let u = at_profile(l);
        let g = local_gradient_norm(&u, 2.0, &QuadratureConfig::default()).unwrap();
        let exact = 4.0 * std::f64::consts::PI * 3.0 * std::f64::consts::PI / 16.0;
        assert!((g.integral - exact).abs() < 1e-7 * exact, "{} vs {exact}", g.integral);
    }

    #[test]
    fn local_gradient_threshold() {
        // finite iff q > N (p - 1) / (N - 1) = 1.5
        let l = FractionalParams::<f64>::local(3, 2.0, 0.0).unwrap();
        let u = at_profile(l);
        let cfg = QuadratureConfig::default();
        assert!(local_gradient_norm(&u, 1.6, &cfg).unwrap().converged);
        let d = local_gradient_norm(&u, 1.4, &cfg).unwrap();
        assert!(d.diverged && !d.converged);
        let reference = integrate_adaptive(
            |x: f64| {
                if x >= 1.0 {
                    return 0.0;
                }
                let r = x / (1.0 - x);
                (u.derivative(r).abs()).powf(1.6) * r * r / (1.0 - x).powi(2)
            },
            0.0,
            1.0,
            &[0.5],
            0.0,
            1e-12,
            4000,
        );
        let g = local_gradient_norm(&u, 1.6, &cfg).unwrap();
        let exact = 4.0 * std::f64::consts::PI * reference.value;
        assert!(((g.integral - exact) / exact).abs() < 1e-3, "{} vs {exact}", g.integral);
    }
}
