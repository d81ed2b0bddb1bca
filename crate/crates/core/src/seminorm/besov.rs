//! Besov seminorms `sup_h |h|^-sigma ||d_h u||_{L^q}` of radial functions.
//!
//! For radial `u` the norm of a difference depends only on `|h|`, so `h` runs
//! along a fixed axis. The difference is centred so that the integrand is
//! even: first order uses `u(y - h/2) - u(y + h/2)`, second order
//! `2 u(y) - u(y - h) - u(y + h)`. On the line this leaves one radial
//! integral; for `N >= 2` it is a double integral in the radius of `y` and its
//! angle with the axis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::driver::{log_radial_integral, Layout};
use super::gagliardo::finish;
use super::{QuadratureConfig, SeminormValue};
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quadrature::integrate_adaptive;
use crate::radial::RadialFunction;
use crate::scalar::{abs_pow, sphere_area, Real};

const EXTENSIONS: usize = 4;
const EXTENSION_OCTAVES: i32 = 4;

/// Order of the finite difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesovOrder {
    /// `d_h u(x) = u(x) - u(x + h)`; admissible for `0 < sigma < 1`.
    First,
    /// `d2_h u(x) = 2 u(x + h) - u(x) - u(x + 2h)`; admissible for `0 < sigma < 2`.
    Second,
}

impl BesovOrder {
    pub fn from_int(k: u32) -> Result<Self> {
        match k {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(Error::InvalidExponent(format!("difference order must be 1 or 2, got {k}"))),
        }
    }

    fn max_sigma(self) -> f64 {
        match self {
            Self::First => 1.0,
            Self::Second => 2.0,
        }
    }

    /// Offsets `k` (in units of `h`) and weights of the centred difference.
    fn stencil(self) -> &'static [(f64, f64)] {
        match self {
            Self::First => &[(-0.5, 1.0), (0.5, -1.0)],
            Self::Second => &[(0.0, 2.0), (-1.0, -1.0), (1.0, -1.0)],
        }
    }

    fn reach(self) -> f64 {
        match self {
            Self::First => 0.5,
            Self::Second => 1.0,
        }
    }
}

/// Log-spaced step magnitudes covering `[inner / 100, 100 outer]` with at
/// least 64 points and a whole number of points per octave.
pub fn default_h_grid<T: Real>(inner: T, outer: T) -> Vec<T> {
    let lo = inner * T::c(0.01);
    let hi = outer.max(inner) * T::c(100.0);
    let octaves = (hi / lo).log2();
    let per_octave = (T::c(63.0) / octaves).ceil().to_f64_lossy().max(1.0) as usize;
    let step = T::two().powf(T::one() / T::from_usize_lossy(per_octave));
    let mut out = Vec::new();
    let mut h = lo;
    loop {
        out.push(h);
        if h >= hi * (T::one() - T::c(1e-12)) {
            break out;
        }
        h = h * step;
    }
}

fn check(sigma: impl Real, q: impl Real, order: BesovOrder) -> Result<()> {
    let (sigma, q) = (sigma.to_f64_lossy(), q.to_f64_lossy());
    if !(sigma > 0.0 && sigma < order.max_sigma()) {
        return Err(Error::InvalidExponent(format!(
            "0 < sigma < {} fails for {order:?} differences: sigma = {sigma}",
            order.max_sigma()
        )));
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("q >= 1 fails: q = {q}")));
    }
    Ok(())
}

/// `||d_h u||_{L^q(R^n)}^q` (or its second-order analogue).
pub(crate) fn difference_integral<T: Real, R: RadialFunction<T>>(
    u: &R,
    n: usize,
    h: T,
    q: T,
    order: BesovOrder,
    cfg: &QuadratureConfig<T>,
) -> SeminormValue<T> {
    let stencil: Vec<(T, T)> = order.stencil().iter().map(|&(k, w)| (T::c(k) * h, T::c(w))).collect();
    let base = Layout::of(u);
    let reach = T::c(order.reach()) * h;
    let mut layout = Layout {
        inner: base.inner.min(reach),
        outer: base.outer.max(reach),
        support: base.support.map(|s| s + reach),
        knots: Vec::new(),
        start: None,
    };
    for &(k, _) in &stencil {
        let k = k.abs();
        if k > T::zero() {
            layout.knots.push(k);
            layout.knots.extend(base.knots.iter().flat_map(|&kn| [kn + k, (kn - k).abs()]));
        } else {
            layout.knots.extend(base.knots.iter().copied());
        }
    }
    layout.knots.retain(|&x| x > T::zero());
    let tol = cfg.target_rel_tol;

    let out = if n == 1 {
        let f = |y: T| {
            let d = stencil.iter().fold(T::zero(), |acc, &(k, w)| acc + w * u.value((y + k).abs()));
            if d == T::zero() {
                T::zero()
            } else {
                T::two() * y * abs_pow(d, q)
            }
        };
        log_radial_integral(&f, &layout, cfg, q, false)
    } else {
        let knots = base.knots.clone();
        let angular = cfg.angular_points;
        let nn = T::from_usize_lossy(n);
        let half_pi = T::FRAC_PI_2();
        let sin_power = n - 2;
        let f = |r: T| {
            // breaks where some shifted point crosses a knot of u, in cos(phi)
            let mut breaks: Vec<T> = (1..angular).map(|j| half_pi * T::from_usize_lossy(j) / T::from_usize_lossy(angular)).collect();
            for &(k, _) in &stencil {
                let k = k.abs();
                if k == T::zero() {
                    continue;
                }
                for &kn in knots.iter().chain(std::iter::once(&T::zero())) {
                    let c = (r * r + k * k - kn * kn) / (T::two() * k * r);
                    for c in [c, -c] {
                        if c > T::zero() && c < T::one() {
                            breaks.push(c.acos());
                        }
                    }
                }
            }
            let g = |phi: T| {
                let (sphi, cphi) = phi.sin_cos();
                let d = stencil.iter().fold(T::zero(), |acc, &(k, w)| {
                    let dist = (r * r + k * k + T::two() * k * r * cphi).max(T::zero()).sqrt();
                    acc + w * u.value(dist)
                });
                if d == T::zero() {
                    T::zero()
                } else {
                    abs_pow(d, q) * sphi.powi(sin_power as i32)
                }
            };
            let inner = integrate_adaptive(g, T::zero(), half_pi, &breaks, T::zero(), tol * T::c(0.01), breaks.len() + 256);
            if inner.value == T::zero() {
                T::zero()
            } else {
                T::two() * r.powf(nn) * inner.value
            }
        };
        let mut out = log_radial_integral(&f, &layout, cfg, q, true);
        let omega = sphere_area::<T>(n - 2);
        out.value = out.value * omega;
        out.error = out.error * omega;
        out
    };
    finish(out, q, tol)
}

/// Besov supremum over a caller-supplied step grid. Also returns the scanned
/// values `|h|^-sigma ||d_h u||_{L^q}` in grid order.
#[allow(clippy::too_many_arguments)]
pub fn besov_on_grid<T: Real, R: RadialFunction<T>>(
    u: &R,
    n: usize,
    sigma: T,
    q: T,
    order: BesovOrder,
    hs: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<(SeminormValue<T>, Vec<T>)> {
    check(sigma, q, order)?;
    cfg.validate()?;
    if hs.is_empty() || hs.iter().any(|h| !(*h > T::zero()) || !h.is_finite()) {
        return Err(Error::InvalidRange("step grid must be non-empty with positive entries".into()));
    }
    let diffs: Vec<SeminormValue<T>> = hs.par_iter().map(|&h| difference_integral(u, n, h, q, order, cfg)).collect();
    let scan: Vec<T> = hs.iter().zip(&diffs).map(|(&h, d)| d.value * h.powf(-sigma)).collect();
    let (best, _) = scan
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let at = diffs[best];
    let edge = best == 0 || best + 1 == hs.len();
    let value = SeminormValue {
        value: scan[best],
        integral: at.integral,
        est_rel_error: at.est_rel_error,
        converged: diffs.iter().all(|d| d.converged),
        diverged: diffs.iter().any(|d| d.diverged),
        evaluations: diffs.iter().map(|d| d.evaluations).sum(),
        tail_contribution: at.tail_contribution,
        argmax_h: Some(hs[best]),
        boundary_warning: edge && scan[best] > T::zero(),
    };
    Ok((value, scan))
}

/// `[u]_{B^sigma_{q,inf}}` over the default step grid, extended by four
/// octaves on whichever side the supremum sits at the edge (at most four
/// times) before `boundary_warning` is set.
pub fn besov<T: Real>(
    profile: &RadialProfile<T>,
    sigma: T,
    q: T,
    order: BesovOrder,
    cfg: &QuadratureConfig<T>,
) -> Result<SeminormValue<T>> {
    let outer = profile.support().unwrap_or_else(|| profile.outer_scale());
    let mut hs = default_h_grid(profile.inner_scale(), outer);
    let n = profile.params.n;
    let (mut value, _) = besov_on_grid(profile, n, sigma, q, order, &hs, cfg)?;
    let mut evaluations = value.evaluations;
    for _ in 0..EXTENSIONS {
        if !value.boundary_warning {
            break;
        }
        let ratio = hs[1] / hs[0];
        let per_octave = (T::two().ln() / ratio.ln()).round().to_f64_lossy().max(1.0) as usize;
        let extra = per_octave * EXTENSION_OCTAVES as usize;
        let low_edge = value.argmax_h == Some(hs[0]);
        let mut added: Vec<T> = (1..=extra)
            .map(|j| {
                let j = T::from_usize_lossy(j);
                if low_edge {
                    hs[0] * ratio.powf(-j)
                } else {
                    hs[hs.len() - 1] * ratio.powf(j)
                }
            })
            .collect();
        if low_edge {
            added.reverse();
            added.extend(hs.iter().copied());
            hs = added;
        } else {
            hs.extend(added);
        }
        let (v, _) = besov_on_grid(profile, n, sigma, q, order, &hs, cfg)?;
        evaluations += v.evaluations;
        value = v;
    }
    value.evaluations = evaluations;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn hat() -> RadialProfile<f64> {
        RadialProfile::hat(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap(), 1.0).unwrap()
    }

    // autocorrelation of the unit hat on the line
    fn hat_corr(h: f64) -> f64 {
        let h = h.abs();
        if h <= 1.0 {
            2.0 / 3.0 - h * h + h * h * h / 2.0
        } else if h <= 2.0 {
            (2.0 - h).powi(3) / 6.0
        } else {
            0.0
        }
    }

    #[test]
    fn first_difference_of_hat_matches_autocorrelation() {
        let cfg = QuadratureConfig::default();
        for h in [0.01, 0.3, 1.0, 1.7, 5.0] {
            let d = difference_integral(&hat(), 1, h, 2.0, BesovOrder::First, &cfg);
            let exact = 2.0 * (hat_corr(0.0) - hat_corr(h));
            assert!(((d.integral - exact) / exact).abs() < 1e-8, "h={h}: {} vs {exact}", d.integral);
        }
    }

    #[test]
    fn second_difference_of_hat_matches_autocorrelation() {
        // ||2u(.+h) - u - u(.+2h)||^2 = 6A(0) - 8A(h) + 2A(2h)
        let cfg = QuadratureConfig::default();
        for h in [0.05, 0.5, 0.9, 3.0] {
            let d = difference_integral(&hat(), 1, h, 2.0, BesovOrder::Second, &cfg);
            let exact = 6.0 * hat_corr(0.0) - 8.0 * hat_corr(h) + 2.0 * hat_corr(2.0 * h);
            assert!(((d.integral - exact) / exact).abs() < 1e-8, "h={h}: {} vs {exact}", d.integral);
        }
    }

    #[test]
    fn planar_difference_matches_cartesian_sum() {
        let p = make_params::<f64>(2, 0.75, 2.0, 0.5).unwrap();
        let u = RadialProfile::hat(p, 1.0).unwrap();
        let cfg = QuadratureConfig::default();
        let h = 0.4;
        let d = difference_integral(&u, 2, h, 2.0, BesovOrder::First, &cfg);
        // independent Cartesian midpoint sum
        let m = 1600;
        let step = 3.0 / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            let x = -1.5 + (i as f64 + 0.5) * step;
            for j in 0..m {
                let y = -1.5 + (j as f64 + 0.5) * step;
                let a = u.evaluate((x * x + y * y).sqrt());
                let b = u.evaluate(((x + h) * (x + h) + y * y).sqrt());
                sum += (a - b) * (a - b);
            }
        }
        sum *= step * step;
        assert!(((d.integral - sum) / sum).abs() < 2e-4, "{} vs {sum}", d.integral);
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let c = RadialProfile::constant(make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap(), 3.0);
        let b = besov(&c, 0.5, 2.0, BesovOrder::Second, &QuadratureConfig::default()).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(!b.boundary_warning);
    }

    #[test]
    fn hat_supremum_matches_dense_scan() {
        let cfg = QuadratureConfig::default();
        let b = besov(&hat(), 0.5, 2.0, BesovOrder::First, &cfg).unwrap();
        assert!(!b.boundary_warning);
        let dense = (0..20_000)
            .map(|k| 1e-3 * 1e6f64.powf(k as f64 / 19_999.0))
            .map(|h| (2.0 * (hat_corr(0.0) - hat_corr(h))).sqrt() / h.sqrt())
            .fold(0.0, f64::max);
        assert!(((b.value - dense) / dense).abs() < 0.02, "{} vs {dense}", b.value);
    }

    #[test]
    fn grid_shape() {
        let g = default_h_grid::<f64>(1e-2, 8.0);
        assert!(g.len() >= 64);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!(*g.last().unwrap() >= 800.0 * (1.0 - 1e-9));
        assert!(matches!(BesovOrder::from_int(3), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn order_constraints() {
        let cfg = QuadratureConfig::default();
        assert!(besov(&hat(), 1.2, 2.0, BesovOrder::First, &cfg).is_err());
        assert!(besov(&hat(), 1.2, 2.0, BesovOrder::Second, &cfg).is_ok());
        assert!(besov(&hat(), 0.5, 0.5, BesovOrder::Second, &cfg).is_err());
    }
}
