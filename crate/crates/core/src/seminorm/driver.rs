//! Radial integration driver shared by every norm: `int_0^inf g(rho) drho / rho`
//! split into a fixed block of log-spaced panels, an upward doubling tail and a
//! downward doubling tail towards the origin.

use std::any::{Any, TypeId};
use std::cell::Cell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::QuadratureConfig;
use crate::kernel::RadialKernel;
use crate::quadrature::{Estimate, GaussKronrod15, OctaveSum, TailStatus};
use crate::radial::RadialFunction;
use crate::scalar::Real;

type CacheMap = HashMap<(TypeId, usize, u64), Arc<dyn Any + Send + Sync>>;

/// Process-wide cache of radial kernels keyed by scalar type, dimension and
/// `beta`. Lookups are safe from any thread.
pub struct KernelCache;

impl KernelCache {
    pub fn get<T: Real>(n: usize, beta: T) -> Arc<RadialKernel<T>> {
        static CACHE: OnceLock<Mutex<CacheMap>> = OnceLock::new();
        let key = (TypeId::of::<T>(), n, beta.to_f64_lossy().to_bits());
        let map = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(k) = map.lock().expect("kernel cache poisoned").get(&key) {
            return k.clone().downcast::<RadialKernel<T>>().expect("keyed by type");
        }
        // build outside the lock; a racing duplicate is harmless
        let kernel = Arc::new(RadialKernel::new(n, beta));
        map.lock().expect("kernel cache poisoned").insert(key, kernel.clone());
        kernel
    }
}

/// Geometry of a radial integrand.
#[derive(Debug, Clone)]
pub(crate) struct Layout<T> {
    pub inner: T,
    pub outer: T,
    pub support: Option<T>,
    pub knots: Vec<T>,
    /// Integrand vanishes below this radius.
    pub start: Option<T>,
}

impl<T: Real> Layout<T> {
    pub fn of<R: RadialFunction<T> + ?Sized>(u: &R) -> Self {
        Self {
            inner: u.inner_scale(),
            outer: u.outer_scale(),
            support: u.support(),
            knots: u.knots(),
            start: None,
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.inner = self.inner.min(other.inner);
        self.outer = self.outer.max(other.outer);
        self.support = match (self.support, other.support) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        self.knots.extend(other.knots);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialOutcome<T> {
    pub value: T,
    pub error: T,
    pub status: TailStatus,
    pub evaluations: usize,
    pub tail_share: T,
}

impl<T: Real> RadialOutcome<T> {
    pub fn rel_error(&self) -> T {
        if self.value.abs() > T::zero() {
            self.error / self.value.abs()
        } else {
            self.error
        }
    }
}

fn log_panel<T: Real, G: Fn(T) -> T + Sync>(
    g: &G,
    a: T,
    b: T,
    rel: T,
    floor: T,
    parallel: bool,
    depth: usize,
) -> Estimate<T> {
    let gk = GaussKronrod15::<T>::new();
    let (xa, xb) = (a.ln(), b.ln());
    let nodes = gk.nodes(xa, xb);
    let mut vals = [T::zero(); 15];
    if parallel {
        let v: Vec<T> = nodes.par_iter().map(|&x| g(x.exp())).collect();
        vals.copy_from_slice(&v);
    } else {
        for (v, &x) in vals.iter_mut().zip(&nodes) {
            *v = g(x.exp());
        }
    }
    let est = gk.combine(xa, xb, &vals);
    if est.error <= (rel * est.value.abs()).max(floor) || depth >= 12 {
        return est;
    }
    let mid = (a * b).sqrt();
    let mut left = log_panel(g, a, mid, rel, floor, parallel, depth + 1);
    left.add(log_panel(g, mid, b, rel, floor, parallel, depth + 1));
    left.evaluations += est.evaluations;
    left
}

/// `int_0^inf g(rho) drho / rho`; `root` is the power the result will be
/// raised to the reciprocal of, used by the divergence test.
pub(crate) fn log_radial_integral<T: Real, G: Fn(T) -> T + Sync>(
    g: &G,
    layout: &Layout<T>,
    cfg: &QuadratureConfig<T>,
    root: T,
    parallel: bool,
) -> RadialOutcome<T> {
    let tol = cfg.target_rel_tol;
    let ppo = cfg.panels_per_octave();
    let lo = layout.start.unwrap_or(layout.inner * T::c(1.0 / 16.0));
    let reach = layout.outer.max(layout.support.unwrap_or(T::zero()));
    let top = (reach * cfg.domain_cut).max(lo * T::c(4.0));
    let running = Cell::new(T::zero());
    let panel = |a: T, b: T| {
        let floor = tol * T::c(1e-3) * running.get().abs();
        let est = log_panel(g, a, b, tol * T::c(0.05), floor, parallel, 0);
        running.set(running.get() + est.value);
        est
    };
    let driver = OctaveSum { panels_per_octave: ppo, rel_tol: tol, root, max_doublings: cfg.max_doublings, min_doublings: 3 };
    let knots: Vec<T> = layout.knots.iter().copied().filter(|k| k.is_finite() && *k > T::zero()).collect();
    let up = driver.run(lo, top, &knots, panel);

    let (mut value, mut error, mut evaluations) = (up.value, up.quad_error + up.extrapolation_error, up.evaluations);
    let mut status = up.status;
    if layout.start.is_none() {
        let inv: Vec<T> = knots.iter().filter(|&&k| k < lo).map(|&k| T::one() / k).collect();
        let down_panel = |a: T, b: T| {
            let floor = tol * T::c(1e-3) * running.get().abs();
            let est = log_panel(g, T::one() / b, T::one() / a, tol * T::c(0.05), floor, parallel, 0);
            running.set(running.get() + est.value);
            est
        };
        let x0 = T::one() / lo;
        let down = driver.run(x0, x0 * T::two(), &inv, down_panel);
        value = value + down.value;
        error = error + down.quad_error + down.extrapolation_error;
        evaluations += down.evaluations;
        status = match (status, down.status) {
            (TailStatus::Divergent, _) | (_, TailStatus::Divergent) => TailStatus::Divergent,
            (TailStatus::Converged, TailStatus::Converged) => TailStatus::Converged,
            _ => TailStatus::Exhausted,
        };
    }
    let tail_share = if value.abs() > T::zero() { up.tail_share * up.value / value } else { T::zero() };
    RadialOutcome { value, error, status, evaluations, tail_share }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_rational_profile() {
        // int_0^inf (1+rho^2)^-1 drho = pi/2, integrand in d(log rho) is rho/(1+rho^2)
        let layout = Layout { inner: 1.0, outer: 1.0, support: None, knots: vec![], start: None };
        let g = |r: f64| r / (1.0 + r * r);
        let out = log_radial_integral(&g, &layout, &QuadratureConfig::default(), 1.0, false);
        assert_eq!(out.status, TailStatus::Converged);
        assert!((out.value - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{}", out.value);
    }

    #[test]
    fn kernel_cache_reuses_tables() {
        let a = KernelCache::get::<f64>(2, 0.6);
        let b = KernelCache::get::<f64>(2, 0.6);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
