//! Radially reduced Gagliardo double integrals.
//!
//! Ordering the pair so that `tau = t rho <= rho`,
//!
//! `I = 2 |S^{N-1}| int_0^inf rho^{N - beta} F(rho) dlog(rho)`,
//! `F(rho) = int_0^1 h(rho, t rho) Phi_N(1, t) t^{N-1} dt`,
//!
//! with `beta = q s`. The inner integral is split at `t = 1/2`: below it in
//! `t` by octaves scaled to the profile's inner radius, above it in `w = 1 - t`
//! by dyadic bands down to `2^-L`. The band sum beyond level `L` is a geometric
//! series with ratio `2^-(q - beta)` and is added in closed form.

use serde::{Deserialize, Serialize};

use super::driver::{log_radial_integral, KernelCache, Layout, RadialOutcome};
use super::{check_fractional, QuadratureConfig, SeminormValue};
use crate::error::Result;
use crate::kernel::RadialKernel;
use crate::profile::RadialProfile;
use crate::quadrature::{integrate_adaptive, GaussKronrod15, TailStatus};
use crate::radial::RadialFunction;
use crate::scalar::{abs_pow, Real};

/// Symmetric pair integrand `h(rho, tau)`, evaluated with `tau <= rho`.
pub(crate) trait PairTerm<T: Real>: Sync {
    /// Quantities depending on `rho` alone.
    fn anchor(&self, rho: T) -> [T; 2];
    fn eval(&self, anchor: &[T; 2], tau: T) -> T;
    fn layout(&self) -> Layout<T>;
    /// `h(rho, tau) ~ |rho - tau|^order` near the diagonal.
    fn order(&self) -> T;
}

struct PowerDiff<'a, R> {
    u: &'a R,
    q: f64,
}

impl<T: Real, R: RadialFunction<T>> PairTerm<T> for PowerDiff<'_, R> {
    fn anchor(&self, rho: T) -> [T; 2] {
        [self.u.value(rho), T::zero()]
    }
    fn eval(&self, a: &[T; 2], tau: T) -> T {
        abs_pow(a[0] - self.u.value(tau), T::c(self.q))
    }
    fn layout(&self) -> Layout<T> {
        Layout::of(self.u)
    }
    fn order(&self) -> T {
        T::c(self.q)
    }
}

struct Pairing<'a, R, P> {
    u: &'a R,
    phi: &'a P,
    p: f64,
}

impl<T: Real, R: RadialFunction<T>, P: RadialFunction<T>> PairTerm<T> for Pairing<'_, R, P> {
    fn anchor(&self, rho: T) -> [T; 2] {
        [self.u.value(rho), self.phi.value(rho)]
    }
    fn eval(&self, a: &[T; 2], tau: T) -> T {
        let du = a[0] - self.u.value(tau);
        let dphi = a[1] - self.phi.value(tau);
        if du == T::zero() || dphi == T::zero() {
            return T::zero();
        }
        abs_pow(du, T::c(self.p) - T::one()) * du.signum() * dphi
    }
    fn layout(&self) -> Layout<T> {
        Layout::of(self.u).merge(Layout::of(self.phi))
    }
    fn order(&self) -> T {
        T::c(self.p)
    }
}

struct DeficitDiff<'a, V, U> {
    v: &'a V,
    u: &'a U,
    p: f64,
    start: f64,
}

impl<T: Real, V: RadialFunction<T>, U: RadialFunction<T>> PairTerm<T> for DeficitDiff<'_, V, U> {
    fn anchor(&self, rho: T) -> [T; 2] {
        [self.v.value(rho), self.u.value(rho)]
    }
    fn eval(&self, a: &[T; 2], tau: T) -> T {
        let p = T::c(self.p);
        abs_pow(a[0] - self.v.value(tau), p) - abs_pow(a[1] - self.u.value(tau), p)
    }
    fn layout(&self) -> Layout<T> {
        let mut l = Layout::of(self.u).merge(Layout::of(self.v));
        l.start = Some(T::c(self.start));
        l
    }
    fn order(&self) -> T {
        T::c(self.p)
    }
}

/// `F(rho)`: the inner integral over `t = tau / rho in [0, 1]`.
fn inner_integral<T: Real, H: PairTerm<T>>(
    h: &H,
    kernel: &RadialKernel<T>,
    layout: &Layout<T>,
    rho: T,
    levels: usize,
    rel: T,
) -> T {
    let anchor = h.anchor(rho);
    let half = T::half();
    let beyond = layout.support.filter(|&s| s < rho);
    let t_max = beyond.map_or(half, |s| (s / rho).min(half));

    // lower block in t
    let mut breaks = Vec::new();
    let mut t = (layout.inner / rho * T::c(1.0 / 16.0)).min(T::c(0.25));
    while t < t_max {
        breaks.push(t);
        t = t * T::two();
    }
    breaks.extend(layout.knots.iter().map(|&k| k / rho).filter(|&x| x > T::zero() && x < t_max));
    let f_t = |t: T| h.eval(&anchor, rho * t) * kernel.eval(t, T::one() - t);
    let max_panels = breaks.len() + 64;
    let mut total = integrate_adaptive(f_t, T::zero(), t_max, &breaks, T::zero(), rel, max_panels).value;

    // upper block in w = 1 - t
    let w_lo = match beyond {
        Some(s) if s / rho <= half => return total,
        Some(s) => (rho - s) / rho,
        None => T::two().powi(-(levels as i32)),
    };
    let mut wb = Vec::new();
    let mut w = w_lo * T::two();
    while w < half {
        wb.push(w);
        w = w * T::two();
    }
    wb.extend(
        layout
            .knots
            .iter()
            .filter(|&&k| k < rho && k > rho * half)
            .map(|&k| (rho - k) / rho)
            .filter(|&x| x > w_lo),
    );
    let f_w = |w: T| h.eval(&anchor, rho - rho * w) * kernel.eval(T::one() - w, w);
    let max_panels = wb.len() + 64;
    total = total + integrate_adaptive(f_w, w_lo, half, &wb, T::zero(), rel, max_panels).value;

    if beyond.is_none() {
        // geometric continuation of the dyadic bands below w_lo
        let band = GaussKronrod15::new().integrate(f_w, w_lo, w_lo * T::two()).value;
        let ratio = T::two().powf(h.order() - kernel.beta());
        total = total + band / (ratio - T::one());
    }
    total
}

/// Outcome of the full double integral, before the root is taken.
pub(crate) fn double_integral<T: Real, H: PairTerm<T>>(
    h: &H,
    n: usize,
    beta: T,
    cfg: &QuadratureConfig<T>,
    root: T,
) -> RadialOutcome<T> {
    let kernel = KernelCache::get::<T>(n, beta);
    let layout = h.layout();
    let nn = T::from_usize_lossy(n);
    let levels = cfg.diagonal_levels;
    let rel = cfg.target_rel_tol * T::c(0.05);
    let g = |rho: T| {
        let f = inner_integral(h, &kernel, &layout, rho, levels, rel);
        if f == T::zero() {
            T::zero()
        } else {
            rho.powf(nn - beta) * f
        }
    };
    let mut out = log_radial_integral(&g, &layout, cfg, root, true);
    let scale = T::two() * kernel.outer_measure();
    out.value = out.value * scale;
    out.error = out.error * scale;
    out
}

pub(crate) fn finish<T: Real>(out: RadialOutcome<T>, root: T, tol: T) -> SeminormValue<T> {
    let integral = out.value.max(T::zero());
    let diverged = out.status == TailStatus::Divergent;
    let est_rel_error = out.rel_error() / root;
    SeminormValue {
        value: integral.powf(T::one() / root),
        integral,
        est_rel_error,
        converged: out.status == TailStatus::Converged && est_rel_error <= tol && integral.is_finite(),
        diverged,
        evaluations: out.evaluations,
        tail_contribution: out.tail_share,
        argmax_h: None,
        boundary_warning: false,
    }
}

/// `[u]_{s,q}` for a radial function on `R^n`.
pub fn gagliardo_radial<T: Real, R: RadialFunction<T>>(
    u: &R,
    n: usize,
    s: T,
    q: T,
    cfg: &QuadratureConfig<T>,
) -> Result<SeminormValue<T>> {
    check_fractional(s, q)?;
    cfg.validate()?;
    let term = PowerDiff { u, q: q.to_f64_lossy() };
    let out = double_integral(&term, n, q * s, cfg, q);
    Ok(finish(out, q, cfg.target_rel_tol))
}

/// `[u]_{s,q} = (int int |u(x) - u(y)|^q |x - y|^(-N - q s) dx dy)^(1/q)`.
///
/// An untruncated profile whose tail makes the integral infinite comes back
/// with `converged = false` and `diverged = true`.
pub fn gagliardo<T: Real>(profile: &RadialProfile<T>, s: T, q: T, cfg: &QuadratureConfig<T>) -> Result<SeminormValue<T>> {
    gagliardo_radial(profile, profile.params.n, s, q, cfg)
}

/// `int int |u(x) - u(y)|^(p-2) (u(x) - u(y)) (phi(x) - phi(y)) |x - y|^(-N - p s) dx dy`
/// with its absolute error estimate.
pub fn gagliardo_pairing<T: Real, R: RadialFunction<T>, P: RadialFunction<T>>(
    u: &R,
    phi: &P,
    n: usize,
    s: T,
    p: T,
    cfg: &QuadratureConfig<T>,
) -> Result<(T, T)> {
    check_fractional(s, p)?;
    cfg.validate()?;
    let term = Pairing { u, phi, p: p.to_f64_lossy() };
    let out = double_integral(&term, n, p * s, cfg, T::one());
    Ok((out.value, out.error))
}

/// `[v]_{s,p}^p - [u]_{s,p}^p` for two functions that coincide on `[0, start]`,
/// integrated as a single difference so that the common core cancels exactly.
pub fn deficit_gagliardo<T: Real, V: RadialFunction<T>, U: RadialFunction<T>>(
    v: &V,
    u: &U,
    n: usize,
    s: T,
    p: T,
    start: T,
    cfg: &QuadratureConfig<T>,
) -> Result<(T, T)> {
    check_fractional(s, p)?;
    cfg.validate()?;
    let term = DeficitDiff { v, u, p: p.to_f64_lossy(), start: start.to_f64_lossy() };
    let out = double_integral(&term, n, p * s, cfg, T::one());
    Ok((out.value, out.error))
}

/// `J(u) = [u]_{s,p}^p + [u]_{s,q}^q` with both terms kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MixedEnergy<T> {
    pub value: T,
    pub p_term: SeminormValue<T>,
    pub q_term: SeminormValue<T>,
    pub diverged: bool,
}

pub fn mixed_energy<T: Real>(
    profile: &RadialProfile<T>,
    s: T,
    p: T,
    q: T,
    cfg: &QuadratureConfig<T>,
) -> Result<MixedEnergy<T>> {
    if !(p > q) {
        return Err(crate::error::Error::InvalidExponent(format!("p > q fails: p = {p}, q = {q}")));
    }
    let p_term = gagliardo(profile, s, p, cfg)?;
    let q_term = gagliardo(profile, s, q, cfg)?;
    let diverged = p_term.diverged || q_term.diverged;
    let value = if diverged { T::infinity() } else { p_term.integral + q_term.integral };
    Ok(MixedEnergy { value, p_term, q_term, diverged })
}
