//! Radially reduced Gagliardo kernel.
//!
//! For radial `u` the double integral over `R^N x R^N` collapses to
//! `|S^{N-1}| int int |u(rho) - u(tau)|^q Phi_N(rho, tau) (rho tau)^{N-1}`, with
//!
//! * `Phi_1(rho, tau) = |rho - tau|^{-1-beta} + (rho + tau)^{-1-beta}`
//! * `Phi_N(rho, tau) = |S^{N-2}| int_0^pi (rho^2 + tau^2 - 2 rho tau cos phi)^{-(N+beta)/2} sin^{N-2} phi dphi`
//!
//! where `beta = q s`. Homogeneity gives `Phi_N(rho, tau) = rho^{-N-beta} Phi_N(1, tau/rho)`,
//! so only the ratio `t = tau/rho in [0, 1]` needs tabulating. The table stores the
//! regular part `g(w) = w^{1+beta} Phi_N(1, 1-w)` on a log grid in `w = 1 - t`.

use crate::quadrature::integrate_adaptive;
use crate::scalar::{sphere_area, Real};

const TABLE_NODES: usize = 1600;
const TABLE_W_MIN: f64 = 1e-10;

#[derive(Debug, Clone)]
struct KernelTable<T> {
    log_w_min: T,
    step: T,
    g: Vec<T>,
}

impl<T: Real> KernelTable<T> {
    fn build(n: usize, beta: T) -> Self {
        let log_w_min = T::c(TABLE_W_MIN.ln());
        let step = -log_w_min / T::from_usize_lossy(TABLE_NODES - 1);
        let g = (0..TABLE_NODES)
            .map(|j| {
                let w = (log_w_min + step * T::from_usize_lossy(j)).exp().min(T::one());
                let t = T::one() - w;
                angular_phi(n, beta, t, w) * w.powf(T::one() + beta)
            })
            .collect();
        Self { log_w_min, step, g }
    }

    fn regular_part(&self, w: T) -> T {
        if w <= T::c(TABLE_W_MIN) {
            return self.g[0];
        }
        let pos = (w.ln() - self.log_w_min) / self.step;
        let last = self.g.len() - 1;
        let i = pos.floor().to_usize().unwrap_or(0).min(last - 1);
        // cubic Lagrange through i-1..=i+2, clamped at the ends
        let i0 = i.saturating_sub(1).min(last - 3);
        let x = pos - T::from_usize_lossy(i0);
        let y = [self.g[i0], self.g[i0 + 1], self.g[i0 + 2], self.g[i0 + 3]];
        let (one, two, three) = (T::one(), T::two(), T::c(3.0));
        let six = T::c(6.0);
        let l0 = -(x - one) * (x - two) * (x - three) / six;
        let l1 = x * (x - two) * (x - three) / two;
        let l2 = -x * (x - one) * (x - three) / two;
        let l3 = x * (x - one) * (x - two) / six;
        l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]
    }
}

/// `Phi_N(1, t)` for `N >= 2` by adaptive quadrature in the angle; `w = 1 - t`
/// is passed separately so that nearly diagonal ratios keep full precision.
pub fn angular_phi<T: Real>(n: usize, beta: T, t: T, w: T) -> T {
    assert!(n >= 2);
    let power = -(T::from_usize_lossy(n) + beta) * T::half();
    let sin_power = n as i32 - 2;
    let f = |phi: T| {
        let h = (phi * T::half()).sin();
        let d2 = w * w + T::c(4.0) * t * h * h;
        d2.powf(power) * phi.sin().powi(sin_power)
    };
    let pi = T::PI();
    // the integrand changes character at phi ~ w / sqrt(t)
    let mut breaks = Vec::new();
    if t > T::zero() {
        let mut phi = w / t.sqrt() * T::c(0.25);
        while phi < pi {
            breaks.push(phi);
            phi = phi * T::two();
        }
    }
    let est = integrate_adaptive(f, T::zero(), pi, &breaks, T::zero(), T::c(1e-11), 2000);
    sphere_area::<T>(n - 2) * est.value
}

/// Ratio kernel `Phi_N(1, t) t^{N-1}` for a fixed dimension and `beta = q s`.
#[derive(Debug, Clone)]
pub struct RadialKernel<T> {
    n: usize,
    beta: T,
    table: Option<KernelTable<T>>,
}

impl<T: Real> RadialKernel<T> {
    pub fn new(n: usize, beta: T) -> Self {
        let table = (n >= 2).then(|| KernelTable::build(n, beta));
        Self { n, beta, table }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// `|S^{N-1}|`, the measure of the outer angular variable.
    pub fn outer_measure(&self) -> T {
        sphere_area(self.n - 1)
    }

    /// `Phi_N(1, t) t^{N-1}` at `t = 1 - w`.
    #[inline]
    pub fn eval(&self, t: T, w: T) -> T {
        let e = -(T::one() + self.beta);
        match &self.table {
            None => w.powf(e) + (T::one() + t).powf(e),
            Some(tab) => tab.regular_part(w) * w.powf(e) * t.powi(self.n as i32 - 1),
        }
    }

    /// `lim_{w -> 0} w^{1+beta} Phi_N(1, 1 - w)`.
    pub fn singular_coefficient(&self) -> T {
        match &self.table {
            None => T::one(),
            Some(tab) => tab.g[0],
        }
    }

    /// Full `Phi_N(rho, tau)`.
    pub fn phi(&self, rho: T, tau: T) -> T {
        let (hi, lo) = if rho >= tau { (rho, tau) } else { (tau, rho) };
        let t = lo / hi;
        let w = (hi - lo) / hi;
        let scale = hi.powf(-(T::from_usize_lossy(self.n) + self.beta));
        let tn = t.powi(self.n as i32 - 1);
        if tn == T::zero() {
            let e = -(T::one() + self.beta);
            return match &self.table {
                None => scale * (w.powf(e) + (T::one() + t).powf(e)),
                Some(tab) => scale * tab.regular_part(w) * w.powf(e),
            };
        }
        scale * self.eval(t, w) / tn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_kernel_at_zero_ratio() {
        // Phi_2(1, 0) = 2 * pi
        let k = RadialKernel::<f64>::new(2, 0.6);
        let v = k.phi(1.0, 0.0);
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for &n in &[2usize, 3] {
            let beta = 0.45;
            let k = RadialKernel::<f64>::new(n, beta);
            for &w in &[3e-9, 1e-6, 0.013, 0.3, 0.77, 0.999] {
                let t = 1.0 - w;
                let direct = angular_phi(n, beta, t, w) * t.powi(n as i32 - 1);
                let tab = k.eval(t, w);
                assert!(((tab - direct) / direct).abs() < 1e-7, "n={n} w={w}: {tab} vs {direct}");
            }
        }
    }

    #[test]
    fn singular_coefficient_three_dimensions() {
        // For N = 3 the angular integral is elementary:
        // Phi_3(1,t) = 2 pi / ((beta+1) t) * ((1-t)^{-1-beta} - (1+t)^{-1-beta}).
        let beta = 0.3;
        let k = RadialKernel::<f64>::new(3, beta);
        let w: f64 = 0.2;
        let t = 1.0 - w;
        let exact = 2.0 * std::f64::consts::PI / ((beta + 1.0) * t)
            * (w.powf(-1.0 - beta) - (1.0 + t).powf(-1.0 - beta));
        assert!(((k.phi(1.0, t) - exact) / exact).abs() < 1e-8);
        let coeff = 2.0 * std::f64::consts::PI / (beta + 1.0);
        assert!(((k.singular_coefficient() - coeff) / coeff).abs() < 1e-6);
    }

    #[test]
    fn homogeneity() {
        let k = RadialKernel::<f64>::new(2, 0.5);
        let (rho, tau, lam) = (1.7, 0.4, 3.1);
        let lhs = k.phi(lam * rho, lam * tau);
        let rhs = lam.powf(-2.5) * k.phi(rho, tau);
        assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }
}
