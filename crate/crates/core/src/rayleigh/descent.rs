//! Preconditioned projected descent on the discretized quotient.
//!
//! Node `a` owns the cell between the geometric midpoints of its neighbours
//! (the first cell reaches down to the origin); the profile vanishes past the
//! last cell. The energy is the midpoint double sum over distinct cells, a
//! diagonal term from the centred slope, and the interaction of every cell
//! with the exterior.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rayleigh_quotient, DiscreteProfile, Normalization};
use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::quadrature::integrate_adaptive;
use crate::scalar::{abs_pow, Real};
use crate::seminorm::{KernelCache, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct OptimizerConfig<T> {
    pub max_iters: usize,
    /// Stop once the relative decrease of the quotient falls below this.
    pub tol: T,
    /// Armijo constant of the backtracking line search.
    pub armijo: T,
    pub initial_step: T,
    /// Steps below this end the search.
    pub min_step: T,
    pub quad: QuadratureConfig<T>,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 400,
            tol: T::c(1e-6),
            armijo: T::c(1e-4),
            initial_step: T::one(),
            min_step: T::c(1e-12),
            quad: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OptimizerResult<T> {
    /// Minimizer with unit discrete Hardy mass.
    pub minimizer: DiscreteProfile<T>,
    /// Continuous quotient of the minimizer.
    #[serde(rename = "S_est")]
    pub s_est: T,
    pub iterations: usize,
    pub final_step: T,
    /// Discrete quotient after each accepted step, starting with the initial one.
    pub quotient_history: Vec<T>,
    pub converged: bool,
}

impl<T: Real> OptimizerResult<T> {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,quotient\n");
        for (i, q) in self.quotient_history.iter().enumerate() {
            out += &format!("{i},{q}\n");
        }
        out
    }
}

pub(crate) struct Discretization<T> {
    p: T,
    r: T,
    m: usize,
    /// Row-major `C_ab`; the energy sums `C_ab |v_a - v_b|^p` over `a != b`.
    pair: Vec<T>,
    /// Coefficient of `|slope_a|^p`, zero at the two ends.
    diag: Vec<T>,
    /// `rho_{a+1} - rho_{a-1}`.
    span: Vec<T>,
    /// Coefficient of `|v_a|^p` from pairs with the exterior.
    ext: Vec<T>,
    /// Hardy weights.
    mass: Vec<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(params: &FractionalParams<T>, radii: &[T]) -> Self {
        let m = radii.len();
        let (p, s, alpha) = (params.p, params.s, params.alpha);
        let n = params.n;
        let beta = p * s;
        let kernel = KernelCache::get(n, beta);
        let omega = kernel.outer_measure();
        let nn = T::from_usize_lossy(n);
        let nm1 = n as i32 - 1;

        let mut edges = Vec::with_capacity(m + 1);
        edges.push(T::zero());
        for w in radii.windows(2) {
            edges.push((w[0] * w[1]).sqrt());
        }
        edges.push(radii[m - 1] * (radii[m - 1] / radii[m - 2]).sqrt());
        let width: Vec<T> = edges.windows(2).map(|e| e[1] - e[0]).collect();

        let pair: Vec<T> = (0..m * m)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k / m, k % m);
                if a == b {
                    return T::zero();
                }
                let (ra, rb) = (radii[a], radii[b]);
                omega * kernel.phi(ra, rb) * (ra * rb).powi(nm1) * width[a] * width[b]
            })
            .collect();

        let gamma = p - T::one() - beta;
        let cell = T::two() / ((gamma + T::one()) * (gamma + T::two()));
        let g0 = kernel.singular_coefficient();
        let mut diag = vec![T::zero(); m];
        let mut span = vec![T::one(); m];
        for a in 1..m - 1 {
            diag[a] = omega * g0 * radii[a].powi(nm1) * cell * width[a].powf(gamma + T::two());
            span[a] = radii[a + 1] - radii[a - 1];
        }

        let outer = edges[m];
        let ext: Vec<T> = (0..m)
            .into_par_iter()
            .map(|a| {
                let ra = radii[a];
                // tau = outer e^y
                let f = |y: T| {
                    let tau = outer * y.exp();
                    kernel.phi(ra, tau) * tau.powi(nm1) * tau
                };
                let span = T::c(40.0) / beta;
                let est = integrate_adaptive(f, T::zero(), span, &[T::c(1e-3), T::c(1e-2), T::c(0.1), T::one()], T::zero(), T::c(1e-10), 4000);
                T::two() * omega * ra.powi(nm1) * width[a] * est.value
            })
            .collect();

        let e = nn - alpha;
        let mass = edges.windows(2).map(|w| omega * (w[1].powf(e) - w[0].powf(e)) / e).collect();
        Self { p, r: params.r(), m, pair, diag, span, ext, mass }
    }

    fn slope(&self, v: &[T], a: usize) -> T {
        (v[a + 1] - v[a - 1]) / self.span[a]
    }

    pub fn energy(&self, v: &[T]) -> T {
        let m = self.m;
        let p = self.p;
        let pairs: T = (0..m)
            .into_par_iter()
            .map(|a| {
                let row = &self.pair[a * m..(a + 1) * m];
                row.iter().zip(v).map(|(&c, &vb)| c * abs_pow(v[a] - vb, p)).sum::<T>()
            })
            .sum();
        let diag: T = (1..m - 1).map(|a| self.diag[a] * abs_pow(self.slope(v, a), p)).sum();
        let ext: T = (0..m).map(|a| self.ext[a] * abs_pow(v[a], p)).sum();
        pairs + diag + ext
    }

    pub fn energy_gradient(&self, v: &[T]) -> Vec<T> {
        let m = self.m;
        let p = self.p;
        let pm2 = p - T::two();
        let dpow = |x: T| if x == T::zero() { T::zero() } else { x.abs().powf(pm2) * x };
        let mut g: Vec<T> = (0..m)
            .into_par_iter()
            .map(|a| {
                let row = &self.pair[a * m..(a + 1) * m];
                let s: T = row.iter().zip(v).map(|(&c, &vb)| c * dpow(v[a] - vb)).sum();
                T::two() * p * s + p * self.ext[a] * dpow(v[a])
            })
            .collect();
        for a in 1..m - 1 {
            let d = p * self.diag[a] * dpow(self.slope(v, a)) / self.span[a];
            g[a + 1] = g[a + 1] + d;
            g[a - 1] = g[a - 1] - d;
        }
        g
    }

    pub fn hardy(&self, v: &[T]) -> T {
        v.iter().zip(&self.mass).map(|(&x, &w)| w * abs_pow(x, self.r)).sum()
    }

    pub fn quotient(&self, v: &[T]) -> T {
        self.energy(v) / self.hardy(v).powf(self.p / self.r)
    }

    /// Matrix of the `p = 2` energy with the same weights.
    fn preconditioner(&self) -> DMatrix<f64> {
        let m = self.m;
        let f = |x: T| x.to_f64_lossy();
        let mut k = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            let mut row_sum = 0.0;
            for b in 0..m {
                if a != b {
                    let c = 2.0 * f(self.pair[a * m + b]);
                    k[(a, b)] = -c;
                    row_sum += c;
                }
            }
            k[(a, a)] = row_sum + f(self.ext[a]);
        }
        for a in 1..m - 1 {
            let d = f(self.diag[a]) / f(self.span[a]).powi(2);
            k[(a + 1, a + 1)] += d;
            k[(a - 1, a - 1)] += d;
            k[(a + 1, a - 1)] -= d;
            k[(a - 1, a + 1)] -= d;
        }
        k
    }
}

fn normalize<T: Real>(disc: &Discretization<T>, v: &mut [T]) -> bool {
    let h = disc.hardy(v);
    if !(h > T::zero()) || !h.is_finite() {
        return false;
    }
    let c = h.powf(-T::one() / disc.r);
    v.iter_mut().for_each(|x| *x = *x * c);
    true
}

/// Projected descent from `init`: direction `-K^{-1} grad Q` with `K` the
/// quadratic energy matrix, backtracking by halving, clipping at zero and
/// renormalizing to unit discrete Hardy mass after every step.
pub fn minimize<T: Real>(init: &DiscreteProfile<T>, cfg: &OptimizerConfig<T>) -> Result<OptimizerResult<T>> {
    cfg.quad.validate()?;
    if !(cfg.tol > T::zero()) || cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("optimizer needs tol > 0 and max_iters >= 1".into()));
    }
    let params = init.params;
    let disc = Discretization::new(&params, &init.radii);
    let chol = Cholesky::new(disc.preconditioner())
        .ok_or_else(|| Error::InvalidConfig("energy matrix is not positive definite".into()))?;

    let mut v = init.values.clone();
    if !normalize(&disc, &mut v) {
        return Err(Error::DegenerateNorm("initial profile has no Hardy mass".into()));
    }
    let mut q = disc.quotient(&v);
    let mut history = vec![q];
    let mut step = cfg.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    let pr = params.p / params.r();

    while iterations < cfg.max_iters {
        iterations += 1;
        let e = disc.energy(&v);
        let ge = disc.energy_gradient(&v);
        // unit Hardy mass: grad Q = grad E - (p / r) E grad H
        let grad: Vec<T> = ge
            .iter()
            .zip(&v)
            .zip(&disc.mass)
            .map(|((&g, &x), &w)| g - pr * e * disc.r * w * abs_pow(x, disc.r - T::one()))
            .collect();
        let rhs = DVector::from_iterator(grad.len(), grad.iter().map(|x| -x.to_f64_lossy()));
        let dir: Vec<T> = chol.solve(&rhs).iter().map(|&x| T::c(x)).collect();
        let slope: T = grad.iter().zip(&dir).map(|(&g, &d)| g * d).sum();
        if !(slope < T::zero()) {
            converged = true;
            break;
        }

        let mut t = (step * T::two()).min(cfg.initial_step);
        let accepted = loop {
            let mut w: Vec<T> = v.iter().zip(&dir).map(|(&x, &d)| (x + t * d).max(T::zero())).collect();
            if normalize(&disc, &mut w) {
                let qn = disc.quotient(&w);
                if qn <= q + cfg.armijo * t * slope {
                    break Some((w, qn));
                }
            }
            t = t * T::half();
            if t < cfg.min_step {
                break None;
            }
        };
        let Some((w, qn)) = accepted else {
            step = t;
            break;
        };
        step = t;
        let rel = (q - qn) / q;
        v = w;
        q = qn;
        history.push(q);
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }

    let minimizer = DiscreteProfile::new(params, init.radii.clone(), v, Normalization::HardyUnit)?;
    let s_est = rayleigh_quotient(&minimizer, &cfg.quad)?;
    Ok(OptimizerResult { minimizer, s_est, iterations, final_step: step, quotient_history: history, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::profile::at_profile;
    use crate::rayleigh::log_grid;

    #[test]
    fn discrete_energy_tracks_the_engine() {
        let params = make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap();
        let grid = log_grid(1e-4, 1e7, 529);
        let u = DiscreteProfile::from_profile(&at_profile(params), grid.clone()).unwrap();
        let d = Discretization::new(&params, &grid);
        let e = d.energy(&u.values);
        assert!((e / 10.4962519653729046 - 1.0).abs() < 0.03, "{e}");
        let h = d.hardy(&u.values);
        assert!((h / std::f64::consts::PI - 1.0).abs() < 0.01, "{h}");
    }

    #[test]
    fn gradient_matches_differences() {
        let params = make_params::<f64>(1, 0.3, 1.7, 0.2).unwrap();
        let grid = log_grid(1e-2, 1e2, 40);
        let u = DiscreteProfile::from_profile(&at_profile(params), grid.clone()).unwrap();
        let d = Discretization::new(&params, &grid);
        let g = d.energy_gradient(&u.values);
        for &a in &[0usize, 5, 20, 39] {
            let h = 1e-6;
            let mut up = u.values.clone();
            let mut dn = u.values.clone();
            up[a] += h;
            dn[a] -= h;
            let fd = (d.energy(&up) - d.energy(&dn)) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-5 * (1.0 + fd.abs()), "{a}: {fd} vs {}", g[a]);
        }
    }
}
