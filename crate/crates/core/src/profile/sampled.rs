use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Non-increasing samples of a radial profile on a strictly increasing grid of
/// positive radii.
///
/// Between nodes the profile is a monotone cubic Hermite interpolant in
/// `(log rho, log u)`: exact for power laws, monotone, and accurate to
/// `O(h^3)` on smooth profiles. A segment touching a zero value falls back to
/// linear interpolation in `rho`. Below the first
/// node the profile is linear towards `origin` when an origin value is stored,
/// and constant otherwise. Beyond the last node it continues as a power law
/// with the profile's tail exponent (or stays zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampledGrid<T> {
    radii: Vec<T>,
    values: Vec<T>,
    origin: Option<T>,
}

impl<T: Real> SampledGrid<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>, origin: Option<T>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "sampled grid needs >= 2 radii matching the values ({} radii, {} values)",
                radii.len(),
                values.len()
            )));
        }
        if radii[0] <= T::zero() || radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidConfig("grid radii must be positive and finite".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("grid radii must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidConfig("values must be finite and non-negative".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig("values must be non-increasing in rho".into()));
        }
        if let Some(o) = origin {
            if !o.is_finite() || o < values[0] {
                return Err(Error::InvalidConfig("origin value must dominate the first sample".into()));
            }
        }
        Ok(Self { radii, values, origin })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn origin(&self) -> Option<T> {
        self.origin
    }

    pub(crate) fn map_radii(&self, f: impl Fn(T) -> T) -> Self {
        Self { radii: self.radii.iter().map(|&r| f(r)).collect(), ..self.clone() }
    }

    /// First radius from which every sample vanishes.
    pub fn support(&self) -> Option<T> {
        let last = *self.values.last()?;
        if last > T::zero() {
            return None;
        }
        let first_zero = self.values.iter().position(|&v| v == T::zero())?;
        Some(self.radii[first_zero])
    }

    /// Nodes where the interpolant has a visible corner: a log-log slope jump
    /// above 0.05, or a transition to zero.
    pub fn kinks(&self) -> Vec<T> {
        let slope = |i: usize| {
            let (va, vb) = (self.values[i], self.values[i + 1]);
            if va > T::zero() && vb > T::zero() {
                Some((vb / va).ln() / (self.radii[i + 1] / self.radii[i]).ln())
            } else {
                None
            }
        };
        let mut out = Vec::new();
        for i in 1..self.radii.len() - 1 {
            match (slope(i - 1), slope(i)) {
                (Some(a), Some(b)) if (a - b).abs() <= T::c(0.05) => {}
                _ if self.values[i - 1] == T::zero() => {}
                _ => out.push(self.radii[i]),
            }
        }
        out
    }

    /// Radius where the samples first fall below 99% of the leading value.
    pub fn inner_scale(&self) -> T {
        let top = self.origin.unwrap_or(self.values[0]);
        let i = self.values.iter().position(|&v| v < T::c(0.99) * top).unwrap_or(0);
        self.radii[i]
    }

    fn segment(&self, rho: T) -> usize {
        // index i with radii[i] <= rho < radii[i+1]
        let k = self.radii.partition_point(|&r| r <= rho);
        k.saturating_sub(1).min(self.radii.len() - 2)
    }

    /// Secant slope of segment `i` in log-log coordinates.
    fn secant(&self, i: usize) -> Option<T> {
        let (va, vb) = (self.values[i], self.values[i + 1]);
        (va > T::zero() && vb > T::zero()).then(|| (vb / va).ln() / (self.radii[i + 1] / self.radii[i]).ln())
    }

    /// Log-log node slope: centred three-point estimate, limited so that the
    /// Hermite cubic stays monotone.
    fn node_slope(&self, i: usize) -> T {
        let left = if i > 0 { self.secant(i - 1) } else { None };
        let right = if i + 1 < self.radii.len() { self.secant(i) } else { None };
        match (left, right) {
            (Some(a), Some(b)) => {
                if a * b <= T::zero() {
                    return T::zero();
                }
                let ha = (self.radii[i] / self.radii[i - 1]).ln();
                let hb = (self.radii[i + 1] / self.radii[i]).ln();
                let d = (hb * a + ha * b) / (ha + hb);
                let cap = T::c(3.0) * a.abs().min(b.abs());
                d.signum() * d.abs().min(cap)
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => T::zero(),
        }
    }

    /// `(log u, d log u / d log rho)` on a positive segment.
    fn hermite(&self, i: usize, rho: T) -> (T, T) {
        let (ra, rb) = (self.radii[i], self.radii[i + 1]);
        let (ya, yb) = (self.values[i].ln(), self.values[i + 1].ln());
        let h = (rb / ra).ln();
        let (da, db) = (self.node_slope(i) * h, self.node_slope(i + 1) * h);
        let t = (rho / ra).ln() / h;
        let (t2, t3) = (t * t, t * t * t);
        let (two, three, six) = (T::two(), T::c(3.0), T::c(6.0));
        let y = (two * t3 - three * t2 + T::one()) * ya
            + (t3 - two * t2 + t) * da
            + (three * t2 - two * t3) * yb
            + (t3 - t2) * db;
        let dy = (six * t2 - six * t) * ya
            + (three * t2 - T::c(4.0) * t + T::one()) * da
            + (six * t - six * t2) * yb
            + (three * t2 - two * t) * db;
        (y, dy / h)
    }

    pub fn evaluate(&self, rho: T, tail_exponent: T) -> T {
        let n = self.radii.len();
        let (r0, v0) = (self.radii[0], self.values[0]);
        if rho < r0 {
            return match self.origin {
                Some(o) => o + (v0 - o) * rho / r0,
                None => v0,
            };
        }
        let (rl, vl) = (self.radii[n - 1], self.values[n - 1]);
        if rho >= rl {
            if vl == T::zero() {
                return T::zero();
            }
            return vl * (rho / rl).powf(-tail_exponent);
        }
        let i = self.segment(rho);
        let (ra, rb, va, vb) = (self.radii[i], self.radii[i + 1], self.values[i], self.values[i + 1]);
        if va > T::zero() && vb > T::zero() {
            self.hermite(i, rho).0.exp().min(va).max(vb)
        } else {
            va + (vb - va) * (rho - ra) / (rb - ra)
        }
    }

    pub fn derivative(&self, rho: T, tail_exponent: T) -> T {
        let n = self.radii.len();
        let (r0, v0) = (self.radii[0], self.values[0]);
        if rho < r0 {
            return match self.origin {
                Some(o) => (v0 - o) / r0,
                None => T::zero(),
            };
        }
        let (rl, vl) = (self.radii[n - 1], self.values[n - 1]);
        if rho >= rl {
            if vl == T::zero() {
                return T::zero();
            }
            return -tail_exponent * vl * (rho / rl).powf(-tail_exponent) / rho;
        }
        let i = self.segment(rho);
        let (ra, rb, va, vb) = (self.radii[i], self.radii[i + 1], self.values[i], self.values[i + 1]);
        if va > T::zero() && vb > T::zero() {
            let (y, dy) = self.hermite(i, rho);
            dy * y.exp() / rho
        } else {
            (vb - va) / (rb - ra)
        }
    }
}
