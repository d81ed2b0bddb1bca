//! Radial optimizer profiles, their concentrating rescalings and truncations.

mod doc;
mod sampled;

use serde::{Deserialize, Serialize};

pub use sampled::SampledGrid;

use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::radial::RadialFunction;
use crate::scalar::{geomspace, Real};
use crate::truncation::TruncationSpec;

/// How a profile is evaluated. All representations are non-negative and
/// non-increasing in `rho`.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation<T> {
    /// `(1 + (rho / scale)^b)^e` with the exponents fixed by the parameters.
    ClosedFormAt { scale: T },
    /// Tabulated values with log-log interpolation.
    Sampled(SampledGrid<T>),
    /// `max(0, 1 - rho / radius)`.
    Hat { radius: T },
    /// `min(1, (rho / scale)^(-exponent))`; exponent zero is the constant one.
    PowerTail { scale: T, exponent: T },
    /// `G(base(rho))` for the piecewise linear truncation map of `spec`.
    Composed { base: Box<RadialProfile<T>>, spec: TruncationSpec<T> },
    /// `phi(rho / delta) base(rho)` for the cubic smoothstep cutoff `phi`.
    CutOff { base: Box<RadialProfile<T>>, delta: T },
}

/// A radial function `amplitude * repr(rho)` on `R^N`, tagged with the
/// parameters it belongs to and its expected power-law decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "doc::ProfileDoc<T>", into = "doc::ProfileDoc<T>", bound = "T: Real")]
pub struct RadialProfile<T> {
    pub params: FractionalParams<T>,
    pub repr: Representation<T>,
    pub amplitude: T,
    pub tail_exponent: T,
}

/// Outcome of [`RadialProfile::decay_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DecayFit<T> {
    /// `min rho^a u(rho)` over the window, `a` the theoretical tail exponent.
    pub c1: T,
    /// `max rho^a u(rho)` over the window.
    pub c2: T,
    pub fit_range: (T, T),
    /// Least-squares slope of `log u` against `log rho`.
    pub measured_exponent: T,
    pub stderr: T,
    pub samples: usize,
}

/// `1 - (3 x^2 - 2 x^3)` on `[0, 1]`, clamped outside.
fn smoothstep_cutoff<T: Real>(x: T) -> (T, T) {
    if x <= T::zero() {
        (T::one(), T::zero())
    } else if x >= T::one() {
        (T::zero(), T::zero())
    } else {
        let three = T::c(3.0);
        let six = T::c(6.0);
        (T::one() - x * x * (three - T::two() * x), -six * x * (T::one() - x))
    }
}

/// Closed-form optimizer with amplitude one: `U(0) = 1`.
pub fn at_profile<T: Real>(params: FractionalParams<T>) -> RadialProfile<T> {
    RadialProfile {
        params,
        repr: Representation::ClosedFormAt { scale: T::one() },
        amplitude: T::one(),
        tail_exponent: params.tail_exponent(),
    }
}

impl<T: Real> RadialProfile<T> {
    /// Hat function `max(0, 1 - rho / radius)`.
    pub fn hat(params: FractionalParams<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!("hat radius must be positive, got {radius}")));
        }
        Ok(Self { params, repr: Representation::Hat { radius }, amplitude: T::one(), tail_exponent: T::zero() })
    }

    /// Pure power tail `min(1, rho^-exponent)`.
    pub fn power_law(params: FractionalParams<T>, exponent: T) -> Result<Self> {
        if !(exponent >= T::zero()) || !exponent.is_finite() {
            return Err(Error::InvalidConfig(format!("power exponent must be >= 0, got {exponent}")));
        }
        Ok(Self {
            params,
            repr: Representation::PowerTail { scale: T::one(), exponent },
            amplitude: T::one(),
            tail_exponent: exponent,
        })
    }

    /// The constant function `value`.
    pub fn constant(params: FractionalParams<T>, value: T) -> Self {
        Self {
            params,
            repr: Representation::PowerTail { scale: T::one(), exponent: T::zero() },
            amplitude: value,
            tail_exponent: T::zero(),
        }
    }

    /// Profile interpolating the given samples.
    pub fn sampled(
        params: FractionalParams<T>,
        radii: Vec<T>,
        values: Vec<T>,
        origin: Option<T>,
        tail_exponent: T,
    ) -> Result<Self> {
        let grid = SampledGrid::new(radii, values, origin)?;
        Ok(Self { params, repr: Representation::Sampled(grid), amplitude: T::one(), tail_exponent })
    }

    /// Samples `self` on `radii`, storing `u(0)` as the origin value.
    pub fn sample_on(&self, radii: Vec<T>) -> Result<Self> {
        let values = radii.iter().map(|&r| self.evaluate(r)).collect();
        Self::sampled(self.params, radii, values, Some(self.evaluate(T::zero())), self.tail_exponent)
    }

    /// Samples `self` on 1024 log-spaced radii spanning `[1e-4, 1e4]` times
    /// the concentration scale.
    pub fn sample_default(&self) -> Result<Self> {
        let scale = self.inner_scale();
        self.sample_on(geomspace(scale * T::c(1e-4), scale * T::c(1e4), 1024))
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.repr, Representation::Sampled(_))
    }

    fn shape(&self, rho: T) -> T {
        match &self.repr {
            Representation::ClosedFormAt { scale } => {
                let x = rho / *scale;
                let b = self.params.at_inner_power();
                let e = self.params.at_outer_power();
                (T::one() + x.powf(b)).powf(e)
            }
            Representation::Sampled(grid) => grid.evaluate(rho, self.tail_exponent),
            Representation::Hat { radius } => (T::one() - rho / *radius).max(T::zero()),
            Representation::PowerTail { scale, exponent } => {
                if *exponent == T::zero() || rho <= *scale {
                    T::one()
                } else {
                    (rho / *scale).powf(-*exponent)
                }
            }
            Representation::Composed { base, spec } => spec.apply(base.evaluate(rho)),
            Representation::CutOff { base, delta } => {
                let (phi, _) = smoothstep_cutoff(rho / *delta - T::one());
                if phi == T::zero() {
                    T::zero()
                } else {
                    phi * base.evaluate(rho)
                }
            }
        }
    }

    fn shape_derivative(&self, rho: T) -> T {
        match &self.repr {
            Representation::ClosedFormAt { scale } => {
                let x = rho / *scale;
                let b = self.params.at_inner_power();
                let e = self.params.at_outer_power();
                if x == T::zero() {
                    return if b > T::one() {
                        T::zero()
                    } else if b == T::one() {
                        e / *scale
                    } else {
                        T::neg_infinity()
                    };
                }
                let xb = x.powf(b);
                e * b * (T::one() + xb).powf(e) / (T::one() + xb.recip()) / rho
            }
            Representation::Sampled(grid) => grid.derivative(rho, self.tail_exponent),
            Representation::Hat { radius } => {
                if rho < *radius {
                    -T::one() / *radius
                } else {
                    T::zero()
                }
            }
            Representation::PowerTail { scale, exponent } => {
                if *exponent == T::zero() || rho <= *scale {
                    T::zero()
                } else {
                    -*exponent * (rho / *scale).powf(-*exponent) / rho
                }
            }
            Representation::Composed { base, spec } => {
                spec.slope_at(base.evaluate(rho)) * base.derivative(rho)
            }
            Representation::CutOff { base, delta } => {
                let (phi, dphi) = smoothstep_cutoff(rho / *delta - T::one());
                if phi == T::zero() {
                    T::zero()
                } else {
                    dphi / *delta * base.evaluate(rho) + phi * base.derivative(rho)
                }
            }
        }
    }

    /// `u(rho)` for `rho >= 0`.
    pub fn evaluate(&self, rho: T) -> T {
        self.amplitude * self.shape(rho)
    }

    /// `u'(rho)`, defined almost everywhere.
    pub fn derivative(&self, rho: T) -> T {
        self.amplitude * self.shape_derivative(rho)
    }

    /// `U_eps(rho) = eps^((ps - N)/p) U(rho / eps)`.
    ///
    /// # Panics
    /// If `eps` is not positive and finite.
    pub fn rescale(&self, eps: T) -> Self {
        assert!(eps > T::zero() && eps.is_finite(), "rescale factor must be positive");
        if eps == T::one() {
            return self.clone();
        }
        let factor = eps.powf(self.params.rescale_exponent());
        let repr = match &self.repr {
            Representation::ClosedFormAt { scale } => Representation::ClosedFormAt { scale: *scale * eps },
            Representation::Sampled(grid) => Representation::Sampled(grid.map_radii(|r| r * eps)),
            Representation::Hat { radius } => Representation::Hat { radius: *radius * eps },
            Representation::PowerTail { scale, exponent } => {
                Representation::PowerTail { scale: *scale * eps, exponent: *exponent }
            }
            Representation::Composed { base, spec } => {
                // G commutes with the rescaling once its levels are scaled too
                return Self {
                    repr: Representation::Composed {
                        base: Box::new(base.rescale(eps)),
                        spec: spec.rescaled(eps, factor),
                    },
                    ..self.clone()
                };
            }
            Representation::CutOff { base, delta } => {
                return Self {
                    repr: Representation::CutOff { base: Box::new(base.rescale(eps)), delta: *delta * eps },
                    ..self.clone()
                };
            }
        };
        Self { repr, amplitude: self.amplitude * factor, ..self.clone() }
    }

    /// `c * u`.
    pub fn scaled(&self, c: T) -> Self {
        Self { amplitude: self.amplitude * c, ..self.clone() }
    }

    /// Scales `u` by `c = (G / H)^(1/(r - p))`, where `G = [u]_{s,p}^p` and
    /// `H = ||u||_{r,alpha}^r` are supplied, so that the two powers agree.
    pub fn normalize(&self, gagliardo_p: T, hardy_r: T) -> Result<(Self, T)> {
        for (name, v) in [("Gagliardo energy", gagliardo_p), ("Hardy mass", hardy_r)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::DegenerateNorm(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let gap = self.params.r() - self.params.p;
        if gap == T::zero() {
            return Err(Error::DegenerateNorm("r = p leaves the normalization undetermined".into()));
        }
        let c = (gagliardo_p / hardy_r).powf(T::one() / gap);
        Ok((self.scaled(c), c))
    }

    /// Least-squares decay exponent and decay constants on `[rho_min, rho_max]`.
    pub fn decay_fit(&self, rho_min: T, rho_max: T) -> Result<DecayFit<T>> {
        if !(rho_min >= T::one()) || !(rho_max > T::two() * rho_min) || !rho_max.is_finite() {
            return Err(Error::InvalidRange(format!(
                "decay window needs 1 <= rho_min and rho_max > 2 rho_min, got [{rho_min}, {rho_max}]"
            )));
        }
        let radii: Vec<T> = match &self.repr {
            Representation::Sampled(grid) => {
                grid.radii().iter().copied().filter(|&r| r >= rho_min && r <= rho_max).collect()
            }
            _ => {
                let decades = (rho_max / rho_min).log10();
                let n = (decades * T::c(32.0)).ceil().to_usize().unwrap_or(0) + 1;
                geomspace(rho_min, rho_max, n.max(2))
            }
        };
        let pts: Vec<(T, T)> = radii
            .iter()
            .map(|&r| (r, self.evaluate(r)))
            .filter(|&(_, u)| u > T::zero())
            .collect();
        if pts.len() < 8 {
            return Err(Error::InsufficientRange(format!(
                "{} positive samples in [{rho_min}, {rho_max}], need 8",
                pts.len()
            )));
        }
        let xy: Vec<(T, T)> = pts.iter().map(|&(r, u)| (r.ln(), u.ln())).collect();
        let line = crate::fit::least_squares(&xy);
        let a = self.params.tail_exponent();
        let weighted = pts.iter().map(|&(r, u)| u * r.powf(a));
        let (c1, c2) = weighted.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok(DecayFit {
            c1,
            c2,
            fit_range: (rho_min, rho_max),
            measured_exponent: line.slope,
            stderr: line.slope_stderr,
            samples: pts.len(),
        })
    }

    /// `(rho, u(rho))` rows as CSV text.
    pub fn to_csv(&self, radii: &[T]) -> String {
        let mut out = String::from("rho,u\n");
        for &r in radii {
            out.push_str(&format!("{:e},{:e}\n", r.to_f64_lossy(), self.evaluate(r).to_f64_lossy()));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

impl<T: Real> RadialFunction<T> for RadialProfile<T> {
    fn value(&self, rho: T) -> T {
        self.evaluate(rho)
    }

    fn derivative(&self, rho: T) -> T {
        RadialProfile::derivative(self, rho)
    }

    fn knots(&self) -> Vec<T> {
        match &self.repr {
            Representation::ClosedFormAt { .. } => Vec::new(),
            Representation::Sampled(grid) => grid.kinks(),
            Representation::Hat { radius } => vec![*radius],
            Representation::PowerTail { scale, exponent } => {
                if *exponent == T::zero() {
                    Vec::new()
                } else {
                    vec![*scale]
                }
            }
            Representation::Composed { base, spec } => {
                let outer = spec.delta * spec.theta_bar;
                let mut k: Vec<T> = base.knots().into_iter().filter(|&r| r < outer).collect();
                k.extend([spec.delta, outer]);
                k
            }
            Representation::CutOff { base, delta } => {
                let outer = T::two() * *delta;
                let mut k: Vec<T> = base.knots().into_iter().filter(|&r| r < outer).collect();
                k.extend([*delta, outer]);
                k
            }
        }
    }

    fn support(&self) -> Option<T> {
        if self.amplitude == T::zero() {
            return Some(T::zero());
        }
        match &self.repr {
            Representation::ClosedFormAt { .. } | Representation::PowerTail { .. } => None,
            Representation::Sampled(grid) => grid.support(),
            Representation::Hat { radius } => Some(*radius),
            Representation::Composed { base, spec } => {
                let outer = spec.delta * spec.theta_bar;
                Some(base.support().map_or(outer, |s| s.min(outer)))
            }
            Representation::CutOff { base, delta } => {
                let outer = T::two() * *delta;
                Some(base.support().map_or(outer, |s| s.min(outer)))
            }
        }
    }

    fn inner_scale(&self) -> T {
        match &self.repr {
            Representation::ClosedFormAt { scale } | Representation::PowerTail { scale, .. } => *scale,
            Representation::Sampled(grid) => grid.inner_scale(),
            Representation::Hat { radius } => *radius,
            Representation::Composed { base, spec } => base.inner_scale().min(spec.delta),
            Representation::CutOff { base, delta } => base.inner_scale().min(*delta),
        }
    }

    fn outer_scale(&self) -> T {
        match &self.repr {
            Representation::ClosedFormAt { scale } | Representation::PowerTail { scale, .. } => *scale,
            Representation::Sampled(grid) => *grid.radii().last().expect("non-empty grid"),
            Representation::Hat { radius } => *radius,
            Representation::Composed { spec, .. } => spec.delta * spec.theta_bar,
            Representation::CutOff { delta, .. } => T::two() * *delta,
        }
    }
}
