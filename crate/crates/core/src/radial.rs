//! Radial functions as seen by the quadrature engine.

use crate::scalar::Real;

/// A radial function `u(x) = u(|x|)` on `R^N`, together with the geometric
/// metadata the quadrature needs to place breakpoints and choose ranges.
pub trait RadialFunction<T: Real>: Sync {
    fn value(&self, rho: T) -> T;

    /// Derivative in `rho`, defined almost everywhere.
    fn derivative(&self, rho: T) -> T;

    /// Radii where the function or its derivative is not smooth.
    fn knots(&self) -> Vec<T> {
        Vec::new()
    }

    /// Radius beyond which the function vanishes identically.
    fn support(&self) -> Option<T> {
        None
    }

    /// Smallest length scale on which the function varies.
    fn inner_scale(&self) -> T;

    /// Radius beyond which the function follows its far-field behaviour.
    fn outer_scale(&self) -> T;
}

impl<T: Real, R: RadialFunction<T> + ?Sized> RadialFunction<T> for &R {
    fn value(&self, rho: T) -> T {
        (**self).value(rho)
    }
    fn derivative(&self, rho: T) -> T {
        (**self).derivative(rho)
    }
    fn knots(&self) -> Vec<T> {
        (**self).knots()
    }
    fn support(&self) -> Option<T> {
        (**self).support()
    }
    fn inner_scale(&self) -> T {
        (**self).inner_scale()
    }
    fn outer_scale(&self) -> T {
        (**self).outer_scale()
    }
}

/// Smooth compactly supported bump `cos^2` in `log rho`, centred at `center`
/// with half-width `width` (in log units). Used as a test function.
#[derive(Debug, Clone, Copy)]
pub struct LogBump<T> {
    pub center: T,
    pub width: T,
}

impl<T: Real> LogBump<T> {
    fn arg(&self, rho: T) -> Option<T> {
        if rho <= T::zero() {
            return None;
        }
        let z = (rho / self.center).ln() / self.width;
        (z.abs() < T::one()).then_some(z)
    }
}

impl<T: Real> RadialFunction<T> for LogBump<T> {
    fn value(&self, rho: T) -> T {
        match self.arg(rho) {
            Some(z) => {
                let c = (T::FRAC_PI_2() * z).cos();
                c * c
            }
            None => T::zero(),
        }
    }

    fn derivative(&self, rho: T) -> T {
        match self.arg(rho) {
            Some(z) => {
                let a = T::FRAC_PI_2() * z;
                -T::two() * a.cos() * a.sin() * T::FRAC_PI_2() / (self.width * rho)
            }
            None => T::zero(),
        }
    }

    fn knots(&self) -> Vec<T> {
        vec![self.center * (-self.width).exp(), self.center, self.center * self.width.exp()]
    }

    fn support(&self) -> Option<T> {
        Some(self.center * self.width.exp())
    }

    fn inner_scale(&self) -> T {
        self.center * (-self.width).exp()
    }

    fn outer_scale(&self) -> T {
        self.center * self.width.exp()
    }
}

/// Pointwise difference `a - b` of two radial functions.
pub struct Difference<A, B> {
    pub a: A,
    pub b: B,
}

impl<T: Real, A: RadialFunction<T>, B: RadialFunction<T>> RadialFunction<T> for Difference<A, B> {
    fn value(&self, rho: T) -> T {
        self.a.value(rho) - self.b.value(rho)
    }
    fn derivative(&self, rho: T) -> T {
        self.a.derivative(rho) - self.b.derivative(rho)
    }
    fn knots(&self) -> Vec<T> {
        let mut k = self.a.knots();
        k.extend(self.b.knots());
        k
    }
    fn support(&self) -> Option<T> {
        match (self.a.support(), self.b.support()) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        }
    }
    fn inner_scale(&self) -> T {
        self.a.inner_scale().min(self.b.inner_scale())
    }
    fn outer_scale(&self) -> T {
        self.a.outer_scale().max(self.b.outer_scale())
    }
}
