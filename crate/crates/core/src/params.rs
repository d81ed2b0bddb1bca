//! The `(N, s, p, alpha, r)` parameter bundle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dimension, differentiability, summability and Hardy weight of the problem,
/// together with the critical exponent `r` fixed by scale invariance:
/// `(N - alpha) / r = (N - p s) / p`.
///
/// `r` is computed on construction and stored; call sites never re-derive it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams<T>", bound = "T: Real")]
pub struct FractionalParams<T> {
    pub n: usize,
    pub s: T,
    pub p: T,
    pub alpha: T,
    r: T,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawParams<T> {
    n: usize,
    s: T,
    p: T,
    alpha: T,
    #[serde(default)]
    r: Option<T>,
}

impl<T: Real> TryFrom<RawParams<T>> for FractionalParams<T> {
    type Error = Error;

    fn try_from(raw: RawParams<T>) -> Result<Self> {
        let params = if raw.s == T::one() {
            Self::local(raw.n, raw.p, raw.alpha)?
        } else {
            Self::new(raw.n, raw.s, raw.p, raw.alpha)?
        };
        if let Some(r) = raw.r {
            if (r - params.r).abs() > T::c(1e-9) * params.r {
                return Err(Error::ConstraintViolation(format!(
                    "supplied r = {r} disagrees with the scaling relation (r = {})",
                    params.r
                )));
            }
        }
        Ok(params)
    }
}

impl<T: Real> FractionalParams<T> {
    /// Validates `0 < s < 1`, `p > 1` and `0 <= alpha < p s < N`, then computes `r`.
    pub fn new(n: usize, s: T, p: T, alpha: T) -> Result<Self> {
        for (name, v) in [("s", s), ("p", p), ("alpha", alpha)] {
            if !v.is_finite() {
                return Err(Error::ConstraintViolation(format!("{name} = {v} is not finite")));
            }
        }
        if n == 0 {
            return Err(Error::ConstraintViolation("dimension N must be positive".into()));
        }
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::ConstraintViolation(format!("0 < s < 1 fails: s = {s}")));
        }
        Self::validate_common(n, s, p, alpha)?;
        Ok(Self::build(n, s, p, alpha))
    }

    /// Parameters of the local (`s = 1`) problem used for comparison runs.
    /// Requires `0 <= alpha < p < N`.
    pub fn local(n: usize, p: T, alpha: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::ConstraintViolation("dimension N must be positive".into()));
        }
        Self::validate_common(n, T::one(), p, alpha)?;
        Ok(Self::build(n, T::one(), p, alpha))
    }

    fn validate_common(n: usize, s: T, p: T, alpha: T) -> Result<()> {
        if !p.is_finite() || p <= T::one() {
            return Err(Error::ConstraintViolation(format!("p > 1 fails: p = {p}")));
        }
        let nn = T::from_usize_lossy(n);
        if alpha < T::zero() {
            return Err(Error::ConstraintViolation(format!("0 <= alpha fails: alpha = {alpha}")));
        }
        if alpha >= p * s {
            return Err(Error::ConstraintViolation(format!(
                "alpha < p s fails: alpha = {alpha}, p s = {}",
                p * s
            )));
        }
        if p * s >= nn {
            return Err(Error::ConstraintViolation(format!(
                "p s < N fails: p s = {}, N = {n}",
                p * s
            )));
        }
        Ok(())
    }

    fn build(n: usize, s: T, p: T, alpha: T) -> Self {
        let nn = T::from_usize_lossy(n);
        let r = p * (nn - alpha) / (nn - p * s);
        Self { n, s, p, alpha, r }
    }

    /// Critical Hardy-Sobolev exponent.
    pub fn r(&self) -> T {
        self.r
    }

    pub fn dim(&self) -> T {
        T::from_usize_lossy(self.n)
    }

    pub fn is_local(&self) -> bool {
        self.s == T::one()
    }

    /// `N (p - 1) / (N - s)`: below it the untruncated optimizer has infinite
    /// `[.]_{s,q}` seminorm.
    pub fn threshold(&self) -> T {
        self.dim() * (self.p - T::one()) / (self.dim() - self.s)
    }

    /// Decay rate of the optimizer, `(N - p s) / (p - 1)`.
    pub fn tail_exponent(&self) -> T {
        (self.dim() - self.p * self.s) / (self.p - T::one())
    }

    /// Exponent of the concentrating rescaling, `(p s - N) / p`.
    pub fn rescale_exponent(&self) -> T {
        (self.p * self.s - self.dim()) / self.p
    }

    /// Inner power `(p - alpha/s) / (p - 1)` of the closed-form optimizer.
    pub fn at_inner_power(&self) -> T {
        (self.p - self.alpha / self.s) / (self.p - T::one())
    }

    /// Outer power `(p s - N) / (p - alpha/s)` of the closed-form optimizer.
    pub fn at_outer_power(&self) -> T {
        (self.p * self.s - self.dim()) / (self.p - self.alpha / self.s)
    }

    /// `(N - p s) / (p (p - 1))`, the limiting decay rate below the threshold.
    pub fn limit_exponent(&self) -> T {
        (self.dim() - self.p * self.s) / (self.p * (self.p - T::one()))
    }

    /// `(N - alpha) / (p s - alpha)`, the power of the sharp constant in the
    /// normalization identity.
    pub fn norm_power(&self) -> T {
        (self.dim() - self.alpha) / (self.p * self.s - self.alpha)
    }

    /// Residual of the scaling relation; zero up to rounding.
    pub fn scaling_residual(&self) -> T {
        (self.dim() - self.alpha) / self.r - (self.dim() - self.p * self.s) / self.p
    }

    /// Same bundle on another scalar type.
    pub fn cast<U: Real>(&self) -> FractionalParams<U> {
        let c = |x: T| U::c(x.to_f64_lossy());
        FractionalParams { n: self.n, s: c(self.s), p: c(self.p), alpha: c(self.alpha), r: c(self.r) }
    }
}

/// Validated constructor mirroring the command-line `make_params`.
pub fn make_params<T: Real>(n: usize, s: T, p: T, alpha: T) -> Result<FractionalParams<T>> {
    FractionalParams::new(n, s, p, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_and_secondary_exponents() {
        let a = make_params::<f64>(1, 0.3, 2.0, 0.0).unwrap();
        assert!((a.r() - 5.0).abs() < 1e-12);
        assert!((a.threshold() - 10.0 / 7.0).abs() < 1e-14);
        let b = make_params::<f64>(2, 0.75, 2.0, 0.5).unwrap();
        assert!((b.r() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_alpha_above_ps() {
        match make_params::<f64>(1, 0.3, 2.0, 0.7) {
            Err(Error::ConstraintViolation(msg)) => assert!(msg.contains("alpha < p s")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_each_constraint() {
        assert!(make_params::<f64>(1, 1.2, 2.0, 0.0).is_err());
        assert!(make_params::<f64>(1, 0.3, 1.0, 0.0).is_err());
        assert!(make_params::<f64>(1, 0.6, 2.0, 0.0).is_err()); // p s = N
        assert!(make_params::<f64>(1, 0.3, 2.0, -0.1).is_err());
        assert!(make_params::<f64>(0, 0.3, 2.0, 0.0).is_err());
        assert!(make_params::<f64>(1, f64::NAN, 2.0, 0.0).is_err());
    }

    #[test]
    fn local_params() {
        let l = FractionalParams::<f64>::local(3, 2.0, 0.0).unwrap();
        assert!(l.is_local());
        assert!((l.threshold() - 1.5).abs() < 1e-14);
        assert!((l.r() - 6.0).abs() < 1e-12);
        assert!(FractionalParams::<f64>::local(2, 2.0, 0.0).is_err());
    }

    #[test]
    fn json_recomputes_r() {
        let json = r#"{"n":1,"s":0.3,"p":2.0,"alpha":0.0}"#;
        let p: FractionalParams<f64> = serde_json::from_str(json).unwrap();
        assert!((p.r() - 5.0).abs() < 1e-12);
        let back: FractionalParams<f64> =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"n":1,"s":0.3,"p":2.0,"alpha":0.0,"r":4.0}"#;
        assert!(serde_json::from_str::<FractionalParams<f64>>(bad).is_err());
    }

    proptest! {
        #[test]
        fn scaling_relation_holds(n in 1usize..6, s in 0.05f64..0.95, p in 1.05f64..4.0, frac in 0.0f64..0.99) {
            prop_assume!(p * s < n as f64);
            let alpha = frac * p * s;
            let params = make_params(n, s, p, alpha).unwrap();
            prop_assert!(params.scaling_residual().abs() < 1e-12 * params.r().max(1.0));
            prop_assert!(params.threshold() < p);
        }
    }
}
