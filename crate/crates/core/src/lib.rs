//! Numerical laboratory for truncations of concentrating fractional
//! Hardy-Sobolev optimizers.
//!
//! The crate builds the radial optimizer family `U_eps`, truncates it by
//! composition with a piecewise linear map, evaluates Gagliardo, Hardy, Besov
//! and gradient (semi)norms by radially reduced singular quadrature, and fits
//! the scaling exponents those quantities obey as `eps / delta -> 0`.
//!
//! Every numerical type is generic over a [`Real`] scalar (`f32` or `f64`);
//! the aliases at the crate root fix `f64`, which is what the experiments use.

pub mod error;
pub mod fit;
pub mod kernel;
pub mod lab;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod rayleigh;
pub mod radial;
pub mod report;
pub mod scalar;
pub mod seminorm;
pub mod truncation;

pub use error::{Error, Result};
pub use fit::{fit_slope, ScalingFit, Verdict};
pub use lab::{ExperimentPlan, SweepMode, SweepRow};
pub use params::{make_params, FractionalParams};
pub use profile::{at_profile, DecayFit, RadialProfile, Representation};
pub use radial::{LogBump, RadialFunction};
pub use rayleigh::{DiscreteProfile, Normalization, OptimizerConfig, OptimizerResult};
pub use scalar::Real;
pub use seminorm::{QuadratureConfig, SeminormValue};
pub use truncation::{TruncationMap, TruncationSpec};

pub type Params = FractionalParams<f64>;
pub type Profile = RadialProfile<f64>;
pub type Spec = TruncationSpec<f64>;
pub type Quadrature = QuadratureConfig<f64>;
pub type Seminorm = SeminormValue<f64>;
pub type Fit = ScalingFit<f64>;
