//! Flat JSON layout of a profile:
//! `{params, representation, grid?, values?, origin?, ..., amplitude, tail_exponent}`.

use serde::{Deserialize, Serialize};

use super::{RadialProfile, Representation, SampledGrid};
use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::scalar::Real;
use crate::truncation::TruncationSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum Tag {
    ClosedFormAt,
    Sampled,
    Hat,
    PowerTail,
    Composed,
    CutOff,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub(crate) struct ProfileDoc<T> {
    params: FractionalParams<T>,
    representation: Tag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interpolation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<ProfileDoc<T>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<TruncationSpec<T>>,
    amplitude: T,
    tail_exponent: T,
}

const LOG_LOG: &str = "log_log_linear";

impl<T: Real> From<RadialProfile<T>> for ProfileDoc<T> {
    fn from(p: RadialProfile<T>) -> Self {
        let mut doc = ProfileDoc {
            params: p.params,
            representation: Tag::ClosedFormAt,
            interpolation: None,
            grid: None,
            values: None,
            origin: None,
            scale: None,
            exponent: None,
            radius: None,
            delta: None,
            base: None,
            spec: None,
            amplitude: p.amplitude,
            tail_exponent: p.tail_exponent,
        };
        match p.repr {
            Representation::ClosedFormAt { scale } => doc.scale = Some(scale),
            Representation::Sampled(grid) => {
                doc.representation = Tag::Sampled;
                doc.interpolation = Some(LOG_LOG.into());
                doc.grid = Some(grid.radii().to_vec());
                doc.values = Some(grid.values().to_vec());
                doc.origin = grid.origin();
            }
            Representation::Hat { radius } => {
                doc.representation = Tag::Hat;
                doc.radius = Some(radius);
            }
            Representation::PowerTail { scale, exponent } => {
                doc.representation = Tag::PowerTail;
                doc.scale = Some(scale);
                doc.exponent = Some(exponent);
            }
            Representation::Composed { base, spec } => {
                doc.representation = Tag::Composed;
                doc.base = Some(Box::new((*base).into()));
                doc.spec = Some(spec);
            }
            Representation::CutOff { base, delta } => {
                doc.representation = Tag::CutOff;
                doc.base = Some(Box::new((*base).into()));
                doc.delta = Some(delta);
            }
        }
        doc
    }
}

fn field<T>(v: Option<T>, name: &str, tag: Tag) -> Result<T> {
    v.ok_or_else(|| Error::InvalidConfig(format!("{tag:?} profile is missing `{name}`")))
}

impl<T: Real> TryFrom<ProfileDoc<T>> for RadialProfile<T> {
    type Error = Error;

    fn try_from(doc: ProfileDoc<T>) -> Result<Self> {
        let tag = doc.representation;
        if !(doc.amplitude >= T::zero()) || !doc.amplitude.is_finite() {
            return Err(Error::InvalidConfig(format!("amplitude must be >= 0, got {}", doc.amplitude)));
        }
        let positive = |v: T, name: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidConfig(format!("`{name}` must be positive, got {v}")))
            }
        };
        let base = |b: Option<Box<ProfileDoc<T>>>| -> Result<Box<RadialProfile<T>>> {
            Ok(Box::new(RadialProfile::try_from(*field(b, "base", tag)?)?))
        };
        let repr = match tag {
            Tag::ClosedFormAt => Representation::ClosedFormAt { scale: positive(field(doc.scale, "scale", tag)?, "scale")? },
            Tag::Sampled => {
                if let Some(rule) = &doc.interpolation {
                    if rule != LOG_LOG {
                        return Err(Error::InvalidConfig(format!("unknown interpolation rule `{rule}`")));
                    }
                }
                Representation::Sampled(SampledGrid::new(
                    field(doc.grid, "grid", tag)?,
                    field(doc.values, "values", tag)?,
                    doc.origin,
                )?)
            }
            Tag::Hat => Representation::Hat { radius: positive(field(doc.radius, "radius", tag)?, "radius")? },
            Tag::PowerTail => Representation::PowerTail {
                scale: positive(field(doc.scale, "scale", tag)?, "scale")?,
                exponent: field(doc.exponent, "exponent", tag)?,
            },
            Tag::Composed => Representation::Composed { base: base(doc.base)?, spec: field(doc.spec, "spec", tag)? },
            Tag::CutOff => Representation::CutOff {
                base: base(doc.base)?,
                delta: positive(field(doc.delta, "delta", tag)?, "delta")?,
            },
        };
        Ok(RadialProfile { params: doc.params, repr, amplitude: doc.amplitude, tail_exponent: doc.tail_exponent })
    }
}
