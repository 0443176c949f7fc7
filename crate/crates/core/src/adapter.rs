//! The wrapper around an artira: a decoder applying the transform to outgoing
//! reads, a coder applying its inverse to incoming writes, and the built-in
//! transform library.
//!
//! Stochastic transforms draw from a counter-based generator keyed by
//! `(seed, draw_index)`, so a replayed simulation produces bit-identical noise
//! regardless of event interleaving. Each adapter instance owns its draw
//! counter and is confined to one simulation instance.

use thiserror::Error;

use crate::metric::{MetricSpace, Value, ValueKind};
use crate::redundancy::ArtiraTriple;
use crate::rng;

/// A transformation function relating an artira's raw output to the reference
/// component's output domain.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    Identity,
    Affine { scale: f64, offset: f64 },
    Negate,
    Reciprocal,
    BoundedNoise { delta: f64, seed: u64 },
    StochasticPredictor { error_scale: f64, hit_prob: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdapterError {
    #[error("transform domain error: {0}")]
    Domain(String),
    #[error("transform does not apply to {0} values")]
    UnsupportedKind(ValueKind),
    #[error("no inverse transform: cannot code writes through this adapter")]
    NoInverse,
    #[error("invalid transform: {0}")]
    InvalidSpec(String),
}

impl TransformSpec {
    /// Validates the transform's parameter constraints.
    pub fn validate(&self) -> Result<(), AdapterError> {
        match self {
            TransformSpec::Affine { scale, .. } if *scale == 0.0 => Err(
                AdapterError::InvalidSpec("affine scale must be nonzero".into()),
            ),
            TransformSpec::Affine { scale, offset } if !scale.is_finite() || !offset.is_finite() => {
                Err(AdapterError::InvalidSpec("affine parameters must be finite".into()))
            }
            TransformSpec::BoundedNoise { delta, .. } if *delta < 0.0 || delta.is_nan() => Err(
                AdapterError::InvalidSpec("bounded noise delta must be non-negative".into()),
            ),
            TransformSpec::StochasticPredictor { error_scale, hit_prob, .. } => {
                if *error_scale <= 0.0 || error_scale.is_nan() {
                    return Err(AdapterError::InvalidSpec(
                        "predictor error scale must be positive".into(),
                    ));
                }
                if !(0.0..=1.0).contains(hit_prob) {
                    return Err(AdapterError::InvalidSpec(
                        "predictor hit probability must lie in [0, 1]".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True for transforms whose output is a pure function of the input.
    pub fn is_deterministic(&self) -> bool {
        !matches!(
            self,
            TransformSpec::BoundedNoise { .. } | TransformSpec::StochasticPredictor { .. }
        )
    }

    /// The closed-form inverse, when one exists. Stochastic transforms have
    /// none: a predictor cannot be run backwards.
    pub fn inverse(&self) -> Option<TransformSpec> {
        match self {
            TransformSpec::Identity => Some(TransformSpec::Identity),
            TransformSpec::Affine { scale, offset } => Some(TransformSpec::Affine {
                scale: 1.0 / scale,
                offset: -offset / scale,
            }),
            TransformSpec::Negate => Some(TransformSpec::Negate),
            TransformSpec::Reciprocal => Some(TransformSpec::Reciprocal),
            TransformSpec::BoundedNoise { .. } | TransformSpec::StochasticPredictor { .. } => None,
        }
    }

    /// The uncertainty `(ε, α)` a transform contributes when used as a coder:
    /// deterministic kinds are perfect, stochastic kinds contribute their own
    /// band and certainty.
    pub fn coder_uncertainty(&self) -> (f64, f64) {
        match self {
            TransformSpec::BoundedNoise { delta, .. } => (*delta, 1.0),
            TransformSpec::StochasticPredictor { error_scale, hit_prob, .. } => {
                (*error_scale, *hit_prob)
            }
            _ => (0.0, 1.0),
        }
    }

    /// Applies the transform to a scalar. Stochastic kinds read the draw at
    /// `draw_index` of their seeded stream; deterministic kinds ignore it.
    pub fn apply(&self, x: f64, draw_index: u64) -> Result<f64, AdapterError> {
        match self {
            TransformSpec::Identity => Ok(x),
            TransformSpec::Affine { scale, offset } => Ok(scale * x + offset),
            TransformSpec::Negate => Ok(-x),
            TransformSpec::Reciprocal => {
                if x == 0.0 {
                    Err(AdapterError::Domain("reciprocal of zero".into()))
                } else {
                    Ok(1.0 / x)
                }
            }
            TransformSpec::BoundedNoise { delta, seed } => {
                Ok(x + rng::draw_symmetric(*seed, draw_index, *delta))
            }
            TransformSpec::StochasticPredictor { error_scale, hit_prob, seed } => {
                let hit = rng::draw_unit(rng::mix(*seed, 0), draw_index) < *hit_prob;
                if hit {
                    Ok(x + rng::draw_symmetric(rng::mix(*seed, 1), draw_index, *error_scale))
                } else {
                    // A miss lands strictly outside the band, up to 10x out.
                    let u = rng::draw_unit(rng::mix(*seed, 2), draw_index);
                    let magnitude = error_scale * (1.0 + 1e-6 + 9.0 * u);
                    let sign = if rng::draw_u64(rng::mix(*seed, 3), draw_index) & 1 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    Ok(x + sign * magnitude)
                }
            }
        }
    }
}

/// The runtime wrapper holding the decoder (transform, applied to reads) and
/// coder (inverse, applied to writes) around an artira, together with the
/// widened uncertainty the pair exposes.
#[derive(Debug, Clone, PartialEq)]
pub struct Adapter {
    triple: ArtiraTriple,
    space: MetricSpace,
    effective_epsilon: f64,
    effective_alpha: f64,
    draw_count: u64,
}

impl Adapter {
    /// Wraps a certified triple. The coder uncertainty is derived from the
    /// inverse spec itself: closed-form inverses are perfect and leave the
    /// triple's (ε, α) unchanged, stochastic coders widen them.
    pub fn new(triple: ArtiraTriple, space: MetricSpace) -> Result<Self, AdapterError> {
        triple.transform.validate()?;
        let (inv_eps, inv_alpha) = match &triple.inverse {
            Some(inv) => {
                inv.validate()?;
                inv.coder_uncertainty()
            }
            None => (0.0, 1.0),
        };
        Ok(Self::with_inverse_uncertainty(triple, space, inv_eps, inv_alpha))
    }

    /// Wraps a triple with caller-supplied coder uncertainty, for coders
    /// whose imperfection is certified separately from the transform itself.
    pub fn with_inverse_uncertainty(
        triple: ArtiraTriple,
        space: MetricSpace,
        inverse_epsilon: f64,
        inverse_alpha: f64,
    ) -> Self {
        let (effective_epsilon, effective_alpha) =
            widen_for_inverse(&triple, inverse_epsilon, inverse_alpha);
        Self {
            triple,
            space,
            effective_epsilon,
            effective_alpha,
            draw_count: 0,
        }
    }

    pub fn triple(&self) -> &ArtiraTriple {
        &self.triple
    }

    pub fn space(&self) -> MetricSpace {
        self.space
    }

    /// The accuracy bound after accounting for coder uncertainty.
    pub fn effective_epsilon(&self) -> f64 {
        self.effective_epsilon
    }

    /// The certainty after accounting for coder uncertainty.
    pub fn effective_alpha(&self) -> f64 {
        self.effective_alpha
    }

    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    fn apply_spec(&mut self, spec: &TransformSpec, value: &Value) -> Result<Value, AdapterError> {
        match value {
            Value::Real(x) => {
                let index = self.next_draw(spec);
                Ok(Value::Real(spec.apply(*x, index)?))
            }
            Value::Integer(n) => {
                // Negation stays in kind; other transforms move to the reals.
                if matches!(spec, TransformSpec::Negate) {
                    return Ok(Value::Integer(-n));
                }
                if matches!(spec, TransformSpec::Identity) {
                    return Ok(Value::Integer(*n));
                }
                let index = self.next_draw(spec);
                Ok(Value::Real(spec.apply(*n as f64, index)?))
            }
            other => Err(AdapterError::UnsupportedKind(other.kind())),
        }
    }

    fn next_draw(&mut self, spec: &TransformSpec) -> u64 {
        if spec.is_deterministic() {
            self.draw_count
        } else {
            let index = self.draw_count;
            self.draw_count += 1;
            index
        }
    }

    /// Read direction: applies the transform to a raw artira value.
    pub fn decode(&mut self, raw: &Value) -> Result<Value, AdapterError> {
        let transform = self.triple.transform.clone();
        self.apply_spec(&transform, raw)
    }

    /// Write direction: applies the inverse to a reference-domain value.
    pub fn encode(&mut self, value: &Value) -> Result<Value, AdapterError> {
        let inverse = self.triple.inverse.clone().ok_or(AdapterError::NoInverse)?;
        self.apply_spec(&inverse, value)
    }

    /// True iff `decode(encode(v))` reproduces every probe exactly.
    pub fn roundtrip_check(&mut self, probes: &[Value]) -> Result<bool, AdapterError> {
        if self.triple.inverse.is_none() {
            return Err(AdapterError::NoInverse);
        }
        for probe in probes {
            let coded = self.encode(probe)?;
            let decoded = self.decode(&coded)?;
            if decoded != *probe {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Widens a triple's certification for an imperfect coder: error bounds add
/// under composition, certainties multiply under independence. A perfect
/// inverse `(0, 1)` leaves the triple unchanged.
pub fn widen_for_inverse(
    triple: &ArtiraTriple,
    inverse_epsilon: f64,
    inverse_alpha: f64,
) -> (f64, f64) {
    debug_assert!(inverse_epsilon >= 0.0, "coder bound must be non-negative");
    debug_assert!(
        (0.0..=1.0).contains(&inverse_alpha),
        "coder certainty must lie in [0, 1]"
    );
    (
        triple.epsilon + inverse_epsilon,
        triple.alpha * inverse_alpha,
    )
}
