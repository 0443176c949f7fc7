//! Response values, metric spaces, and closed-ball neighborhood tests.
//!
//! Every matching predicate in the crate reduces to `distance` over one of
//! three built-in metric spaces. Real comparisons use exact IEEE double
//! arithmetic with no epsilon slop of their own; all tolerance lives in the
//! protocol-level ε.

use thiserror::Error;

/// A single component response or state value.
///
/// `Symbol` and `Boolean` support equality only; under a numeric space the
/// distance between unequal values of these kinds is the `+∞` sentinel, so
/// symbolic responses flow through the same matching predicates as numeric
/// ones instead of erroring out.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Boolean(bool),
    Vector(Vec<f64>),
    Symbol(String),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Real(_) => ValueKind::Real,
            Value::Integer(_) => ValueKind::Integer,
            Value::Boolean(_) => ValueKind::Boolean,
            Value::Vector(_) => ValueKind::Vector,
            Value::Symbol(_) => ValueKind::Symbol,
        }
    }

    /// Numeric view of a scalar value, if it has one.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(*x),
            Value::Integer(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Real(_) | Value::Integer(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Integer,
    Boolean,
    Vector,
    Symbol,
}

impl std::fmt::Display for ValueKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ValueKind::Real => "real",
            ValueKind::Integer => "integer",
            ValueKind::Boolean => "boolean",
            ValueKind::Vector => "vector",
            ValueKind::Symbol => "symbol",
        };
        f.write_str(name)
    }
}

/// One of the three built-in metric space definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSpace {
    /// `d(u, v) = |u - v|` over numeric scalars.
    AbsoluteDifference,
    /// Euclidean (L2) distance over fixed-length real vectors.
    EuclideanVector,
    /// `d(u, v) = 0` iff `u = v`, else `1`, over any single kind.
    Discrete01,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("incompatible value kinds for distance: {left} vs {right}")]
    KindMismatch { left: ValueKind, right: ValueKind },
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{kind} values are not measurable under {space:?}")]
    UnsupportedKind { kind: ValueKind, space: MetricSpace },
    #[error("neighborhood radius must be non-negative, got {0}")]
    NegativeRadius(String),
}

/// Distance for equality-only kinds: zero when equal, `+∞` sentinel otherwise.
fn equality_sentinel(equal: bool) -> f64 {
    if equal {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Computes `d(u, v)` in the given space.
///
/// `Discrete01` returns `0` iff `u = v`, else `1`. Equality-only kinds
/// (`Symbol`, `Boolean`) under `AbsoluteDifference` yield `0` or `+∞`.
pub fn distance(space: MetricSpace, u: &Value, v: &Value) -> Result<f64, MetricError> {
    if u.kind() != v.kind() {
        return Err(MetricError::KindMismatch {
            left: u.kind(),
            right: v.kind(),
        });
    }
    match space {
        MetricSpace::Discrete01 => {
            if let (Value::Vector(a), Value::Vector(b)) = (u, v) {
                if a.len() != b.len() {
                    return Err(MetricError::LengthMismatch {
                        left: a.len(),
                        right: b.len(),
                    });
                }
            }
            Ok(if u == v { 0.0 } else { 1.0 })
        }
        MetricSpace::AbsoluteDifference => match (u, v) {
            (Value::Real(a), Value::Real(b)) => Ok((a - b).abs()),
            (Value::Integer(a), Value::Integer(b)) => Ok((*a as f64 - *b as f64).abs()),
            (Value::Symbol(_), Value::Symbol(_)) | (Value::Boolean(_), Value::Boolean(_)) => {
                Ok(equality_sentinel(u == v))
            }
            _ => Err(MetricError::UnsupportedKind {
                kind: u.kind(),
                space,
            }),
        },
        MetricSpace::EuclideanVector => match (u, v) {
            (Value::Vector(a), Value::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(MetricError::LengthMismatch {
                        left: a.len(),
                        right: b.len(),
                    });
                }
                let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                Ok(sum.sqrt())
            }
            _ => Err(MetricError::UnsupportedKind {
                kind: u.kind(),
                space,
            }),
        },
    }
}

/// True iff `candidate` lies in the closed ball of radius `r` around `center`.
///
/// The ball is closed: the boundary (`d = r`) is included.
pub fn in_neighborhood(
    space: MetricSpace,
    center: &Value,
    r: f64,
    candidate: &Value,
) -> Result<bool, MetricError> {
    if r < 0.0 || r.is_nan() {
        return Err(MetricError::NegativeRadius(format!("{r}")));
    }
    Ok(distance(space, center, candidate)? <= r)
}

/// The natural space for a value kind: numeric scalars measure by absolute
/// difference, vectors by Euclidean distance, everything else discretely.
pub fn default_space_for(kind: ValueKind) -> MetricSpace {
    match kind {
        ValueKind::Real | ValueKind::Integer => MetricSpace::AbsoluteDifference,
        ValueKind::Vector => MetricSpace::EuclideanVector,
        ValueKind::Boolean | ValueKind::Symbol => MetricSpace::Discrete01,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(x: f64) -> Value {
        Value::Real(x)
    }

    fn vector(xs: &[f64]) -> Value {
        Value::Vector(xs.to_vec())
    }

    fn symbol(s: &str) -> Value {
        Value::Symbol(s.to_string())
    }

    #[test]
    fn absolute_difference_examples() {
        let d = distance(MetricSpace::AbsoluteDifference, &real(10.0), &real(10.3)).unwrap();
        assert_eq!(d, (10.0f64 - 10.3).abs());
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn discrete_is_zero_on_identical_symbols() {
        let d = distance(MetricSpace::Discrete01, &symbol("a"), &symbol("a")).unwrap();
        assert_eq!(d, 0.0);
        let d = distance(MetricSpace::Discrete01, &symbol("a"), &symbol("b")).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn euclidean_three_four_five() {
        let d = distance(
            MetricSpace::EuclideanVector,
            &vector(&[3.0, 4.0]),
            &vector(&[0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn closed_ball_includes_boundary() {
        assert!(
            in_neighborhood(MetricSpace::AbsoluteDifference, &real(100.0), 0.5, &real(100.5))
                .unwrap()
        );
        assert!(
            !in_neighborhood(MetricSpace::AbsoluteDifference, &real(100.0), 0.5, &real(100.51))
                .unwrap()
        );
    }

    #[test]
    fn euclidean_boundary_case() {
        // Hand oracle: sqrt(3^2 + 4^2) = 5, exactly on the closed boundary.
        assert!(in_neighborhood(
            MetricSpace::EuclideanVector,
            &vector(&[0.0, 0.0]),
            5.0,
            &vector(&[3.0, 4.0]),
        )
        .unwrap());
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let err = distance(MetricSpace::AbsoluteDifference, &real(1.0), &Value::Integer(1));
        assert!(matches!(err, Err(MetricError::KindMismatch { .. })));
        let err = distance(
            MetricSpace::EuclideanVector,
            &vector(&[1.0]),
            &vector(&[1.0, 2.0]),
        );
        assert!(matches!(err, Err(MetricError::LengthMismatch { .. })));
    }

    #[test]
    fn unequal_symbols_get_infinite_distance_in_numeric_space() {
        let d = distance(MetricSpace::AbsoluteDifference, &symbol("a"), &symbol("b")).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn booleans_are_equality_only_in_numeric_space() {
        let t = Value::Boolean(true);
        let f = Value::Boolean(false);
        assert_eq!(distance(MetricSpace::AbsoluteDifference, &t, &t).unwrap(), 0.0);
        assert!(distance(MetricSpace::AbsoluteDifference, &t, &f).unwrap().is_infinite());
        assert_eq!(distance(MetricSpace::Discrete01, &t, &f).unwrap(), 1.0);
    }

    #[test]
    fn negative_radius_rejected() {
        let err = in_neighborhood(MetricSpace::Discrete01, &real(0.0), -1.0, &real(0.0));
        assert!(matches!(err, Err(MetricError::NegativeRadius(_))));
    }

    fn arb_scalar() -> impl Strategy<Value = Value> {
        prop_oneof![
            (-1e6f64..1e6).prop_map(Value::Real),
            (-1_000_000i64..1_000_000).prop_map(Value::Integer),
        ]
    }

    fn arb_vec3() -> impl Strategy<Value = Value> {
        prop::collection::vec(-1e3f64..1e3, 3).prop_map(Value::Vector)
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_scalar(a in arb_scalar(), b in arb_scalar()) {
            for space in [MetricSpace::AbsoluteDifference, MetricSpace::Discrete01] {
                let fwd = distance(space, &a, &b);
                let rev = distance(space, &b, &a);
                prop_assert_eq!(fwd.clone().ok(), rev.ok());
                if let Ok(d) = fwd {
                    prop_assert!(d >= 0.0);
                }
            }
        }

        #[test]
        fn distance_is_symmetric_vector(a in arb_vec3(), b in arb_vec3()) {
            let fwd = distance(MetricSpace::EuclideanVector, &a, &b).unwrap();
            let rev = distance(MetricSpace::EuclideanVector, &b, &a).unwrap();
            prop_assert_eq!(fwd, rev);
        }

        #[test]
        fn triangle_inequality_holds(
            a in -1e3f64..1e3,
            b in -1e3f64..1e3,
            c in -1e3f64..1e3,
        ) {
            let (a, b, c) = (real(a), real(b), real(c));
            let ab = distance(MetricSpace::AbsoluteDifference, &a, &b).unwrap();
            let bc = distance(MetricSpace::AbsoluteDifference, &b, &c).unwrap();
            let ac = distance(MetricSpace::AbsoluteDifference, &a, &c).unwrap();
            // Tiny slack only for the rounding of the two partial sums.
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn triangle_inequality_euclidean(
            a in arb_vec3(),
            b in arb_vec3(),
            c in arb_vec3(),
        ) {
            let ab = distance(MetricSpace::EuclideanVector, &a, &b).unwrap();
            let bc = distance(MetricSpace::EuclideanVector, &b, &c).unwrap();
            let ac = distance(MetricSpace::EuclideanVector, &a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn zero_radius_ball_is_equality(a in arb_scalar(), b in arb_scalar()) {
            for space in [MetricSpace::AbsoluteDifference, MetricSpace::Discrete01] {
                if a.kind() == b.kind() {
                    let inside = in_neighborhood(space, &a, 0.0, &b).unwrap();
                    let d = distance(space, &a, &b).unwrap();
                    prop_assert_eq!(inside, d == 0.0);
                    prop_assert_eq!(d == 0.0, a == b);
                }
            }
        }

        #[test]
        fn neighborhood_monotone_in_radius(
            a in arb_scalar(),
            b in arb_scalar(),
            r1 in 0.0f64..10.0,
            extra in 0.0f64..10.0,
        ) {
            if a.kind() == b.kind() {
                let r2 = r1 + extra;
                let space = MetricSpace::AbsoluteDifference;
                let small = in_neighborhood(space, &a, r1, &b).unwrap();
                let large = in_neighborhood(space, &a, r2, &b).unwrap();
                prop_assert!(!small || large);
            }
        }
    }
}
