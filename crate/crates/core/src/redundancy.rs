//! Correlation-based redundancy checks and artira qualification.
//!
//! Two components are artificially redundant when their outputs under matched
//! conditions correlate strongly enough; an artira is qualified by sweeping an
//! accuracy bound ε′ upward until the fraction of transform residuals inside
//! the bound reaches the requested certainty α′.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::adapter::TransformSpec;
use crate::metric::{distance, MetricSpace, Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RedundancyError {
    #[error("need at least 2 paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("samples in one column must share a kind: {left} vs {right}")]
    MixedKinds { left: ValueKind, right: ValueKind },
    #[error("correlation requires numeric samples, got {0}")]
    NonNumeric(ValueKind),
    #[error("degenerate samples: the {0} marginal has zero variance")]
    DegenerateSamples(&'static str),
    #[error("no sample satisfies the conditioning predicate")]
    EmptyCondition,
    #[error("correlation threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("invalid qualification target: {0}")]
    InvalidTarget(String),
    #[error("transform failed on sample {index}: {message}")]
    TransformFailed { index: usize, message: String },
    #[error("sample CSV: {0}")]
    Csv(String),
}

/// Paired observations `(x, y)` of two components under matched conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    pairs: Vec<(Value, Value)>,
}

impl PairedSamples {
    pub fn new(pairs: Vec<(Value, Value)>) -> Result<Self, RedundancyError> {
        if pairs.len() < 2 {
            return Err(RedundancyError::TooFewSamples(pairs.len()));
        }
        for column in [0usize, 1] {
            let kind_of = |p: &(Value, Value)| if column == 0 { p.0.kind() } else { p.1.kind() };
            let first = kind_of(&pairs[0]);
            if let Some(bad) = pairs.iter().map(kind_of).find(|k| *k != first) {
                return Err(RedundancyError::MixedKinds {
                    left: first,
                    right: bad,
                });
            }
        }
        Ok(Self { pairs })
    }

    pub fn from_reals(pairs: &[(f64, f64)]) -> Result<Self, RedundancyError> {
        Self::new(
            pairs
                .iter()
                .map(|&(x, y)| (Value::Real(x), Value::Real(y)))
                .collect(),
        )
    }

    /// Loads samples from CSV text: header row `x,y` then two numeric columns,
    /// `.` as the decimal separator.
    pub fn from_csv_str(text: &str) -> Result<Self, RedundancyError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "x,y" => {}
            Some((_, header)) => {
                return Err(RedundancyError::Csv(format!(
                    "expected header \"x,y\", got \"{}\"",
                    header.trim()
                )))
            }
            None => return Err(RedundancyError::Csv("empty file".into())),
        }
        let mut pairs = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (x, y) = match (fields.next(), fields.next(), fields.next()) {
                (Some(x), Some(y), None) => (x.trim(), y.trim()),
                _ => {
                    return Err(RedundancyError::Csv(format!(
                        "line {}: expected exactly two fields",
                        lineno + 1
                    )))
                }
            };
            let parse = |field: &str| -> Result<f64, RedundancyError> {
                field.parse::<f64>().map_err(|_| {
                    RedundancyError::Csv(format!(
                        "line {}: \"{}\" is not a number",
                        lineno + 1,
                        field
                    ))
                })
            };
            pairs.push((Value::Real(parse(x)?), Value::Real(parse(y)?)));
        }
        Self::new(pairs)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, RedundancyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RedundancyError::Csv(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Value, Value)] {
        &self.pairs
    }

    /// Swaps the two columns; correlation must be invariant under this.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
        }
    }

    fn numeric_columns(&self) -> Result<(Vec<f64>, Vec<f64>), RedundancyError> {
        let mut xs = Vec::with_capacity(self.pairs.len());
        let mut ys = Vec::with_capacity(self.pairs.len());
        for (x, y) in &self.pairs {
            xs.push(x.as_real().ok_or(RedundancyError::NonNumeric(x.kind()))?);
            ys.push(y.as_real().ok_or(RedundancyError::NonNumeric(y.kind()))?);
        }
        Ok((xs, ys))
    }
}

/// Outcome of a redundancy check between two sampled components.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Signed Pearson coefficient.
    pub zeta: f64,
    /// Acceptance threshold the check ran against.
    pub tau: f64,
    /// Whether `|zeta| >= tau`.
    pub accepted: bool,
    /// Empirical conditional-probability bound `P(R | Q)`.
    pub beta: f64,
    /// Number of paired samples behind the estimate. How many samples justify
    /// a claimed certainty is left to the scenario author.
    pub count: usize,
}

/// Two-pass Pearson product-moment coefficient (mean pass, then covariance).
pub fn estimate_correlation(samples: &PairedSamples) -> Result<f64, RedundancyError> {
    let (xs, ys) = samples.numeric_columns()?;
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(RedundancyError::DegenerateSamples("x"));
    }
    if var_y == 0.0 {
        return Err(RedundancyError::DegenerateSamples("y"));
    }
    // Single square root of the variance product: perfectly linear samples
    // land on exactly ±1. Rounding can still push the quotient a few ulp past
    // the mathematical |ζ| <= 1 bound, so clamp it back.
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Empirical `P(R | Q)`: among pairs whose `y` satisfies `predicate_q`, the
/// fraction whose `x` satisfies `predicate_r`.
pub fn estimate_beta(
    samples: &PairedSamples,
    predicate_r: impl Fn(&Value) -> bool,
    predicate_q: impl Fn(&Value) -> bool,
) -> Result<f64, RedundancyError> {
    let mut q_count = 0usize;
    let mut rq_count = 0usize;
    for (x, y) in samples.pairs() {
        if predicate_q(y) {
            q_count += 1;
            if predicate_r(x) {
                rq_count += 1;
            }
        }
    }
    if q_count == 0 {
        return Err(RedundancyError::EmptyCondition);
    }
    Ok(rq_count as f64 / q_count as f64)
}

/// Checks artificial redundancy at threshold `tau`.
///
/// Acceptance uses `|zeta| >= tau`: perfect negative correlation is as strong
/// a redundancy source as perfect positive correlation. `beta` is filled with
/// the default predicates (`Q` = "y observed", `R` = "a paired x exists"),
/// which is 1 on complete paired data; use [`estimate_beta`] directly for
/// nontrivial predicates.
pub fn check_redundancy(
    samples: &PairedSamples,
    tau: f64,
) -> Result<CorrelationReport, RedundancyError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(RedundancyError::InvalidThreshold(tau));
    }
    let zeta = estimate_correlation(samples)?;
    let beta = estimate_beta(samples, |_| true, |_| true)?;
    Ok(CorrelationReport {
        zeta,
        tau,
        accepted: zeta.abs() >= tau,
        beta,
        count: samples.len(),
    })
}

/// The redundancy model an artira triple falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedundancyModel {
    /// Perfect: ε = 0, α = 1. Behaves exactly like an exact replica.
    Par,
    /// Strong: bounded error ε > 0 achieved with certainty α = 1.
    Sar,
    /// Weak: α < 1; the error cannot be fully bounded.
    War,
}

impl std::fmt::Display for RedundancyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RedundancyModel::Par => "par",
            RedundancyModel::Sar => "sar",
            RedundancyModel::War => "war",
        })
    }
}

/// Classifies a (certainty, accuracy-bound) pair.
pub fn classify_model(alpha: f64, epsilon: f64) -> RedundancyModel {
    if alpha >= 1.0 {
        if epsilon == 0.0 {
            RedundancyModel::Par
        } else {
            RedundancyModel::Sar
        }
    } else {
        RedundancyModel::War
    }
}

/// The certification of an artificial replica: transform, optional coder
/// inverse, certainty α, accuracy bound ε, and the model they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtiraTriple {
    pub transform: TransformSpec,
    pub inverse: Option<TransformSpec>,
    pub alpha: f64,
    pub epsilon: f64,
    pub model: RedundancyModel,
}

impl ArtiraTriple {
    /// Builds a triple, deriving the model from (α, ε) and the inverse from
    /// the transform when it has a closed-form one.
    pub fn new(
        transform: TransformSpec,
        inverse: Option<TransformSpec>,
        alpha: f64,
        epsilon: f64,
    ) -> Result<Self, RedundancyError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(RedundancyError::InvalidTarget(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if epsilon < 0.0 || epsilon.is_nan() {
            return Err(RedundancyError::InvalidTarget(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        let inverse = inverse.or_else(|| transform.inverse());
        Ok(Self {
            model: classify_model(alpha, epsilon),
            transform,
            inverse,
            alpha,
            epsilon,
        })
    }

    pub fn perfect(transform: TransformSpec) -> Result<Self, RedundancyError> {
        Self::new(transform, None, 1.0, 0.0)
    }
}

/// Per-action redundancy mapping from the actions of one component (the
/// reference, `B`) to those of another (`A`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionMap {
    entries: BTreeMap<String, Option<ActionMapping>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionMapping {
    pub source_action: String,
    pub report: CorrelationReport,
}

impl ActionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn map_action(
        &mut self,
        target_action: impl Into<String>,
        source_action: impl Into<String>,
        report: CorrelationReport,
    ) {
        self.entries.insert(
            target_action.into(),
            Some(ActionMapping {
                source_action: source_action.into(),
                report,
            }),
        );
    }

    pub fn unmapped_action(&mut self, target_action: impl Into<String>) {
        self.entries.insert(target_action.into(), None);
    }

    pub fn entries(&self) -> &BTreeMap<String, Option<ActionMapping>> {
        &self.entries
    }
}

/// Degree of partial artificial redundancy an action map establishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedundancyLevel {
    None,
    Partial,
    Full,
}

/// Full iff every reference action has a mapping accepted at `tau` (a
/// surjection); Partial iff at least one accepted mapping exists.
pub fn check_partial_redundancy(map: &ActionMap, tau: f64) -> RedundancyLevel {
    let accepted = |entry: &Option<ActionMapping>| {
        entry
            .as_ref()
            .is_some_and(|m| m.report.zeta.abs() >= tau)
    };
    let total = map.entries.len();
    let accepted_count = map.entries.values().filter(|e| accepted(e)).count();
    if total > 0 && accepted_count == total {
        RedundancyLevel::Full
    } else if accepted_count > 0 {
        RedundancyLevel::Partial
    } else {
        RedundancyLevel::None
    }
}

/// A qualification miss: the best certainty reachable within the target bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub best_alpha: f64,
    pub best_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QualifyOutcome {
    Accepted(ArtiraTriple),
    Rejected(Rejection),
}

/// Qualifies `transform` as an artira of the reference from paired samples.
///
/// Residuals `d(F(x), y)` are computed over all samples, then ε′ sweeps a
/// fixed grid from 0 by `epsilon_step` up to `target_epsilon`; at each grid
/// point α′ is the fraction of residuals within ε′. The first (smallest-ε′)
/// point with α′ ≥ `target_alpha` is accepted; otherwise the best pair
/// achieved at the target bound comes back as a [`Rejection`].
pub fn qualify_artira(
    samples: &PairedSamples,
    transform: &TransformSpec,
    target_alpha: f64,
    target_epsilon: f64,
    space: MetricSpace,
    epsilon_step: f64,
) -> Result<QualifyOutcome, RedundancyError> {
    if !(target_alpha > 0.0 && target_alpha <= 1.0) {
        return Err(RedundancyError::InvalidTarget(format!(
            "target alpha must lie in (0, 1], got {target_alpha}"
        )));
    }
    if target_epsilon < 0.0 || target_epsilon.is_nan() {
        return Err(RedundancyError::InvalidTarget(format!(
            "target epsilon must be non-negative, got {target_epsilon}"
        )));
    }
    if epsilon_step <= 0.0 || epsilon_step.is_nan() {
        return Err(RedundancyError::InvalidTarget(format!(
            "epsilon step must be positive, got {epsilon_step}"
        )));
    }

    let residuals = transform_residuals(samples, transform, space)?;
    let total = residuals.len() as f64;
    let alpha_at = |eps: f64| residuals.iter().filter(|r| **r <= eps).count() as f64 / total;

    for eps in epsilon_grid(target_epsilon, epsilon_step) {
        let alpha = alpha_at(eps);
        if alpha >= target_alpha {
            let triple = ArtiraTriple::new(transform.clone(), None, alpha, eps)?;
            return Ok(QualifyOutcome::Accepted(triple));
        }
    }
    Ok(QualifyOutcome::Rejected(Rejection {
        best_alpha: alpha_at(target_epsilon),
        best_epsilon: target_epsilon,
    }))
}

/// The ε′ sweep grid: multiples of the step, closed with the target itself.
///
/// Grid points are computed as `k * step` (not accumulated) so the grid is
/// identical however it is traversed.
pub fn epsilon_grid(target_epsilon: f64, step: f64) -> impl Iterator<Item = f64> {
    let mut points: Vec<f64> = Vec::new();
    let mut k = 0u64;
    loop {
        let eps = k as f64 * step;
        if eps >= target_epsilon {
            break;
        }
        points.push(eps);
        k += 1;
    }
    points.push(target_epsilon);
    points.into_iter()
}

/// Residuals `d(F(x), y)` after numeric promotion, one per sample pair.
pub fn transform_residuals(
    samples: &PairedSamples,
    transform: &TransformSpec,
    space: MetricSpace,
) -> Result<Vec<f64>, RedundancyError> {
    let mut residuals = Vec::with_capacity(samples.len());
    for (index, (x, y)) in samples.pairs().iter().enumerate() {
        let x = x.as_real().ok_or(RedundancyError::NonNumeric(x.kind()))?;
        let y = y.as_real().ok_or(RedundancyError::NonNumeric(y.kind()))?;
        let fx = transform
            .apply(x, index as u64)
            .map_err(|e| RedundancyError::TransformFailed {
                index,
                message: e.to_string(),
            })?;
        let r = distance(space, &Value::Real(fx), &Value::Real(y)).map_err(|e| {
            RedundancyError::TransformFailed {
                index,
                message: e.to_string(),
            }
        })?;
        residuals.push(r);
    }
    Ok(residuals)
}
