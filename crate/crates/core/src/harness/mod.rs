//! Scenario definition, workload expansion, metric aggregation, CSV emission,
//! and parameter sweeps.

mod parse;

pub use parse::{parse_scenario, parse_transform_text as parse_transform, ScenarioError};

use std::fmt::Write as _;

use crate::consensus::{Policy, QuorumConfig, WriteMode, MAX_MATCH_NODES};
use crate::metric::{default_space_for, MetricSpace, Value, ValueKind};
use crate::simnet::{self, NetModel, NodeBehavior, NodeSpec, Role, RunResult, SimError};

/// How learned values are produced: from the proposer's piggybacked state,
/// from the matched vector via the policy, or not at all (detection only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    LeaderState,
    Vector,
    DetectOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadOp {
    Write(Value),
    Read,
}

/// A full reproducible experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Seed as written in the scenario file; resolution against flag and
    /// environment happens at the call site.
    pub seed: Option<u64>,
    pub cfg: QuorumConfig,
    pub nodes: Vec<NodeSpec>,
    pub net: NetModel,
    pub mode: ScenarioMode,
    pub policy: Policy,
    pub protocol_epsilon: f64,
    pub protocol_alpha: f64,
    pub workload: Vec<WorkloadOp>,
}

impl Scenario {
    /// Resolves the effective seed: flag overrides file, file overrides the
    /// environment, and everything falls back to zero.
    pub fn effective_seed(&self, flag: Option<u64>, env: Option<u64>) -> u64 {
        flag.or(self.seed).or(env).unwrap_or(0)
    }

    /// The kind of value this scenario's protocol operates on.
    pub fn reference_kind(&self) -> ValueKind {
        for op in &self.workload {
            if let WorkloadOp::Write(value) = op {
                return value.kind();
            }
        }
        for node in &self.nodes {
            if let NodeBehavior::ExactReplica { initial } = &node.behavior {
                return initial.kind();
            }
        }
        match self.nodes.first().map(|n| &n.behavior) {
            Some(NodeBehavior::Artira { initial, .. }) => initial.kind(),
            _ => ValueKind::Real,
        }
    }

    /// The metric space is derived from the value kind rather than declared.
    pub fn space(&self) -> MetricSpace {
        default_space_for(self.reference_kind())
    }

    pub fn write_mode(&self) -> WriteMode {
        match self.mode {
            ScenarioMode::LeaderState => WriteMode::LeaderState,
            ScenarioMode::Vector | ScenarioMode::DetectOnly => WriteMode::Vector,
        }
    }

    /// The value learned values are judged against before any write commits:
    /// the first exact replica's initial state, else node 0's raw initial.
    pub fn initial_reference(&self) -> Option<Value> {
        for node in &self.nodes {
            if let NodeBehavior::ExactReplica { initial } = &node.behavior {
                return Some(initial.clone());
            }
        }
        self.nodes.first().map(|n| match &n.behavior {
            NodeBehavior::ExactReplica { initial } | NodeBehavior::Artira { initial, .. } => {
                initial.clone()
            }
        })
    }

    /// Collects every violated invariant; an empty list means the scenario is
    /// runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let mut push = |msg: String| violations.push(msg);

        if let Err(msg) = self.cfg.validate() {
            push(msg);
        }
        if self.cfg.n != self.nodes.len() {
            push(format!(
                "n = {} must equal the number of node sections ({})",
                self.cfg.n,
                self.nodes.len()
            ));
        }
        if self.nodes.len() > MAX_MATCH_NODES {
            push(format!(
                "at most {MAX_MATCH_NODES} nodes supported, got {}",
                self.nodes.len()
            ));
        }
        for (index, node) in self.nodes.iter().enumerate() {
            if node.node_id != index {
                push(format!(
                    "node ids must be dense 0..n-1: position {index} holds id {}",
                    node.node_id
                ));
            }
        }
        if !self.nodes.iter().any(|n| n.roles.contains(&Role::Proposer)) {
            push("at least one node must have the proposer capability".into());
        }
        if !(self.protocol_alpha > 0.0 && self.protocol_alpha <= 1.0) {
            push(format!(
                "protocol alpha must lie in (0, 1], got {}",
                self.protocol_alpha
            ));
        }
        if !(self.protocol_epsilon >= 0.0 && self.protocol_epsilon.is_finite()) {
            push(format!(
                "protocol epsilon must be a non-negative finite real, got {}",
                self.protocol_epsilon
            ));
        }
        if !(0.0..=1.0).contains(&self.net.drop_prob) {
            push(format!(
                "drop probability must lie in [0, 1], got {}",
                self.net.drop_prob
            ));
        }
        if self.net.base_delay == 0 {
            push("base delay must be at least one tick".into());
        }

        let has_writes = self
            .workload
            .iter()
            .any(|op| matches!(op, WorkloadOp::Write(_)));
        if self.mode == ScenarioMode::DetectOnly && has_writes {
            push("detect-only scenarios cannot carry write operations".into());
        }

        let reference_kind = self.reference_kind();
        let mut vector_len: Option<usize> = None;
        let mut check_value = |value: &Value, what: String, push: &mut dyn FnMut(String)| {
            if value.kind() != reference_kind {
                push(format!(
                    "{what} has kind {}, expected {reference_kind}",
                    value.kind()
                ));
            }
            if let Value::Vector(xs) = value {
                match vector_len {
                    None => vector_len = Some(xs.len()),
                    Some(len) if len != xs.len() => push(format!(
                        "{what} has vector length {}, expected {len}",
                        xs.len()
                    )),
                    Some(_) => {}
                }
            }
        };
        for (i, op) in self.workload.iter().enumerate() {
            if let WorkloadOp::Write(value) = op {
                check_value(value, format!("workload op {i}"), &mut push);
            }
        }
        for node in &self.nodes {
            match &node.behavior {
                NodeBehavior::ExactReplica { initial } => {
                    check_value(initial, format!("node {} initial", node.node_id), &mut push);
                }
                NodeBehavior::Artira { triple, initial } => {
                    if !initial.is_numeric() {
                        push(format!(
                            "node {}: artira raw initial must be numeric, got {}",
                            node.node_id,
                            initial.kind()
                        ));
                    }
                    let kind_preserving = matches!(
                        triple.transform,
                        crate::adapter::TransformSpec::Identity
                            | crate::adapter::TransformSpec::Negate
                    );
                    if reference_kind == ValueKind::Integer && !kind_preserving {
                        push(format!(
                            "node {}: transform produces reals, but the scenario kind is integer",
                            node.node_id
                        ));
                    }
                    if let Err(e) = triple.transform.validate() {
                        push(format!("node {}: {e}", node.node_id));
                    }
                    if let Some(inverse) = &triple.inverse {
                        if let Err(e) = inverse.validate() {
                            push(format!("node {}: inverse: {e}", node.node_id));
                        }
                    }
                    if has_writes && triple.inverse.is_none() {
                        push(format!(
                            "node {}: artira without an inverse cannot execute writes",
                            node.node_id
                        ));
                    }
                }
            }
            for fault in &node.fault_schedule {
                if !fault.kind.allowed_under(self.cfg.fault_model) {
                    push(format!(
                        "node {}: fault {} at t = {} is not allowed under {:?}",
                        node.node_id,
                        fault.kind.name(),
                        fault.at_time,
                        self.cfg.fault_model
                    ));
                }
            }
        }

        let numeric_kind =
            matches!(reference_kind, ValueKind::Real | ValueKind::Integer);
        let numeric_policy = matches!(
            self.policy,
            Policy::Min | Policy::Max | Policy::Mean | Policy::Median | Policy::PreferReplica
        );
        if numeric_policy && !numeric_kind && self.mode != ScenarioMode::DetectOnly {
            push(format!(
                "policy {:?} needs numeric values, but the scenario kind is {reference_kind}",
                self.policy
            ));
        }
        if self.nodes.iter().any(|n| n.is_artira()) && !numeric_kind {
            push(format!(
                "artira nodes require numeric values, but the scenario kind is {reference_kind}"
            ));
        }

        violations
    }

    /// Canonical text form; parsing it back yields an equal scenario.
    pub fn to_text(&self) -> String {
        parse::emit_scenario(self)
    }
}

/// Aggregates measured over one scenario run. Costs are measured, not
/// modeled: the replication factor is simply the node count and message
/// counts come straight from the delivery layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub commit_rate: f64,
    pub mean_abs_error: f64,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub messages_dropped: u64,
    pub replication_factor: usize,
    /// Meaningful for detect-only runs; vacuously 1 when nothing was flagged.
    pub detection_precision: f64,
    pub detection_recall: f64,
}

/// A completed scenario run: aggregates plus the per-request CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub metrics: Metrics,
    pub csv: String,
    pub result: RunResult,
}

pub const CSV_HEADER: &str = "request_index,kind,committed,learned_value,reference_value,abs_error,match_size,aggregate_alpha,messages";

/// Reals print with 17 significant digits so CSV bytes are replay-stable.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_value(value: &Value) -> String {
    match value {
        Value::Real(x) => fmt_real(*x),
        Value::Integer(n) => n.to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::Symbol(s) => s.clone(),
        Value::Vector(xs) => {
            let parts: Vec<String> = xs.iter().map(|x| fmt_real(*x)).collect();
            format!("({})", parts.join(";"))
        }
    }
}

/// Runs a scenario and renders the per-request CSV.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<ScenarioRun, SimError> {
    let result = simnet::run(scenario, seed)?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for request in &result.requests {
        let learned = request
            .decision
            .learned
            .as_ref()
            .map(fmt_value)
            .unwrap_or_default();
        let reference = request.reference.as_ref().map(fmt_value).unwrap_or_default();
        let abs_error = match (
            request.decision.learned.as_ref().and_then(Value::as_real),
            request.reference.as_ref().and_then(Value::as_real),
        ) {
            (Some(a), Some(b)) => fmt_real((a - b).abs()),
            _ => String::new(),
        };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            request.index,
            request.kind.label(),
            request.decision.committed,
            learned,
            reference,
            abs_error,
            request.decision.match_set.size(),
            fmt_real(request.decision.match_set.aggregate_alpha),
            request.decision.message_count,
        )
        .expect("writing to a string cannot fail");
    }
    Ok(ScenarioRun { metrics: result.metrics.clone(), csv, result })
}

/// A sweepable scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Epsilon,
    Alpha,
    DropProb,
    F,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Alpha => "alpha",
            SweepAxis::DropProb => "drop_prob",
            SweepAxis::F => "f",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "epsilon" => Ok(SweepAxis::Epsilon),
            "alpha" => Ok(SweepAxis::Alpha),
            "drop_prob" => Ok(SweepAxis::DropProb),
            "f" => Ok(SweepAxis::F),
            other => Err(format!(
                "invalid sweep axis \"{other}\" (expected epsilon, alpha, drop_prob, or f)"
            )),
        }
    }
}

pub const SWEEP_HEADER: &str = "axis,value,commit_rate,mean_abs_error,messages_sent,messages_delivered,messages_dropped,replication_factor,detection_precision,detection_recall";

/// Applies one axis value to a copy of the base scenario. Sweeping `f`
/// re-derives `n` and `q` from the fault model and resizes the node list by
/// cloning the highest-id node spec (without its fault schedule) into the new
/// slots, so injected faults never multiply beyond the base schedule.
pub fn apply_axis(base: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario, SimError> {
    let mut scenario = base.clone();
    match axis {
        SweepAxis::Epsilon => scenario.protocol_epsilon = value,
        SweepAxis::Alpha => scenario.protocol_alpha = value,
        SweepAxis::DropProb => scenario.net.drop_prob = value,
        SweepAxis::F => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(SimError::Validation {
                    violations: vec![format!(
                        "axis f takes non-negative integers, got {value}"
                    )],
                });
            }
            let f = value as usize;
            scenario.cfg = QuorumConfig::sized_for(f, scenario.cfg.fault_model);
            let template = scenario
                .nodes
                .last()
                .cloned()
                .ok_or_else(|| SimError::Validation {
                    violations: vec!["axis f needs at least one node to clone".into()],
                })?;
            while scenario.nodes.len() < scenario.cfg.n {
                let mut spec = template.clone();
                spec.node_id = scenario.nodes.len();
                spec.fault_schedule = Vec::new();
                scenario.nodes.push(spec);
            }
            scenario.nodes.truncate(scenario.cfg.n);
        }
    }
    Ok(scenario)
}

/// One metrics row per axis value, same seed per row, emitted in axis order.
pub fn sweep(
    base: &Scenario,
    axis: SweepAxis,
    values: &[f64],
    seed: u64,
) -> Result<String, SimError> {
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for &value in values {
        let scenario = apply_axis(base, axis, value)?;
        let run = run_scenario(&scenario, seed)?;
        let m = &run.metrics;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            axis.label(),
            fmt_real(value),
            fmt_real(m.commit_rate),
            fmt_real(m.mean_abs_error),
            m.messages_sent,
            m.messages_delivered,
            m.messages_dropped,
            m.replication_factor,
            fmt_real(m.detection_precision),
            fmt_real(m.detection_recall),
        )
        .expect("writing to a string cannot fail");
    }
    Ok(csv)
}

/// Workload constructors shared by the parser and tests.
pub fn writes_ramp(count: usize, start: f64, step: f64) -> Vec<WorkloadOp> {
    (0..count)
        .map(|i| WorkloadOp::Write(Value::Real(start + i as f64 * step)))
        .collect()
}

pub fn reads(count: usize) -> Vec<WorkloadOp> {
    (0..count).map(|_| WorkloadOp::Read).collect()
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "commit_rate: {}", self.commit_rate)?;
        writeln!(f, "mean_abs_error: {}", self.mean_abs_error)?;
        writeln!(f, "messages_sent: {}", self.messages_sent)?;
        writeln!(f, "messages_delivered: {}", self.messages_delivered)?;
        writeln!(f, "messages_dropped: {}", self.messages_dropped)?;
        writeln!(f, "replication_factor: {}", self.replication_factor)?;
        writeln!(f, "detection_precision: {}", self.detection_precision)?;
        write!(f, "detection_recall: {}", self.detection_recall)
    }
}
