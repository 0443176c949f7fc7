//! Scenario text format: flat `key = value` lines with `[node.<id>]` section
//! headers. Strict mode: unknown keys are errors. Full-line `#` comments are
//! allowed; values never contain `#`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::adapter::TransformSpec;
use crate::consensus::{FaultModel, Policy, QuorumConfig};
use crate::metric::Value;
use crate::redundancy::{ArtiraTriple, RedundancyModel};
use crate::simnet::{
    all_roles, ByzantineStrategy, FaultEvent, FaultKind, NetModel, NodeBehavior, NodeSpec, Role,
};

use super::{reads, writes_ramp, Scenario, ScenarioMode, WorkloadOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario validation failed:\n  {}", violations.join("\n  "))]
    Validation { violations: Vec<String> },
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Parse { line, message: message.into() })
}

#[derive(Debug, Default)]
struct RawNode {
    header_line: usize,
    kind: Option<(usize, String)>,
    initial: Option<(usize, String)>,
    roles: Option<(usize, String)>,
    transform: Option<(usize, String)>,
    inverse: Option<(usize, String)>,
    epsilon: Option<(usize, String)>,
    alpha: Option<(usize, String)>,
    model: Option<(usize, String)>,
    faults: Vec<(usize, String)>,
}

#[derive(Debug, Default)]
struct RawScenario {
    name: Option<(usize, String)>,
    seed: Option<(usize, String)>,
    fault_model: Option<(usize, String)>,
    n: Option<(usize, String)>,
    f: Option<(usize, String)>,
    q: Option<(usize, String)>,
    mode: Option<(usize, String)>,
    policy: Option<(usize, String)>,
    epsilon: Option<(usize, String)>,
    alpha: Option<(usize, String)>,
    base_delay: Option<(usize, String)>,
    jitter: Option<(usize, String)>,
    drop_prob: Option<(usize, String)>,
    workload: Option<(usize, String)>,
    nodes: Vec<(usize, RawNode)>, // (declared id, raw)
}

/// Parses and fully validates a scenario from text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw = tokenize(text)?;
    let scenario = assemble(raw)?;
    let violations = scenario.validate();
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Validation { violations })
    }
}

fn tokenize(text: &str) -> Result<RawScenario, ScenarioError> {
    let mut raw = RawScenario::default();
    let mut current: Option<(usize, RawNode)> = None;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[') {
            let Some(section) = section.strip_suffix(']') else {
                return parse_err(lineno, "unterminated section header");
            };
            let Some(id_text) = section.strip_prefix("node.") else {
                return parse_err(lineno, format!("unknown section [{section}]"));
            };
            let id: usize = id_text
                .parse()
                .map_err(|_| ScenarioError::Parse {
                    line: lineno,
                    message: format!("invalid node id \"{id_text}\""),
                })?;
            if let Some(done) = current.take() {
                raw.nodes.push(done);
            }
            current = Some((id, RawNode { header_line: lineno, ..RawNode::default() }));
            continue;
        }

        let Some((key, value)) = line.split_once('=') else {
            return parse_err(lineno, "expected key = value");
        };
        let key = key.trim();
        let value = value.trim().to_string();
        if value.is_empty() {
            return parse_err(lineno, format!("key \"{key}\" has an empty value"));
        }
        let cell = (lineno, value);

        match &mut current {
            Some((_, node)) => {
                let slot = match key {
                    "kind" => &mut node.kind,
                    "initial" => &mut node.initial,
                    "roles" => &mut node.roles,
                    "transform" => &mut node.transform,
                    "inverse" => &mut node.inverse,
                    "epsilon" => &mut node.epsilon,
                    "alpha" => &mut node.alpha,
                    "model" => &mut node.model,
                    "fault" => {
                        node.faults.push(cell);
                        continue;
                    }
                    other => {
                        return parse_err(lineno, format!("unknown node key \"{other}\""));
                    }
                };
                if slot.is_some() {
                    return parse_err(lineno, format!("duplicate node key \"{key}\""));
                }
                *slot = Some(cell);
            }
            None => {
                let slot = match key {
                    "name" => &mut raw.name,
                    "seed" => &mut raw.seed,
                    "fault_model" => &mut raw.fault_model,
                    "n" => &mut raw.n,
                    "f" => &mut raw.f,
                    "q" => &mut raw.q,
                    "mode" => &mut raw.mode,
                    "policy" => &mut raw.policy,
                    "epsilon" => &mut raw.epsilon,
                    "alpha" => &mut raw.alpha,
                    "base_delay" => &mut raw.base_delay,
                    "jitter" => &mut raw.jitter,
                    "drop_prob" => &mut raw.drop_prob,
                    "workload" => &mut raw.workload,
                    other => {
                        return parse_err(lineno, format!("unknown key \"{other}\""));
                    }
                };
                if slot.is_some() {
                    return parse_err(lineno, format!("duplicate key \"{key}\""));
                }
                *slot = Some(cell);
            }
        }
    }
    if let Some(done) = current.take() {
        raw.nodes.push(done);
    }
    Ok(raw)
}

fn assemble(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let mut violations: Vec<String> = Vec::new();

    let fault_model = match &raw.fault_model {
        None => FaultModel::CrashStop,
        Some((line, text)) => match text.as_str() {
            "crash_stop" => FaultModel::CrashStop,
            "crash_recovery" => FaultModel::CrashRecovery,
            "byzantine" => FaultModel::Byzantine,
            other => return parse_err(*line, format!("unknown fault model \"{other}\"")),
        },
    };
    let f = match &raw.f {
        None => 0,
        Some(cell) => parse_int(cell, "f")? as usize,
    };
    let defaults = QuorumConfig::sized_for(f, fault_model);
    let n = match &raw.n {
        None => raw.nodes.len(),
        Some(cell) => parse_int(cell, "n")? as usize,
    };
    let q = match &raw.q {
        None => defaults.q,
        Some(cell) => parse_int(cell, "q")? as usize,
    };
    let cfg = QuorumConfig { n, f, q, fault_model };

    let mode = match &raw.mode {
        None => ScenarioMode::Vector,
        Some((line, text)) => match text.as_str() {
            "leader_state" => ScenarioMode::LeaderState,
            "vector" => ScenarioMode::Vector,
            "detect_only" => ScenarioMode::DetectOnly,
            other => return parse_err(*line, format!("unknown mode \"{other}\"")),
        },
    };
    let policy = match &raw.policy {
        None => Policy::Median,
        Some(cell) => parse_policy(cell)?,
    };
    let workload = match &raw.workload {
        None => Vec::new(),
        Some(cell) => parse_workload(cell)?,
    };

    let net = NetModel {
        base_delay: raw.base_delay.as_ref().map(|c| parse_int(c, "base_delay")).transpose()?.unwrap_or(1),
        jitter: raw.jitter.as_ref().map(|c| parse_int(c, "jitter")).transpose()?.unwrap_or(0),
        drop_prob: raw.drop_prob.as_ref().map(|c| parse_float(c, "drop_prob")).transpose()?.unwrap_or(0.0),
    };

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (declared_id, node) in &raw.nodes {
        nodes.push(assemble_node(*declared_id, node, &mut violations)?);
    }

    let scenario = Scenario {
        name: raw.name.map(|(_, v)| v).unwrap_or_else(|| "scenario".into()),
        seed: raw.seed.as_ref().map(|c| parse_int(c, "seed")).transpose()?,
        cfg,
        nodes,
        net,
        mode,
        policy,
        protocol_epsilon: raw
            .epsilon
            .as_ref()
            .map(|c| parse_float(c, "epsilon"))
            .transpose()?
            .unwrap_or(0.0),
        protocol_alpha: raw
            .alpha
            .as_ref()
            .map(|c| parse_float(c, "alpha"))
            .transpose()?
            .unwrap_or(1.0),
        workload,
    };
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Validation { violations })
    }
}

fn assemble_node(
    id: usize,
    raw: &RawNode,
    violations: &mut Vec<String>,
) -> Result<NodeSpec, ScenarioError> {
    let kind = match &raw.kind {
        Some((line, text)) => match text.as_str() {
            "replica" => "replica",
            "artira" => "artira",
            other => return parse_err(*line, format!("unknown node kind \"{other}\"")),
        },
        None => return parse_err(raw.header_line, format!("node {id} is missing \"kind\"")),
    };
    let initial = match &raw.initial {
        Some(cell) => parse_value(cell)?,
        None => return parse_err(raw.header_line, format!("node {id} is missing \"initial\"")),
    };
    let roles = match &raw.roles {
        None => all_roles(),
        Some(cell) => parse_roles(cell)?,
    };
    let mut fault_schedule = Vec::new();
    for cell in &raw.faults {
        fault_schedule.push(parse_fault(cell)?);
    }

    let behavior = if kind == "replica" {
        for (key, slot) in [
            ("transform", &raw.transform),
            ("inverse", &raw.inverse),
            ("epsilon", &raw.epsilon),
            ("alpha", &raw.alpha),
            ("model", &raw.model),
        ] {
            if let Some((line, _)) = slot {
                return parse_err(*line, format!("replica node {id} cannot set \"{key}\""));
            }
        }
        NodeBehavior::ExactReplica { initial }
    } else {
        let transform = match &raw.transform {
            Some(cell) => parse_transform_cell(cell)?,
            None => {
                return parse_err(
                    raw.header_line,
                    format!("artira node {id} is missing \"transform\""),
                )
            }
        };
        let inverse = raw.inverse.as_ref().map(parse_transform_cell).transpose()?;
        let epsilon = raw
            .epsilon
            .as_ref()
            .map(|c| parse_float(c, "epsilon"))
            .transpose()?
            .unwrap_or(0.0);
        let alpha = raw
            .alpha
            .as_ref()
            .map(|c| parse_float(c, "alpha"))
            .transpose()?
            .unwrap_or(1.0);
        match ArtiraTriple::new(transform, inverse, alpha, epsilon) {
            Ok(triple) => {
                if let Some(cell) = &raw.model {
                    let declared = parse_model(cell)?;
                    if declared != triple.model {
                        violations.push(format!(
                            "node {id}: declared model {declared} contradicts (alpha = {alpha}, epsilon = {epsilon}), which classify as {}",
                            triple.model
                        ));
                    }
                }
                NodeBehavior::Artira { triple, initial }
            }
            Err(e) => {
                violations.push(format!("node {id}: {e}"));
                // Placeholder so remaining checks still run; the violation
                // above already fails the parse.
                NodeBehavior::ExactReplica { initial }
            }
        }
    };

    Ok(NodeSpec { node_id: id, roles, behavior, fault_schedule })
}

fn parse_int((line, text): &(usize, String), key: &str) -> Result<u64, ScenarioError> {
    text.parse::<u64>().map_err(|_| ScenarioError::Parse {
        line: *line,
        message: format!("key \"{key}\": \"{text}\" is not a non-negative integer"),
    })
}

fn parse_float((line, text): &(usize, String), key: &str) -> Result<f64, ScenarioError> {
    let value: f64 = text.parse().map_err(|_| ScenarioError::Parse {
        line: *line,
        message: format!("key \"{key}\": \"{text}\" is not a number"),
    })?;
    if !value.is_finite() {
        return parse_err(*line, format!("key \"{key}\" must be finite"));
    }
    Ok(value)
}

fn parse_value((line, text): &(usize, String)) -> Result<Value, ScenarioError> {
    parse_value_text(text)
        .ok_or_else(|| ScenarioError::Parse {
            line: *line,
            message: format!("\"{text}\" is not a value literal"),
        })
}

/// Value literals: `42` integer, `42.0`/`1e-3` real, `true`/`false`,
/// `sym:word` symbol, `vec(1.0; 2.0)` vector.
fn parse_value_text(text: &str) -> Option<Value> {
    let text = text.trim();
    match text {
        "true" => return Some(Value::Boolean(true)),
        "false" => return Some(Value::Boolean(false)),
        _ => {}
    }
    if let Some(token) = text.strip_prefix("sym:") {
        let valid = !token.is_empty()
            && token
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        return valid.then(|| Value::Symbol(token.to_string()));
    }
    if let Some(inner) = text.strip_prefix("vec(").and_then(|t| t.strip_suffix(')')) {
        let mut elements = Vec::new();
        for part in inner.split(';') {
            let x: f64 = part.trim().parse().ok()?;
            if !x.is_finite() {
                return None;
            }
            elements.push(x);
        }
        return Some(Value::Vector(elements));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Some(Value::Integer(n));
    }
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(Value::Real(x)),
        _ => None,
    }
}

fn parse_roles((line, text): &(usize, String)) -> Result<BTreeSet<Role>, ScenarioError> {
    let mut roles = BTreeSet::new();
    for part in text.split(',') {
        let role = match part.trim() {
            "proposer" => Role::Proposer,
            "acceptor" => Role::Acceptor,
            "learner" => Role::Learner,
            other => return parse_err(*line, format!("unknown role \"{other}\"")),
        };
        roles.insert(role);
    }
    Ok(roles)
}

fn parse_model((line, text): &(usize, String)) -> Result<RedundancyModel, ScenarioError> {
    match text.as_str() {
        "par" => Ok(RedundancyModel::Par),
        "sar" => Ok(RedundancyModel::Sar),
        "war" => Ok(RedundancyModel::War),
        other => parse_err(*line, format!("unknown model \"{other}\"")),
    }
}

fn parse_policy((line, text): &(usize, String)) -> Result<Policy, ScenarioError> {
    match text.as_str() {
        "min" => return Ok(Policy::Min),
        "max" => return Ok(Policy::Max),
        "mean" => return Ok(Policy::Mean),
        "median" => return Ok(Policy::Median),
        "prefer_replica" => return Ok(Policy::PreferReplica),
        _ => {}
    }
    if let Some(args) = call_args(text, "random") {
        let seed: u64 = args
            .trim()
            .parse()
            .map_err(|_| ScenarioError::Parse {
                line: *line,
                message: format!("random policy seed \"{args}\" is not an integer"),
            })?;
        return Ok(Policy::Random { seed });
    }
    parse_err(*line, format!("unknown policy \"{text}\""))
}

/// `name(args)` helper: the inner argument text, when `text` is a call to
/// `name`.
fn call_args<'t>(text: &'t str, name: &str) -> Option<&'t str> {
    text.strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

pub fn parse_transform_text(text: &str) -> Result<TransformSpec, String> {
    let text = text.trim();
    match text {
        "identity" => return Ok(TransformSpec::Identity),
        "negate" => return Ok(TransformSpec::Negate),
        "reciprocal" => return Ok(TransformSpec::Reciprocal),
        _ => {}
    }
    let float = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("\"{}\" is not a number", s.trim()))
    };
    let int = |s: &str| -> Result<u64, String> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("\"{}\" is not a non-negative integer", s.trim()))
    };
    if let Some(args) = call_args(text, "affine") {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 2 {
            return Err("affine takes (scale, offset)".into());
        }
        return Ok(TransformSpec::Affine { scale: float(parts[0])?, offset: float(parts[1])? });
    }
    if let Some(args) = call_args(text, "bounded_noise") {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 2 {
            return Err("bounded_noise takes (delta, seed)".into());
        }
        return Ok(TransformSpec::BoundedNoise { delta: float(parts[0])?, seed: int(parts[1])? });
    }
    if let Some(args) = call_args(text, "stochastic_predictor") {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 3 {
            return Err("stochastic_predictor takes (error_scale, hit_prob, seed)".into());
        }
        return Ok(TransformSpec::StochasticPredictor {
            error_scale: float(parts[0])?,
            hit_prob: float(parts[1])?,
            seed: int(parts[2])?,
        });
    }
    Err(format!("unknown transform \"{text}\""))
}

fn parse_transform_cell((line, text): &(usize, String)) -> Result<TransformSpec, ScenarioError> {
    parse_transform_text(text).map_err(|message| ScenarioError::Parse { line: *line, message })
}

fn parse_fault((line, text): &(usize, String)) -> Result<FaultEvent, ScenarioError> {
    let Some((kind_text, tick_text)) = text.rsplit_once('@') else {
        return parse_err(*line, "fault syntax is <kind>@<tick>");
    };
    let at_time: u64 = tick_text.trim().parse().map_err(|_| ScenarioError::Parse {
        line: *line,
        message: format!("fault tick \"{tick_text}\" is not a non-negative integer"),
    })?;
    let kind_text = kind_text.trim();
    let kind = match kind_text {
        "crash" => FaultKind::Crash,
        "recover" => FaultKind::Recover,
        "byzantine_off" => FaultKind::ByzantineOff,
        _ => match call_args(kind_text, "byzantine_on") {
            Some(strategy) => FaultKind::ByzantineOn(parse_strategy(*line, strategy.trim())?),
            None => return parse_err(*line, format!("unknown fault kind \"{kind_text}\"")),
        },
    };
    Ok(FaultEvent { at_time, kind })
}

fn parse_strategy(line: usize, text: &str) -> Result<ByzantineStrategy, ScenarioError> {
    match text {
        "mute" => return Ok(ByzantineStrategy::Mute),
        "max_skew" => return Ok(ByzantineStrategy::MaxSkew),
        _ => {}
    }
    if let Some(args) = call_args(text, "arbitrary") {
        let seed: u64 = args.trim().parse().map_err(|_| ScenarioError::Parse {
            line,
            message: format!("arbitrary strategy seed \"{args}\" is not an integer"),
        })?;
        return Ok(ByzantineStrategy::Arbitrary { seed });
    }
    parse_err(line, format!("unknown byzantine strategy \"{text}\""))
}

fn parse_workload((line, text): &(usize, String)) -> Result<Vec<WorkloadOp>, ScenarioError> {
    if let Some(args) = call_args(text, "writes") {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 3 {
            return parse_err(*line, "writes takes (count, start, step)");
        }
        let count: usize = parts[0].trim().parse().map_err(|_| ScenarioError::Parse {
            line: *line,
            message: format!("writes count \"{}\" is not an integer", parts[0].trim()),
        })?;
        let start = parse_float(&(*line, parts[1].trim().to_string()), "writes start")?;
        let step = parse_float(&(*line, parts[2].trim().to_string()), "writes step")?;
        return Ok(writes_ramp(count, start, step));
    }
    if let Some(args) = call_args(text, "reads") {
        let count: usize = args.trim().parse().map_err(|_| ScenarioError::Parse {
            line: *line,
            message: format!("reads count \"{}\" is not an integer", args.trim()),
        })?;
        return Ok(reads(count));
    }
    if let Some(args) = call_args(text, "list") {
        let mut ops = Vec::new();
        for item in args.split(',') {
            let item = item.trim();
            if item == "read" {
                ops.push(WorkloadOp::Read);
            } else if let Some(value_text) = item.strip_prefix("write:") {
                let value = parse_value_text(value_text).ok_or_else(|| ScenarioError::Parse {
                    line: *line,
                    message: format!("\"{value_text}\" is not a value literal"),
                })?;
                ops.push(WorkloadOp::Write(value));
            } else if !item.is_empty() {
                return parse_err(*line, format!("unknown workload item \"{item}\""));
            }
        }
        return Ok(ops);
    }
    parse_err(*line, format!("unknown workload \"{text}\""))
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

fn emit_value(value: &Value) -> String {
    match value {
        Value::Real(x) => format!("{x:?}"),
        Value::Integer(n) => n.to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::Symbol(s) => format!("sym:{s}"),
        Value::Vector(xs) => {
            let parts: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
            format!("vec({})", parts.join("; "))
        }
    }
}

fn emit_transform(spec: &TransformSpec) -> String {
    match spec {
        TransformSpec::Identity => "identity".into(),
        TransformSpec::Negate => "negate".into(),
        TransformSpec::Reciprocal => "reciprocal".into(),
        TransformSpec::Affine { scale, offset } => format!("affine({scale:?}, {offset:?})"),
        TransformSpec::BoundedNoise { delta, seed } => format!("bounded_noise({delta:?}, {seed})"),
        TransformSpec::StochasticPredictor { error_scale, hit_prob, seed } => {
            format!("stochastic_predictor({error_scale:?}, {hit_prob:?}, {seed})")
        }
    }
}

fn emit_policy(policy: &Policy) -> String {
    match policy {
        Policy::Random { seed } => format!("random({seed})"),
        Policy::Min => "min".into(),
        Policy::Max => "max".into(),
        Policy::Mean => "mean".into(),
        Policy::Median => "median".into(),
        Policy::PreferReplica => "prefer_replica".into(),
    }
}

fn emit_fault(event: &FaultEvent) -> String {
    let kind = match &event.kind {
        FaultKind::Crash => "crash".into(),
        FaultKind::Recover => "recover".into(),
        FaultKind::ByzantineOff => "byzantine_off".into(),
        FaultKind::ByzantineOn(strategy) => {
            let inner = match strategy {
                ByzantineStrategy::Mute => "mute".into(),
                ByzantineStrategy::MaxSkew => "max_skew".into(),
                ByzantineStrategy::Arbitrary { seed } => format!("arbitrary({seed})"),
            };
            format!("byzantine_on({inner})")
        }
    };
    format!("{kind}@{}", event.at_time)
}

fn emit_role(role: Role) -> &'static str {
    match role {
        Role::Proposer => "proposer",
        Role::Acceptor => "acceptor",
        Role::Learner => "learner",
    }
}

/// Canonical scenario text. The workload is emitted in expanded `list(...)`
/// form, so parse(emit(s)) structurally equals `s` whatever sugar built it.
pub fn emit_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line(format!("name = {}", scenario.name));
    if let Some(seed) = scenario.seed {
        line(format!("seed = {seed}"));
    }
    line(format!(
        "fault_model = {}",
        match scenario.cfg.fault_model {
            FaultModel::CrashStop => "crash_stop",
            FaultModel::CrashRecovery => "crash_recovery",
            FaultModel::Byzantine => "byzantine",
        }
    ));
    line(format!("n = {}", scenario.cfg.n));
    line(format!("f = {}", scenario.cfg.f));
    line(format!("q = {}", scenario.cfg.q));
    line(format!(
        "mode = {}",
        match scenario.mode {
            ScenarioMode::LeaderState => "leader_state",
            ScenarioMode::Vector => "vector",
            ScenarioMode::DetectOnly => "detect_only",
        }
    ));
    line(format!("policy = {}", emit_policy(&scenario.policy)));
    line(format!("epsilon = {:?}", scenario.protocol_epsilon));
    line(format!("alpha = {:?}", scenario.protocol_alpha));
    line(format!("base_delay = {}", scenario.net.base_delay));
    line(format!("jitter = {}", scenario.net.jitter));
    line(format!("drop_prob = {:?}", scenario.net.drop_prob));

    let items: Vec<String> = scenario
        .workload
        .iter()
        .map(|op| match op {
            WorkloadOp::Read => "read".to_string(),
            WorkloadOp::Write(value) => format!("write:{}", emit_value(value)),
        })
        .collect();
    line(format!("workload = list({})", items.join(", ")));

    for node in &scenario.nodes {
        line(String::new());
        line(format!("[node.{}]", node.node_id));
        let roles: Vec<&str> = node.roles.iter().map(|r| emit_role(*r)).collect();
        match &node.behavior {
            NodeBehavior::ExactReplica { initial } => {
                line("kind = replica".into());
                line(format!("initial = {}", emit_value(initial)));
            }
            NodeBehavior::Artira { triple, initial } => {
                line("kind = artira".into());
                line(format!("initial = {}", emit_value(initial)));
                line(format!("transform = {}", emit_transform(&triple.transform)));
                if let Some(inverse) = &triple.inverse {
                    line(format!("inverse = {}", emit_transform(inverse)));
                }
                line(format!("epsilon = {:?}", triple.epsilon));
                line(format!("alpha = {:?}", triple.alpha));
                line(format!("model = {}", triple.model));
            }
        }
        line(format!("roles = {}", roles.join(", ")));
        for fault in &node.fault_schedule {
            line(format!("fault = {}", emit_fault(fault)));
        }
    }
    out
}
