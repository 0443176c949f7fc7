//! The deterministic run loop: requests flow one at a time through the
//! protocol phases while scheduled faults fire at their ticks. Every draw is
//! keyed by `(substream seed, message sequence)`, so a run is a pure function
//! of the scenario and the seed.

use std::collections::BTreeSet;

use crate::consensus::{
    run_phase_detect, run_phase_read, run_phase_write, Decision, FaultReport, Policy,
    ProtocolParams, Response,
};
use crate::harness::{Metrics, Scenario, ScenarioMode, WorkloadOp};
use crate::metric::Value;
use crate::rng;

use super::node::{apply_unchecked, ByzantineStrategy, NetModel, NodeRuntime, NodeSpec};
use super::queue::EventQueue;
use super::SimError;

/// Substream tags, kept distinct so fault and network draws never perturb
/// adapter draws.
const STREAM_DROP: u64 = 1;
const STREAM_JITTER: u64 = 2;
const STREAM_BYZANTINE: u64 = 3;
const STREAM_POLICY: u64 = 4;

/// Magnitude of the junk values an `Arbitrary` Byzantine node emits.
const ARBITRARY_JUNK_BOUND: f64 = 10_000.0;

/// A message endpoint: the requesting client sits outside the quorum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Client,
    Node(usize),
}

/// Message tallies for one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub per_node_sent: Vec<u64>,
    msg_seq: u64,
}

impl Counters {
    fn new(n: usize) -> Self {
        Self {
            per_node_sent: vec![0; n],
            ..Self::default()
        }
    }
}

/// Scheduled fault events flattened into one globally ordered timeline,
/// applied lazily as the round clock passes them.
#[derive(Debug)]
pub(super) struct FaultTimeline {
    events: Vec<(u64, usize, super::node::FaultKind)>,
    cursor: usize,
}

impl FaultTimeline {
    fn new(specs: &[NodeSpec]) -> Self {
        let mut events: Vec<(u64, usize, super::node::FaultKind)> = specs
            .iter()
            .flat_map(|spec| {
                spec.fault_schedule
                    .iter()
                    .map(|f| (f.at_time, spec.node_id, f.kind.clone()))
            })
            .collect();
        // Stable sort: equal-tick events keep schedule order.
        events.sort_by_key(|(t, _, _)| *t);
        Self { events, cursor: 0 }
    }

    /// Applies every event with `at_time <= t`. Model consistency was checked
    /// at validation, so application cannot fail here.
    fn advance(&mut self, t: u64, nodes: &mut [NodeRuntime]) {
        while let Some((at, node, kind)) = self.events.get(self.cursor) {
            if *at > t {
                break;
            }
            apply_unchecked(&mut nodes[*node], kind);
            self.cursor += 1;
        }
    }
}

/// Everything one protocol round may touch: the node set, the network model,
/// the fault timeline, and the message counters.
pub struct RoundContext<'a> {
    nodes: &'a mut [NodeRuntime],
    net: &'a NetModel,
    faults: &'a mut FaultTimeline,
    counters: &'a mut Counters,
    drop_seed: u64,
    jitter_seed: u64,
    byz_seed: u64,
    start: u64,
    sent_at_start: u64,
}

impl RoundContext<'_> {
    pub fn start_time(&self) -> u64 {
        self.start
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn alive(&self, node: usize) -> bool {
        !self.nodes[node].crashed
    }

    pub fn byzantine_active(&self, node: usize) -> bool {
        self.nodes[node].byzantine.is_some()
    }

    pub fn declared_epsilon(&self, node: usize) -> f64 {
        self.nodes[node].declared_epsilon()
    }

    /// Lowest-id live node with the proposer capability.
    pub fn pick_proposer(&self) -> Option<usize> {
        self.nodes
            .iter()
            .find(|n| !n.crashed && n.roles.contains(&super::node::Role::Proposer))
            .map(|n| n.id)
    }

    /// Applies all fault events scheduled at or before `t`.
    pub fn advance_to(&mut self, t: u64) {
        self.faults.advance(t, self.nodes);
    }

    /// Sends one message at `at`; returns its delivery time, or `None` when
    /// the network dropped it. Crashed recipients still count as deliveries;
    /// the message reached a dead box.
    pub fn transmit(&mut self, from: Endpoint, _to: Endpoint, at: u64) -> Option<u64> {
        let msg = self.counters.msg_seq;
        self.counters.msg_seq += 1;
        self.counters.sent += 1;
        if let Endpoint::Node(i) = from {
            self.counters.per_node_sent[i] += 1;
        }
        if self.net.drop_prob > 0.0 && rng::draw_unit(self.drop_seed, msg) < self.net.drop_prob {
            self.counters.dropped += 1;
            return None;
        }
        let jitter = if self.net.jitter > 0 {
            rng::draw_u64(self.jitter_seed, msg) % (self.net.jitter + 1)
        } else {
            0
        };
        self.counters.delivered += 1;
        Some(at + self.net.base_delay + jitter)
    }

    /// Executes a write on a node; an execution failure (e.g. a domain error
    /// in the coder) is an omission, not a crash.
    pub fn execute_write(&mut self, node: usize, value: &Value) -> Option<Value> {
        self.nodes[node].execute_write(value).ok()
    }

    pub fn read_state(&mut self, node: usize) -> Option<Value> {
        self.nodes[node].read_state().ok()
    }

    /// Passes an honest reply through the node's corruption strategy, if one
    /// is active. `None` means the reply is withheld. For writes,
    /// `reference` carries the proposer's piggybacked state so a skewing node
    /// can sit exactly on the allowed boundary.
    pub fn corrupted_reply(
        &mut self,
        node: usize,
        honest: &Value,
        reference: Option<(&Value, usize)>,
        params: &ProtocolParams,
    ) -> Option<Value> {
        let Some(strategy) = self.nodes[node].byzantine.clone() else {
            return Some(honest.clone());
        };
        match strategy {
            ByzantineStrategy::Mute => None,
            ByzantineStrategy::Arbitrary { seed } => {
                let draw = self.nodes[node].byzantine_draws;
                self.nodes[node].byzantine_draws += 1;
                Some(Value::Real(rng::draw_symmetric(
                    rng::mix(self.byz_seed, seed),
                    draw,
                    ARBITRARY_JUNK_BOUND,
                )))
            }
            ByzantineStrategy::MaxSkew => {
                let own_eps = self.declared_epsilon(node);
                let (base, bound) = match reference {
                    Some((state, ref_node)) => (
                        state.as_real(),
                        crate::consensus::pair_radius(
                            params.epsilon,
                            own_eps,
                            self.declared_epsilon(ref_node),
                        ),
                    ),
                    None => (
                        honest.as_real(),
                        crate::consensus::pair_radius(params.epsilon, own_eps, own_eps),
                    ),
                };
                match base {
                    Some(x) => Some(Value::Real(x + bound)),
                    None => Some(honest.clone()),
                }
            }
        }
    }

    /// Wraps a delivered state into a response carrying the node's declared
    /// certification.
    pub fn response_from(&self, node: usize, value: Value, round: u64) -> Response {
        let runtime = &self.nodes[node];
        Response {
            node_id: node,
            value,
            is_artira: runtime.is_artira(),
            declared_epsilon: runtime.declared_epsilon(),
            declared_alpha: runtime.declared_alpha(),
            round,
        }
    }

    pub fn sent_since_start(&self) -> u64 {
        self.counters.sent - self.sent_at_start
    }

}

/// Fallback value when a corruption strategy needs the honest reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestKind {
    Write,
    Read,
    Detect,
}

impl RequestKind {
    pub fn label(self) -> &'static str {
        match self {
            RequestKind::Write => "write",
            RequestKind::Read => "read",
            RequestKind::Detect => "detect",
        }
    }
}

/// Everything recorded about one request.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestOutcome {
    pub index: usize,
    pub kind: RequestKind,
    pub decision: Decision,
    /// The value the learned value is judged against: the last committed
    /// write, or the scenario's initial reference before any commit.
    pub reference: Option<Value>,
    pub report: Option<FaultReport>,
    pub start_time: u64,
}

/// Result of one simulation run: per-request outcomes plus aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub requests: Vec<RequestOutcome>,
    pub metrics: Metrics,
    pub counters: Counters,
}

enum EngineEvent {
    Request(usize),
}

/// Runs a validated scenario at the given master seed.
pub fn run(scenario: &Scenario, seed: u64) -> Result<RunResult, SimError> {
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(SimError::Validation { violations });
    }

    let space = scenario.space();
    let mut nodes = scenario
        .nodes
        .iter()
        .map(|spec| NodeRuntime::from_spec(spec, space))
        .collect::<Result<Vec<_>, _>>()?;
    let mut faults = FaultTimeline::new(&scenario.nodes);
    let mut counters = Counters::new(nodes.len());
    let base_params = ProtocolParams {
        cfg: scenario.cfg,
        space,
        epsilon: scenario.protocol_epsilon,
        alpha: scenario.protocol_alpha,
        policy: scenario.policy.clone(),
        write_mode: scenario.write_mode(),
    };

    let mut queue: EventQueue<EngineEvent> = EventQueue::new();
    if !scenario.workload.is_empty() {
        queue
            .schedule(0, EngineEvent::Request(0))
            .expect("fresh queue accepts t = 0");
    }

    let mut reference = scenario.initial_reference();
    let mut requests = Vec::with_capacity(scenario.workload.len());
    let mut detect_tp = 0u64;
    let mut detect_fp = 0u64;
    let mut detect_fn = 0u64;

    while let Some((t, EngineEvent::Request(index))) = queue.pop() {
        let op = &scenario.workload[index];
        let params = ProtocolParams {
            policy: per_request_policy(&scenario.policy, seed, index),
            ..base_params.clone()
        };
        let mut ctx = RoundContext {
            nodes: &mut nodes,
            net: &scenario.net,
            faults: &mut faults,
            counters: &mut counters,
            drop_seed: rng::mix(seed, STREAM_DROP),
            jitter_seed: rng::mix(seed, STREAM_JITTER),
            byz_seed: rng::mix(seed, STREAM_BYZANTINE),
            start: t,
            sent_at_start: 0,
        };
        ctx.sent_at_start = ctx.counters.sent;

        let (kind, decision, report) = match (op, scenario.mode) {
            (WorkloadOp::Write(value), _) => {
                let decision = run_phase_write(&mut ctx, &params, value, index as u64)?;
                (RequestKind::Write, decision, None)
            }
            (WorkloadOp::Read, ScenarioMode::DetectOnly) => {
                let (decision, report) = run_phase_detect(&mut ctx, &params, index as u64)?;
                (RequestKind::Detect, decision, Some(report))
            }
            (WorkloadOp::Read, _) => {
                let decision = run_phase_read(&mut ctx, &params, index as u64)?;
                (RequestKind::Read, decision, None)
            }
        };

        if let Some(report) = &report {
            let truly_faulty: BTreeSet<usize> = nodes
                .iter()
                .filter(|n| n.byzantine.is_some())
                .map(|n| n.id)
                .collect();
            detect_tp += report.suspects.intersection(&truly_faulty).count() as u64;
            detect_fp += report.suspects.difference(&truly_faulty).count() as u64;
            detect_fn += truly_faulty.difference(&report.suspects).count() as u64;
        }
        if kind == RequestKind::Write && decision.committed {
            if let WorkloadOp::Write(value) = op {
                reference = Some(value.clone());
            }
        }

        let end_time = decision.end_time;
        requests.push(RequestOutcome {
            index,
            kind,
            decision,
            reference: reference.clone(),
            report,
            start_time: t,
        });

        if index + 1 < scenario.workload.len() {
            queue
                .schedule(end_time.max(t) + 1, EngineEvent::Request(index + 1))
                .expect("request completion never precedes its start");
        }
    }

    let metrics = aggregate_metrics(
        scenario,
        &requests,
        &counters,
        (detect_tp, detect_fp, detect_fn),
    );
    Ok(RunResult { requests, metrics, counters })
}

/// Random policies get an independent per-request substream; everything else
/// is already deterministic.
fn per_request_policy(policy: &Policy, seed: u64, index: usize) -> Policy {
    match policy {
        Policy::Random { seed: policy_seed } => Policy::Random {
            seed: rng::mix(rng::mix(seed, STREAM_POLICY) ^ policy_seed, index as u64),
        },
        other => other.clone(),
    }
}

fn aggregate_metrics(
    scenario: &Scenario,
    requests: &[RequestOutcome],
    counters: &Counters,
    (tp, fp, fn_): (u64, u64, u64),
) -> Metrics {
    let total = requests.len();
    let committed = requests.iter().filter(|r| r.decision.committed).count();
    let mut error_sum = 0.0;
    let mut error_count = 0usize;
    for request in requests {
        if let (Some(learned), Some(reference)) = (&request.decision.learned, &request.reference) {
            if let (Some(a), Some(b)) = (learned.as_real(), reference.as_real()) {
                error_sum += (a - b).abs();
                error_count += 1;
            }
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Metrics {
        commit_rate: if total == 0 { 0.0 } else { committed as f64 / total as f64 },
        mean_abs_error: if error_count == 0 { 0.0 } else { error_sum / error_count as f64 },
        messages_sent: counters.sent,
        messages_delivered: counters.delivered,
        messages_dropped: counters.dropped,
        replication_factor: scenario.nodes.len(),
        detection_precision: ratio(tp, tp + fp),
        detection_recall: ratio(tp, tp + fn_),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::TransformSpec;
    use crate::consensus::{FaultModel, QuorumConfig};
    use crate::harness::Scenario;
    use crate::redundancy::ArtiraTriple;
    use crate::simnet::{ByzantineStrategy, FaultKind, NetModel, NodeSpec};

    fn replica_scenario(n: usize, f: usize, q: usize, workload: Vec<WorkloadOp>) -> Scenario {
        Scenario {
            name: "test".into(),
            seed: None,
            cfg: QuorumConfig { n, f, q, fault_model: FaultModel::CrashStop },
            nodes: (0..n).map(|i| NodeSpec::replica(i, Value::Real(0.0))).collect(),
            net: NetModel::default(),
            mode: crate::harness::ScenarioMode::Vector,
            policy: crate::consensus::Policy::Median,
            protocol_epsilon: 0.0,
            protocol_alpha: 1.0,
            workload,
        }
    }

    fn writes(values: &[f64]) -> Vec<WorkloadOp> {
        values.iter().map(|&v| WorkloadOp::Write(Value::Real(v))).collect()
    }

    #[test]
    fn fault_free_replicas_learn_every_proposal() {
        let scenario = replica_scenario(3, 1, 2, writes(&[5.0, 6.5, 7.25]));
        let result = run(&scenario, 1).unwrap();
        assert_eq!(result.metrics.commit_rate, 1.0);
        assert_eq!(result.metrics.mean_abs_error, 0.0);
        for (request, expected) in result.requests.iter().zip([5.0, 6.5, 7.25]) {
            assert!(request.decision.committed);
            assert_eq!(request.decision.learned, Some(Value::Real(expected)));
            assert_eq!(request.decision.per_node_states.len(), 3);
        }
    }

    #[test]
    fn identical_seeds_yield_identical_results() {
        let mut scenario = replica_scenario(3, 1, 2, writes(&[1.0, 2.0, 3.0]));
        scenario.net.drop_prob = 0.2;
        scenario.net.jitter = 3;
        let a = run(&scenario, 99).unwrap();
        let b = run(&scenario, 99).unwrap();
        assert_eq!(a, b);
        let c = run(&scenario, 100).unwrap();
        assert_ne!(a.counters, c.counters);
    }

    #[test]
    fn full_drop_leaves_every_request_unquorate() {
        let mut scenario = replica_scenario(3, 1, 2, writes(&[1.0, 2.0]));
        scenario.net.drop_prob = 1.0;
        let result = run(&scenario, 7).unwrap();
        assert_eq!(result.metrics.commit_rate, 0.0);
        assert_eq!(result.metrics.messages_delivered, 0);
        assert_eq!(result.metrics.messages_sent, result.metrics.messages_dropped);
        for request in &result.requests {
            assert!(!request.decision.committed);
            assert_eq!(request.decision.learned, None);
        }
    }

    #[test]
    fn message_conservation_under_lossy_network() {
        let mut scenario = replica_scenario(5, 2, 3, writes(&[1.0; 20]));
        scenario.net.drop_prob = 0.3;
        scenario.net.jitter = 2;
        let result = run(&scenario, 3).unwrap();
        assert_eq!(
            result.metrics.messages_sent,
            result.metrics.messages_delivered + result.metrics.messages_dropped
        );
        assert!(result.metrics.messages_dropped > 0);
    }

    #[test]
    fn crashed_node_sends_nothing_after_its_tick() {
        let mut scenario = replica_scenario(3, 1, 2, writes(&[1.0, 2.0, 3.0]));
        scenario.nodes[2] = scenario.nodes[2].clone().with_fault(0, FaultKind::Crash);
        let result = run(&scenario, 1).unwrap();
        assert_eq!(result.metrics.commit_rate, 1.0, "q = 2 survives one crash");
        assert_eq!(result.counters.per_node_sent[2], 0);
        for request in &result.requests {
            assert!(!request.decision.per_node_states.contains_key(&2));
        }
    }

    #[test]
    fn too_many_crashes_block_commits_without_fabrication() {
        let mut scenario = replica_scenario(3, 1, 2, writes(&[1.0, 2.0]));
        scenario.nodes[1] = scenario.nodes[1].clone().with_fault(0, FaultKind::Crash);
        scenario.nodes[2] = scenario.nodes[2].clone().with_fault(0, FaultKind::Crash);
        let result = run(&scenario, 1).unwrap();
        assert_eq!(result.metrics.commit_rate, 0.0);
        for request in &result.requests {
            assert_eq!(request.decision.learned, None);
        }
    }

    #[test]
    fn recovered_node_serves_its_durable_state() {
        // Timeline with base delay 1: write spans [0, 4], read k starts at
        // 5k. Node 2 crashes before the first read and recovers before the
        // second, so it must answer the second read with the written state.
        let mut scenario = replica_scenario(
            3,
            1,
            2,
            vec![
                WorkloadOp::Write(Value::Real(8.0)),
                WorkloadOp::Read,
                WorkloadOp::Read,
            ],
        );
        scenario.cfg.fault_model = FaultModel::CrashRecovery;
        scenario.nodes[2] = scenario.nodes[2]
            .clone()
            .with_fault(5, FaultKind::Crash)
            .with_fault(8, FaultKind::Recover);
        let result = run(&scenario, 1).unwrap();
        assert!(result.requests[0].decision.committed);
        let first_read = &result.requests[1].decision;
        assert!(!first_read.per_node_states.contains_key(&2), "crashed for the first read");
        assert!(first_read.committed);
        let second_read = &result.requests[2].decision;
        assert_eq!(second_read.per_node_states.get(&2), Some(&Value::Real(8.0)));
    }

    #[test]
    fn max_skew_adversary_rides_the_bound_exactly() {
        let mut scenario = replica_scenario(4, 1, 3, writes(&[10.0, 20.0]));
        scenario.cfg.fault_model = FaultModel::Byzantine;
        scenario.protocol_epsilon = 0.5;
        scenario.policy = crate::consensus::Policy::Max;
        let mut honest = scenario.clone();
        scenario.nodes[3] = scenario.nodes[3]
            .clone()
            .with_fault(0, FaultKind::ByzantineOn(ByzantineStrategy::MaxSkew));
        honest.cfg.fault_model = FaultModel::Byzantine;

        let attacked = run(&scenario, 5).unwrap();
        let baseline = run(&honest, 5).unwrap();
        for (request, proposal) in attacked.requests.iter().zip([10.0, 20.0]) {
            assert!(request.decision.committed);
            assert_eq!(
                request.decision.learned,
                Some(Value::Real(proposal + 0.5)),
                "skewing adversary drags max policy to the boundary"
            );
            assert_eq!(
                request.decision.per_node_states.get(&3),
                Some(&Value::Real(proposal + 0.5))
            );
        }
        for (request, proposal) in baseline.requests.iter().zip([10.0, 20.0]) {
            assert_eq!(request.decision.learned, Some(Value::Real(proposal)));
        }
    }

    #[test]
    fn mute_adversary_withholds_replies() {
        let mut scenario = replica_scenario(4, 1, 3, writes(&[10.0]));
        scenario.cfg.fault_model = FaultModel::Byzantine;
        scenario.nodes[3] = scenario.nodes[3]
            .clone()
            .with_fault(0, FaultKind::ByzantineOn(ByzantineStrategy::Mute));
        let result = run(&scenario, 5).unwrap();
        let decision = &result.requests[0].decision;
        assert!(decision.committed, "three honest nodes still reach q = 3");
        assert!(!decision.per_node_states.contains_key(&3));
    }

    #[test]
    fn sar_artira_states_stay_within_delta_of_proposal() {
        let delta = 0.4;
        let triple = ArtiraTriple::new(
            TransformSpec::BoundedNoise { delta, seed: 42 },
            Some(TransformSpec::Identity),
            1.0,
            delta,
        )
        .unwrap();
        let mut scenario = replica_scenario(3, 1, 2, writes(&[10.0, 11.0, 12.0]));
        scenario.protocol_epsilon = delta;
        scenario.policy = crate::consensus::Policy::Mean;
        scenario.nodes[2] = NodeSpec::artira(2, triple, Value::Real(0.0));
        let result = run(&scenario, 9).unwrap();
        assert_eq!(result.metrics.commit_rate, 1.0);
        for (request, proposal) in result.requests.iter().zip([10.0, 11.0, 12.0]) {
            let artira_state = request.decision.per_node_states[&2].as_real().unwrap();
            assert!((artira_state - proposal).abs() <= delta);
            let learned = request.decision.learned.as_ref().unwrap().as_real().unwrap();
            assert!((learned - proposal).abs() <= delta);
        }
    }

    #[test]
    fn validation_reports_all_violations_at_once() {
        let mut scenario = replica_scenario(3, 1, 2, writes(&[1.0]));
        scenario.cfg.q = 9; // q > n
        scenario.protocol_alpha = 0.0; // out of range
        scenario.net.drop_prob = 1.5; // out of range
        match run(&scenario, 0) {
            Err(SimError::Validation { violations }) => {
                assert!(violations.len() >= 3, "{violations:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn empty_workload_runs_to_empty_result() {
        let scenario = replica_scenario(3, 1, 2, Vec::new());
        let result = run(&scenario, 0).unwrap();
        assert!(result.requests.is_empty());
        assert_eq!(result.metrics.messages_sent, 0);
        assert_eq!(result.metrics.commit_rate, 0.0);
    }
}
