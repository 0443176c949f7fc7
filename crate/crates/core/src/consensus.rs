//! Quorum matching predicates, value-selection policies, fault detection, and
//! the Propose/Accept/Learn round logic.
//!
//! Classical quorum matching requires a quorum of *identical* responses. Its
//! generalization relaxes equality to pairwise ε-closeness certified with
//! probability α; because ε-closeness is not transitive, the matched set is
//! realized as the maximum clique of the pairwise match graph (exact search,
//! bounded node count).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::metric::{distance, MetricSpace, Value, ValueKind};
use crate::rng;
use crate::simnet::{Endpoint, RoundContext};

/// Hard ceiling on the response-set size for exact clique search.
pub const MAX_MATCH_NODES: usize = 16;

/// The fault classes a protocol instance is configured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultModel {
    CrashStop,
    CrashRecovery,
    Byzantine,
}

impl FaultModel {
    pub fn is_benign(self) -> bool {
        !matches!(self, FaultModel::Byzantine)
    }
}

/// Node count, tolerated faults, and quorum size for one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuorumConfig {
    pub n: usize,
    pub f: usize,
    pub q: usize,
    pub fault_model: FaultModel,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsensusError {
    #[error("quorum config invalid: {0}")]
    InvalidConfig(String),
    #[error("no matched quorum to select a value from")]
    NotMatched,
    #[error("policy requires numeric values, got {0}")]
    NonNumericPolicy(ValueKind),
    #[error("exact clique search is bounded at {MAX_MATCH_NODES} nodes, got {0}")]
    TooManyNodes(usize),
}

impl QuorumConfig {
    pub fn new(n: usize, f: usize, q: usize, fault_model: FaultModel) -> Result<Self, ConsensusError> {
        let cfg = Self { n, f, q, fault_model };
        cfg.validate().map_err(ConsensusError::InvalidConfig)?;
        Ok(cfg)
    }

    /// Default sizing: `n = 2f+1, q = f+1` for benign models, `n = 3f+1,
    /// q = 2f+1` for Byzantine.
    pub fn sized_for(f: usize, fault_model: FaultModel) -> Self {
        let (n, q) = if fault_model.is_benign() {
            (2 * f + 1, f + 1)
        } else {
            (3 * f + 1, 2 * f + 1)
        };
        Self { n, f, q, fault_model }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("n must be positive".into());
        }
        if self.q == 0 || self.q > self.n {
            return Err(format!("quorum q = {} must satisfy 1 <= q <= n = {}", self.q, self.n));
        }
        if self.f >= self.n {
            return Err(format!("f = {} must be less than n = {}", self.f, self.n));
        }
        Ok(())
    }
}

/// One collected reply, carrying the sender's artira certification.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub node_id: usize,
    pub value: Value,
    pub is_artira: bool,
    pub declared_epsilon: f64,
    pub declared_alpha: f64,
    pub round: u64,
}

impl Response {
    pub fn exact(node_id: usize, value: Value, round: u64) -> Self {
        Self {
            node_id,
            value,
            is_artira: false,
            declared_epsilon: 0.0,
            declared_alpha: 1.0,
            round,
        }
    }
}

/// How a matched set was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// All members carry pairwise-identical values.
    Exact,
    /// Members sit within deterministic ε radii of each other.
    EpsilonBounded,
    /// At least one member's certification has α < 1.
    Probabilistic,
}

/// The matched subset of a response set.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub member_ids: BTreeSet<usize>,
    pub matched: bool,
    pub mode: MatchMode,
    pub aggregate_alpha: f64,
}

impl MatchSet {
    pub fn size(&self) -> usize {
        self.member_ids.len()
    }
}

/// The rule choosing the learned value from a matched set.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Random { seed: u64 },
    Min,
    Max,
    Mean,
    Median,
    /// Select among exact-replica members when any exist, else fall back to
    /// the median.
    PreferReplica,
}

/// Write-phase learning designs: learn the proposer's piggybacked state, or
/// agree on the vector of states and apply the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteMode {
    LeaderState,
    Vector,
}

/// Classical quorum matching: the largest set of responses with pairwise
/// identical values, matched iff its size reaches the quorum. Ties between
/// equal-size value groups break toward the group containing the lowest node
/// id.
pub fn ft_match(responses: &[Response], cfg: &QuorumConfig) -> MatchSet {
    let mut groups: Vec<(&Value, BTreeSet<usize>)> = Vec::new();
    for r in responses {
        match groups.iter_mut().find(|(v, _)| *v == &r.value) {
            Some((_, ids)) => {
                ids.insert(r.node_id);
            }
            None => {
                groups.push((&r.value, BTreeSet::from([r.node_id])));
            }
        }
    }
    let best = groups.into_iter().max_by(|(_, a), (_, b)| {
        (a.len(), std::cmp::Reverse(a.iter().next().copied()))
            .cmp(&(b.len(), std::cmp::Reverse(b.iter().next().copied())))
    });
    let member_ids = best.map(|(_, ids)| ids).unwrap_or_default();
    let aggregate_alpha = aggregate_alpha_of(responses, &member_ids);
    MatchSet {
        matched: member_ids.len() >= cfg.q,
        member_ids,
        mode: MatchMode::Exact,
        aggregate_alpha,
    }
}

/// Selects the learned value from a classically matched set: a seeded-uniform
/// member. All members carry the same value, so the draw cannot change the
/// outcome, only the reported member.
pub fn ft_value(
    set: &MatchSet,
    responses: &[Response],
    seed: u64,
) -> Result<Value, ConsensusError> {
    if !set.matched {
        return Err(ConsensusError::NotMatched);
    }
    let members: Vec<usize> = set.member_ids.iter().copied().collect();
    let pick = members[(rng::draw_u64(seed, 0) % members.len() as u64) as usize];
    Ok(value_of(responses, pick).clone())
}

fn value_of(responses: &[Response], node_id: usize) -> &Value {
    &responses
        .iter()
        .find(|r| r.node_id == node_id)
        .expect("member id must come from this response set")
        .value
}

fn aggregate_alpha_of(responses: &[Response], members: &BTreeSet<usize>) -> f64 {
    responses
        .iter()
        .filter(|r| members.contains(&r.node_id))
        .map(|r| r.declared_alpha)
        .product()
}

/// Pairwise matching radius: the protocol ε or the two declared bounds
/// stacked, whichever is wider. Two artiras may legitimately sit `ε_i + ε_j`
/// apart while each is within its own bound of the truth.
pub fn pair_radius(protocol_epsilon: f64, eps_i: f64, eps_j: f64) -> f64 {
    protocol_epsilon.max(eps_i + eps_j)
}

/// Builds the pairwise match graph and returns the maximum clique as a bitmask
/// over `ordered` (responses sorted by node id), plus whether another clique
/// of the same size exists.
fn max_clique_of(
    ordered: &[&Response],
    space: MetricSpace,
    epsilon: f64,
    alpha: f64,
) -> (u32, bool) {
    let n = ordered.len();
    let mut adjacency = vec![0u32; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let radius = pair_radius(
                epsilon,
                ordered[i].declared_epsilon,
                ordered[j].declared_epsilon,
            );
            let certainty = ordered[i].declared_alpha * ordered[j].declared_alpha;
            // A distance error (foreign kind) simply means "no edge": junk
            // responses fall out of the clique instead of poisoning the round.
            let close = matches!(
                distance(space, &ordered[i].value, &ordered[j].value),
                Ok(d) if d <= radius
            );
            if close && certainty >= alpha {
                adjacency[i] |= 1 << j;
                adjacency[j] |= 1 << i;
            }
        }
    }

    let mut best_mask = 0u32;
    let mut best_size = 0u32;
    let mut tie = false;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones();
        if size < best_size {
            continue;
        }
        let mut rest = mask;
        let mut is_clique = true;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if mask & !(adjacency[i] | (1 << i)) != 0 {
                is_clique = false;
                break;
            }
        }
        if !is_clique {
            continue;
        }
        if size > best_size {
            best_size = size;
            best_mask = mask;
            tie = false;
        } else if size == best_size && mask != best_mask && size > 0 {
            tie = true;
            if lex_smaller(mask, best_mask) {
                best_mask = mask;
            }
        }
    }
    (best_mask, tie)
}

/// Lexicographic order on equal-size index sets, lowest ids first.
fn lex_smaller(a: u32, b: u32) -> bool {
    let (mut a, mut b) = (a, b);
    while a != 0 && b != 0 {
        let ia = a.trailing_zeros();
        let ib = b.trailing_zeros();
        if ia != ib {
            return ia < ib;
        }
        a &= a - 1;
        b &= b - 1;
    }
    false
}

fn sorted_by_node(responses: &[Response]) -> Vec<&Response> {
    let mut ordered: Vec<&Response> = responses.iter().collect();
    ordered.sort_by_key(|r| r.node_id);
    ordered
}

fn mode_of(responses: &[Response], members: &BTreeSet<usize>, epsilon: f64) -> MatchMode {
    let member_responses: Vec<&Response> = responses
        .iter()
        .filter(|r| members.contains(&r.node_id))
        .collect();
    let all_exact = epsilon == 0.0 && member_responses.iter().all(|r| r.declared_epsilon == 0.0);
    if all_exact {
        MatchMode::Exact
    } else if member_responses.iter().all(|r| r.declared_alpha >= 1.0) {
        MatchMode::EpsilonBounded
    } else {
        MatchMode::Probabilistic
    }
}

/// Relaxed quorum matching over the pairwise ε/α match graph.
///
/// Edge `(i, j)` exists iff `d(r_i, r_j) <= max(ε, ε_i + ε_j)` and
/// `α_i · α_j >= α`; the probabilistic clause is discharged from the declared
/// per-node certifications rather than estimated at runtime. The matched set
/// is the maximum clique, ties broken toward the lexicographically smallest
/// member-id set.
pub fn aft_match(
    responses: &[Response],
    cfg: &QuorumConfig,
    space: MetricSpace,
    epsilon: f64,
    alpha: f64,
) -> Result<MatchSet, ConsensusError> {
    if responses.len() > MAX_MATCH_NODES {
        return Err(ConsensusError::TooManyNodes(responses.len()));
    }
    let ordered = sorted_by_node(responses);
    let (mask, _) = max_clique_of(&ordered, space, epsilon, alpha);
    let member_ids: BTreeSet<usize> = (0..ordered.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| ordered[i].node_id)
        .collect();
    let aggregate_alpha = aggregate_alpha_of(responses, &member_ids);
    Ok(MatchSet {
        matched: member_ids.len() >= cfg.q,
        mode: mode_of(responses, &member_ids, epsilon),
        member_ids,
        aggregate_alpha,
    })
}

/// Applies the policy over the matched members' values.
pub fn aft_value(
    set: &MatchSet,
    responses: &[Response],
    policy: &Policy,
) -> Result<Value, ConsensusError> {
    if !set.matched {
        return Err(ConsensusError::NotMatched);
    }
    let members: Vec<&Response> = sorted_by_node(responses)
        .into_iter()
        .filter(|r| set.member_ids.contains(&r.node_id))
        .collect();
    match policy {
        Policy::Random { seed } => {
            let pick = (rng::draw_u64(*seed, 0) % members.len() as u64) as usize;
            Ok(members[pick].value.clone())
        }
        Policy::PreferReplica => {
            match members.iter().find(|r| !r.is_artira) {
                Some(replica) => Ok(replica.value.clone()),
                None => aft_value(set, responses, &Policy::Median),
            }
        }
        Policy::Min | Policy::Max => {
            let numeric = numeric_members(&members)?;
            let (_, best) = if matches!(policy, Policy::Min) {
                numeric
                    .iter()
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .copied()
                    .expect("matched set is nonempty")
            } else {
                numeric
                    .iter()
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .copied()
                    .expect("matched set is nonempty")
            };
            Ok(members[best].value.clone())
        }
        Policy::Mean => {
            let numeric = numeric_members(&members)?;
            let sum: f64 = numeric.iter().map(|(x, _)| x).sum();
            Ok(numeric_result(sum / numeric.len() as f64, members[0]))
        }
        Policy::Median => {
            let mut numeric = numeric_members(&members)?;
            numeric.sort_by(|a, b| a.0.total_cmp(&b.0));
            let k = numeric.len();
            if k % 2 == 1 {
                Ok(members[numeric[k / 2].1].value.clone())
            } else {
                let mid = (numeric[k / 2 - 1].0 + numeric[k / 2].0) / 2.0;
                Ok(numeric_result(mid, members[0]))
            }
        }
    }
}

fn numeric_members(members: &[&Response]) -> Result<Vec<(f64, usize)>, ConsensusError> {
    members
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.value
                .as_real()
                .map(|x| (x, i))
                .ok_or(ConsensusError::NonNumericPolicy(r.value.kind()))
        })
        .collect()
}

/// Aggregate results stay in the members' kind: integer sets round half to
/// even, real sets stay real.
fn numeric_result(x: f64, witness: &Response) -> Value {
    match witness.value {
        Value::Integer(_) => Value::Integer(x.round_ties_even() as i64),
        _ => Value::Real(x),
    }
}

/// Suspicion report from a detection-only matching pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultReport {
    /// Responding nodes outside the maximum clique.
    pub suspects: BTreeSet<usize>,
    /// Aggregate certainty of the clique backing the suspicion.
    pub confidence: f64,
    /// True when another clique of the same size exists, making the
    /// attribution ambiguous.
    pub ambiguous: bool,
}

/// Detection-only use of the match graph: nodes outside the maximum clique
/// are suspects. Never commits a value; with weak (α < 1) certifications a
/// mismatch raises suspicion rather than omitting a fault.
pub fn detect_fault(
    responses: &[Response],
    _cfg: &QuorumConfig,
    space: MetricSpace,
    epsilon: f64,
    alpha: f64,
) -> Result<FaultReport, ConsensusError> {
    if responses.len() > MAX_MATCH_NODES {
        return Err(ConsensusError::TooManyNodes(responses.len()));
    }
    let ordered = sorted_by_node(responses);
    let (mask, ambiguous) = max_clique_of(&ordered, space, epsilon, alpha);
    let mut suspects = BTreeSet::new();
    let mut confidence = 1.0;
    for (i, r) in ordered.iter().enumerate() {
        if mask & (1 << i) != 0 {
            confidence *= r.declared_alpha;
        } else {
            suspects.insert(r.node_id);
        }
    }
    Ok(FaultReport { suspects, confidence, ambiguous })
}

/// Everything a protocol round needs beyond the live node set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub cfg: QuorumConfig,
    pub space: MetricSpace,
    pub epsilon: f64,
    pub alpha: f64,
    pub policy: Policy,
    pub write_mode: WriteMode,
}

/// Outcome of one protocol round.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub committed: bool,
    /// Absent whenever the round failed: no value is ever fabricated.
    pub learned: Option<Value>,
    /// Post-execution states of every node whose reply was delivered,
    /// plus the proposer's own.
    pub per_node_states: BTreeMap<usize, Value>,
    pub message_count: u64,
    pub match_set: MatchSet,
    pub end_time: u64,
}

fn empty_decision(end_time: u64, message_count: u64) -> Decision {
    Decision {
        committed: false,
        learned: None,
        per_node_states: BTreeMap::new(),
        message_count,
        match_set: MatchSet {
            member_ids: BTreeSet::new(),
            matched: false,
            mode: MatchMode::Exact,
            aggregate_alpha: 1.0,
        },
        end_time,
    }
}

/// One write round: Propose (client to proposer, proposer broadcast), Accept
/// (every live node executes and replies with its post-execution state,
/// vetoing when its state breaks the ε bound against the proposer's
/// piggybacked state), Learn (quorum matching over the collected states;
/// leader-state mode learns the proposer's state, vector mode applies the
/// policy over the matched vector). Commit happens at the end of Accept.
pub fn run_phase_write(
    ctx: &mut RoundContext<'_>,
    params: &ProtocolParams,
    proposal: &Value,
    round: u64,
) -> Result<Decision, ConsensusError> {
    let t0 = ctx.start_time();
    ctx.advance_to(t0);
    let Some(proposer) = ctx.pick_proposer() else {
        return Ok(empty_decision(t0, ctx.sent_since_start()));
    };
    let Some(t1) = ctx.transmit(Endpoint::Client, Endpoint::Node(proposer), t0) else {
        return Ok(empty_decision(t0, ctx.sent_since_start()));
    };
    ctx.advance_to(t1);
    if !ctx.alive(proposer) {
        return Ok(empty_decision(t1, ctx.sent_since_start()));
    }
    let Some(proposer_state) = ctx.execute_write(proposer, proposal) else {
        return Ok(empty_decision(t1, ctx.sent_since_start()));
    };

    // Propose: broadcast the request with the proposer's state piggybacked.
    let mut deliveries: Vec<(u64, usize)> = Vec::new();
    for node in 0..ctx.node_count() {
        if node == proposer {
            continue;
        }
        if let Some(t2) = ctx.transmit(Endpoint::Node(proposer), Endpoint::Node(node), t1) {
            deliveries.push((t2, node));
        }
    }
    deliveries.sort_unstable();

    // Accept: execute, bound-check against the piggybacked state, reply.
    let mut replies: Vec<(u64, usize, Value, bool)> = Vec::new();
    for (t2, node) in deliveries {
        ctx.advance_to(t2);
        if !ctx.alive(node) {
            continue;
        }
        let Some(state) = ctx.execute_write(node, proposal) else {
            continue;
        };
        let reply = match ctx.corrupted_reply(node, &state, Some((&proposer_state, proposer)), params) {
            Some(v) => v,
            None => continue, // muted
        };
        let vetoed = if ctx.byzantine_active(node) {
            false // a lying node never vetoes itself
        } else {
            let radius = pair_radius(
                params.epsilon,
                ctx.declared_epsilon(node),
                ctx.declared_epsilon(proposer),
            );
            !matches!(
                distance(params.space, &reply, &proposer_state),
                Ok(d) if d <= radius
            )
        };
        if let Some(t3) = ctx.transmit(Endpoint::Node(node), Endpoint::Node(proposer), t2) {
            replies.push((t3, node, reply, vetoed));
        }
    }

    let accept_end = replies.iter().map(|r| r.0).fold(t1, u64::max);
    ctx.advance_to(accept_end);

    let mut per_node_states = BTreeMap::new();
    per_node_states.insert(proposer, proposer_state.clone());
    let mut responses = vec![ctx.response_from(proposer, proposer_state.clone(), round)];
    replies.sort_by_key(|(_, node, _, _)| *node);
    for (_, node, value, vetoed) in replies {
        per_node_states.insert(node, value.clone());
        if !vetoed {
            responses.push(ctx.response_from(node, value, round));
        }
    }

    if !ctx.alive(proposer) {
        return Ok(empty_decision(accept_end, ctx.sent_since_start()));
    }
    let match_set = aft_match(&responses, &params.cfg, params.space, params.epsilon, params.alpha)?;
    let committed = match_set.matched;
    let learned = if committed {
        Some(match params.write_mode {
            WriteMode::LeaderState => proposer_state.clone(),
            WriteMode::Vector => aft_value(&match_set, &responses, &params.policy)?,
        })
    } else {
        None
    };

    // Learn: report back to the requester.
    let end_time = ctx
        .transmit(Endpoint::Node(proposer), Endpoint::Client, accept_end)
        .unwrap_or(accept_end);
    Ok(Decision {
        committed,
        learned,
        per_node_states,
        message_count: ctx.sent_since_start(),
        match_set,
        end_time,
    })
}

/// One read round: the requester queries all nodes directly, treats the
/// decoded replies as a vector, and applies quorum matching plus the policy.
pub fn run_phase_read(
    ctx: &mut RoundContext<'_>,
    params: &ProtocolParams,
    round: u64,
) -> Result<Decision, ConsensusError> {
    let (responses, per_node_states, end_time) = gather_reads(ctx, params, round);
    let match_set = aft_match(&responses, &params.cfg, params.space, params.epsilon, params.alpha)?;
    let committed = match_set.matched;
    let learned = if committed {
        Some(aft_value(&match_set, &responses, &params.policy)?)
    } else {
        None
    };
    Ok(Decision {
        committed,
        learned,
        per_node_states,
        message_count: ctx.sent_since_start(),
        match_set,
        end_time,
    })
}

/// One detection round: a read fan-out whose mismatches raise suspicion
/// instead of committing anything.
pub fn run_phase_detect(
    ctx: &mut RoundContext<'_>,
    params: &ProtocolParams,
    round: u64,
) -> Result<(Decision, FaultReport), ConsensusError> {
    let (responses, per_node_states, end_time) = gather_reads(ctx, params, round);
    let report = detect_fault(&responses, &params.cfg, params.space, params.epsilon, params.alpha)?;
    let ordered = sorted_by_node(&responses);
    let clique: BTreeSet<usize> = ordered
        .iter()
        .map(|r| r.node_id)
        .filter(|id| !report.suspects.contains(id))
        .collect();
    let decision = Decision {
        committed: false,
        learned: None,
        per_node_states,
        message_count: ctx.sent_since_start(),
        match_set: MatchSet {
            matched: false,
            mode: mode_of(&responses, &clique, params.epsilon),
            aggregate_alpha: report.confidence,
            member_ids: clique,
        },
        end_time,
    };
    Ok((decision, report))
}

fn gather_reads(
    ctx: &mut RoundContext<'_>,
    params: &ProtocolParams,
    round: u64,
) -> (Vec<Response>, BTreeMap<usize, Value>, u64) {
    let t0 = ctx.start_time();
    ctx.advance_to(t0);
    let mut queries: Vec<(u64, usize)> = Vec::new();
    for node in 0..ctx.node_count() {
        if let Some(t1) = ctx.transmit(Endpoint::Client, Endpoint::Node(node), t0) {
            queries.push((t1, node));
        }
    }
    queries.sort_unstable();

    let mut replies: Vec<(u64, usize, Value)> = Vec::new();
    for (t1, node) in queries {
        ctx.advance_to(t1);
        if !ctx.alive(node) {
            continue;
        }
        let Some(state) = ctx.read_state(node) else {
            continue;
        };
        let reply = match ctx.corrupted_reply(node, &state, None, params) {
            Some(v) => v,
            None => continue,
        };
        if let Some(t2) = ctx.transmit(Endpoint::Node(node), Endpoint::Client, t1) {
            replies.push((t2, node, reply));
        }
    }
    let end_time = replies.iter().map(|r| r.0).fold(t0, u64::max);
    ctx.advance_to(end_time);

    replies.sort_by_key(|(_, node, _)| *node);
    let mut per_node_states = BTreeMap::new();
    let mut responses = Vec::new();
    for (_, node, value) in replies {
        per_node_states.insert(node, value.clone());
        responses.push(ctx.response_from(node, value, round));
    }
    (responses, per_node_states, end_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, f: usize, q: usize) -> QuorumConfig {
        QuorumConfig::new(n, f, q, FaultModel::CrashStop).unwrap()
    }

    fn reals(values: &[f64]) -> Vec<Response> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Response::exact(i, Value::Real(v), 0))
            .collect()
    }

    fn ints(values: &[i64]) -> Vec<Response> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Response::exact(i, Value::Integer(v), 0))
            .collect()
    }

    #[test]
    fn default_sizing_follows_fault_model() {
        let benign = QuorumConfig::sized_for(1, FaultModel::CrashStop);
        assert_eq!((benign.n, benign.q), (3, 2));
        let byz = QuorumConfig::sized_for(1, FaultModel::Byzantine);
        assert_eq!((byz.n, byz.q), (4, 3));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(QuorumConfig::new(3, 1, 5, FaultModel::CrashStop).is_err());
        assert!(QuorumConfig::new(3, 3, 2, FaultModel::CrashStop).is_err());
        assert!(QuorumConfig::new(0, 0, 1, FaultModel::CrashStop).is_err());
    }

    #[test]
    fn ft_match_finds_majority_group() {
        let set = ft_match(&ints(&[5, 5, 3]), &cfg(3, 1, 2));
        assert!(set.matched);
        assert_eq!(set.member_ids, BTreeSet::from([0, 1]));
    }

    #[test]
    fn ft_match_fails_without_agreement() {
        let set = ft_match(&ints(&[1, 2, 3]), &cfg(3, 1, 2));
        assert!(!set.matched);
    }

    #[test]
    fn ft_match_with_silent_node() {
        // n = 5 with one node silent: only four responses arrive; enumerating
        // the value groups gives {7,7,7} and {2}, so {0,1,2} wins at q = 3.
        let responses = vec![
            Response::exact(0, Value::Integer(7), 0),
            Response::exact(1, Value::Integer(7), 0),
            Response::exact(2, Value::Integer(7), 0),
            Response::exact(3, Value::Integer(2), 0),
        ];
        let set = ft_match(&responses, &cfg(5, 2, 3));
        assert!(set.matched);
        assert_eq!(set.member_ids, BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn ft_match_tie_breaks_toward_lowest_node_id() {
        let set = ft_match(&ints(&[5, 3, 3, 5]), &cfg(4, 1, 3));
        assert!(!set.matched);
        assert_eq!(set.member_ids, BTreeSet::from([0, 3]));
    }

    #[test]
    fn ft_value_returns_the_common_value() {
        let responses = ints(&[5, 5, 3]);
        let set = ft_match(&responses, &cfg(3, 1, 2));
        for seed in 0..32 {
            assert_eq!(ft_value(&set, &responses, seed).unwrap(), Value::Integer(5));
        }
    }

    #[test]
    fn ft_value_requires_a_match() {
        let responses = ints(&[1, 2, 3]);
        let set = ft_match(&responses, &cfg(3, 1, 2));
        assert_eq!(
            ft_value(&set, &responses, 0),
            Err(ConsensusError::NotMatched)
        );
    }

    #[test]
    fn aft_match_epsilon_neighbors() {
        let set = aft_match(
            &reals(&[10.0, 10.3, 11.2]),
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert!(set.matched);
        assert_eq!(set.member_ids, BTreeSet::from([0, 1]));
        assert_eq!(set.mode, MatchMode::EpsilonBounded);
    }

    #[test]
    fn aft_match_degenerates_to_ft_match_at_zero_epsilon() {
        let responses = ints(&[5, 5, 3]);
        let exact = ft_match(&responses, &cfg(3, 1, 2));
        let relaxed = aft_match(
            &responses,
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(exact, relaxed);
    }

    #[test]
    fn aft_match_chain_tie_breaks_lexicographically() {
        // Values 12.0, 12.4, 12.8 with ε = 0.5 give edges (0,1) and (1,2)
        // only, so the graph has exactly two maximum cliques {0,1} and {1,2}.
        let set = aft_match(
            &reals(&[12.0, 12.4, 12.8]),
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert!(set.matched);
        assert_eq!(set.member_ids, BTreeSet::from([0, 1]));
    }

    #[test]
    fn declared_bounds_widen_the_pair_radius() {
        let mut responses = reals(&[10.0, 10.9]);
        responses[0].declared_epsilon = 0.5;
        responses[0].is_artira = true;
        responses[1].declared_epsilon = 0.5;
        responses[1].is_artira = true;
        // Protocol ε = 0.2 alone would reject, but 0.5 + 0.5 covers 0.9.
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            0.2,
            1.0,
        )
        .unwrap();
        assert!(set.matched);
    }

    #[test]
    fn low_certainty_pairs_lose_their_edges() {
        let mut responses = reals(&[10.0, 10.0]);
        responses[1].declared_alpha = 0.5;
        responses[1].is_artira = true;
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            0.0,
            0.9,
        )
        .unwrap();
        assert!(!set.matched, "0.5 certainty cannot clear α = 0.9");
        assert_eq!(set.size(), 1);
    }

    #[test]
    fn too_many_nodes_is_an_error() {
        let responses: Vec<Response> = (0..17)
            .map(|i| Response::exact(i, Value::Integer(0), 0))
            .collect();
        assert_eq!(
            aft_match(
                &responses,
                &cfg(17, 1, 9),
                MetricSpace::AbsoluteDifference,
                0.0,
                1.0
            ),
            Err(ConsensusError::TooManyNodes(17))
        );
    }

    #[test]
    fn policies_over_a_matched_pair() {
        let responses = reals(&[10.0, 10.3]);
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(
            aft_value(&set, &responses, &Policy::Mean).unwrap(),
            Value::Real((10.0 + 10.3) / 2.0)
        );
        assert_eq!(
            aft_value(&set, &responses, &Policy::Max).unwrap(),
            Value::Real(10.3)
        );
        assert_eq!(
            aft_value(&set, &responses, &Policy::Min).unwrap(),
            Value::Real(10.0)
        );
    }

    #[test]
    fn prefer_replica_picks_the_replica() {
        let mut responses = reals(&[10.0, 10.3]);
        responses[0].is_artira = false;
        responses[1].is_artira = true;
        responses[1].declared_epsilon = 0.5;
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(
            aft_value(&set, &responses, &Policy::PreferReplica).unwrap(),
            Value::Real(10.0)
        );
    }

    #[test]
    fn prefer_replica_falls_back_to_median() {
        let mut responses = reals(&[10.0, 10.2, 10.4]);
        for r in &mut responses {
            r.is_artira = true;
            r.declared_epsilon = 0.5;
        }
        let set = aft_match(
            &responses,
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(
            aft_value(&set, &responses, &Policy::PreferReplica).unwrap(),
            Value::Real(10.2)
        );
    }

    #[test]
    fn mean_on_integers_rounds_half_to_even() {
        let responses = ints(&[1, 2]);
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            1.0,
            1.0,
        )
        .unwrap();
        // mean 1.5 rounds to 2 under half-to-even
        assert_eq!(
            aft_value(&set, &responses, &Policy::Mean).unwrap(),
            Value::Integer(2)
        );
    }

    #[test]
    fn numeric_policies_reject_symbols() {
        let responses = vec![
            Response::exact(0, Value::Symbol("a".into()), 0),
            Response::exact(1, Value::Symbol("a".into()), 0),
        ];
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::Discrete01,
            0.0,
            1.0,
        )
        .unwrap();
        assert!(set.matched, "identical symbols match discretely");
        assert_eq!(
            aft_value(&set, &responses, &Policy::Mean),
            Err(ConsensusError::NonNumericPolicy(ValueKind::Symbol))
        );
        // Random works on any kind.
        assert_eq!(
            aft_value(&set, &responses, &Policy::Random { seed: 1 }).unwrap(),
            Value::Symbol("a".into())
        );
    }

    #[test]
    fn detect_flags_the_outlier() {
        let report = detect_fault(
            &reals(&[10.0, 10.1, 55.0]),
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(report.suspects, BTreeSet::from([2]));
        assert!(!report.ambiguous);
        assert_eq!(report.confidence, 1.0);
    }

    #[test]
    fn detect_is_quiet_when_all_close() {
        let report = detect_fault(
            &reals(&[10.0, 10.1, 10.2]),
            &cfg(3, 1, 2),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert!(report.suspects.is_empty());
    }

    #[test]
    fn weak_certifications_mark_the_match_probabilistic() {
        let mut responses = reals(&[10.0, 10.1]);
        for r in &mut responses {
            r.is_artira = true;
            r.declared_epsilon = 0.2;
            r.declared_alpha = 0.9;
        }
        let set = aft_match(
            &responses,
            &cfg(2, 0, 2),
            MetricSpace::AbsoluteDifference,
            0.0,
            0.5,
        )
        .unwrap();
        assert!(set.matched);
        assert_eq!(set.mode, MatchMode::Probabilistic);
        assert!((set.aggregate_alpha - 0.81).abs() < 1e-15);
    }

    #[test]
    fn detect_marks_equal_cliques_ambiguous() {
        // Two disjoint 2-cliques: {0,1} at 10.0 and {2,3} at 50.0. The
        // tie-broken clique is {0,1}; its complement is suspected but the
        // report is flagged ambiguous.
        let report = detect_fault(
            &reals(&[10.0, 10.1, 50.0, 50.1]),
            &cfg(4, 1, 3),
            MetricSpace::AbsoluteDifference,
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(report.suspects, BTreeSet::from([2, 3]));
        assert!(report.ambiguous);
    }
}
