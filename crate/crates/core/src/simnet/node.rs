//! Simulated nodes: exact replicas and adapter-wrapped artiras, with their
//! fault schedules and runtime state.

use std::collections::BTreeSet;

use crate::adapter::{Adapter, AdapterError};
use crate::consensus::FaultModel;
use crate::metric::{MetricSpace, Value};
use crate::redundancy::ArtiraTriple;

use super::SimError;

/// Protocol capabilities a node may exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Proposer,
    Acceptor,
    Learner,
}

pub fn all_roles() -> BTreeSet<Role> {
    BTreeSet::from([Role::Proposer, Role::Acceptor, Role::Learner])
}

/// Reply-corruption strategies a Byzantine node can run.
#[derive(Debug, Clone, PartialEq)]
pub enum ByzantineStrategy {
    /// Seeded junk values, far outside any plausible band.
    Arbitrary { seed: u64 },
    /// The maximum value that still respects the matching bound against the
    /// reference state, computed fresh at reply time.
    MaxSkew,
    /// Omit replies entirely while staying up.
    Mute,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaultKind {
    Crash,
    Recover,
    ByzantineOn(ByzantineStrategy),
    ByzantineOff,
}

impl FaultKind {
    pub fn name(&self) -> &'static str {
        match self {
            FaultKind::Crash => "crash",
            FaultKind::Recover => "recover",
            FaultKind::ByzantineOn(_) => "byzantine_on",
            FaultKind::ByzantineOff => "byzantine_off",
        }
    }

    /// Whether this fault kind may appear under the given fault model.
    pub fn allowed_under(&self, model: FaultModel) -> bool {
        match self {
            FaultKind::Crash => true,
            FaultKind::Recover => model == FaultModel::CrashRecovery,
            FaultKind::ByzantineOn(_) | FaultKind::ByzantineOff => model == FaultModel::Byzantine,
        }
    }
}

/// A scheduled fault at a logical tick.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultEvent {
    pub at_time: u64,
    pub kind: FaultKind,
}

/// Network model: fixed base delay plus seeded jitter, with a seeded drop
/// probability per message.
#[derive(Debug, Clone, PartialEq)]
pub struct NetModel {
    pub base_delay: u64,
    pub jitter: u64,
    pub drop_prob: f64,
}

impl Default for NetModel {
    fn default() -> Self {
        Self { base_delay: 1, jitter: 0, drop_prob: 0.0 }
    }
}

/// Static description of one simulated node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub node_id: usize,
    pub roles: BTreeSet<Role>,
    pub behavior: NodeBehavior,
    pub fault_schedule: Vec<FaultEvent>,
}

/// What the node is made of. An artira's `initial` is its *raw* internal
/// state, expressed in the artira's own domain (e.g. Fahrenheit for a
/// Fahrenheit sensor wrapped to serve Celsius readers).
#[derive(Debug, Clone, PartialEq)]
pub enum NodeBehavior {
    ExactReplica { initial: Value },
    Artira { triple: ArtiraTriple, initial: Value },
}

impl NodeSpec {
    pub fn replica(node_id: usize, initial: Value) -> Self {
        Self {
            node_id,
            roles: all_roles(),
            behavior: NodeBehavior::ExactReplica { initial },
            fault_schedule: Vec::new(),
        }
    }

    pub fn artira(node_id: usize, triple: ArtiraTriple, initial: Value) -> Self {
        Self {
            node_id,
            roles: all_roles(),
            behavior: NodeBehavior::Artira { triple, initial },
            fault_schedule: Vec::new(),
        }
    }

    pub fn with_fault(mut self, at_time: u64, kind: FaultKind) -> Self {
        self.fault_schedule.push(FaultEvent { at_time, kind });
        self
    }

    pub fn with_roles(mut self, roles: BTreeSet<Role>) -> Self {
        self.roles = roles;
        self
    }

    pub fn is_artira(&self) -> bool {
        matches!(self.behavior, NodeBehavior::Artira { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum RuntimeBehavior {
    Replica { state: Value },
    Artira { adapter: Adapter, raw_state: Value },
}

/// Live state of one node inside a running simulation.
///
/// Raw state and adapter draw counters are durable: a node recovering from a
/// crash resumes from them, keeping replays draw-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRuntime {
    pub id: usize,
    pub roles: BTreeSet<Role>,
    behavior: RuntimeBehavior,
    pub crashed: bool,
    pub byzantine: Option<ByzantineStrategy>,
    pub byzantine_draws: u64,
}

impl NodeRuntime {
    pub fn from_spec(spec: &NodeSpec, space: MetricSpace) -> Result<Self, SimError> {
        let behavior = match &spec.behavior {
            NodeBehavior::ExactReplica { initial } => RuntimeBehavior::Replica {
                state: initial.clone(),
            },
            NodeBehavior::Artira { triple, initial } => RuntimeBehavior::Artira {
                adapter: Adapter::new(triple.clone(), space).map_err(SimError::Adapter)?,
                raw_state: initial.clone(),
            },
        };
        Ok(Self {
            id: spec.node_id,
            roles: spec.roles.clone(),
            behavior,
            crashed: false,
            byzantine: None,
            byzantine_draws: 0,
        })
    }

    pub fn is_artira(&self) -> bool {
        matches!(self.behavior, RuntimeBehavior::Artira { .. })
    }

    /// The accuracy bound this node declares on its replies. Exact replicas
    /// declare zero.
    pub fn declared_epsilon(&self) -> f64 {
        match &self.behavior {
            RuntimeBehavior::Replica { .. } => 0.0,
            RuntimeBehavior::Artira { adapter, .. } => adapter.effective_epsilon(),
        }
    }

    pub fn declared_alpha(&self) -> f64 {
        match &self.behavior {
            RuntimeBehavior::Replica { .. } => 1.0,
            RuntimeBehavior::Artira { adapter, .. } => adapter.effective_alpha(),
        }
    }

    /// Executes a write and returns the node's post-execution exposed state.
    /// Artiras code the value through the inverse transform into raw state,
    /// then decode it back out, so their post-state may differ from the
    /// proposal within the declared bound.
    pub fn execute_write(&mut self, value: &Value) -> Result<Value, AdapterError> {
        match &mut self.behavior {
            RuntimeBehavior::Replica { state } => {
                *state = value.clone();
                Ok(value.clone())
            }
            RuntimeBehavior::Artira { adapter, raw_state } => {
                *raw_state = adapter.encode(value)?;
                adapter.decode(raw_state)
            }
        }
    }

    /// Reads the node's exposed state; artiras decode afresh, consuming a
    /// draw for stochastic transforms.
    pub fn read_state(&mut self) -> Result<Value, AdapterError> {
        match &mut self.behavior {
            RuntimeBehavior::Replica { state } => Ok(state.clone()),
            RuntimeBehavior::Artira { adapter, raw_state } => adapter.decode(raw_state),
        }
    }
}

/// Applies one fault to a node, checking it against the fault model.
pub fn inject(node: &mut NodeRuntime, fault: &FaultKind, model: FaultModel) -> Result<(), SimError> {
    if !fault.allowed_under(model) {
        return Err(SimError::ModelMismatch {
            node: node.id,
            fault: fault.name(),
            model,
        });
    }
    apply_unchecked(node, fault);
    Ok(())
}

/// Fault application after model validation has already happened.
pub(super) fn apply_unchecked(node: &mut NodeRuntime, fault: &FaultKind) {
    match fault {
        FaultKind::Crash => node.crashed = true,
        FaultKind::Recover => node.crashed = false,
        FaultKind::ByzantineOn(strategy) => node.byzantine = Some(strategy.clone()),
        FaultKind::ByzantineOff => node.byzantine = None,
    }
}
