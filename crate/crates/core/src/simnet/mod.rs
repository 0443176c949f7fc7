//! Deterministic discrete-event engine hosting nodes, message delivery, and
//! fault injection schedules. A run is replayable bit-for-bit from a single
//! 64-bit seed: one global generator is split per substream and per message
//! via counter-based keying, and adapter draw counters are durable across
//! crash recovery so replays stay aligned.

mod engine;
mod node;
mod queue;

pub use engine::{
    run, Counters, Endpoint, RequestKind, RequestOutcome, RoundContext, RunResult,
};
pub use node::{
    all_roles, inject, ByzantineStrategy, FaultEvent, FaultKind, NetModel, NodeBehavior,
    NodeRuntime, NodeSpec, Role,
};
pub use queue::{EventQueue, PastEvent};

use crate::adapter::AdapterError;
use crate::consensus::{ConsensusError, FaultModel};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario validation failed:\n  {}", violations.join("\n  "))]
    Validation { violations: Vec<String> },
    #[error("fault {fault} on node {node} is not allowed under {model:?}")]
    ModelMismatch {
        node: usize,
        fault: &'static str,
        model: FaultModel,
    },
    #[error(transparent)]
    PastEvent(#[from] PastEvent),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}
