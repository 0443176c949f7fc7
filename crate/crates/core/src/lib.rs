//! Deterministic desk-scale simulator for quorum replication systems in which
//! some replicas are adapter-wrapped, statistically correlated components
//! ("artiras") rather than exact copies.
//!
//! The crate is organised around six layers:
//!
//! - [`metric`]: response values, metric spaces, and closed-ball neighborhood
//!   tests that every matching predicate builds on.
//! - [`redundancy`]: correlation estimation between paired component outputs
//!   and qualification of an artira triple (transform, certainty α, bound ε).
//! - [`adapter`]: the wrapper around an artira: a decoder applying the
//!   transform to reads, a coder applying its inverse to writes, and the
//!   built-in transform library.
//! - [`consensus`]: exact and ε/α-relaxed quorum matching, value-selection
//!   policies, fault detection, and the Propose/Accept/Learn round logic.
//! - [`simnet`]: a seeded discrete-event engine hosting nodes, message
//!   delivery, and fault injection; replayable from a single 64-bit seed.
//! - [`harness`]: scenario files, workload expansion, metric aggregation,
//!   CSV emission, and parameter sweeps.

pub mod adapter;
pub mod consensus;
pub mod harness;
pub mod metric;
pub mod redundancy;
pub(crate) mod rng;
pub mod simnet;

pub use metric::{MetricSpace, Value};
