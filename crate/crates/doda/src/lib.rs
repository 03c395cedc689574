//! Simulator, algorithm library and benchmark harness for distributed online
//! data aggregation (DODA) on dynamic graphs modeled as sequences of pairwise
//! interactions.
//!
//! The model: `n` nodes each start with one datum. Time is discrete; at each
//! index exactly one unordered pair of nodes interacts. An online algorithm
//! may order one of the two interacting nodes to transmit its data to the
//! other (each node transmits at most once, and is out of the game
//! afterwards). The run terminates when the sink holds everything.
//!
//! Crate layout:
//! - [`engine`] — interaction sequences, execution state, the simulator loop;
//! - [`knowledge`] — meet-time / future / underlying-graph accessors served to
//!   algorithms according to their declared requirements;
//! - [`algorithms`] — the decision rules (`waiting`, `gathering`,
//!   `waiting-greedy`, `tree`, `spanning-tree`, `full-future`, `offline`);
//! - [`oracle`] — offline-optimal convergecast times `opt(t)`, the `T(i)`
//!   ladder, the cost functional, and exhaustive reference oracles;
//! - [`adversary`] — the uniform randomized stream and the executable
//!   adaptive/oblivious adversary constructions;
//! - [`harness`] — seeded Monte Carlo experiments, statistics, scaling fits
//!   and deterministic CSV/JSON emission.

pub mod adversary;
pub mod algorithms;
pub mod engine;
pub mod error;
pub mod harness;
pub mod knowledge;
pub mod oracle;
pub mod time;

pub use engine::{
    apply_decision, simulate, simulate_adaptive, Decision, ExecutionState, ExecutionTrace,
    Interaction, InteractionSequence, NodeId, TransmissionEvent, SINK,
};
pub use error::{Error, Result};
pub use time::Time;
