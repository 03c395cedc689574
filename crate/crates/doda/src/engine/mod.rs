//! The interaction-sequence model and the simulator that drives one DODA
//! algorithm over one sequence under transmit-once semantics.

mod sequence;
mod sim;
mod state;

pub use sequence::{Interaction, InteractionSequence, NodeId, SINK};
pub use sim::{
    simulate, simulate_adaptive, AdaptiveAdversary, AdaptiveRun, InteractionView, RunReport,
};
pub use state::{apply_decision, Decision, ExecutionState, ExecutionTrace, TransmissionEvent};
