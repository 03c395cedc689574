//! Execution state, decisions and traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Time;

use super::sequence::{Interaction, NodeId};

/// The output of a decision rule for one interaction: name the receiver, or
/// abstain (the paper's ⊥).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Receiver(NodeId),
    Abstain,
}

/// One applied transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionEvent {
    pub time: usize,
    pub sender: NodeId,
    pub receiver: NodeId,
}

/// Which nodes still own data, plus the logical clock (number of interactions
/// processed so far).
///
/// Invariants: the sink always owns data; the owner count only decreases, by
/// exactly one per applied transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionState {
    owns: Vec<bool>,
    owner_count: usize,
    clock: usize,
}

impl ExecutionState {
    /// All `n` nodes own their datum, clock at 0.
    pub fn new(n: u32) -> Self {
        ExecutionState {
            owns: vec![true; n as usize],
            owner_count: n as usize,
            clock: 0,
        }
    }

    pub fn n(&self) -> u32 {
        self.owns.len() as u32
    }

    pub fn owns(&self, u: NodeId) -> bool {
        self.owns[u.index()]
    }

    pub fn owner_count(&self) -> usize {
        self.owner_count
    }

    /// True once only the sink owns data.
    pub fn aggregated(&self) -> bool {
        self.owner_count == 1
    }

    pub fn clock(&self) -> usize {
        self.clock
    }

    /// Nodes that already transmitted.
    pub fn transmitted(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.owns
            .iter()
            .enumerate()
            .filter(|(_, owns)| !**owns)
            .map(|(i, _)| NodeId(i as u32))
    }
}

/// Applies one decision to the state. Advances the clock by one in every
/// case; moves the sender out of the owner set only when both interacting
/// nodes own data and a receiver was named (otherwise the output is ignored).
///
/// Returns the transmission that took place, if any.
pub fn apply_decision(
    state: &mut ExecutionState,
    interaction: Interaction,
    decision: Decision,
) -> Result<Option<TransmissionEvent>> {
    if interaction.hi().index() >= state.owns.len() {
        return Err(Error::Contract(format!(
            "interaction {interaction} references a node outside [0, {})",
            state.owns.len()
        )));
    }
    let t = state.clock;
    state.clock += 1;
    let receiver = match decision {
        Decision::Abstain => return Ok(None),
        Decision::Receiver(r) => r,
    };
    if !interaction.contains(receiver) {
        return Err(Error::Contract(format!(
            "receiver {receiver} is not part of interaction {interaction}"
        )));
    }
    let sender = interaction.other(receiver);
    if !(state.owns(sender) && state.owns(receiver)) {
        // One of the two already transmitted: the output is ignored.
        return Ok(None);
    }
    if sender.is_sink() {
        return Err(Error::Contract(
            "decision would make the sink transmit".into(),
        ));
    }
    state.owns[sender.index()] = false;
    state.owner_count -= 1;
    Ok(Some(TransmissionEvent { time: t, sender, receiver }))
}

/// The transmission log of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub n: u32,
    /// Number of interaction indices adjudicated (`[0, horizon)`).
    pub horizon: usize,
    pub events: Vec<TransmissionEvent>,
    pub terminated: bool,
}

impl ExecutionTrace {
    /// The index of the final transmission when the run terminated, infinite
    /// otherwise ("not terminated within the horizon").
    pub fn duration(&self) -> Time {
        if self.terminated {
            Time::Finite(self.events.last().expect("terminated run has events").time)
        } else {
            Time::Infinite
        }
    }
}
