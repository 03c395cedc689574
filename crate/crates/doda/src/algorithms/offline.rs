//! The full-knowledge optimum: replay the offline convergecast schedule for
//! the whole sequence, realizing `duration = opt(0)` whenever that is finite.

use std::collections::HashMap;

use crate::engine::{Decision, InteractionView, NodeId};
use crate::error::Result;
use crate::knowledge::{Knowledge, Requirements};
use crate::oracle::offline_schedule;

use super::{Algorithm, MemoryPair, NodeMemories};

pub struct Offline {
    schedule: Option<HashMap<usize, (NodeId, NodeId)>>,
}

impl Offline {
    pub fn new() -> Self {
        Offline { schedule: None }
    }
}

impl Default for Offline {
    fn default() -> Self {
        Self::new()
    }
}

impl Algorithm for Offline {
    fn name(&self) -> &str {
        "offline"
    }

    fn requirements(&self) -> Requirements {
        Requirements::FULL_SEQUENCE
    }

    fn begin_run(&mut self, knowledge: &Knowledge<'_>, _memories: &mut NodeMemories) -> Result<()> {
        let seq = knowledge.full_sequence();
        self.schedule = offline_schedule(seq, 0).map(|events| {
            events.into_iter().map(|e| (e.time, (e.sender, e.receiver))).collect()
        });
        Ok(())
    }

    fn decide(&mut self, v: &InteractionView, _m: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        match self.schedule.as_ref().and_then(|s| s.get(&v.t)) {
            Some(&(sender, receiver)) => {
                debug_assert!(
                    (sender == v.u1 && receiver == v.u2) || (sender == v.u2 && receiver == v.u1)
                );
                Decision::Receiver(receiver)
            }
            None => Decision::Abstain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, InteractionSequence};
    use crate::oracle::opt;
    use crate::time::Time;

    #[test]
    fn offline_realizes_opt_zero() {
        let seq =
            InteractionSequence::from_pairs(3, &[(1, 2), (1, 0), (2, 0)]).unwrap();
        let trace = simulate(&mut Offline::new(), &seq, 3).unwrap();
        assert!(trace.terminated);
        assert_eq!(trace.duration(), opt(&seq, 0));
        assert_eq!(trace.duration(), Time::Finite(1));
    }

    #[test]
    fn offline_abstains_forever_when_infeasible() {
        let seq = InteractionSequence::from_pairs(3, &[(1, 2), (1, 2)]).unwrap();
        let trace = simulate(&mut Offline::new(), &seq, 2).unwrap();
        assert!(trace.events.is_empty());
        assert!(!trace.terminated);
    }
}
