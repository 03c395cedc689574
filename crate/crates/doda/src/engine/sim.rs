//! The simulator: drives one algorithm over a sequence (or an adaptive
//! adversary) and records the trace.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algorithms::{Algorithm, NodeMemories};
use crate::error::{Error, Result};
use crate::knowledge::{Knowledge, Requirements};
use crate::time::Time;

use super::sequence::{Interaction, InteractionSequence, NodeId};
use super::state::{apply_decision, ExecutionState, ExecutionTrace, TransmissionEvent};

/// What a decision rule sees of the current interaction: the two nodes in
/// ascending id order, the time index, ownership, and sink flags.
#[derive(Debug, Clone, Copy)]
pub struct InteractionView {
    pub u1: NodeId,
    pub u2: NodeId,
    pub t: usize,
    pub u1_owns: bool,
    pub u2_owns: bool,
    pub u1_is_sink: bool,
    pub u2_is_sink: bool,
}

impl InteractionView {
    fn new(inter: Interaction, t: usize, state: &ExecutionState) -> Self {
        let (u1, u2) = (inter.lo(), inter.hi());
        InteractionView {
            u1,
            u2,
            t,
            u1_owns: state.owns(u1),
            u2_owns: state.owns(u2),
            u1_is_sink: u1.is_sink(),
            u2_is_sink: u2.is_sink(),
        }
    }
}

/// An adversary that chooses the next interaction after observing the
/// transmissions realized so far (never the algorithm's internal state).
pub trait AdaptiveAdversary {
    fn n(&self) -> u32;

    /// Knowledge every realized sequence of this adversary is guaranteed to
    /// satisfy, and that can therefore be granted to the algorithm up front.
    fn provides(&self) -> Requirements {
        Requirements::NONE
    }

    /// The underlying graph common to all realized sequences, when
    /// `provides()` includes it.
    fn declared_graph(&self) -> Option<BTreeSet<Interaction>> {
        None
    }

    /// The interaction for index `t`, given the transmissions observed so
    /// far.
    fn next(&mut self, t: usize, observed: &[TransmissionEvent]) -> Interaction;
}

fn run_loop(
    algo: &mut dyn Algorithm,
    n: u32,
    knowledge: &Knowledge<'_>,
    horizon: usize,
    mut next: impl FnMut(usize, &[TransmissionEvent]) -> Option<Interaction>,
) -> Result<(ExecutionTrace, Vec<Interaction>)> {
    let mut state = ExecutionState::new(n);
    let mut memories = NodeMemories::new(n, !algo.oblivious());
    algo.begin_run(knowledge, &mut memories)?;

    let mut events: Vec<TransmissionEvent> = Vec::new();
    let mut realized: Vec<Interaction> = Vec::new();
    let mut terminated = false;
    let mut processed = 0;
    for t in 0..horizon {
        let Some(inter) = next(t, &events) else {
            break;
        };
        if inter.hi().0 >= n {
            return Err(Error::Contract(format!(
                "interaction {inter} outside node range [0, {n})"
            )));
        }
        realized.push(inter);
        let view = InteractionView::new(inter, t, &state);
        let decision = algo.decide(&view, memories.pair(inter.lo(), inter.hi()), knowledge);
        if let Some(ev) = apply_decision(&mut state, inter, decision)? {
            events.push(ev);
        }
        processed = t + 1;
        if state.aggregated() {
            terminated = true;
            break;
        }
    }
    let trace = ExecutionTrace { n, horizon: processed.max(events.len()), events, terminated };
    Ok((trace, realized))
}

/// Runs `algo` over `seq`, adjudicating termination within `horizon`
/// interaction indices (capped at the sequence length). Node memories are
/// fresh per run; knowledge is built from the declared requirements.
pub fn simulate(
    algo: &mut dyn Algorithm,
    seq: &InteractionSequence,
    horizon: usize,
) -> Result<ExecutionTrace> {
    let knowledge = Knowledge::for_sequence(seq, algo.requirements());
    let cap = horizon.min(seq.len());
    let (trace, _) = run_loop(algo, seq.n(), &knowledge, cap, |t, _| seq.get(t))?;
    Ok(trace)
}

/// The outcome of a co-run against an adaptive adversary: the trace plus the
/// sequence the adversary actually emitted.
#[derive(Debug)]
pub struct AdaptiveRun {
    pub trace: ExecutionTrace,
    pub realized: InteractionSequence,
}

/// Co-runs an algorithm against an adaptive adversary for `horizon` steps.
/// The algorithm may only require knowledge the adversary declares for all
/// its realized sequences (the future is decided online, so `meetTime`,
/// `future` and the full sequence are unsatisfiable).
pub fn simulate_adaptive(
    algo: &mut dyn Algorithm,
    adversary: &mut dyn AdaptiveAdversary,
    horizon: usize,
) -> Result<AdaptiveRun> {
    let provided = adversary.provides();
    if !provided.contains(algo.requirements()) {
        return Err(Error::Config(format!(
            "algorithm `{}` requires knowledge an adaptive adversary cannot serve",
            algo.name()
        )));
    }
    let n = adversary.n();
    let knowledge = Knowledge::for_declared_graph(n, adversary.declared_graph());
    let (trace, realized) = run_loop(algo, n, &knowledge, horizon, |t, observed| {
        Some(adversary.next(t, observed))
    })?;
    let realized = InteractionSequence::new_truncated(n, realized)?;
    Ok(AdaptiveRun { trace, realized })
}

/// JSON-serializable report of one run:
/// `{algo, n, seed?, events, terminated, duration}`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub algo: String,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<TransmissionEvent>>,
    pub terminated: bool,
    pub duration: Time,
}

impl RunReport {
    pub fn new(algo: &str, trace: &ExecutionTrace, seed: Option<u64>, with_events: bool) -> Self {
        RunReport {
            algo: algo.to_string(),
            n: trace.n,
            seed,
            events: with_events.then(|| trace.events.clone()),
            terminated: trace.terminated,
            duration: trace.duration(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Gathering, Waiting};

    fn s3() -> InteractionSequence {
        InteractionSequence::from_pairs(3, &[(1, 2), (1, 0), (2, 0)]).unwrap()
    }

    fn ev(time: usize, sender: u32, receiver: u32) -> TransmissionEvent {
        TransmissionEvent { time, sender: NodeId(sender), receiver: NodeId(receiver) }
    }

    #[test]
    fn gathering_on_s3() {
        let trace = simulate(&mut Gathering, &s3(), 3).unwrap();
        assert_eq!(trace.events, vec![ev(0, 2, 1), ev(1, 1, 0)]);
        assert!(trace.terminated);
        assert_eq!(trace.duration(), Time::Finite(1));
    }

    #[test]
    fn waiting_on_s3() {
        let trace = simulate(&mut Waiting, &s3(), 3).unwrap();
        assert_eq!(trace.events, vec![ev(1, 1, 0), ev(2, 2, 0)]);
        assert!(trace.terminated);
        assert_eq!(trace.duration(), Time::Finite(2));
    }

    #[test]
    fn waiting_without_sink_contact_never_terminates() {
        let seq = InteractionSequence::from_pairs(3, &[(1, 2)]).unwrap();
        let trace = simulate(&mut Waiting, &seq, 1).unwrap();
        assert!(trace.events.is_empty());
        assert!(!trace.terminated);
        assert_eq!(trace.duration(), Time::Infinite);
    }

    #[test]
    fn horizon_caps_the_run() {
        let trace = simulate(&mut Waiting, &s3(), 2).unwrap();
        assert_eq!(trace.events, vec![ev(1, 1, 0)]);
        assert!(!trace.terminated);
    }

    #[test]
    fn run_report_shape() {
        let trace = simulate(&mut Gathering, &s3(), 3).unwrap();
        let json =
            serde_json::to_string(&RunReport::new("gathering", &trace, Some(7), true)).unwrap();
        assert_eq!(
            json,
            "{\"algo\":\"gathering\",\"n\":3,\"seed\":7,\"events\":[{\"time\":0,\"sender\":2,\
             \"receiver\":1},{\"time\":1,\"sender\":1,\"receiver\":0}],\"terminated\":true,\
             \"duration\":1}"
        );
    }
}
