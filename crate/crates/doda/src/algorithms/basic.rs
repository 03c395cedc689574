//! The oblivious rules: Waiting, Gathering, Waiting Greedy, plus two test
//! rules used by the adversary estimators.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{Decision, InteractionView};
use crate::knowledge::{Knowledge, Requirements};
use crate::time::Time;

use super::{Algorithm, MemoryPair};

/// Transmit only to the sink.
pub struct Waiting;

impl Algorithm for Waiting {
    fn name(&self) -> &str {
        "waiting"
    }

    fn decide(&mut self, v: &InteractionView, _m: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        if v.u1_is_sink {
            Decision::Receiver(v.u1)
        } else if v.u2_is_sink {
            Decision::Receiver(v.u2)
        } else {
            Decision::Abstain
        }
    }
}

/// Transmit to the sink, or otherwise to the smaller-id node.
pub struct Gathering;

impl Algorithm for Gathering {
    fn name(&self) -> &str {
        "gathering"
    }

    fn decide(&mut self, v: &InteractionView, _m: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        if v.u2_is_sink {
            Decision::Receiver(v.u2)
        } else {
            // Covers the sink-as-u1 case too: the sink has the smallest id.
            Decision::Receiver(v.u1)
        }
    }
}

/// The node with the greater meet time transmits, provided that meet time
/// exceeds the threshold `tau`; otherwise both wait. Infinite meet times
/// compare greater than any finite one, and the `m1 <= m2` branch wins the
/// infinite-vs-infinite tie.
pub struct WaitingGreedy {
    tau: usize,
}

impl WaitingGreedy {
    pub fn new(tau: usize) -> Self {
        WaitingGreedy { tau }
    }

    pub fn tau(&self) -> usize {
        self.tau
    }
}

impl Algorithm for WaitingGreedy {
    fn name(&self) -> &str {
        "waiting-greedy"
    }

    fn requirements(&self) -> Requirements {
        Requirements::MEET_TIME
    }

    fn decide(&mut self, v: &InteractionView, _m: MemoryPair<'_>, k: &Knowledge<'_>) -> Decision {
        let m1 = k.meet_time(v.u1, v.t);
        let m2 = k.meet_time(v.u2, v.t);
        let tau = Time::Finite(self.tau);
        if m1 <= m2 && tau < m2 {
            Decision::Receiver(v.u1)
        } else if m1 > m2 && tau < m1 {
            Decision::Receiver(v.u2)
        } else {
            Decision::Abstain
        }
    }
}

/// Never transmits. Exists so the adversary estimators have a rule whose
/// no-transmission probability is identically one.
pub struct NeverTransmit;

impl Algorithm for NeverTransmit {
    fn name(&self) -> &str {
        "never-transmit"
    }

    fn decide(&mut self, _v: &InteractionView, _m: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        Decision::Abstain
    }
}

/// Transmits to the sink with probability `p` at each sink interaction; a
/// seeded randomized rule for the estimator tests.
pub struct CoinFlipWaiting {
    p: f64,
    rng: ChaCha8Rng,
}

impl CoinFlipWaiting {
    pub fn new(p: f64, seed: u64) -> Self {
        CoinFlipWaiting { p, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Algorithm for CoinFlipWaiting {
    fn name(&self) -> &str {
        "coin-flip-waiting"
    }

    fn decide(&mut self, v: &InteractionView, _m: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        let sink = if v.u1_is_sink {
            v.u1
        } else if v.u2_is_sink {
            v.u2
        } else {
            return Decision::Abstain;
        };
        if v.u1_owns && v.u2_owns && self.rng.gen_bool(self.p) {
            Decision::Receiver(sink)
        } else {
            Decision::Abstain
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, InteractionSequence, NodeId};
    use crate::knowledge::Requirements;

    fn view(u1: u32, u2: u32, t: usize) -> InteractionView {
        InteractionView {
            u1: NodeId(u1),
            u2: NodeId(u2),
            t,
            u1_owns: true,
            u2_owns: true,
            u1_is_sink: u1 == 0,
            u2_is_sink: u2 == 0,
        }
    }

    fn no_knowledge() -> Knowledge<'static> {
        Knowledge::for_declared_graph(3, None)
    }

    fn decide_memoryless(algo: &mut dyn Algorithm, v: &InteractionView, k: &Knowledge) -> Decision {
        let mut mems = crate::algorithms::NodeMemories::new(v.u2.0 + 1, false);
        algo.decide(v, mems.pair(v.u1, v.u2), k)
    }

    #[test]
    fn waiting_decides_per_definition() {
        let k = no_knowledge();
        let mut w = Waiting;
        assert_eq!(decide_memoryless(&mut w, &view(0, 1, 5), &k), Decision::Receiver(NodeId(0)));
        assert_eq!(decide_memoryless(&mut w, &view(1, 2, 5), &k), Decision::Abstain);
        assert_eq!(decide_memoryless(&mut w, &view(0, 2, 9), &k), Decision::Receiver(NodeId(0)));
    }

    #[test]
    fn gathering_decides_per_definition() {
        let k = no_knowledge();
        let mut g = Gathering;
        assert_eq!(decide_memoryless(&mut g, &view(1, 2, 0), &k), Decision::Receiver(NodeId(1)));
        assert_eq!(decide_memoryless(&mut g, &view(0, 2, 0), &k), Decision::Receiver(NodeId(0)));
    }

    #[test]
    fn waiting_and_gathering_agree_on_sink_interactions() {
        let k = no_knowledge();
        for u in [1u32, 2, 7] {
            let v = view(0, u, 3);
            let w = decide_memoryless(&mut Waiting, &v, &k);
            let g = decide_memoryless(&mut Gathering, &v, &k);
            assert_eq!(w, g);
        }
    }

    /// Drives the threshold branches with a crafted sequence: meet times are
    /// read from knowledge, so the sequence encodes the wanted m values.
    #[test]
    fn waiting_greedy_branches() {
        // Nodes 1 and 2 with sink meetings at indices 4 and 7.
        let seq = InteractionSequence::from_pairs(
            8,
            &[(3, 4), (3, 4), (3, 4), (3, 4), (0, 1), (3, 4), (3, 4), (0, 2)],
        )
        .unwrap();
        let k = Knowledge::for_sequence(&seq, Requirements::MEET_TIME);
        // tau = 5: m1 = 4 <= m2 = 7 and 5 < 7 -> u1 receives.
        let mut wg = WaitingGreedy::new(5);
        assert_eq!(decide_memoryless(&mut wg, &view(1, 2, 0), &k), Decision::Receiver(NodeId(1)));

        // Swap roles: m1 = 7 > m2 = 4 but tau = 5 >= 4... second branch needs
        // tau < m1 = 7, which holds -> u2... build via nodes (2, 1) ordering is
        // fixed by ids, so craft meet times the other way instead.
        let seq2 = InteractionSequence::from_pairs(
            8,
            &[(3, 4), (3, 4), (3, 4), (3, 4), (0, 2), (3, 4), (3, 4), (0, 1)],
        )
        .unwrap();
        let k2 = Knowledge::for_sequence(&seq2, Requirements::MEET_TIME);
        // m1 = 7, m2 = 4, tau = 5 < m1 -> u2 receives.
        let mut wg2 = WaitingGreedy::new(5);
        assert_eq!(decide_memoryless(&mut wg2, &view(1, 2, 0), &k2), Decision::Receiver(NodeId(2)));

        // tau = 5, m1 = 4, m2 = 3: no branch fires.
        let seq3 = InteractionSequence::from_pairs(
            8,
            &[(3, 4), (3, 4), (3, 4), (0, 2), (0, 1), (3, 4), (3, 4), (3, 4)],
        )
        .unwrap();
        let k3 = Knowledge::for_sequence(&seq3, Requirements::MEET_TIME);
        let mut wg3 = WaitingGreedy::new(5);
        assert_eq!(decide_memoryless(&mut wg3, &view(1, 2, 0), &k3), Decision::Abstain);

        // Infinite vs infinite resolves the first branch.
        let seq4 = InteractionSequence::from_pairs(8, &[(3, 4)]).unwrap();
        let k4 = Knowledge::for_sequence(&seq4, Requirements::MEET_TIME);
        let mut wg4 = WaitingGreedy::new(5);
        assert_eq!(decide_memoryless(&mut wg4, &view(1, 2, 0), &k4), Decision::Receiver(NodeId(1)));
    }

    /// Past tau both meet times exceed t > tau, so one branch always fires.
    #[test]
    fn waiting_greedy_acts_as_gathering_after_tau() {
        let seq = InteractionSequence::from_pairs(5, &[(3, 4); 40]).unwrap();
        let k = Knowledge::for_sequence(&seq, Requirements::MEET_TIME);
        let mut wg = WaitingGreedy::new(3);
        for t in 4..40 {
            let d = decide_memoryless(&mut wg, &view(1, 2, t), &k);
            assert_ne!(d, Decision::Abstain, "at t={t}");
        }
    }

    /// The literal definition: at a sink interaction where the other node
    /// meets the sink again before tau, nobody transmits.
    #[test]
    fn waiting_greedy_waits_at_early_sink_meetings() {
        let seq =
            InteractionSequence::from_pairs(4, &[(0, 1), (2, 3), (0, 1), (2, 3)]).unwrap();
        let k = Knowledge::for_sequence(&seq, Requirements::MEET_TIME);
        let mut wg = WaitingGreedy::new(10);
        // At t = 0 node 1 meets the sink again at t = 2 <= tau: abstain.
        assert_eq!(decide_memoryless(&mut wg, &view(0, 1, 0), &k), Decision::Abstain);
        // At t = 2 there is no later meeting: m2 infinite > tau, transmit.
        assert_eq!(decide_memoryless(&mut wg, &view(0, 1, 2), &k), Decision::Receiver(NodeId(0)));
    }

    #[test]
    fn waiting_greedy_hand_trace_on_s3() {
        let seq = InteractionSequence::from_pairs(3, &[(1, 2), (1, 0), (2, 0)]).unwrap();
        let mut wg = WaitingGreedy::new(0);
        let trace = simulate(&mut wg, &seq, 3).unwrap();
        assert!(trace.terminated);
        assert_eq!(trace.duration(), Time::Finite(1));
        assert_eq!(trace.events[0].sender, NodeId(2));
        assert_eq!(trace.events[0].receiver, NodeId(1));
        assert_eq!(trace.events[1].sender, NodeId(1));
        assert_eq!(trace.events[1].receiver, NodeId(0));
    }

    #[test]
    fn oblivious_rules_replay_identically() {
        let seq = InteractionSequence::from_pairs(3, &[(1, 2), (1, 0), (2, 0)]).unwrap();
        for name in ["waiting", "gathering"] {
            let mut a = crate::algorithms::build(name, &Default::default()).unwrap();
            let mut b = crate::algorithms::build(name, &Default::default()).unwrap();
            let ta = simulate(a.as_mut(), &seq, 3).unwrap();
            let tb = simulate(b.as_mut(), &seq, 3).unwrap();
            assert_eq!(ta, tb);
        }
    }
}
