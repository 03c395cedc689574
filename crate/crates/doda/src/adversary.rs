//! Sequence generators: the uniform randomized adversary and executable
//! versions of the adaptive/oblivious impossibility constructions.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algorithms::Algorithm;
use crate::engine::{
    simulate, AdaptiveAdversary, Interaction, InteractionSequence, NodeId, TransmissionEvent,
};
use crate::error::{Error, Result};
use crate::knowledge::Requirements;

/// Draws one uniform pair among the `C(n, 2)` possibilities.
#[derive(Debug, Clone)]
pub struct PairSampler {
    first: Uniform<u32>,
    second: Uniform<u32>,
}

impl PairSampler {
    pub fn new(n: u32) -> Self {
        PairSampler { first: Uniform::new(0, n), second: Uniform::new(0, n - 1) }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Interaction {
        let a = self.first.sample(rng);
        let mut b = self.second.sample(rng);
        if b >= a {
            b += 1;
        }
        // Each unordered pair is hit by exactly two (a, b) outcomes.
        Interaction::new(NodeId(a), NodeId(b)).expect("a != b by construction")
    }
}

/// The randomized adversary: interactions picked uniformly at random,
/// independently at each index. Deterministic given the seed; materialized up
/// to `horizon` and marked truncated (it stands for an infinite stream).
pub fn randomized_stream(n: u32, seed: u64, horizon: usize) -> Result<InteractionSequence> {
    if n < 3 {
        return Err(Error::Config(format!("node count {n} < 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = PairSampler::new(n);
    let interactions = (0..horizon).map(|_| sampler.sample(&mut rng)).collect();
    InteractionSequence::new_truncated(n, interactions)
}

/// Sender of the transmission realized at index `t`, if any.
fn sender_at(observed: &[TransmissionEvent], t: usize) -> Option<NodeId> {
    match observed.last() {
        Some(ev) if ev.time == t => Some(ev.sender),
        _ => None,
    }
}

/// The 3-node adaptive adversary (nodes s=0, a=1, b=2): probe {a,b}; lock a
/// starved loop on whoever transmits first, otherwise probe {b,s} and repeat.
/// No algorithm terminates against it while convergecasts keep being
/// possible.
pub struct Theorem1Adversary {
    phase: T1Phase,
}

enum T1Phase {
    /// Emitted {a,b} at the given index, awaiting the outcome.
    ProbeAb(usize),
    /// Emitted {b,s} at the given index, awaiting the outcome.
    ProbeBs(usize),
    /// a transmitted: alternate {a,s}, {a,b} forever (b starved).
    LockA(usize),
    /// b transmitted to a: alternate {b,s}, {a,b} forever (a starved).
    LockB(usize),
    /// b transmitted to s: alternate {a,b}, {b,s} forever (a starved).
    LockC(usize),
    Start,
}

pub fn theorem1_adversary() -> Theorem1Adversary {
    Theorem1Adversary { phase: T1Phase::Start }
}

const T1_A: NodeId = NodeId(1);
const T1_B: NodeId = NodeId(2);
const T1_S: NodeId = NodeId(0);

impl AdaptiveAdversary for Theorem1Adversary {
    fn n(&self) -> u32 {
        3
    }

    fn next(&mut self, t: usize, observed: &[TransmissionEvent]) -> Interaction {
        let ab = Interaction::new(T1_A, T1_B).unwrap();
        let as_ = Interaction::new(T1_A, T1_S).unwrap();
        let bs = Interaction::new(T1_B, T1_S).unwrap();
        loop {
            match self.phase {
                T1Phase::Start => {
                    self.phase = T1Phase::ProbeAb(t);
                    return ab;
                }
                T1Phase::ProbeAb(probe_t) => {
                    match sender_at(observed, probe_t) {
                        Some(u) if u == T1_A => self.phase = T1Phase::LockA(0),
                        Some(u) if u == T1_B => self.phase = T1Phase::LockB(0),
                        _ => {
                            self.phase = T1Phase::ProbeBs(t);
                            return bs;
                        }
                    }
                }
                T1Phase::ProbeBs(probe_t) => {
                    match sender_at(observed, probe_t) {
                        Some(u) if u == T1_B => self.phase = T1Phase::LockC(0),
                        _ => {
                            // Restart the probe from scratch.
                            self.phase = T1Phase::ProbeAb(t);
                            return ab;
                        }
                    }
                }
                T1Phase::LockA(step) => {
                    self.phase = T1Phase::LockA(step + 1);
                    return if step % 2 == 0 { as_ } else { ab };
                }
                T1Phase::LockB(step) => {
                    self.phase = T1Phase::LockB(step + 1);
                    return if step % 2 == 0 { bs } else { ab };
                }
                T1Phase::LockC(step) => {
                    self.phase = T1Phase::LockC(step + 1);
                    return if step % 2 == 0 { ab } else { bs };
                }
            }
        }
    }
}

/// The 4-node adversary against underlying-graph knowledge (s=0 and u1..u3 on
/// the cycle s-u1-u2-u3-s): repeat ({u1,s},{u3,s},{u2,u1},{u2,u3}); if u2
/// ever transmits in the third slot, starve u1; if in the fourth, starve u3.
pub struct Theorem3Adversary {
    phase: T3Phase,
}

enum T3Phase {
    /// Position within the 4-interaction pattern, with the base index of the
    /// current repetition.
    Pattern { slot: usize, base: usize },
    /// u2 transmitted to u1: repeat ({u1,u2},{u2,u3},{u3,s}).
    LockU1(usize),
    /// u2 transmitted to u3: repeat ({u3,u2},{u2,u1},{u1,s}).
    LockU3(usize),
}

pub fn theorem3_adversary() -> Theorem3Adversary {
    Theorem3Adversary { phase: T3Phase::Pattern { slot: 0, base: 0 } }
}

const T3_U: [NodeId; 4] = [NodeId(0), NodeId(1), NodeId(2), NodeId(3)];

fn t3_pattern(slot: usize) -> Interaction {
    let [s, u1, u2, u3] = T3_U;
    match slot {
        0 => Interaction::new(u1, s).unwrap(),
        1 => Interaction::new(u3, s).unwrap(),
        2 => Interaction::new(u2, u1).unwrap(),
        _ => Interaction::new(u2, u3).unwrap(),
    }
}

impl AdaptiveAdversary for Theorem3Adversary {
    fn n(&self) -> u32 {
        4
    }

    fn provides(&self) -> Requirements {
        Requirements::UNDERLYING_GRAPH
    }

    /// Every realized sequence starts with the full pattern, so its
    /// underlying graph is always the 4-cycle.
    fn declared_graph(&self) -> Option<BTreeSet<Interaction>> {
        Some(
            [
                Interaction::of(0, 1),
                Interaction::of(1, 2),
                Interaction::of(2, 3),
                Interaction::of(0, 3),
            ]
            .into(),
        )
    }

    fn next(&mut self, t: usize, observed: &[TransmissionEvent]) -> Interaction {
        let [s, u1, u2, u3] = T3_U;
        loop {
            match self.phase {
                T3Phase::Pattern { slot, base } => {
                    if slot == 3 {
                        // Did u2 transmit to u1 in the third slot?
                        if sender_at(observed, base + 2) == Some(u2) {
                            self.phase = T3Phase::LockU1(0);
                            continue;
                        }
                    }
                    if slot == 0 && base > 0 {
                        // Did u2 transmit to u3 in the previous fourth slot?
                        if sender_at(observed, base - 1) == Some(u2) {
                            self.phase = T3Phase::LockU3(0);
                            continue;
                        }
                    }
                    self.phase = if slot == 3 {
                        T3Phase::Pattern { slot: 0, base: t + 1 }
                    } else {
                        T3Phase::Pattern { slot: slot + 1, base }
                    };
                    return t3_pattern(slot);
                }
                T3Phase::LockU1(step) => {
                    self.phase = T3Phase::LockU1(step + 1);
                    return match step % 3 {
                        0 => Interaction::new(u1, u2).unwrap(),
                        1 => Interaction::new(u2, u3).unwrap(),
                        _ => Interaction::new(u3, s).unwrap(),
                    };
                }
                T3Phase::LockU3(step) => {
                    self.phase = T3Phase::LockU3(step + 1);
                    return match step % 3 {
                        0 => Interaction::new(u3, u2).unwrap(),
                        1 => Interaction::new(u2, u1).unwrap(),
                        _ => Interaction::new(u1, s).unwrap(),
                    };
                }
            }
        }
    }
}

/// The oblivious construction from the randomized-impossibility proof:
/// `l0` interactions `{u_(i mod n-1), s}`, then `repetitions` copies of the
/// path block `I'` in which `u_d` can only reach the sink through every
/// other node (`I'_i = {u_i, u_(i+1)}` except slot `d-1`, which is
/// `{u_(d-1), s}`; indices mod `n-1`). Node ids: `s = 0`, `u_i = i + 1`.
pub fn theorem2_sequence(
    n: u32,
    l0: usize,
    d: u32,
    repetitions: usize,
) -> Result<InteractionSequence> {
    if n < 3 {
        return Err(Error::Config(format!("node count {n} < 3")));
    }
    let ring = n - 1; // u_0 .. u_(n-2)
    if d > n - 2 {
        return Err(Error::Config(format!("d = {d} out of range [0, {}]", n - 2)));
    }
    let u = |i: u32| NodeId((i % ring) + 1);
    let s = NodeId(0);
    let mut interactions = Vec::with_capacity(l0 + repetitions * ring as usize);
    for i in 0..l0 {
        interactions.push(Interaction::new(u(i as u32 % ring), s).unwrap());
    }
    let sink_slot = (d + ring - 1) % ring; // d - 1 mod (n - 1)
    for _ in 0..repetitions {
        for i in 0..ring {
            let inter = if i == sink_slot {
                Interaction::new(u(i), s).unwrap()
            } else {
                Interaction::new(u(i), u(i + 1)).unwrap()
            };
            interactions.push(inter);
        }
    }
    InteractionSequence::new(n, interactions)
}

/// Monte Carlo estimate of the probability that no node transmits when the
/// algorithm runs on the sequence: the fraction of `trials` independent runs
/// (fresh instance per run, seeds derived from `seed`) with an empty trace.
pub fn estimate_no_transmit_probability(
    mut make_algo: impl FnMut(u64) -> Box<dyn Algorithm>,
    seq: &InteractionSequence,
    trials: u32,
    seed: u64,
) -> Result<f64> {
    assert!(trials >= 1, "at least one trial");
    let mut silent = 0u32;
    for trial in 0..trials {
        let run_seed = crate::harness::derive_seed(seed, seq.n(), trial as u64);
        let mut algo = make_algo(run_seed);
        let trace = simulate(algo.as_mut(), seq, seq.len())?;
        if trace.events.is_empty() {
            silent += 1;
        }
    }
    Ok(f64::from(silent) / f64::from(trials))
}

/// Scans `l = 1..=l_cap` for the smallest prefix `I^l` on which the
/// estimated no-transmission probability drops below `1/n`; `None` when the
/// estimate never does (e.g. a rule that never transmits).
pub fn find_l0(
    mut make_algo: impl FnMut(u64) -> Box<dyn Algorithm>,
    n: u32,
    trials: u32,
    seed: u64,
    l_cap: usize,
) -> Result<Option<usize>> {
    let threshold = 1.0 / f64::from(n);
    for l in 1..=l_cap {
        let prefix = theorem2_sequence(n, l, 0, 0)?;
        let p = estimate_no_transmit_probability(&mut make_algo, &prefix, trials, seed)?;
        if p < threshold {
            return Ok(Some(l));
        }
    }
    Ok(None)
}
