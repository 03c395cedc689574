//! The future-knowledge algorithm: every node gossips its labeled future at
//! each interaction; once a node knows all n futures it can reconstruct the
//! whole sequence, deterministically replay everyone's gossip to find the
//! common time T* by which all nodes are aware, and from then on follow the
//! offline convergecast schedule for the window starting at T* + 1.
//!
//! No data is transmitted before that schedule begins; all schedule events
//! lie past T*, when every node has computed the same plan.

use std::collections::HashMap;
use std::sync::Arc;

use crate::engine::{Decision, Interaction, InteractionSequence, InteractionView, NodeId};
use crate::error::Result;
use crate::knowledge::{Knowledge, Requirements};
use crate::oracle::offline_schedule;
use crate::time::Time;

use super::{Algorithm, MemoryPair, NodeMemories, NodeMemory};

/// One node's labeled future: its interactions with their times.
type NodeFuture = Arc<Vec<(usize, Interaction)>>;

/// What a ready node derives from the full sequence.
struct Plan {
    schedule: Option<HashMap<usize, (NodeId, NodeId)>>,
}

/// Per-node memory: the futures learned so far and, once ready, the plan.
struct GossipMem {
    known: Vec<Option<NodeFuture>>,
    known_count: usize,
    plan: Option<Arc<Plan>>,
}

impl GossipMem {
    fn new(n: usize) -> Self {
        GossipMem { known: vec![None; n], known_count: 0, plan: None }
    }

    fn learn(&mut self, origin: usize, future: &NodeFuture) {
        if self.known[origin].is_none() {
            self.known[origin] = Some(Arc::clone(future));
            self.known_count += 1;
        }
    }

    fn complete(&self) -> bool {
        self.known_count == self.known.len()
    }
}

pub struct FullFuture {
    n: u32,
}

impl FullFuture {
    pub fn new() -> Self {
        FullFuture { n: 0 }
    }
}

impl Default for FullFuture {
    fn default() -> Self {
        Self::new()
    }
}

/// Rebuilds the whole sequence from a complete set of labeled futures (their
/// union covers every index exactly).
fn reconstruct(n: u32, known: &[Option<NodeFuture>]) -> InteractionSequence {
    let mut by_index: HashMap<usize, Interaction> = HashMap::new();
    for future in known.iter().flatten() {
        for &(t, inter) in future.iter() {
            by_index.insert(t, inter);
        }
    }
    let len = by_index.len();
    let mut interactions = Vec::with_capacity(len);
    for t in 0..len {
        interactions.push(*by_index.get(&t).expect("futures cover every index"));
    }
    InteractionSequence::new(n, interactions).expect("reconstructed sequence is valid")
}

/// Replays the gossip process over the sequence: the first time each node
/// knows all futures, assuming both parties of every interaction merge their
/// tables.
fn gossip_ready_times(seq: &InteractionSequence) -> Vec<Time> {
    let n = seq.n() as usize;
    let mut knows: Vec<Vec<bool>> = (0..n)
        .map(|u| (0..n).map(|v| u == v).collect())
        .collect();
    let mut counts = vec![1usize; n];
    let mut ready = vec![Time::Infinite; n];
    if n == 1 {
        ready[0] = Time::Finite(0);
    }
    for (t, inter) in seq.iter().enumerate() {
        let (a, b) = (inter.lo().index(), inter.hi().index());
        let (low, high) = (a.min(b), a.max(b));
        let (left, right) = knows.split_at_mut(high);
        let (ka, kb) = (&mut left[low], &mut right[0]);
        for v in 0..n {
            match (ka[v], kb[v]) {
                (true, false) => {
                    kb[v] = true;
                    counts[high] += 1;
                }
                (false, true) => {
                    ka[v] = true;
                    counts[low] += 1;
                }
                _ => {}
            }
        }
        for u in [low, high] {
            if counts[u] == n && ready[u].is_infinite() {
                ready[u] = Time::Finite(t);
            }
        }
    }
    ready
}

/// Computes the plan a node forms at readiness: ready times of all nodes via
/// gossip replay, T* their maximum, and the offline schedule starting after
/// T*. A plan with no schedule (unreachable data or T* infinite) abstains
/// forever.
fn make_plan(n: u32, known: &[Option<NodeFuture>]) -> Plan {
    let seq = reconstruct(n, known);
    let ready = gossip_ready_times(&seq);
    let t_star = ready.iter().copied().max().unwrap_or(Time::Infinite);
    let schedule = match t_star {
        Time::Finite(t_star) => offline_schedule(&seq, t_star + 1).map(|events| {
            events.into_iter().map(|e| (e.time, (e.sender, e.receiver))).collect()
        }),
        Time::Infinite => None,
    };
    Plan { schedule }
}

fn mem_of(mem: &mut NodeMemory, n: usize) -> &mut GossipMem {
    mem.get_or_insert_with(|| GossipMem::new(n))
}

impl Algorithm for FullFuture {
    fn name(&self) -> &str {
        "full-future"
    }

    fn requirements(&self) -> Requirements {
        Requirements::FUTURE
    }

    fn oblivious(&self) -> bool {
        false
    }

    fn begin_run(&mut self, knowledge: &Knowledge<'_>, memories: &mut NodeMemories) -> Result<()> {
        self.n = knowledge.n();
        for u in 0..self.n {
            let u = NodeId(u);
            let future: NodeFuture = Arc::new(knowledge.future_of(u));
            mem_of(memories.node(u), self.n as usize).learn(u.index(), &future);
        }
        Ok(())
    }

    fn decide(&mut self, v: &InteractionView, mems: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        let n = self.n as usize;
        let m1 = mem_of(mems.u1, n);
        // Exchange tables (control plane; happens at every interaction).
        let snapshot1: Vec<Option<NodeFuture>> = m1.known.clone();
        let m2 = mem_of(mems.u2, n);
        let snapshot2: Vec<Option<NodeFuture>> = m2.known.clone();
        for (origin, future) in snapshot1.iter().enumerate() {
            if let Some(f) = future {
                m2.learn(origin, f);
            }
        }
        if m2.complete() && m2.plan.is_none() {
            m2.plan = Some(Arc::new(make_plan(self.n, &m2.known)));
        }
        let plan2 = m2.plan.clone();
        let m1 = mem_of(mems.u1, n);
        for (origin, future) in snapshot2.iter().enumerate() {
            if let Some(f) = future {
                m1.learn(origin, f);
            }
        }
        if m1.complete() && m1.plan.is_none() {
            m1.plan = Some(Arc::new(make_plan(self.n, &m1.known)));
        }

        let plan = m1.plan.as_ref().or(plan2.as_ref());
        match plan.and_then(|p| p.schedule.as_ref()).and_then(|s| s.get(&v.t)) {
            Some(&(_, receiver)) => Decision::Receiver(receiver),
            None => Decision::Abstain,
        }
    }
}
