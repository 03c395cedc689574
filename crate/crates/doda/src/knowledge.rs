//! Knowledge functions granted to nodes: meet times with the sink, per-node
//! futures, the underlying graph, or the full sequence.
//!
//! Decision rules declare what they need ([`Requirements`]); the engine
//! builds a [`Knowledge`] bundle from the sequence and serves only what was
//! declared.

use std::collections::BTreeSet;
use std::ops::BitOr;

use crate::engine::{Interaction, InteractionSequence, NodeId, SINK};
use crate::time::Time;

/// A set of knowledge requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Requirements(u8);

impl Requirements {
    pub const NONE: Requirements = Requirements(0);
    pub const MEET_TIME: Requirements = Requirements(1 << 0);
    pub const UNDERLYING_GRAPH: Requirements = Requirements(1 << 1);
    pub const FUTURE: Requirements = Requirements(1 << 2);
    pub const FULL_SEQUENCE: Requirements = Requirements(1 << 3);

    pub fn contains(self, other: Requirements) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl BitOr for Requirements {
    type Output = Requirements;
    fn bitor(self, rhs: Requirements) -> Requirements {
        Requirements(self.0 | rhs.0)
    }
}

/// The time of the next interaction of `u` with the sink strictly after `t`,
/// infinite if none exists in the sequence. For the sink itself this is the
/// identity.
pub fn meet_time(seq: &InteractionSequence, u: NodeId, t: usize) -> Time {
    if u.is_sink() {
        return Time::Finite(t);
    }
    for t_next in (t + 1)..seq.len() {
        let inter = seq.get(t_next).unwrap();
        if inter.involves_sink() && inter.contains(u) {
            return Time::Finite(t_next);
        }
    }
    Time::Infinite
}

/// All interactions involving `u`, with their times of occurrence.
pub fn future_of(seq: &InteractionSequence, u: NodeId) -> Vec<(usize, Interaction)> {
    seq.iter()
        .enumerate()
        .filter(|(_, inter)| inter.contains(u))
        .collect()
}

/// The set of distinct pairs appearing in the sequence.
pub fn underlying_graph(seq: &InteractionSequence) -> BTreeSet<Interaction> {
    seq.iter().collect()
}

/// True iff the edge set is a tree over `[0, n)`: connected with exactly
/// `n - 1` edges.
pub fn is_tree(edges: &BTreeSet<Interaction>, n: u32) -> bool {
    edges.len() == (n as usize).saturating_sub(1) && is_connected(edges, n)
}

/// True iff every node is reachable from the sink through the edge set.
pub fn is_connected(edges: &BTreeSet<Interaction>, n: u32) -> bool {
    let adj = adjacency(edges, n);
    let mut seen = vec![false; n as usize];
    let mut stack = vec![SINK];
    seen[SINK.index()] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u.index()] {
            if !seen[v.index()] {
                seen[v.index()] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n as usize
}

/// Ascending-id adjacency lists for an edge set.
pub(crate) fn adjacency(edges: &BTreeSet<Interaction>, n: u32) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n as usize];
    for e in edges {
        adj[e.lo().index()].push(e.hi());
        adj[e.hi().index()].push(e.lo());
    }
    for list in &mut adj {
        list.sort();
    }
    adj
}

/// Per-node sink-meeting times, precomputed in one pass so `meet_time`
/// queries cost a binary search instead of a forward scan.
#[derive(Debug, Clone)]
struct MeetTimeTable {
    meetings: Vec<Vec<usize>>,
}

impl MeetTimeTable {
    fn build(seq: &InteractionSequence) -> Self {
        let mut meetings = vec![Vec::new(); seq.n() as usize];
        for (t, inter) in seq.iter().enumerate() {
            if inter.involves_sink() {
                meetings[inter.hi().index()].push(t);
            }
        }
        MeetTimeTable { meetings }
    }

    fn next_after(&self, u: NodeId, t: usize) -> Time {
        let list = &self.meetings[u.index()];
        let pos = list.partition_point(|&m| m <= t);
        match list.get(pos) {
            Some(&m) => Time::Finite(m),
            None => Time::Infinite,
        }
    }
}

/// The knowledge bundle handed to a decision rule. Accessors panic when the
/// rule did not declare the corresponding requirement; that is a programming
/// error in the algorithm, not a runtime condition.
pub struct Knowledge<'a> {
    n: u32,
    granted: Requirements,
    seq: Option<&'a InteractionSequence>,
    meet: Option<MeetTimeTable>,
    graph: Option<BTreeSet<Interaction>>,
}

impl<'a> Knowledge<'a> {
    /// Builds the bundle a fixed sequence can serve (any requirement).
    pub fn for_sequence(seq: &'a InteractionSequence, granted: Requirements) -> Self {
        let meet = granted
            .contains(Requirements::MEET_TIME)
            .then(|| MeetTimeTable::build(seq));
        let graph = granted
            .contains(Requirements::UNDERLYING_GRAPH)
            .then(|| underlying_graph(seq));
        Knowledge { n: seq.n(), granted, seq: Some(seq), meet, graph }
    }

    /// A bundle backed by a declared underlying graph only (adaptive
    /// adversaries whose realized sequences always draw from a known edge
    /// set).
    pub fn for_declared_graph(n: u32, graph: Option<BTreeSet<Interaction>>) -> Self {
        let granted = match graph {
            Some(_) => Requirements::UNDERLYING_GRAPH,
            None => Requirements::NONE,
        };
        Knowledge { n, granted, seq: None, meet: None, graph }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn granted(&self) -> Requirements {
        self.granted
    }

    fn check(&self, req: Requirements, what: &str) {
        assert!(
            self.granted.contains(req),
            "decision rule read undeclared knowledge: {what}"
        );
    }

    /// `u.meetTime(t)`: next interaction with the sink strictly after `t`;
    /// identity for the sink; infinite past the end of the sequence.
    pub fn meet_time(&self, u: NodeId, t: usize) -> Time {
        self.check(Requirements::MEET_TIME, "meetTime");
        if u.is_sink() {
            return Time::Finite(t);
        }
        self.meet.as_ref().expect("meet table built").next_after(u, t)
    }

    pub fn underlying_graph(&self) -> &BTreeSet<Interaction> {
        self.check(Requirements::UNDERLYING_GRAPH, "underlying graph");
        self.graph.as_ref().expect("graph built")
    }

    pub fn future_of(&self, u: NodeId) -> Vec<(usize, Interaction)> {
        self.check(Requirements::FUTURE, "future");
        future_of(self.seq.expect("sequence-backed knowledge"), u)
    }

    pub fn full_sequence(&self) -> &InteractionSequence {
        self.check(Requirements::FULL_SEQUENCE, "full sequence");
        self.seq.expect("sequence-backed knowledge")
    }
}
