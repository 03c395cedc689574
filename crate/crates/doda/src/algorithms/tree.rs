//! Convergecast along a tree: wait for all children, then transmit to the
//! parent at the first opportunity.
//!
//! `tree` requires the underlying graph to *be* a tree; `spanning-tree`
//! works on any connected underlying graph by having every node compute the
//! same BFS tree rooted at the sink (neighbors explored in ascending id
//! order) and ignoring non-tree edges.

use std::collections::HashSet;

use crate::engine::{Decision, InteractionView, NodeId, SINK};
use crate::error::{Error, Result};
use crate::knowledge::{adjacency, is_connected, is_tree, Knowledge, Requirements};

use super::{Algorithm, MemoryPair, NodeMemories};

/// Parent pointers and child counts of a rooted tree.
struct RootedTree {
    parent: Vec<Option<NodeId>>,
    child_count: Vec<usize>,
}

impl RootedTree {
    /// BFS from the sink over the edge set, ascending-id neighbor order.
    /// Every reachable node gets a parent; callers check connectivity first.
    fn bfs_from_sink(edges: &std::collections::BTreeSet<crate::engine::Interaction>, n: u32) -> Self {
        let adj = adjacency(edges, n);
        let mut parent = vec![None; n as usize];
        let mut child_count = vec![0usize; n as usize];
        let mut seen = vec![false; n as usize];
        let mut queue = std::collections::VecDeque::new();
        seen[SINK.index()] = true;
        queue.push_back(SINK);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u.index()] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    parent[v.index()] = Some(u);
                    child_count[u.index()] += 1;
                    queue.push_back(v);
                }
            }
        }
        RootedTree { parent, child_count }
    }

    /// If the interaction is a tree edge, returns `(child, parent)`.
    fn child_parent(&self, v: &InteractionView) -> Option<(NodeId, NodeId)> {
        if self.parent[v.u1.index()] == Some(v.u2) {
            Some((v.u1, v.u2))
        } else if self.parent[v.u2.index()] == Some(v.u1) {
            Some((v.u2, v.u1))
        } else {
            None
        }
    }
}

/// Children a node has already received from.
#[derive(Default)]
struct ReceivedSet {
    from: HashSet<NodeId>,
}

fn tree_decide(tree: &RootedTree, v: &InteractionView, mems: MemoryPair<'_>) -> Decision {
    let Some((child, parent)) = tree.child_parent(v) else {
        return Decision::Abstain;
    };
    if !(v.u1_owns && v.u2_owns) {
        // No transmission can apply; also keeps the received-sets in sync
        // with what actually happened.
        return Decision::Abstain;
    }
    let (child_mem, parent_mem) =
        if child == v.u1 { (mems.u1, mems.u2) } else { (mems.u2, mems.u1) };
    let received = child_mem.get::<ReceivedSet>().map_or(0, |r| r.from.len());
    if received == tree.child_count[child.index()] {
        parent_mem.get_or_insert_with(ReceivedSet::default).from.insert(child);
        Decision::Receiver(parent)
    } else {
        Decision::Abstain
    }
}

/// Convergecast on a tree underlying graph (optimal there).
pub struct TreeAggregate {
    tree: Option<RootedTree>,
}

impl TreeAggregate {
    pub fn new() -> Self {
        TreeAggregate { tree: None }
    }
}

impl Default for TreeAggregate {
    fn default() -> Self {
        Self::new()
    }
}

impl Algorithm for TreeAggregate {
    fn name(&self) -> &str {
        "tree"
    }

    fn requirements(&self) -> Requirements {
        Requirements::UNDERLYING_GRAPH
    }

    fn oblivious(&self) -> bool {
        false
    }

    fn begin_run(&mut self, knowledge: &Knowledge<'_>, _memories: &mut NodeMemories) -> Result<()> {
        let edges = knowledge.underlying_graph();
        if !is_tree(edges, knowledge.n()) {
            return Err(Error::Config("underlying graph is not a tree".into()));
        }
        self.tree = Some(RootedTree::bfs_from_sink(edges, knowledge.n()));
        Ok(())
    }

    fn decide(&mut self, v: &InteractionView, mems: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        tree_decide(self.tree.as_ref().expect("begin_run ran"), v, mems)
    }
}

/// Convergecast along a BFS spanning tree of a connected underlying graph.
pub struct SpanningTree {
    tree: Option<RootedTree>,
}

impl SpanningTree {
    pub fn new() -> Self {
        SpanningTree { tree: None }
    }
}

impl Default for SpanningTree {
    fn default() -> Self {
        Self::new()
    }
}

impl Algorithm for SpanningTree {
    fn name(&self) -> &str {
        "spanning-tree"
    }

    fn requirements(&self) -> Requirements {
        Requirements::UNDERLYING_GRAPH
    }

    fn oblivious(&self) -> bool {
        false
    }

    fn begin_run(&mut self, knowledge: &Knowledge<'_>, _memories: &mut NodeMemories) -> Result<()> {
        let edges = knowledge.underlying_graph();
        if !is_connected(edges, knowledge.n()) {
            return Err(Error::Config("underlying graph is disconnected".into()));
        }
        self.tree = Some(RootedTree::bfs_from_sink(edges, knowledge.n()));
        Ok(())
    }

    fn decide(&mut self, v: &InteractionView, mems: MemoryPair<'_>, _k: &Knowledge<'_>) -> Decision {
        tree_decide(self.tree.as_ref().expect("begin_run ran"), v, mems)
    }
}
