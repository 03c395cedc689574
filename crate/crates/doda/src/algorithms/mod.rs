//! DODA decision rules, pluggable into the engine.

mod basic;
mod future;
mod offline;
mod tree;

use std::any::Any;

use crate::engine::{Decision, InteractionView, NodeId};
use crate::error::{Error, Result};
use crate::knowledge::{Knowledge, Requirements};

pub use basic::{CoinFlipWaiting, Gathering, NeverTransmit, Waiting, WaitingGreedy};
pub use future::FullFuture;
pub use offline::Offline;
pub use tree::{SpanningTree, TreeAggregate};

/// A decision rule together with its declared knowledge requirements.
///
/// The engine calls [`Algorithm::decide`] for every interaction, in index
/// order, with the interacting nodes ordered by ascending identifier. Rules
/// run even when one party already transmitted (control information may still
/// be exchanged); the engine ignores the output in that case.
pub trait Algorithm {
    fn name(&self) -> &str;

    /// Knowledge the rule is allowed to read.
    fn requirements(&self) -> Requirements {
        Requirements::NONE
    }

    /// Oblivious rules never write node memory; the engine hands them a
    /// sealed store.
    fn oblivious(&self) -> bool {
        true
    }

    /// Called once at the start of a run, before any interaction. Non-trivial
    /// algorithms use it to derive shared structures from their knowledge
    /// (spanning trees, offline schedules) and to seed node memories.
    fn begin_run(&mut self, knowledge: &Knowledge<'_>, memories: &mut NodeMemories) -> Result<()> {
        let _ = (knowledge, memories);
        Ok(())
    }

    fn decide(
        &mut self,
        view: &InteractionView,
        memories: MemoryPair<'_>,
        knowledge: &Knowledge<'_>,
    ) -> Decision;
}

/// Opaque per-node storage, owned by the engine and handed to the rule only
/// for the two interacting nodes.
#[derive(Default)]
pub struct NodeMemory {
    slot: Option<Box<dyn Any + Send>>,
    sealed: bool,
}

impl NodeMemory {
    fn sealed() -> Self {
        NodeMemory { slot: None, sealed: true }
    }

    pub fn get<T: Any>(&self) -> Option<&T> {
        self.slot.as_ref().and_then(|b| b.downcast_ref())
    }

    pub fn get_mut<T: Any>(&mut self) -> Option<&mut T> {
        self.assert_writable();
        self.slot.as_mut().and_then(|b| b.downcast_mut())
    }

    pub fn get_or_insert_with<T: Any + Send>(&mut self, init: impl FnOnce() -> T) -> &mut T {
        self.assert_writable();
        if self.slot.as_ref().is_none_or(|b| !b.is::<T>()) {
            self.slot = Some(Box::new(init()));
        }
        self.slot
            .as_mut()
            .and_then(|b| b.downcast_mut())
            .expect("slot was just set")
    }

    fn assert_writable(&self) {
        assert!(
            !self.sealed,
            "oblivious decision rule attempted to write node memory"
        );
    }
}

/// Memories of the two interacting nodes, ordered like the view (`u1` first).
pub struct MemoryPair<'a> {
    pub u1: &'a mut NodeMemory,
    pub u2: &'a mut NodeMemory,
}

/// All per-node memories for one run.
pub struct NodeMemories {
    mems: Vec<NodeMemory>,
}

impl NodeMemories {
    /// Writable stores for a memory-using algorithm, sealed ones otherwise.
    pub fn new(n: u32, writable: bool) -> Self {
        let mems = (0..n)
            .map(|_| if writable { NodeMemory::default() } else { NodeMemory::sealed() })
            .collect();
        NodeMemories { mems }
    }

    pub fn node(&mut self, u: NodeId) -> &mut NodeMemory {
        &mut self.mems[u.index()]
    }

    /// Split borrow for an interaction; requires `u1 < u2`.
    pub fn pair(&mut self, u1: NodeId, u2: NodeId) -> MemoryPair<'_> {
        debug_assert!(u1 < u2);
        let (left, right) = self.mems.split_at_mut(u2.index());
        MemoryPair { u1: &mut left[u1.index()], u2: &mut right[0] }
    }
}

/// Parameters consumed by the registry when instantiating an algorithm.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlgoParams {
    /// Waiting Greedy threshold.
    pub tau: Option<usize>,
}

/// Names accepted by [`build`].
pub const REGISTRY: &[&str] = &[
    "waiting",
    "gathering",
    "waiting-greedy",
    "tree",
    "spanning-tree",
    "full-future",
    "offline",
];

/// Instantiates a registered algorithm by name.
pub fn build(name: &str, params: &AlgoParams) -> Result<Box<dyn Algorithm>> {
    match name {
        "waiting" => Ok(Box::new(Waiting)),
        "gathering" => Ok(Box::new(Gathering)),
        "waiting-greedy" => {
            let tau = params.tau.ok_or_else(|| {
                Error::Config("waiting-greedy requires a tau parameter".into())
            })?;
            Ok(Box::new(WaitingGreedy::new(tau)))
        }
        "tree" => Ok(Box::new(TreeAggregate::new())),
        "spanning-tree" => Ok(Box::new(SpanningTree::new())),
        "full-future" => Ok(Box::new(FullFuture::new())),
        "offline" => Ok(Box::new(Offline::new())),
        other => Err(Error::Config(format!(
            "unknown algorithm `{other}` (known: {})",
            REGISTRY.join(", ")
        ))),
    }
}
