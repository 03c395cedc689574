//! Nodes, interactions and interaction sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node identifier in `[0, n)`. The sink is the distinguished id 0.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

/// The sink node. File formats and generators fix it to id 0; decision rules
/// never rely on the numeric value, they receive an `is_sink` flag instead.
pub const SINK: NodeId = NodeId(0);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_sink(self) -> bool {
        self == SINK
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An unordered pair of distinct nodes, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interaction {
    lo: NodeId,
    hi: NodeId,
}

impl Interaction {
    /// Canonicalizes the pair; fails on self-loops.
    pub fn new(a: NodeId, b: NodeId) -> Result<Self> {
        if a == b {
            return Err(Error::Config(format!("self-loop interaction ({a}, {b})")));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Ok(Interaction { lo, hi })
    }

    /// Shorthand used pervasively in tests and generators.
    pub fn of(a: u32, b: u32) -> Self {
        Interaction::new(NodeId(a), NodeId(b)).expect("distinct node ids")
    }

    /// The smaller-id endpoint (`u1` when handed to a decision rule).
    pub fn lo(self) -> NodeId {
        self.lo
    }

    /// The larger-id endpoint (`u2`).
    pub fn hi(self) -> NodeId {
        self.hi
    }

    pub fn contains(self, u: NodeId) -> bool {
        self.lo == u || self.hi == u
    }

    /// The endpoint that is not `u`.
    pub fn other(self, u: NodeId) -> NodeId {
        debug_assert!(self.contains(u));
        if self.lo == u {
            self.hi
        } else {
            self.lo
        }
    }

    pub fn involves_sink(self) -> bool {
        self.lo.is_sink()
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

/// An ordered, materialized sequence of interactions over `n` nodes. The
/// index of an element is its time of occurrence.
///
/// `truncated` marks sequences that are finite prefixes of conceptually
/// longer ones (seeded random streams, recorded adversary runs). The cost
/// oracle uses it to distinguish a genuine "never" from "not within the
/// evidence at hand".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionSequence {
    n: u32,
    interactions: Vec<Interaction>,
    truncated: bool,
}

impl InteractionSequence {
    /// A complete finite sequence.
    pub fn new(n: u32, interactions: Vec<Interaction>) -> Result<Self> {
        Self::build(n, interactions, false)
    }

    /// A finite prefix of a longer stream.
    pub fn new_truncated(n: u32, interactions: Vec<Interaction>) -> Result<Self> {
        Self::build(n, interactions, true)
    }

    fn build(n: u32, interactions: Vec<Interaction>, truncated: bool) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("node count {n} < 3")));
        }
        for (t, inter) in interactions.iter().enumerate() {
            if inter.hi().0 >= n {
                return Err(Error::Config(format!(
                    "interaction {inter} at index {t} references a node outside [0, {n})"
                )));
            }
        }
        Ok(InteractionSequence { n, interactions, truncated })
    }

    /// Convenience constructor from raw id pairs.
    pub fn from_pairs(n: u32, pairs: &[(u32, u32)]) -> Result<Self> {
        let interactions = pairs
            .iter()
            .map(|&(a, b)| Interaction::new(NodeId(a), NodeId(b)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, interactions)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn get(&self, t: usize) -> Option<Interaction> {
        self.interactions.get(t).copied()
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn iter(&self) -> impl Iterator<Item = Interaction> + '_ {
        self.interactions.iter().copied()
    }

    /// The sub-window `[from, to]` (inclusive) in reversed order, as a
    /// sequence of its own. Used by the convergecast/broadcast duality.
    pub fn reversed_window(&self, from: usize, to: usize) -> Result<Self> {
        if from > to || to >= self.len() {
            return Err(Error::Config(format!(
                "window [{from}, {to}] out of bounds for length {}",
                self.len()
            )));
        }
        let interactions = self.interactions[from..=to].iter().rev().copied().collect();
        Self::build(self.n, interactions, false)
    }

    /// Parses the sequence file format: a header `n <N> sink 0`, then one
    /// interaction `u v` per line, in time order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        // The header must be line 1; a blank leading line is malformed.
        let (header_no, header) = match lines.next() {
            Some((i, l)) if l.trim().is_empty() => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected header `n <N> sink 0`".into(),
                });
            }
            Some((i, l)) => (i + 1, l),
            None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
        };
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let n: u32 = match tokens.as_slice() {
            ["n", n_str, "sink", "0"] => n_str.parse().map_err(|_| Error::Parse {
                line: header_no,
                msg: format!("invalid node count `{n_str}`"),
            })?,
            ["n", _, "sink", other] => {
                return Err(Error::Parse {
                    line: header_no,
                    msg: format!("sink must be 0, got `{other}`"),
                });
            }
            _ => {
                return Err(Error::Parse {
                    line: header_no,
                    msg: format!("expected header `n <N> sink 0`, got `{header}`"),
                });
            }
        };
        if n < 3 {
            return Err(Error::Parse {
                line: header_no,
                msg: format!("node count {n} < 3"),
            });
        }

        let mut interactions = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `u v`, got `{line}`"),
                    });
                }
            };
            let parse_id = |s: &str| -> Result<NodeId> {
                let id: u32 = s.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid node id `{s}`"),
                })?;
                if id >= n {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("node id {id} out of range [0, {n})"),
                    });
                }
                Ok(NodeId(id))
            };
            let (a, b) = (parse_id(a)?, parse_id(b)?);
            let inter = Interaction::new(a, b).map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("self-loop pair {a} {a}"),
            })?;
            interactions.push(inter);
        }
        Self::new(n, interactions)
    }

    /// Renders the canonical sequence file (inverse of [`Self::parse`]).
    pub fn to_file_string(&self) -> String {
        let mut out = format!("n {} sink 0\n", self.n);
        for inter in &self.interactions {
            out.push_str(&format!("{} {}\n", inter.lo(), inter.hi()));
        }
        out
    }
}
