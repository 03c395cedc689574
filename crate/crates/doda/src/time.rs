//! Time indices that may be infinite.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A time index (the position of an interaction in the sequence) or the
/// infinity sentinel used for "never" — a meet time that does not exist, a
/// non-terminating run, an infeasible convergecast.
///
/// The derived ordering puts every finite value below `Infinite`, and
/// `Infinite` equal to itself, which is exactly the comparison semantics the
/// Waiting Greedy thresholds and the cost ladder rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Time {
    Finite(usize),
    Infinite,
}

impl Time {
    pub fn is_finite(self) -> bool {
        matches!(self, Time::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Time::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<usize> {
        match self {
            Time::Finite(t) => Some(t),
            Time::Infinite => None,
        }
    }

    /// Unwrap a value known to be finite.
    ///
    /// Panics when the value is `Infinite`; callers use it only after an
    /// explicit feasibility check.
    pub fn expect_finite(self, what: &str) -> usize {
        match self {
            Time::Finite(t) => t,
            Time::Infinite => panic!("{what} is infinite"),
        }
    }
}

impl From<usize> for Time {
    fn from(t: usize) -> Self {
        Time::Finite(t)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => write!(f, "{t}"),
            Time::Infinite => write!(f, "inf"),
        }
    }
}

// JSON: finite values are plain integers, infinity is null.
impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Time::Finite(t) => serializer.serialize_u64(*t as u64),
            Time::Infinite => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Option::<u64>::deserialize(deserializer)?;
        match v {
            Some(t) => usize::try_from(t)
                .map(Time::Finite)
                .map_err(|_| de::Error::custom("time index out of range")),
            None => Ok(Time::Infinite),
        }
    }
}
