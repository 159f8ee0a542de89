//! Result types shared by the bound computations and the oracle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::NodeId;

/// Probing mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "CAP")]
    Cap,
    #[serde(rename = "CSP")]
    Csp,
    #[serde(rename = "UP")]
    Up,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] = [MechanismKind::Cap, MechanismKind::Csp, MechanismKind::Up];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismKind::Cap => "CAP",
            MechanismKind::Csp => "CSP",
            MechanismKind::Up => "UP",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CAP" => Ok(MechanismKind::Cap),
            "CSP" => Ok(MechanismKind::Csp),
            "UP" => Ok(MechanismKind::Up),
            other => Err(Error::Config(format!("unknown mechanism `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Applicability {
    /// The bound's range condition holds and the interval is guaranteed.
    InRange,
    /// Outside the bound's range; the interval is reported but weaker.
    RangeExceeded,
    Exact,
}

impl Applicability {
    pub fn as_str(self) -> &'static str {
        match self {
            Applicability::InRange => "in-range",
            Applicability::RangeExceeded => "range-exceeded",
            Applicability::Exact => "exact",
        }
    }
}

impl fmt::Display for Applicability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bounds on the maximum identifiability Ω(v) of a single node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaInterval {
    pub lower: usize,
    pub upper: usize,
    pub mechanism: MechanismKind,
    pub applicability: Applicability,
}

impl OmegaInterval {
    pub fn exact(value: usize, mechanism: MechanismKind) -> Self {
        OmegaInterval {
            lower: value,
            upper: value,
            mechanism,
            applicability: Applicability::Exact,
        }
    }

    pub fn range(lower: usize, upper: usize, mechanism: MechanismKind, applicability: Applicability) -> Self {
        debug_assert!(lower <= upper);
        OmegaInterval {
            lower,
            upper,
            mechanism,
            applicability,
        }
    }

    pub fn contains(&self, omega: usize) -> bool {
        self.lower <= omega && omega <= self.upper
    }
}

/// Outcome of a sufficient/necessary condition pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// The sufficient condition holds: the set is identifiable.
    Sufficient,
    /// The necessary condition holds but the sufficient one does not.
    Inconclusive,
    /// The necessary condition fails: the set is not identifiable.
    No,
}

/// Inner and outer bounds on the maximum k-identifiable set S*(k).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentSetBounds {
    pub k: usize,
    pub inner: BTreeSet<NodeId>,
    pub outer: BTreeSet<NodeId>,
    /// Known exact set, when the bound is tight or an oracle filled it in.
    pub exact: Option<BTreeSet<NodeId>>,
}

impl IdentSetBounds {
    pub fn exact(k: usize, set: BTreeSet<NodeId>) -> Self {
        IdentSetBounds {
            k,
            inner: set.clone(),
            outer: set.clone(),
            exact: Some(set),
        }
    }

    /// Whether `candidate` lies between the inner and outer bound.
    pub fn brackets(&self, candidate: &BTreeSet<NodeId>) -> bool {
        self.inner.is_subset(candidate) && candidate.is_subset(&self.outer)
    }
}
