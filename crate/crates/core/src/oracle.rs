//! Definition-level ground truth for small instances.
//!
//! Two failure sets are indistinguishable when every available measurement
//! has the same state under both. Rather than comparing pairs, each failure
//! set is mapped to its observation (the set of failed paths for CSP/UP; the
//! set of nodes still reachable from a monitor for CAP) and sets with equal
//! observations are grouped. For CAP the reachable set determines which
//! monitor walks survive, so it is a faithful observation without enumerating
//! walks.
//!
//! Node sets are `u64` masks over node ids, which caps instances at 64
//! nodes; the configured budget is normally far lower.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::bounds::MechanismKind;
use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, Topology};
use crate::up::PathSet;

pub const DEFAULT_MAX_NODES: usize = 12;
pub const DEFAULT_MAX_PATHS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest |V| the oracle accepts.
    pub max_nodes: usize,
    /// Largest number of simple paths enumerated for CSP.
    pub max_paths: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: DEFAULT_MAX_NODES,
            max_paths: DEFAULT_MAX_PATHS,
        }
    }
}

impl OracleBudget {
    pub fn with_max_nodes(max_nodes: usize) -> Self {
        OracleBudget {
            max_nodes,
            ..Self::default()
        }
    }

    pub fn admits(&self, g: &Topology) -> bool {
        g.node_count() <= self.max_nodes.min(64)
    }
}

/// Probing mechanism together with whatever it needs.
#[derive(Debug, Clone, Copy)]
pub enum Probing<'a> {
    Cap,
    Csp { monitor_transit: bool },
    Up(&'a PathSet),
}

impl Probing<'_> {
    /// CSP with monitors allowed in the interior of paths.
    pub const CSP: Probing<'static> = Probing::Csp { monitor_transit: true };

    pub fn kind(&self) -> MechanismKind {
        match self {
            Probing::Cap => MechanismKind::Cap,
            Probing::Csp { .. } => MechanismKind::Csp,
            Probing::Up(_) => MechanismKind::Up,
        }
    }
}

/// A set of simultaneously failed non-monitors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FailureSet {
    members: BTreeSet<NodeId>,
}

impl FailureSet {
    pub fn new(g: &Topology, members: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        members.iter().try_for_each(|&v| g.check_non_monitor(v))?;
        Ok(FailureSet { members })
    }

    pub fn members(&self) -> &BTreeSet<NodeId> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn from_mask(mask: u64) -> Self {
        FailureSet {
            members: (0..64).filter(|v| mask >> v & 1 == 1).collect(),
        }
    }

    fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, &v| m | 1 << v)
    }
}

/// Visits every simple path between distinct monitors once (the endpoint
/// with the smaller id first). Interior monitors are allowed iff
/// `monitor_transit`. Stops with an error after `max_paths` paths.
fn for_each_simple_path(
    g: &Topology,
    monitor_transit: bool,
    max_paths: usize,
    mut visit: impl FnMut(&[NodeId]),
) -> Result<()> {
    struct Walk<'g, F> {
        g: &'g Topology,
        transit: bool,
        max_paths: usize,
        emitted: usize,
        path: Vec<NodeId>,
        on_path: Vec<bool>,
        visit: F,
    }

    impl<F: FnMut(&[NodeId])> Walk<'_, F> {
        fn extend(&mut self, u: NodeId) -> Result<()> {
            let start = self.path[0];
            for &w in self.g.neighbors(u) {
                if self.on_path[w] {
                    continue;
                }
                self.path.push(w);
                self.on_path[w] = true;
                let monitor = self.g.is_monitor(w);
                if monitor && w > start {
                    self.emitted += 1;
                    if self.emitted > self.max_paths {
                        return Err(Error::BudgetExceeded(format!(
                            "more than {} simple monitor-to-monitor paths",
                            self.max_paths
                        )));
                    }
                    (self.visit)(&self.path);
                }
                if !monitor || self.transit {
                    self.extend(w)?;
                }
                self.on_path[w] = false;
                self.path.pop();
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        g,
        transit: monitor_transit,
        max_paths,
        emitted: 0,
        path: Vec::new(),
        on_path: vec![false; g.node_count()],
        visit: &mut visit,
    };
    for s in g.monitors() {
        walk.path.push(s);
        walk.on_path[s] = true;
        walk.extend(s)?;
        walk.on_path[s] = false;
        walk.path.pop();
    }
    Ok(())
}

/// All simple monitor-to-monitor paths, deduplicated up to reversal and
/// ordered by length then node ids.
pub fn enumerate_simple_paths(g: &Topology, monitor_transit: bool, budget: OracleBudget) -> Result<PathSet> {
    check_size(g, budget)?;
    let mu = g.monitor_count();
    if mu < 2 {
        return Err(Error::TooFewMonitors(mu));
    }
    let mut paths = Vec::new();
    for_each_simple_path(g, monitor_transit, budget.max_paths, |p| paths.push(p.to_vec()))?;
    paths.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    PathSet::new(g, paths)
}

fn check_size(g: &Topology, budget: OracleBudget) -> Result<()> {
    if budget.admits(g) {
        Ok(())
    } else {
        Err(Error::BudgetExceeded(format!(
            "|V| = {} exceeds the oracle limit of {} nodes",
            g.node_count(),
            budget.max_nodes.min(64)
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Observation {
    /// Failed-path indicator words (CSP/UP).
    Paths(Vec<u64>),
    /// Nodes reachable from a monitor (CAP).
    Reach(u64),
}

#[derive(Debug, Clone)]
enum Measurements {
    /// Distinct non-monitor masks of the available paths, excluding paths
    /// that carry no non-monitor (they never fail).
    Paths(Vec<u64>),
    Walks,
}

/// Exact identifiability for one topology and mechanism.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    g: &'a Topology,
    kind: MechanismKind,
    measurements: Measurements,
    non_monitors: Vec<NodeId>,
}

impl<'a> Oracle<'a> {
    pub fn new(g: &'a Topology, probing: Probing<'_>, budget: OracleBudget) -> Result<Self> {
        check_size(g, budget)?;
        let measurements = match probing {
            Probing::Cap => {
                if g.monitor_count() == 0 {
                    return Err(Error::NoMonitors);
                }
                Measurements::Walks
            }
            Probing::Csp { monitor_transit } => {
                let mu = g.monitor_count();
                if mu < 2 {
                    return Err(Error::TooFewMonitors(mu));
                }
                let mut masks = BTreeSet::new();
                for_each_simple_path(g, monitor_transit, budget.max_paths, |p| {
                    masks.insert(non_monitor_mask(g, p));
                })?;
                masks.remove(&0);
                Measurements::Paths(masks.into_iter().collect())
            }
            Probing::Up(paths) => {
                if paths.node_count() != g.node_count() {
                    return Err(Error::InvalidPath("path set was built for a different topology".into()));
                }
                let masks: BTreeSet<u64> = paths
                    .paths()
                    .iter()
                    .map(|p| non_monitor_mask(g, p))
                    .filter(|&m| m != 0)
                    .collect();
                Measurements::Paths(masks.into_iter().collect())
            }
        };
        Ok(Oracle {
            g,
            kind: probing.kind(),
            measurements,
            non_monitors: g.non_monitors(),
        })
    }

    pub fn mechanism(&self) -> MechanismKind {
        self.kind
    }

    pub fn topology(&self) -> &Topology {
        self.g
    }

    fn sigma(&self) -> usize {
        self.non_monitors.len()
    }

    fn observe(&self, failed: u64) -> Observation {
        match &self.measurements {
            Measurements::Paths(masks) => {
                let mut words = vec![0u64; masks.len().div_ceil(64)];
                for (i, &m) in masks.iter().enumerate() {
                    if m & failed != 0 {
                        words[i / 64] |= 1 << (i % 64);
                    }
                }
                Observation::Paths(words)
            }
            Measurements::Walks => Observation::Reach(self.reachable_from_monitors(failed)),
        }
    }

    fn reachable_from_monitors(&self, failed: u64) -> u64 {
        let g = self.g;
        let mut seen = 0u64;
        let mut queue: VecDeque<NodeId> = g.monitors().into();
        for &m in &queue {
            seen |= 1 << m;
        }
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                let bit = 1u64 << w;
                if seen & bit == 0 && failed & bit == 0 {
                    seen |= bit;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Node mask of the subset of non-monitors selected by `bits`.
    fn expand(&self, bits: u64) -> u64 {
        self.non_monitors
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .fold(0, |m, (_, &v)| m | 1 << v)
    }

    /// All failure sets of size at most `k`, as node masks.
    fn failure_sets(&self, k: usize) -> impl Iterator<Item = u64> + '_ {
        let sigma = self.sigma();
        (0..1u64 << sigma)
            .filter(move |b| b.count_ones() as usize <= k)
            .map(|b| self.expand(b))
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        self.g.check_non_monitor(v)
    }

    /// Whether some available measurement traverses `v` and avoids `failed`.
    pub fn witness_exists(&self, v: NodeId, failed: &FailureSet) -> Result<bool> {
        self.check_node(v)?;
        Ok(self.witness(v, failed.mask()))
    }

    fn witness(&self, v: NodeId, failed: u64) -> bool {
        let bit = 1u64 << v;
        if failed & bit != 0 {
            return false;
        }
        match &self.measurements {
            Measurements::Paths(masks) => masks.iter().any(|&m| m & bit != 0 && m & failed == 0),
            Measurements::Walks => self.reachable_from_monitors(failed) & bit != 0,
        }
    }

    pub fn distinguishable(&self, a: &FailureSet, b: &FailureSet) -> bool {
        self.observe(a.mask()) != self.observe(b.mask())
    }

    /// Whether every pair of failure sets of size ≤ k that differ on `set`
    /// is distinguishable.
    pub fn k_identifiable(&self, set: &[NodeId], k: usize) -> Result<bool> {
        Ok(self.confusable_pair(set, k)?.is_none())
    }

    /// Two indistinguishable failure sets of size ≤ k that differ on `set`,
    /// if any exist.
    pub fn confusable_pair(&self, set: &[NodeId], k: usize) -> Result<Option<(FailureSet, FailureSet)>> {
        set.iter().try_for_each(|&v| self.check_node(v))?;
        let s_mask = set.iter().fold(0u64, |m, &v| m | 1 << v);
        let mut classes: HashMap<Observation, u64> = HashMap::new();
        for f in self.failure_sets(k) {
            match classes.entry(self.observe(f)) {
                Entry::Occupied(e) => {
                    if *e.get() & s_mask != f & s_mask {
                        return Ok(Some((FailureSet::from_mask(*e.get()), FailureSet::from_mask(f))));
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(f);
                }
            }
        }
        Ok(None)
    }

    /// Ω(v) for every non-monitor, indexed by node id (`None` for monitors).
    ///
    /// For each observation class, the smallest k at which v becomes
    /// ambiguous is the larger of the smallest member containing v and the
    /// smallest member not containing it.
    pub fn omega_all(&self) -> Vec<Option<usize>> {
        let sigma = self.sigma();
        let mut classes: HashMap<Observation, Vec<u64>> = HashMap::new();
        for f in self.failure_sets(sigma) {
            classes.entry(self.observe(f)).or_default().push(f);
        }
        let mut first_ambiguous = vec![usize::MAX; self.g.node_count()];
        for members in classes.values().filter(|m| m.len() > 1) {
            for &v in &self.non_monitors {
                let bit = 1u64 << v;
                let size = |f: &u64| f.count_ones() as usize;
                let with = members.iter().filter(|&&f| f & bit != 0).map(size).min();
                let without = members.iter().filter(|&&f| f & bit == 0).map(size).min();
                if let (Some(a), Some(b)) = (with, without) {
                    first_ambiguous[v] = first_ambiguous[v].min(a.max(b));
                }
            }
        }
        (0..self.g.node_count())
            .map(|v| {
                (!self.g.is_monitor(v)).then(|| match first_ambiguous[v] {
                    usize::MAX => sigma,
                    k => k - 1,
                })
            })
            .collect()
    }

    /// Largest k ≤ σ for which `{v}` is k-identifiable.
    pub fn omega(&self, v: NodeId) -> Result<usize> {
        self.check_node(v)?;
        let mut k = 0;
        while k < self.sigma() && self.k_identifiable(&[v], k + 1)? {
            k += 1;
        }
        Ok(k)
    }

    /// S*(k): every non-monitor that is k-identifiable on its own.
    pub fn max_identifiable_set(&self, k: usize) -> BTreeSet<NodeId> {
        let omega = self.omega_all();
        self.non_monitors
            .iter()
            .copied()
            .filter(|&v| omega[v].is_some_and(|o| o >= k))
            .collect()
    }

    /// S''(k): non-monitors that keep a witness measurement under every
    /// failure set of size ≤ k that excludes them.
    pub fn witness_inner_set(&self, k: usize) -> BTreeSet<NodeId> {
        let candidates: Vec<u64> = self.failure_sets(k).collect();
        self.non_monitors
            .iter()
            .copied()
            .filter(|&v| {
                candidates
                    .iter()
                    .filter(|&&f| f & 1 << v == 0)
                    .all(|&f| self.witness(v, f))
            })
            .collect()
    }
}

fn non_monitor_mask(g: &Topology, path: &[NodeId]) -> u64 {
    path.iter()
        .filter(|&&v| !g.is_monitor(v))
        .fold(0, |m, &v| m | 1 << v)
}

pub fn witness_exists(g: &Topology, v: NodeId, failed: &FailureSet, probing: Probing<'_>) -> Result<bool> {
    Oracle::new(g, probing, OracleBudget::default())?.witness_exists(v, failed)
}

pub fn distinguishable(g: &Topology, a: &FailureSet, b: &FailureSet, probing: Probing<'_>) -> Result<bool> {
    Ok(Oracle::new(g, probing, OracleBudget::default())?.distinguishable(a, b))
}

pub fn exact_k_identifiable(g: &Topology, set: &[NodeId], k: usize, probing: Probing<'_>) -> Result<bool> {
    Oracle::new(g, probing, OracleBudget::default())?.k_identifiable(set, k)
}

pub fn exact_omega(g: &Topology, v: NodeId, probing: Probing<'_>) -> Result<usize> {
    Oracle::new(g, probing, OracleBudget::default())?.omega(v)
}

pub fn exact_max_identifiable_set(g: &Topology, k: usize, probing: Probing<'_>) -> Result<BTreeSet<NodeId>> {
    Ok(Oracle::new(g, probing, OracleBudget::default())?.max_identifiable_set(k))
}

pub fn witness_inner_set(g: &Topology, k: usize, probing: Probing<'_>) -> Result<BTreeSet<NodeId>> {
    Ok(Oracle::new(g, probing, OracleBudget::default())?.witness_inner_set(k))
}
