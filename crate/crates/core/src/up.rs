//! Identifiability bounds under uncontrollable probing (UP), where the
//! measurement paths are fixed in advance.
//!
//! Per node v, MSC(v) is the minimum number of other non-monitors whose
//! paths jointly cover every path through v. Conventions: MSC(v) = σ when
//! some path through v has no other non-monitor (it can never be covered),
//! and MSC(v) = 0 when no path traverses v.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::bounds::{Applicability, IdentSetBounds, MechanismKind, OmegaInterval, Verdict};
use crate::cover::{harmonic, ExactCover, SetCover};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, Topology};

/// Default node-expansion budget for the exact cover search.
pub const DEFAULT_COVER_BUDGET: u64 = 200_000;

/// Monitor-to-monitor measurement paths plus the per-node path index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    paths: Vec<Vec<NodeId>>,
    index: Vec<Vec<usize>>,
    non_monitor: Vec<bool>,
}

impl PathSet {
    /// Validates every path against `g`: endpoints are distinct monitors,
    /// consecutive nodes are adjacent and no node repeats.
    pub fn new(g: &Topology, paths: Vec<Vec<NodeId>>) -> Result<Self> {
        for (i, p) in paths.iter().enumerate() {
            validate_path(g, p).map_err(|msg| Error::InvalidPath(format!("path {}: {msg}", i + 1)))?;
        }
        let mut index = vec![Vec::new(); g.node_count()];
        for (i, p) in paths.iter().enumerate() {
            for &v in p {
                index[v].push(i);
            }
        }
        Ok(PathSet {
            paths,
            index,
            non_monitor: (0..g.node_count()).map(|v| !g.is_monitor(v)).collect(),
        })
    }

    pub fn paths(&self) -> &[Vec<NodeId>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// P_v: ids of the paths traversing `v`.
    pub fn paths_through(&self, v: NodeId) -> &[usize] {
        &self.index[v]
    }

    pub fn sigma(&self) -> usize {
        self.non_monitor.iter().filter(|&&b| b).count()
    }

    pub fn node_count(&self) -> usize {
        self.non_monitor.len()
    }

    pub fn is_non_monitor(&self, v: NodeId) -> bool {
        self.non_monitor[v]
    }

    pub fn non_monitors(&self) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&v| self.non_monitor[v]).collect()
    }

    /// Non-monitors on path `id`.
    pub fn path_non_monitors(&self, id: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.paths[id].iter().copied().filter(|&v| self.non_monitor[v])
    }

    fn check_non_monitor(&self, v: NodeId) -> Result<()> {
        match self.non_monitor.get(v) {
            None => Err(Error::UnknownNode(v)),
            Some(false) => Err(Error::IsMonitor(v)),
            Some(true) => Ok(()),
        }
    }
}

pub(crate) fn validate_path(g: &Topology, p: &[NodeId]) -> Result<(), String> {
    if p.len() < 2 {
        return Err("a path needs at least two nodes".into());
    }
    if let Some(&bad) = p.iter().find(|&&v| v >= g.node_count()) {
        return Err(format!("unknown node id {bad}"));
    }
    let (first, last) = (p[0], p[p.len() - 1]);
    for end in [first, last] {
        if !g.is_monitor(end) {
            return Err(format!("endpoint `{}` is not a monitor", g.label(end)));
        }
    }
    if first == last {
        return Err("endpoints must be distinct monitors".into());
    }
    let mut seen = BTreeSet::new();
    for &v in p {
        if !seen.insert(v) {
            return Err(format!("node `{}` repeats", g.label(v)));
        }
    }
    for w in p.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(format!("`{}` and `{}` are not adjacent", g.label(w[0]), g.label(w[1])));
        }
    }
    Ok(())
}

/// One BFS-shortest path per unordered monitor pair, starting at the monitor
/// with the smaller id. Among equally short paths the lexicographically
/// smallest id sequence is taken. Pairs in different components are skipped.
pub fn gen_paths_shortest(g: &Topology) -> Result<PathSet> {
    let monitors = g.monitors();
    if monitors.len() < 2 {
        return Err(Error::TooFewMonitors(monitors.len()));
    }
    let n = g.node_count();
    let mut paths = Vec::new();
    for (j, &t) in monitors.iter().enumerate().skip(1) {
        let mut dist = vec![usize::MAX; n];
        dist[t] = 0;
        let mut queue = VecDeque::from([t]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &s in &monitors[..j] {
            if dist[s] == usize::MAX {
                continue;
            }
            let mut path = vec![s];
            let mut cur = s;
            while cur != t {
                cur = *g
                    .neighbors(cur)
                    .iter()
                    .find(|&&w| dist[w] + 1 == dist[cur])
                    .expect("BFS layer has a predecessor");
                path.push(cur);
            }
            paths.push(path);
        }
    }
    paths.sort();
    PathSet::new(g, paths)
}

/// Per-node cover statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverMetrics {
    /// MSC(v); an upper bound when `msc_exact` is false.
    pub msc: usize,
    /// Whether the exact search finished within its budget.
    pub msc_exact: bool,
    /// Lower bound on MSC(v); equals `msc` when exact.
    pub msc_lower: usize,
    /// Greedy cover size, same conventions as `msc`.
    pub gsc: usize,
    /// Largest |P_w ∩ P_v| over other non-monitors w.
    pub d_max: usize,
    /// H(d_max).
    pub harmonic: f64,
}

impl CoverMetrics {
    /// ⌈GSC / H(d_max)⌉, the greedy-derived lower estimate of MSC.
    pub fn relaxed_msc_lower(&self) -> usize {
        if self.harmonic <= 0.0 {
            return self.gsc;
        }
        ((self.gsc as f64 / self.harmonic) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Which UP bound family to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpMode {
    /// `[MSC − 1, MSC]`.
    Original,
    /// `[⌈GSC / H(d_max)⌉ − 1, GSC]`.
    Relaxed,
}

impl fmt::Display for UpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpMode::Original => "original",
            UpMode::Relaxed => "relaxed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coverage {
    /// P_v is empty.
    Untouched,
    /// Some path has v as its only non-monitor.
    Pinned,
    Coverable,
}

/// Cover statistics for every non-monitor of a path set.
#[derive(Debug, Clone)]
pub struct UpAnalysis<'a> {
    paths: &'a PathSet,
    metrics: Vec<Option<CoverMetrics>>,
}

impl<'a> UpAnalysis<'a> {
    pub fn new(paths: &'a PathSet) -> Self {
        Self::with_budget(paths, DEFAULT_COVER_BUDGET)
    }

    pub fn with_budget(paths: &'a PathSet, budget: u64) -> Self {
        let metrics = (0..paths.node_count())
            .map(|v| paths.is_non_monitor(v).then(|| compute_metrics(paths, v, budget)))
            .collect();
        UpAnalysis { paths, metrics }
    }

    pub fn paths(&self) -> &PathSet {
        self.paths
    }

    pub fn metrics(&self, v: NodeId) -> Result<CoverMetrics> {
        self.paths.check_non_monitor(v)?;
        Ok(self.metrics[v].expect("computed for non-monitors"))
    }

    /// Interval on Ω_UP(v). In original mode an unfinished exact search
    /// falls back to the relaxed lower bound; the second value reports the
    /// mode actually used.
    pub fn omega(&self, v: NodeId, mode: UpMode) -> Result<(OmegaInterval, UpMode)> {
        let m = self.metrics(v)?;
        let sigma = self.paths.sigma();
        let up = MechanismKind::Up;
        let value = match mode {
            UpMode::Original => m.msc,
            UpMode::Relaxed => m.gsc,
        };
        match coverage(self.paths, v) {
            Coverage::Pinned => return Ok((OmegaInterval::exact(sigma, up), mode)),
            Coverage::Untouched => return Ok((OmegaInterval::exact(0, up), mode)),
            Coverage::Coverable => {}
        }
        let (lower, used) = match mode {
            UpMode::Original if m.msc_exact => (m.msc.saturating_sub(1), UpMode::Original),
            UpMode::Original => {
                log::warn!("exact cover budget exceeded for node {v}; using relaxed lower bound");
                (m.msc_lower.saturating_sub(1), UpMode::Relaxed)
            }
            UpMode::Relaxed => (m.relaxed_msc_lower().saturating_sub(1), UpMode::Relaxed),
        };
        let upper = value.min(sigma);
        Ok((
            OmegaInterval::range(lower.min(upper), upper, up, Applicability::InRange),
            used,
        ))
    }

    /// Tri-state k-identifiability test for `set`.
    pub fn k_identifiable(&self, set: &[NodeId], k: usize) -> Result<Verdict> {
        set.iter().try_for_each(|&v| self.paths.check_non_monitor(v))?;
        let sigma = self.paths.sigma();
        if k > sigma {
            return Err(Error::KOutOfRange { k, lo: 0, hi: sigma });
        }
        if set.is_empty() || k == 0 {
            return Ok(Verdict::Sufficient);
        }
        if k == sigma {
            let all_pinned = set.iter().all(|&v| is_pinned(self.paths, v));
            return Ok(if all_pinned { Verdict::Sufficient } else { Verdict::No });
        }
        let ms: Vec<_> = set.iter().map(|&v| self.metrics[v].expect("non-monitor")).collect();
        let min_lower = ms.iter().map(|m| m.msc_lower).min().expect("non-empty");
        let min_upper = ms.iter().map(|m| m.msc).min().expect("non-empty");
        Ok(if min_lower > k {
            Verdict::Sufficient
        } else if min_upper < k {
            Verdict::No
        } else {
            Verdict::Inconclusive
        })
    }

    /// Inner/outer bounds on S_UP(k) for `1 ≤ k ≤ σ − 1`, or the exact set of
    /// pinned nodes at `k = σ`.
    pub fn set_bounds(&self, k: usize, mode: UpMode) -> Result<IdentSetBounds> {
        let sigma = self.paths.sigma();
        if k == 0 || k > sigma {
            return Err(Error::KOutOfRange { k, lo: 1, hi: sigma });
        }
        let nodes = self.paths.non_monitors();
        if k == sigma {
            let exact = nodes.into_iter().filter(|&v| is_pinned(self.paths, v)).collect();
            return Ok(IdentSetBounds::exact(k, exact));
        }
        let mut inner = BTreeSet::new();
        let mut outer = BTreeSet::new();
        for v in nodes {
            let (iv, _) = self.omega(v, mode)?;
            if iv.lower >= k {
                inner.insert(v);
            }
            if iv.upper >= k {
                outer.insert(v);
            }
        }
        Ok(IdentSetBounds {
            k,
            inner,
            outer,
            exact: None,
        })
    }
}

fn coverage(paths: &PathSet, v: NodeId) -> Coverage {
    let through = paths.paths_through(v);
    if through.is_empty() {
        Coverage::Untouched
    } else if through
        .iter()
        .any(|&p| paths.path_non_monitors(p).all(|w| w == v))
    {
        Coverage::Pinned
    } else {
        Coverage::Coverable
    }
}

fn is_pinned(paths: &PathSet, v: NodeId) -> bool {
    coverage(paths, v) == Coverage::Pinned
}

/// The cover instance for v: elements are P_v, one candidate set per other
/// non-monitor that touches P_v.
fn cover_instance(paths: &PathSet, v: NodeId) -> (SetCover, Vec<NodeId>) {
    let through = paths.paths_through(v);
    let mut candidates: Vec<NodeId> = through
        .iter()
        .flat_map(|&p| paths.path_non_monitors(p))
        .filter(|&w| w != v)
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let sets = candidates
        .iter()
        .map(|&w| {
            let mut b = FixedBitSet::with_capacity(through.len());
            for (i, &p) in through.iter().enumerate() {
                if paths.paths[p].contains(&w) {
                    b.insert(i);
                }
            }
            b
        })
        .collect();
    (SetCover::new(through.len(), sets), candidates)
}

fn compute_metrics(paths: &PathSet, v: NodeId, budget: u64) -> CoverMetrics {
    let sigma = paths.sigma();
    let (inst, _) = cover_instance(paths, v);
    let d_max = inst.max_set_size();
    let h = harmonic(d_max);
    let sentinel = |msc| CoverMetrics {
        msc,
        msc_exact: true,
        msc_lower: msc,
        gsc: msc,
        d_max,
        harmonic: h,
    };
    match coverage(paths, v) {
        Coverage::Untouched => sentinel(0),
        Coverage::Pinned => sentinel(sigma),
        Coverage::Coverable => {
            let gsc = inst.greedy().expect("coverable").len();
            match inst.exact(budget) {
                ExactCover::Optimal(c) => CoverMetrics {
                    msc: c.len(),
                    msc_exact: true,
                    msc_lower: c.len(),
                    gsc,
                    d_max,
                    harmonic: h,
                },
                ExactCover::BudgetExceeded { best, lower_bound } => {
                    let greedy_lower = ((gsc as f64 / h) - 1e-9).ceil() as usize;
                    CoverMetrics {
                        msc: best.len(),
                        msc_exact: false,
                        msc_lower: lower_bound.max(greedy_lower).min(best.len()),
                        gsc,
                        d_max,
                        harmonic: h,
                    }
                }
                ExactCover::Uncoverable => unreachable!("coverable by construction"),
            }
        }
    }
}

/// Exact MSC(v).
pub fn msc(paths: &PathSet, v: NodeId) -> Result<usize> {
    paths.check_non_monitor(v)?;
    Ok(compute_metrics(paths, v, u64::MAX).msc)
}

/// Greedy GSC(v).
pub fn gsc(paths: &PathSet, v: NodeId) -> Result<usize> {
    paths.check_non_monitor(v)?;
    Ok(compute_metrics(paths, v, 0).gsc)
}

pub fn cover_metrics(paths: &PathSet, v: NodeId) -> Result<CoverMetrics> {
    paths.check_non_monitor(v)?;
    Ok(compute_metrics(paths, v, DEFAULT_COVER_BUDGET))
}

pub fn up_k_identifiable(paths: &PathSet, set: &[NodeId], k: usize) -> Result<Verdict> {
    UpAnalysis::new(paths).k_identifiable(set, k)
}

pub fn omega_up_bounds(paths: &PathSet, v: NodeId, mode: UpMode) -> Result<OmegaInterval> {
    Ok(UpAnalysis::new(paths).omega(v, mode)?.0)
}

pub fn s_up_bounds(paths: &PathSet, k: usize) -> Result<IdentSetBounds> {
    UpAnalysis::new(paths).set_bounds(k, UpMode::Original)
}
