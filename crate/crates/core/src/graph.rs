//! Undirected simple graphs with monitor roles, the contracted auxiliary
//! graphs that connectivity conditions are evaluated on, and the vertex-cut
//! primitives shared by every analysis module.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index, assigned at load or generation time.
pub type NodeId = usize;

/// Read-only adjacency view shared by [`Topology`] and [`AuxGraph`].
pub trait Adjacency {
    fn node_count(&self) -> usize;

    /// Neighbors of `v` in ascending id order.
    fn neighbors(&self, v: NodeId) -> &[NodeId];

    fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    fn contains(&self, v: NodeId) -> bool {
        v < self.node_count()
    }
}

/// Undirected simple graph with a monitor / non-monitor role per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    adj: Vec<Vec<NodeId>>,
    monitor: Vec<bool>,
    edge_count: usize,
}

impl Topology {
    /// Builds a topology on nodes `0..n` labelled by their index.
    /// Duplicate edges collapse; self-loops and unknown endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_labelled_edges(labels, edges)
    }

    pub fn from_labelled_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::UnknownNode(u));
            }
            if v >= n {
                return Err(Error::UnknownNode(v));
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u].clone()));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(Topology {
            labels,
            index,
            adj,
            monitor: vec![false; n],
            edge_count: edge_count / 2,
        })
    }

    /// Replaces the role assignment: exactly the listed nodes become monitors.
    pub fn with_monitors(mut self, monitors: &[NodeId]) -> Result<Self> {
        self.set_monitors(monitors)?;
        Ok(self)
    }

    pub fn set_monitors(&mut self, monitors: &[NodeId]) -> Result<()> {
        if let Some(&bad) = monitors.iter().find(|&&m| m >= self.node_count()) {
            return Err(Error::UnknownNode(bad));
        }
        self.monitor.iter_mut().for_each(|m| *m = false);
        for &m in monitors {
            self.monitor[m] = true;
        }
        Ok(())
    }

    pub fn with_monitor_labels<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        let ids = labels
            .iter()
            .map(|l| self.id_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.with_monitors(&ids)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn is_monitor(&self, v: NodeId) -> bool {
        self.monitor[v]
    }

    pub fn monitors(&self) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&v| self.monitor[v]).collect()
    }

    pub fn non_monitors(&self) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&v| !self.monitor[v]).collect()
    }

    /// μ, the number of monitors.
    pub fn monitor_count(&self) -> usize {
        self.monitor.iter().filter(|&&m| m).count()
    }

    /// σ, the number of non-monitors.
    pub fn sigma(&self) -> usize {
        self.node_count() - self.monitor_count()
    }

    pub fn monitor_neighbor_count(&self, v: NodeId) -> usize {
        self.adj[v].iter().filter(|&&w| self.monitor[w]).count()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Result<NodeId> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && components_of(self, &[]).len() == 1
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    pub(crate) fn check_non_monitor(&self, v: NodeId) -> Result<()> {
        self.check_node(v)?;
        if self.monitor[v] {
            Err(Error::IsMonitor(v))
        } else {
            Ok(())
        }
    }
}

impl Adjacency for Topology {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }
}

/// Label-based incremental construction, used by the file loaders.
#[derive(Debug, Default)]
pub struct TopologyBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    seen: std::collections::HashSet<(NodeId, NodeId)>,
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    /// Adds an edge by label. Returns `Ok(false)` when the edge already exists.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<bool> {
        if u == v {
            return Err(Error::SelfLoop(u.to_string()));
        }
        let a = self.node(u);
        let b = self.node(v);
        let key = (a.min(b), a.max(b));
        if !self.seen.insert(key) {
            return Ok(false);
        }
        self.edges.push(key);
        Ok(true)
    }

    pub fn build(self) -> Result<Topology> {
        if self.labels.is_empty() {
            return Err(Error::EmptyTopology);
        }
        Topology::from_labelled_edges(self.labels, self.edges)
    }
}

/// Result of a capped minimum internal vertex-cut computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutValue {
    pub value: usize,
    /// Set when no internal cut exists (adjacent endpoints) or the cut is at
    /// least `cap`.
    pub capped: bool,
    pub cap: usize,
}

impl CutValue {
    pub fn capped_at(cap: usize) -> Self {
        CutValue {
            value: cap,
            capped: true,
            cap,
        }
    }

    fn from_flow(flow: usize, cap: usize) -> Self {
        if flow >= cap {
            Self::capped_at(cap)
        } else {
            CutValue {
                value: flow,
                capped: false,
                cap,
            }
        }
    }

    /// The smaller of two cut values; on ties a capped value wins.
    pub fn min(self, other: CutValue) -> CutValue {
        match self.value.cmp(&other.value) {
            std::cmp::Ordering::Less => self,
            std::cmp::Ordering::Greater => other,
            std::cmp::Ordering::Equal => {
                if self.capped {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// Connected components of `g` after deleting `removed`. Components are
/// sorted internally and ordered by their smallest member.
pub fn components_after_removal<G: Adjacency + ?Sized>(
    g: &G,
    removed: &[NodeId],
) -> Result<Vec<Vec<NodeId>>> {
    if let Some(&bad) = removed.iter().find(|&&v| !g.contains(v)) {
        return Err(Error::UnknownNode(bad));
    }
    Ok(components_of(g, removed))
}

fn components_of<G: Adjacency + ?Sized>(g: &G, removed: &[NodeId]) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    for &v in removed {
        seen[v] = true;
    }
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Minimum number of nodes other than `s` and `t` whose removal disconnects
/// them (equivalently, the maximum number of internally node-disjoint s–t
/// paths), capped at `cap`.
pub fn vertex_connectivity<G: Adjacency + ?Sized>(
    g: &G,
    s: NodeId,
    t: NodeId,
    cap: usize,
) -> Result<CutValue> {
    check_endpoints(g, s, t)?;
    if g.has_edge(s, t) {
        return Ok(CutValue::capped_at(cap));
    }
    let mut net = SplitNetwork::new(g, s, t);
    let flow = net.augment(cap);
    Ok(CutValue::from_flow(flow, cap))
}

/// A minimum internal vertex cut between `s` and `t`, or `None` when they are
/// adjacent. The empty cut is returned when they are already disconnected.
pub fn min_vertex_cut<G: Adjacency + ?Sized>(
    g: &G,
    s: NodeId,
    t: NodeId,
) -> Result<Option<Vec<NodeId>>> {
    check_endpoints(g, s, t)?;
    if g.has_edge(s, t) {
        return Ok(None);
    }
    let mut net = SplitNetwork::new(g, s, t);
    net.augment(usize::MAX);
    let reach = net.residual_reach();
    let cut = (0..g.node_count())
        .filter(|&v| v != s && v != t && reach[2 * v] && !reach[2 * v + 1])
        .collect();
    Ok(Some(cut))
}

fn check_endpoints<G: Adjacency + ?Sized>(g: &G, s: NodeId, t: NodeId) -> Result<()> {
    for v in [s, t] {
        if !g.contains(v) {
            return Err(Error::UnknownNode(v));
        }
    }
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    residual: u32,
    rev: usize,
}

/// Unit node-capacity flow network: node `v` becomes `2v -> 2v+1`.
struct SplitNetwork {
    arcs: Vec<Vec<Arc>>,
    source: usize,
    sink: usize,
}

impl SplitNetwork {
    const INF: u32 = u32::MAX / 2;

    fn new<G: Adjacency + ?Sized>(g: &G, s: NodeId, t: NodeId) -> Self {
        let n = g.node_count();
        let mut net = SplitNetwork {
            arcs: vec![Vec::new(); 2 * n],
            source: 2 * s + 1,
            sink: 2 * t,
        };
        for v in 0..n {
            let c = if v == s || v == t { Self::INF } else { 1 };
            net.add_arc(2 * v, 2 * v + 1, c);
            for &w in g.neighbors(v) {
                net.add_arc(2 * v + 1, 2 * w, Self::INF);
            }
        }
        net
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        let rev_from = self.arcs[to].len();
        let rev_to = self.arcs[from].len();
        self.arcs[from].push(Arc {
            to,
            residual: cap,
            rev: rev_from,
        });
        self.arcs[to].push(Arc {
            to: from,
            residual: 0,
            rev: rev_to,
        });
    }

    /// Pushes unit augmenting paths until `limit` is reached or none remain.
    fn augment(&mut self, limit: usize) -> usize {
        let mut flow = 0;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.arcs.len()];
        while flow < limit {
            parent.iter_mut().for_each(|p| *p = None);
            let mut queue = VecDeque::from([self.source]);
            let mut found = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for (i, arc) in self.arcs[u].iter().enumerate() {
                    if arc.residual > 0 && arc.to != self.source && parent[arc.to].is_none() {
                        parent[arc.to] = Some((u, i));
                        if arc.to == self.sink {
                            found = true;
                            break 'bfs;
                        }
                        queue.push_back(arc.to);
                    }
                }
            }
            if !found {
                break;
            }
            let mut v = self.sink;
            while let Some((u, i)) = parent[v] {
                let rev = self.arcs[u][i].rev;
                self.arcs[u][i].residual -= 1;
                self.arcs[v][rev].residual += 1;
                v = u;
                if v == self.source {
                    break;
                }
            }
            flow += 1;
        }
        flow
    }

    fn residual_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.arcs.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for arc in &self.arcs[u] {
                if arc.residual > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}

/// Graph on `N ∪ {m'}` obtained by merging monitors into one virtual monitor.
///
/// With no excluded monitor this is the merged graph over all monitors; with
/// `excluded_monitor = Some(m)`, monitor `m` is deleted before merging the
/// rest. Non-monitors keep their relative order: aux id `i < σ` is the i-th
/// non-monitor of the base topology and aux id `σ` is `m'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxGraph {
    excluded_monitor: Option<NodeId>,
    members: Vec<NodeId>,
    to_aux: Vec<Option<usize>>,
    adj: Vec<Vec<usize>>,
}

impl AuxGraph {
    fn contract(base: &Topology, excluded: Option<NodeId>) -> Self {
        let members = base.non_monitors();
        let mut to_aux = vec![None; base.node_count()];
        for (i, &v) in members.iter().enumerate() {
            to_aux[v] = Some(i);
        }
        let virt = members.len();
        let mut adj = vec![Vec::new(); virt + 1];
        for (i, &u) in members.iter().enumerate() {
            let mut touches_monitor = false;
            for &w in base.neighbors(u) {
                match to_aux[w] {
                    Some(j) => adj[i].push(j),
                    None if Some(w) != excluded => touches_monitor = true,
                    None => {}
                }
            }
            if touches_monitor {
                adj[i].push(virt);
                adj[virt].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        AuxGraph {
            excluded_monitor: excluded,
            members,
            to_aux,
            adj,
        }
    }

    /// Id of the virtual monitor `m'`.
    pub fn virtual_monitor(&self) -> usize {
        self.members.len()
    }

    pub fn excluded_monitor(&self) -> Option<NodeId> {
        self.excluded_monitor
    }

    /// Aux id of a base non-monitor.
    pub fn aux_id(&self, base: NodeId) -> Option<usize> {
        self.to_aux.get(base).copied().flatten()
    }

    /// Base id of an aux node; `None` for `m'`.
    pub fn base_id(&self, aux: usize) -> Option<NodeId> {
        self.members.get(aux).copied()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }
}

impl Adjacency for AuxGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }
}

/// Merges every monitor of `g` into `m'`.
pub fn build_gstar(g: &Topology) -> Result<AuxGraph> {
    if g.monitor_count() == 0 {
        return Err(Error::NoMonitors);
    }
    Ok(AuxGraph::contract(g, None))
}

/// Deletes monitor `m` and merges the remaining monitors into `m'`.
pub fn build_g_m(g: &Topology, m: NodeId) -> Result<AuxGraph> {
    g.check_node(m)?;
    if !g.is_monitor(m) {
        return Err(Error::NotMonitor(m));
    }
    let mu = g.monitor_count();
    if mu < 2 {
        return Err(Error::TooFewMonitors(mu));
    }
    Ok(AuxGraph::contract(g, Some(m)))
}
