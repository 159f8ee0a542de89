//! Small named topologies used throughout the tests, the CLI examples and
//! the browser demo.

use crate::graph::{Topology, TopologyBuilder};
use crate::up::PathSet;

fn build(edges: &[(&str, &str)], monitors: &[&str]) -> Topology {
    let mut b = TopologyBuilder::new();
    for &(u, v) in edges {
        b.add_edge(u, v).expect("fixture edges are simple");
    }
    b.build()
        .and_then(|g| g.with_monitor_labels(monitors))
        .expect("fixture is well formed")
}

/// `m1 – a – m2`.
pub fn path() -> Topology {
    build(&[("m1", "a"), ("a", "m2")], &["m1", "m2"])
}

/// `m1 – a – b – m2`.
pub fn chain() -> Topology {
    build(&[("m1", "a"), ("a", "b"), ("b", "m2")], &["m1", "m2"])
}

/// Triangle `a b c` hanging between `m1` (adjacent to a, b) and `m2`
/// (adjacent to c).
pub fn k() -> Topology {
    build(
        &[
            ("m1", "a"),
            ("m1", "b"),
            ("a", "b"),
            ("a", "c"),
            ("b", "c"),
            ("c", "m2"),
        ],
        &["m1", "m2"],
    )
}

/// Three monitors; `a` and `b` each see two of them, `w` sees one monitor and
/// both other non-monitors.
pub fn star() -> Topology {
    build(
        &[
            ("m1", "a"),
            ("m2", "a"),
            ("m2", "b"),
            ("m3", "b"),
            ("m1", "w"),
            ("w", "a"),
            ("w", "b"),
        ],
        &["m1", "m2", "m3"],
    )
}

/// The 4-cycle `s – x – t – y – s` without monitors.
pub fn c4() -> Topology {
    build(&[("s", "x"), ("x", "t"), ("t", "y"), ("y", "s")], &[])
}

/// A path set on which greedy cover is strictly worse than optimal for `v`:
/// P_v = {p1..p4}, `w1` lies on p2 and p3, `w2` on p1 and p2, `w3` on p3 and
/// p4. MSC(v) = 2 via {w2, w3}; greedy breaks the three-way tie
/// towards w1 (lowest id) and needs 3.
pub fn greedy_gap() -> (Topology, PathSet) {
    let g = build(
        &[
            ("m1", "w1"),
            ("m1", "w2"),
            ("w1", "w2"),
            ("w2", "v"),
            ("w1", "v"),
            ("v", "m2"),
            ("v", "w3"),
            ("w3", "m4"),
            ("m3", "m4"),
        ],
        &["m1", "m2", "m3", "m4"],
    );
    let paths = [
        &["m1", "w2", "v", "m2"][..],
        &["m1", "w1", "w2", "v", "m2"],
        &["m1", "w1", "v", "w3", "m4"],
        &["m2", "v", "w3", "m4"],
    ];
    let paths = paths
        .iter()
        .map(|p| p.iter().map(|l| g.id_of(l).expect("fixture label")).collect())
        .collect();
    let ps = PathSet::new(&g, paths).expect("fixture paths are valid");
    (g, ps)
}

/// Every named fixture that carries monitors.
pub fn all() -> Vec<(&'static str, Topology)> {
    vec![("path", path()), ("chain", chain()), ("k", k()), ("star", star())]
}
