//! Text formats for topologies, monitor lists and measurement paths.
//!
//! * Edge list: one `u v` pair of labels per line.
//! * Monitor list: one label per line.
//! * Path file: one path per line, labels separated by whitespace.
//!
//! Blank lines and lines starting with `#` are ignored everywhere. Node ids
//! follow first appearance in the edge list.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, Topology, TopologyBuilder};
use crate::up::{validate_path, PathSet};

/// A parsed value plus the non-fatal issues found while reading it.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(source: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses an edge list. Every node starts as a non-monitor.
pub fn parse_edge_list(text: &str, source: &Path) -> Result<Parsed<Topology>> {
    let mut b = TopologyBuilder::new();
    let mut warnings = Vec::new();
    for (line, l) in content_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let [u, v] = tokens[..] else {
            return Err(parse_err(source, line, format!("expected `u v`, found {} fields", tokens.len())));
        };
        match b.add_edge(u, v) {
            Ok(true) => {}
            Ok(false) => {
                let msg = format!("{}:{line}: duplicate edge {u} {v} ignored", source.display());
                log::warn!("{msg}");
                warnings.push(msg);
            }
            Err(e) => return Err(parse_err(source, line, e.to_string())),
        }
    }
    let value = b.build().map_err(|e| parse_err(source, 0, e.to_string()))?;
    Ok(Parsed { value, warnings })
}

/// Parses a monitor list and assigns the roles on `g`.
pub fn apply_monitor_list(g: &mut Topology, text: &str, source: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    let mut warnings = Vec::new();
    for (line, l) in content_lines(text) {
        let id = g
            .id_of(l)
            .map_err(|_| parse_err(source, line, format!("unknown monitor label `{l}`")))?;
        if ids.contains(&id) {
            let msg = format!("{}:{line}: monitor `{l}` listed twice", source.display());
            log::warn!("{msg}");
            warnings.push(msg);
        } else {
            ids.push(id);
        }
    }
    g.set_monitors(&ids)?;
    Ok(warnings)
}

/// Parses a path file against `g`. Paths keep file order.
pub fn parse_path_file(g: &Topology, text: &str, source: &Path) -> Result<PathSet> {
    let mut paths = Vec::new();
    for (line, l) in content_lines(text) {
        let p = l
            .split_whitespace()
            .map(|label| {
                g.id_of(label)
                    .map_err(|_| parse_err(source, line, format!("unknown node label `{label}`")))
            })
            .collect::<Result<Vec<NodeId>>>()?;
        validate_path(g, &p).map_err(|msg| parse_err(source, line, msg))?;
        paths.push(p);
    }
    PathSet::new(g, paths)
}

/// Loads an edge list and its companion monitor list.
pub fn load_topology(edges: &Path, monitors: &Path) -> Result<Parsed<Topology>> {
    let Parsed {
        value: mut g,
        mut warnings,
    } = parse_edge_list(&read(edges)?, edges)?;
    warnings.extend(apply_monitor_list(&mut g, &read(monitors)?, monitors)?);
    log::info!(
        "{}: |V| = {}, |L| = {}, mu = {}",
        edges.display(),
        g.node_count(),
        g.edge_count(),
        g.monitor_count()
    );
    Ok(Parsed { value: g, warnings })
}

pub fn load_paths(g: &Topology, path: &Path) -> Result<PathSet> {
    parse_path_file(g, &read(path)?, path)
}

pub fn format_edge_list(g: &Topology) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", g.label(u), g.label(v));
    }
    out
}

pub fn format_monitor_list(g: &Topology) -> String {
    g.monitors().iter().map(|&m| format!("{}\n", g.label(m))).collect()
}

pub fn format_paths(g: &Topology, paths: &PathSet) -> String {
    paths
        .paths()
        .iter()
        .map(|p| {
            let labels: Vec<&str> = p.iter().map(|&v| g.label(v)).collect();
            format!("{}\n", labels.join(" "))
        })
        .collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Companion monitor file name for an edge list: `<stem>.monitors`.
pub fn monitor_path_for(edges: &Path) -> PathBuf {
    edges.with_extension("monitors")
}
