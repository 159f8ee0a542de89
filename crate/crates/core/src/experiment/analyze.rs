use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::config::UpModeSel;
use super::sweep::{bound_families, k_upper, oracle_for};
use crate::bounds::MechanismKind;
use crate::csp::CspAnalysis;
use crate::error::{Error, Result};
use crate::formats::{load_paths, load_topology, write_file};
use crate::graph::{Adjacency, Topology};
use crate::oracle::{OracleBudget, DEFAULT_MAX_NODES};
use crate::report::{
    csp_rows, csv_string, oracle_rows, sorted_labels, up_rows, CspRow, OracleRow, UpRow, CSP_HEADER, ORACLE_HEADER,
    UP_HEADER,
};
use crate::up::{gen_paths_shortest, PathSet, UpAnalysis, UpMode};

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub mechanisms: Vec<MechanismKind>,
    pub up_mode: UpModeSel,
    /// Largest k listed in the set report; defaults to σ − 1.
    pub k_max: Option<usize>,
    /// Exact values are computed only for topologies with at most this
    /// many nodes.
    pub oracle_budget: usize,
    pub monitor_transit: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            mechanisms: MechanismKind::ALL.to_vec(),
            up_mode: UpModeSel::Original,
            k_max: None,
            oracle_budget: DEFAULT_MAX_NODES,
            monitor_transit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub nodes: usize,
    pub links: usize,
    pub monitors: usize,
    pub sigma: usize,
    pub paths: usize,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|V|={} |L|={} mu={} sigma={} paths={}",
            self.nodes, self.links, self.monitors, self.sigma, self.paths
        )
    }
}

/// Bounds (and the exact set when computed) on the maximum k-identifiable
/// set, as sorted label lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetEntry {
    pub mechanism: MechanismKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<UpMode>,
    pub k: usize,
    pub inner: Vec<String>,
    pub outer: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub summary: Summary,
    pub csp: Vec<CspRow>,
    pub up: Vec<UpRow>,
    /// Empty when the topology exceeds the oracle budget.
    pub oracle: Vec<OracleRow>,
    pub sets: Vec<SetEntry>,
    pub warnings: Vec<String>,
}

impl AnalyzeReport {
    pub fn csp_csv(&self) -> Result<String> {
        csv_string(&CSP_HEADER, &self.csp)
    }

    pub fn up_csv(&self) -> Result<String> {
        csv_string(&UP_HEADER, &self.up)
    }

    pub fn oracle_csv(&self) -> Result<String> {
        csv_string(&ORACLE_HEADER, &self.oracle)
    }

    pub fn sets_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.sets)? + "\n")
    }

    /// Writes `csp.csv`, `up.csv`, `sets.json`, `summary.json` and, when
    /// exact values exist, `oracle.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("csp.csv"), &self.csp_csv()?)?;
        write_file(&dir.join("up.csv"), &self.up_csv()?)?;
        if !self.oracle.is_empty() {
            write_file(&dir.join("oracle.csv"), &self.oracle_csv()?)?;
        }
        write_file(&dir.join("sets.json"), &self.sets_json()?)?;
        let summary = serde_json::to_string_pretty(&self.summary)?;
        write_file(&dir.join("summary.json"), &(summary + "\n"))
    }
}

/// Loads an edge list, its monitor list and an optional path file, then
/// analyzes the result. Without a path file UP uses shortest paths.
pub fn analyze_files(edges: &Path, monitors: &Path, paths: Option<&Path>, opts: &AnalyzeOptions) -> Result<AnalyzeReport> {
    let loaded = load_topology(edges, monitors)?;
    let g = loaded.value;
    let paths = match paths {
        Some(p) => Some(load_paths(&g, p)?),
        None => None,
    };
    let mut report = analyze_topology(&g, paths.as_ref(), opts)?;
    let mut warnings = loaded.warnings;
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    Ok(report)
}

pub fn analyze_topology(g: &Topology, paths: Option<&PathSet>, opts: &AnalyzeOptions) -> Result<AnalyzeReport> {
    if g.monitor_count() < 2 {
        return Err(Error::TooFewMonitors(g.monitor_count()));
    }
    if opts.oracle_budget > 64 {
        return Err(Error::Config("oracle budget is limited to 64 nodes".into()));
    }
    let shortest;
    let paths = match paths {
        Some(p) => p,
        None => {
            shortest = gen_paths_shortest(g)?;
            &shortest
        }
    };
    let wants = |m: MechanismKind| opts.mechanisms.contains(&m);
    let mut warnings = Vec::new();

    let csp = if wants(MechanismKind::Csp) || wants(MechanismKind::Cap) {
        let an = CspAnalysis::new(g)?;
        let mut rows = csp_rows(&an)?;
        rows.retain(|r| wants(r.mechanism));
        rows
    } else {
        Vec::new()
    };
    let up = if wants(MechanismKind::Up) {
        let modes: &[UpMode] = match opts.up_mode {
            UpModeSel::Original => &[UpMode::Original],
            UpModeSel::Relaxed => &[UpMode::Relaxed],
            UpModeSel::Both => &[UpMode::Original, UpMode::Relaxed],
        };
        up_rows(g, &UpAnalysis::new(paths), modes)?
    } else {
        Vec::new()
    };

    let budget = OracleBudget::with_max_nodes(opts.oracle_budget);
    let oracles = if budget.admits(g) {
        opts.mechanisms
            .iter()
            .map(|&m| oracle_for(g, paths, m, opts.monitor_transit, budget))
            .collect::<Result<Vec<_>>>()?
    } else {
        let msg = format!(
            "|V| = {} exceeds the oracle budget of {} nodes; exact values omitted",
            g.node_count(),
            opts.oracle_budget
        );
        log::warn!("{msg}");
        warnings.push(msg);
        Vec::new()
    };
    let oracle = oracle_rows(&oracles);

    let sigma = g.sigma();
    if let Some(k) = opts.k_max {
        if k == 0 || k > sigma {
            return Err(Error::KOutOfRange { k, lo: 1, hi: sigma });
        }
    }
    let k_hi = k_upper(opts.k_max, sigma);
    let mut sets = Vec::new();
    for &mech in &opts.mechanisms {
        let exact_omega = oracles.iter().find(|o| o.mechanism() == mech).map(|o| o.omega_all());
        for (prefix, bounds) in bound_families(g, paths, mech, opts.up_mode, k_hi)? {
            let mode = (mech == MechanismKind::Up).then(|| match (opts.up_mode, prefix) {
                (UpModeSel::Relaxed, _) | (UpModeSel::Both, "relaxed_") => UpMode::Relaxed,
                _ => UpMode::Original,
            });
            for b in bounds {
                let exact = exact_omega.as_ref().map(|omega| {
                    let set = (0..omega.len()).filter(|&v| omega[v].is_some_and(|o| o >= b.k)).collect();
                    sorted_labels(g, &set)
                });
                sets.push(SetEntry {
                    mechanism: mech,
                    mode,
                    k: b.k,
                    inner: sorted_labels(g, &b.inner),
                    outer: sorted_labels(g, &b.outer),
                    exact,
                });
            }
        }
    }

    Ok(AnalyzeReport {
        summary: Summary {
            nodes: g.node_count(),
            links: g.edge_count(),
            monitors: g.monitor_count(),
            sigma,
            paths: paths.len(),
        },
        csp,
        up,
        oracle,
        sets,
        warnings,
    })
}
