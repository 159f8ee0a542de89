use std::collections::BTreeMap;

use super::record::ResultRecord;
use super::RowContext;
use crate::error::Result;
use crate::graph::Topology;
use crate::up::{PathSet, UpAnalysis, UpMode};

/// Per-instance metrics averaged over instances in the aggregate rows.
const AVERAGED: [&str; 5] = [
    "lower_original",
    "upper_original",
    "lower_relaxed",
    "upper_relaxed",
    "coincidence_rate",
];

/// Original and relaxed bounds on Ω_UP(N) for one topology. The set-level
/// bounds are minima over nodes.
pub(crate) fn tightness_topology(ctx: &RowContext<'_>, g: &Topology, paths: &PathSet) -> Result<Vec<ResultRecord>> {
    let nodes = g.non_monitors();
    if nodes.is_empty() {
        log::warn!("{} instance {}: no non-monitors, skipped", ctx.model, ctx.instance);
        return Ok(Vec::new());
    }
    let up = UpAnalysis::new(paths);
    let mut lo = [usize::MAX; 2];
    let mut hi = [usize::MAX; 2];
    let mut coinciding = 0usize;
    let mut lower_excess = 0usize;
    for &v in &nodes {
        let (o, _) = up.omega(v, UpMode::Original)?;
        let (r, _) = up.omega(v, UpMode::Relaxed)?;
        lo = [lo[0].min(o.lower), lo[1].min(r.lower)];
        hi = [hi[0].min(o.upper), hi[1].min(r.upper)];
        coinciding += usize::from(o.upper == r.upper);
        lower_excess += usize::from(r.lower > o.lower);
    }
    let values = [
        ("lower_original", lo[0] as f64),
        ("upper_original", hi[0] as f64),
        ("lower_relaxed", lo[1] as f64),
        ("upper_relaxed", hi[1] as f64),
        ("coincidence_rate", coinciding as f64 / nodes.len() as f64),
        ("coinciding_nodes", coinciding as f64),
        ("nodes", nodes.len() as f64),
        ("relaxed_lower_excess", lower_excess as f64),
    ];
    Ok(values.iter().map(|&(m, v)| ctx.record(None, "UP", m, v)).collect())
}

/// Aggregate rows per (model, μ): `avg_*` means of the per-instance
/// metrics, the node-weighted `node_coincidence_rate`, and the total
/// `relaxed_lower_excess`. Expects `records` sorted.
pub(crate) fn aggregate(records: &[ResultRecord]) -> Vec<ResultRecord> {
    let mut groups: BTreeMap<(&str, &str, usize, &str), (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.instance.is_some()) {
        let e = groups
            .entry((&r.experiment, &r.model, r.mu, &r.metric))
            .or_insert((0.0, 0));
        e.0 += r.value;
        e.1 += 1;
    }
    let mut out = Vec::new();
    let mut push = |(exp, model, mu): (&str, &str, usize), metric: String, value: f64| {
        out.push(ResultRecord {
            experiment: exp.to_string(),
            model: model.to_string(),
            instance: None,
            seed: None,
            mu,
            k: None,
            mechanism: "UP".into(),
            metric,
            value,
        });
    };
    for (&(exp, model, mu, metric), &(sum, count)) in &groups {
        if AVERAGED.contains(&metric) {
            push((exp, model, mu), format!("avg_{metric}"), sum / count as f64);
        }
        if metric == "relaxed_lower_excess" {
            push((exp, model, mu), metric.to_string(), sum);
        }
        if metric == "nodes" {
            let coinciding = groups[&(exp, model, mu, "coinciding_nodes")].0;
            push((exp, model, mu), "node_coincidence_rate".into(), coinciding / sum);
        }
    }
    out
}
