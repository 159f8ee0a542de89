use super::config::{Resolved, Source};
use super::record::{sort_records, ResultRecord};
use super::{map_items, ModelMeta, RunMeta, RunOutput};
use crate::checks::{check_instance, random_instance_with, CheckOptions, CheckReport, Counterexample, INSTANCE_NODES};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::{Adjacency, Topology};
use crate::oracle::OracleBudget;
use crate::rng::instance_seed;

/// Aggregated outcome of an oracle-check run.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub report: CheckReport,
    /// Instances checked, fixtures included.
    pub instances: usize,
    /// The smallest failing instance (fewest nodes, then fewest links).
    pub counterexample: Option<(String, Counterexample)>,
}

struct Checked {
    model: String,
    instance: Option<u64>,
    g: Topology,
    report: CheckReport,
}

pub(super) fn run(resolved: &Resolved) -> Result<RunOutput> {
    let cfg = &resolved.config;
    let budget = OracleBudget::with_max_nodes(cfg.oracle_budget);
    for m in &resolved.models {
        if let Source::Generator { n, .. } = m.source {
            let largest = n.unwrap_or(*INSTANCE_NODES.end());
            if largest > budget.max_nodes {
                return Err(Error::BudgetExceeded(format!(
                    "{}: instances of up to {largest} nodes exceed the oracle limit of {} nodes",
                    m.name, budget.max_nodes
                )));
            }
        }
    }
    let opts = CheckOptions {
        budget,
        monitor_transit: cfg.monitor_transit,
        fault: cfg.fault,
        ..CheckOptions::default()
    };

    let items: Vec<u64> = (0..resolved.instances as u64).collect();
    let models = &resolved.models;
    let results = map_items(&items, cfg.parallel, |&i| -> Result<Checked> {
        let spec = &models[i as usize % models.len()];
        let Source::Generator { kind, n, param, .. } = spec.source else {
            unreachable!("rejected during resolve")
        };
        let seed = instance_seed(cfg.seed, &spec.name, i);
        let g = random_instance_with(kind, n, param, &cfg.mu_list, seed)?;
        let report = check_instance(&g, &opts)?;
        Ok(Checked {
            model: spec.name.clone(),
            instance: Some(i),
            g,
            report,
        })
    });
    let mut checked = results.into_iter().collect::<Result<Vec<_>>>()?;
    for (name, g) in fixtures::all() {
        let report = check_instance(&g, &opts)?;
        checked.push(Checked {
            model: format!("FIX-{}", name.to_ascii_uppercase()),
            instance: None,
            g,
            report,
        });
    }

    let mut total = CheckReport::default();
    let mut per_model: std::collections::BTreeMap<String, CheckReport> = Default::default();
    let mut worst: Option<&Checked> = None;
    for c in &checked {
        per_model.entry(c.model.clone()).or_default().merge(c.report.clone());
        if !c.report.passed() {
            let size = |c: &Checked| (c.g.node_count(), c.g.edge_count());
            if worst.is_none_or(|w| size(c) < size(w)) {
                worst = Some(c);
            }
        }
    }
    let counterexample = worst.map(|c| {
        let label = match c.instance {
            Some(i) => format!("{} instance {i}", c.model),
            None => c.model.clone(),
        };
        (label, Counterexample::new(&c.g, c.report.violations.clone()))
    });

    let mut records = Vec::new();
    for (model, rep) in &per_model {
        let rec = |metric: String, value: f64| ResultRecord {
            experiment: "oracle-check".into(),
            model: model.clone(),
            instance: None,
            seed: None,
            mu: 0,
            k: None,
            mechanism: String::new(),
            metric,
            value,
        };
        for (check, t) in &rep.tallies {
            records.push(rec(format!("{check}_passed"), t.passed as f64));
            records.push(rec(format!("{check}_failed"), t.failed as f64));
        }
        if rep.cap_upper_match.total() > 0 {
            let t = rep.cap_upper_match;
            records.push(rec("cap_upper_match_rate".into(), t.passed as f64 / t.total() as f64));
        }
        total.merge(rep.clone());
    }
    sort_records(&mut records);

    Ok(RunOutput {
        records,
        meta: RunMeta {
            experiment: cfg.experiment,
            seed: cfg.seed,
            instances: resolved.instances,
            mu_list: cfg.mu_list.clone(),
            oracle_budget: cfg.oracle_budget,
            models: models.iter().map(|m| ModelMeta::new(m, true)).collect(),
            warnings: Vec::new(),
        },
        check: Some(CheckOutcome {
            report: total,
            instances: checked.len(),
            counterexample,
        }),
    })
}
