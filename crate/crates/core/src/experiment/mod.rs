//! Seeded Monte Carlo experiments.
//!
//! Instance `i` of model `m` is drawn with seed `instance_seed(seed, m, i)`,
//! so results do not depend on execution order or thread count. Records are
//! sorted before they are written.

mod analyze;
mod config;
mod oracle_check;
mod record;
mod sweep;
mod tightness;

use std::path::Path;

use serde::Serialize;

pub use analyze::{analyze_files, analyze_topology, AnalyzeOptions, AnalyzeReport, Summary};
pub use config::{
    default_models, ExperimentConfig, ExperimentKind, ModelEntry, ModelSpec, Resolved, Source, UpModeSel, DEFAULT_NODES,
};
pub use oracle_check::CheckOutcome;
pub use record::{format_value, records_csv, sort_records, write_records, ResultRecord, RESULT_HEADER};

use crate::error::{Error, Result};
use crate::formats::{load_paths, load_topology, parse_edge_list};
use crate::graph::{Adjacency, Topology};
use crate::rng::instance_seed;
use crate::topogen::{generate, place_monitors, rpl_expected_links, ModelKind, GenSpec};
use crate::up::{gen_paths_shortest, PathSet};

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub meta: RunMeta,
    /// Present for oracle-check runs.
    pub check: Option<CheckOutcome>,
}

/// Contents of the `<out>.meta.json` sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub instances: usize,
    pub mu_list: Vec<usize>,
    pub oracle_budget: usize,
    pub models: Vec<ModelMeta>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelMeta {
    pub name: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// The generator parameter actually used (calibrated when the config
    /// gave a target link count).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_links: Option<f64>,
    /// Expected pre-rejection link count where it has a closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_links: Option<f64>,
    /// Draws including rejected ones, summed over instances.
    pub draws: u64,
    /// RPL pairs whose probability was clamped to 1, summed over instances.
    pub clamped_pairs: u64,
    /// Whether exact oracle values were computed.
    pub oracle: bool,
}

impl ModelMeta {
    fn new(spec: &ModelSpec, oracle: bool) -> Self {
        let (model, n, param, target_links, expected) = match &spec.source {
            Source::Generator {
                kind,
                n,
                param,
                target_links,
                ..
            } => {
                let nn = n.unwrap_or(DEFAULT_NODES);
                let expected = param.and_then(|p| match kind {
                    ModelKind::Er => Some(p * (nn * (nn - 1) / 2) as f64),
                    ModelKind::Ba => Some(crate::topogen::ba_link_count(nn, p as usize) as f64),
                    ModelKind::Rpl => Some(rpl_expected_links(nn, p)),
                    ModelKind::Rg => None,
                });
                (kind.to_string(), *n, *param, *target_links, expected)
            }
            Source::File { .. } => ("FILE".to_string(), None, None, None, None),
        };
        ModelMeta {
            name: spec.name.clone(),
            model,
            n,
            param,
            target_links,
            expected_links: expected,
            draws: 0,
            clamped_pairs: 0,
            oracle,
        }
    }
}

/// A loaded FILE source.
#[derive(Debug, Clone)]
struct FileTopology {
    g: Topology,
    fixed_roles: bool,
    paths: Option<PathSet>,
}

fn load_file_source(source: &Source) -> Result<Option<FileTopology>> {
    let Source::File { edges, monitors, paths } = source else {
        return Ok(None);
    };
    let g = match monitors {
        Some(m) => load_topology(edges, m)?.value,
        None => {
            let text = std::fs::read_to_string(edges).map_err(|e| Error::io(edges.as_path(), e))?;
            parse_edge_list(&text, edges)?.value
        }
    };
    let paths = match paths {
        Some(p) if monitors.is_some() => Some(load_paths(&g, p)?),
        Some(_) => return Err(Error::Config("a path file requires a monitor file".into())),
        None => None,
    };
    Ok(Some(FileTopology {
        g,
        fixed_roles: monitors.is_some(),
        paths,
    }))
}

/// One drawn base topology (roles not yet assigned for generators).
struct Draw {
    base: Topology,
    draws: u64,
    clamped_pairs: u64,
}

fn draw_base(spec: &ModelSpec, file: Option<&FileTopology>, seed: u64) -> Result<Draw> {
    match (&spec.source, file) {
        (
            Source::Generator {
                kind,
                n,
                param,
                max_retries,
                ..
            },
            _,
        ) => {
            let mut gs = GenSpec::new(*kind, n.unwrap_or(DEFAULT_NODES), param.expect("resolved"), seed);
            gs.max_retries = *max_retries;
            let out = generate(&gs)?;
            Ok(Draw {
                base: out.topology,
                draws: out.attempts as u64,
                clamped_pairs: out.clamped_pairs as u64,
            })
        }
        (Source::File { .. }, Some(f)) => Ok(Draw {
            base: f.g.clone(),
            draws: 0,
            clamped_pairs: 0,
        }),
        (Source::File { .. }, None) => unreachable!("file sources are loaded up front"),
    }
}

/// The (μ, topology with roles) pairs evaluated for one base topology.
fn with_roles(base: &Topology, file: Option<&FileTopology>, mu_list: &[usize], seed: u64) -> Result<Vec<(usize, Topology)>> {
    if file.is_some_and(|f| f.fixed_roles) {
        return Ok(vec![(base.monitor_count(), base.clone())]);
    }
    mu_list
        .iter()
        .map(|&mu| place_monitors(base.clone(), mu, seed).map(|g| (mu, g)))
        .collect()
}

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// on. Output order matches input order.
pub(crate) fn map_items<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if threads == Some(1) {
            return items.iter().map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("thread pool unavailable ({e}); running sequentially");
                items.iter().map(f).collect()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        items.iter().map(f).collect()
    }
}

/// Output of one (model, instance) work item.
struct ItemOutput {
    model: usize,
    records: Vec<ResultRecord>,
    draws: u64,
    clamped_pairs: u64,
}

/// Runs a sweep or tightness experiment.
fn run_grid(resolved: &Resolved) -> Result<RunOutput> {
    let cfg = &resolved.config;
    let files = resolved
        .models
        .iter()
        .map(|m| load_file_source(&m.source))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let mut metas = Vec::new();
    for (m, f) in resolved.models.iter().zip(&files) {
        let n = match (&m.source, f) {
            (Source::Generator { n, .. }, _) => n.unwrap_or(DEFAULT_NODES),
            (_, Some(f)) => f.g.node_count(),
            _ => unreachable!(),
        };
        let oracle = cfg.experiment == ExperimentKind::Sweep && n <= cfg.oracle_budget;
        if cfg.experiment == ExperimentKind::Sweep && !oracle {
            let msg = format!(
                "{}: |V| = {n} exceeds the oracle budget of {} nodes; exact_size omitted",
                m.name, cfg.oracle_budget
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        metas.push(ModelMeta::new(m, oracle));
    }

    // A file with fixed roles is deterministic; one instance suffices.
    let items: Vec<(usize, u64)> = resolved
        .models
        .iter()
        .enumerate()
        .flat_map(|(mi, _)| {
            let count = if files[mi].as_ref().is_some_and(|f| f.fixed_roles) {
                1
            } else {
                resolved.instances as u64
            };
            (0..count).map(move |i| (mi, i))
        })
        .collect();

    let outputs = map_items(&items, cfg.parallel, |&(mi, i)| -> Result<ItemOutput> {
        let spec = &resolved.models[mi];
        let file = files[mi].as_ref();
        let seed = instance_seed(cfg.seed, &spec.name, i);
        let draw = draw_base(spec, file, seed)?;
        let mut records = Vec::new();
        for (mu, g) in with_roles(&draw.base, file, &cfg.mu_list, seed)? {
            let shortest;
            let paths = match file.and_then(|f| f.paths.as_ref()) {
                Some(p) => p,
                None => {
                    shortest = gen_paths_shortest(&g)?;
                    &shortest
                }
            };
            let ctx = RowContext {
                experiment: cfg.experiment,
                model: &spec.name,
                instance: i,
                seed,
                mu,
            };
            match cfg.experiment {
                ExperimentKind::Sweep => {
                    records.extend(sweep::sweep_topology(cfg, &ctx, &g, paths, metas[mi].oracle)?);
                }
                ExperimentKind::Tightness => records.extend(tightness::tightness_topology(&ctx, &g, paths)?),
                _ => unreachable!(),
            }
        }
        Ok(ItemOutput {
            model: mi,
            records,
            draws: draw.draws,
            clamped_pairs: draw.clamped_pairs,
        })
    });

    let mut records = Vec::new();
    for out in outputs {
        let out = out?;
        metas[out.model].draws += out.draws;
        metas[out.model].clamped_pairs += out.clamped_pairs;
        records.extend(out.records);
    }
    sort_records(&mut records);
    if cfg.experiment == ExperimentKind::Tightness {
        let aggregates = tightness::aggregate(&records);
        records.extend(aggregates);
        sort_records(&mut records);
    }
    Ok(RunOutput {
        records,
        meta: RunMeta {
            experiment: cfg.experiment,
            seed: cfg.seed,
            instances: resolved.instances,
            mu_list: cfg.mu_list.clone(),
            oracle_budget: cfg.oracle_budget,
            models: metas,
            warnings,
        },
        check: None,
    })
}

/// Shared columns of the records produced for one topology.
pub(crate) struct RowContext<'a> {
    pub experiment: ExperimentKind,
    pub model: &'a str,
    pub instance: u64,
    pub seed: u64,
    pub mu: usize,
}

impl RowContext<'_> {
    pub fn record(&self, k: Option<usize>, mechanism: &str, metric: &str, value: f64) -> ResultRecord {
        ResultRecord {
            experiment: self.experiment.as_str().to_string(),
            model: self.model.to_string(),
            instance: Some(self.instance),
            seed: Some(self.seed),
            mu: self.mu,
            k,
            mechanism: mechanism.to_string(),
            metric: metric.to_string(),
            value,
        }
    }
}

/// Runs a resolved sweep, tightness or oracle-check experiment.
pub fn run(resolved: &Resolved) -> Result<RunOutput> {
    match resolved.config.experiment {
        ExperimentKind::Sweep | ExperimentKind::Tightness => run_grid(resolved),
        ExperimentKind::OracleCheck => oracle_check::run(resolved),
        ExperimentKind::Analyze => Err(Error::Config(
            "analyze works on topology files; use analyze_files".into(),
        )),
    }
}

/// Writes the records as CSV to `out` and the metadata to `<out>.meta.json`.
pub fn write_output(out: &Path, output: &RunOutput) -> Result<()> {
    crate::formats::write_file(out, &records_csv(&output.records)?)?;
    let meta = serde_json::to_string_pretty(&output.meta)?;
    crate::formats::write_file(&meta_path(out), &(meta + "\n"))
}

pub fn meta_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}
