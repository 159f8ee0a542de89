use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::MechanismKind;
use crate::checks::Fault;
use crate::error::{Error, Result};
use crate::oracle::DEFAULT_MAX_NODES;
use crate::topogen::{calibrate_param, ModelKind, DEFAULT_MAX_RETRIES};

pub const DEFAULT_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Tightness,
    Sweep,
    Analyze,
    OracleCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Tightness => "tightness",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Analyze => "analyze",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }
}

/// Which UP bounds a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpModeSel {
    #[default]
    Original,
    Relaxed,
    Both,
}

impl std::str::FromStr for UpModeSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(UpModeSel::Original),
            "relaxed" => Ok(UpModeSel::Relaxed),
            "both" => Ok(UpModeSel::Both),
            _ => Err(Error::Config(format!("unknown UP mode `{s}` (expected original, relaxed or both)"))),
        }
    }
}

/// One topology source as written in the config: a generator (`ER`, `RG`,
/// `BA`, `RPL`) or `FILE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_links: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_retries: Option<usize>,
    /// Edge list (FILE only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    /// Monitor list (FILE only). Without it monitors are placed at random
    /// for every μ in the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitors: Option<PathBuf>,
    /// Measurement paths for UP (FILE only); shortest paths otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<PathBuf>,
}

impl ModelEntry {
    pub fn generator(model: ModelKind, n: usize, target_links: f64) -> Self {
        ModelEntry {
            model: model.as_str().to_string(),
            name: None,
            n: Some(n),
            param: None,
            target_links: Some(target_links),
            max_retries: None,
            edges: None,
            monitors: None,
            paths: None,
        }
    }

    pub fn file(edges: PathBuf, monitors: Option<PathBuf>, paths: Option<PathBuf>) -> Self {
        ModelEntry {
            model: "FILE".into(),
            name: None,
            n: None,
            param: None,
            target_links: None,
            max_retries: None,
            edges: Some(edges),
            monitors,
            paths,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generator {
        kind: ModelKind,
        /// Absent only for oracle-check entries, which then sample n.
        n: Option<usize>,
        /// Explicit or calibrated; absent only for oracle-check entries,
        /// which then sample the parameter.
        param: Option<f64>,
        target_links: Option<f64>,
        max_retries: usize,
    },
    File {
        edges: PathBuf,
        monitors: Option<PathBuf>,
        paths: Option<PathBuf>,
    },
}

/// A model entry after validation and calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub source: Source,
}

/// A complete experiment description. Absent fields take per-experiment
/// defaults (see [`ExperimentConfig::resolve`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub models: Vec<ModelEntry>,
    #[serde(default)]
    pub mu_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default = "all_mechanisms")]
    pub mechanisms: Vec<MechanismKind>,
    #[serde(default)]
    pub up_mode: UpModeSel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Largest |V| handed to the exact oracle.
    #[serde(default = "default_oracle_budget")]
    pub oracle_budget: usize,
    /// Worker threads; `None` uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
    #[serde(default = "yes")]
    pub monitor_transit: bool,
    #[serde(default)]
    pub fault: Fault,
}

fn all_mechanisms() -> Vec<MechanismKind> {
    MechanismKind::ALL.to_vec()
}

fn default_oracle_budget() -> usize {
    DEFAULT_MAX_NODES
}

fn yes() -> bool {
    true
}

/// The validated, defaulted and calibrated form of a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub models: Vec<ModelSpec>,
    pub instances: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            models: Vec::new(),
            mu_list: Vec::new(),
            instances: None,
            k_max: None,
            mechanisms: all_mechanisms(),
            up_mode: UpModeSel::default(),
            seed: 0,
            out: None,
            oracle_budget: DEFAULT_MAX_NODES,
            parallel: None,
            monitor_transit: true,
            fault: Fault::None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills defaults, validates and calibrates. Every error is a
    /// [`Error::Config`] and is raised before any topology is drawn.
    pub fn resolve(&self) -> Result<Resolved> {
        let mut config = self.clone();
        let kind = config.experiment;
        if config.models.is_empty() {
            config.models = default_models(kind);
        }
        if config.mu_list.is_empty() {
            config.mu_list = match kind {
                ExperimentKind::Tightness => vec![10],
                ExperimentKind::Sweep => vec![2, 4, 6, 10],
                ExperimentKind::OracleCheck | ExperimentKind::Analyze => Vec::new(),
            };
        }
        let instances = config.instances.unwrap_or(match kind {
            ExperimentKind::Tightness => 100,
            ExperimentKind::Sweep | ExperimentKind::OracleCheck => 200,
            ExperimentKind::Analyze => 1,
        });

        let cfg_err = |msg: String| Err(Error::Config(msg));
        if instances == 0 {
            return cfg_err("instances must be at least 1".into());
        }
        if let Some(&mu) = config.mu_list.iter().find(|&&mu| mu < 2) {
            return cfg_err(format!("mu = {mu}: at least two monitors are required"));
        }
        if config.mechanisms.is_empty() {
            return cfg_err("mechanisms must not be empty".into());
        }
        if config.oracle_budget > 64 {
            return cfg_err(format!("oracle budget {} exceeds the 64-node limit", config.oracle_budget));
        }
        if config.parallel == Some(0) {
            return cfg_err("parallel must be at least 1".into());
        }
        let models = config
            .models
            .iter()
            .map(|e| resolve_entry(e, config.seed))
            .collect::<Result<Vec<_>>>()?;
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.name == m.name) {
                return cfg_err(format!("duplicate model name `{}`", m.name));
            }
        }
        let min_mu = config.mu_list.iter().copied().min();
        for m in &models {
            let Source::Generator { n, param, .. } = m.source else {
                continue;
            };
            if kind == ExperimentKind::OracleCheck {
                continue;
            }
            if param.is_none() {
                return cfg_err(format!("{}: either param or target_links is required", m.name));
            }
            let n = n.unwrap_or(DEFAULT_NODES);
            if let Some(&mu) = config.mu_list.iter().find(|&&mu| mu > n) {
                return cfg_err(format!("{}: mu = {mu} exceeds n = {n}", m.name));
            }
            if let (Some(k), Some(mu)) = (config.k_max, min_mu) {
                if k > n - mu {
                    return cfg_err(format!("{}: k_max = {k} exceeds n - min(mu) = {}", m.name, n - mu));
                }
            }
        }
        if kind == ExperimentKind::OracleCheck {
            if let Some(m) = models.iter().find(|m| matches!(m.source, Source::File { .. })) {
                return cfg_err(format!("{}: oracle-check draws its own instances; FILE is not supported", m.name));
            }
        }
        if matches!(kind, ExperimentKind::Sweep | ExperimentKind::Tightness) {
            let needs_mu = models
                .iter()
                .any(|m| !matches!(&m.source, Source::File { monitors: Some(_), .. }));
            if needs_mu && config.mu_list.is_empty() {
                return cfg_err("mu_list is required".into());
            }
        }
        Ok(Resolved {
            config,
            models,
            instances,
        })
    }
}

/// The models an experiment uses when the config lists none.
pub fn default_models(kind: ExperimentKind) -> Vec<ModelEntry> {
    let targets: &[f64] = match kind {
        ExperimentKind::Tightness => &[51.0, 99.0],
        ExperimentKind::Sweep => &[51.0],
        ExperimentKind::OracleCheck => {
            return [ModelKind::Er, ModelKind::Ba]
                .into_iter()
                .map(|m| ModelEntry {
                    n: None,
                    target_links: None,
                    ..ModelEntry::generator(m, 0, 0.0)
                })
                .collect()
        }
        ExperimentKind::Analyze => &[],
    };
    ModelKind::ALL
        .into_iter()
        .flat_map(|m| targets.iter().map(move |&t| ModelEntry::generator(m, DEFAULT_NODES, t)))
        .collect()
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn resolve_entry(e: &ModelEntry, seed: u64) -> Result<ModelSpec> {
    let cfg = |msg: String| Error::Config(msg);
    if e.model.eq_ignore_ascii_case("FILE") {
        let edges = e.edges.clone().ok_or_else(|| cfg("FILE model needs `edges`".into()))?;
        if e.n.is_some() || e.param.is_some() || e.target_links.is_some() {
            return Err(cfg(format!("{}: n, param and target_links do not apply to FILE", edges.display())));
        }
        let name = e.name.clone().unwrap_or_else(|| {
            edges
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "FILE".into())
        });
        return Ok(ModelSpec {
            name,
            source: Source::File {
                edges,
                monitors: e.monitors.clone(),
                paths: e.paths.clone(),
            },
        });
    }
    let kind: ModelKind = e.model.parse()?;
    if e.edges.is_some() || e.monitors.is_some() || e.paths.is_some() {
        return Err(cfg(format!("{kind}: edges, monitors and paths only apply to FILE")));
    }
    let param = match (e.param, e.target_links) {
        (Some(p), _) => Some(p),
        (None, Some(t)) => {
            let n = e.n.unwrap_or(DEFAULT_NODES);
            Some(calibrate_param(kind, n, t, seed).map_err(|err| cfg(format!("{kind}: {err}")))?)
        }
        (None, None) => None,
    };
    let name = e.name.clone().unwrap_or_else(|| match (e.param, e.target_links) {
        (None, Some(t)) => format!("{kind}-L{}", format_number(t)),
        (Some(p), _) => format!("{kind}-P{}", format_number(p)),
        (None, None) => kind.as_str().to_string(),
    });
    Ok(ModelSpec {
        name,
        source: Source::Generator {
            kind,
            n: e.n,
            param,
            target_links: e.target_links,
            max_retries: e.max_retries.unwrap_or(DEFAULT_MAX_RETRIES),
        },
    })
}
