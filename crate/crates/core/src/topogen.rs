//! Random topologies: Erdős–Rényi, random geometric, Barabási–Albert and
//! random power-law, plus link-count calibration and monitor placement.
//!
//! ER, RG and RPL draws that come out disconnected are discarded and redrawn
//! up to `max_retries` times. BA graphs are connected by construction.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, NodeId, Topology};
use crate::rng::{self, STREAM_CALIBRATION, STREAM_EDGES, STREAM_MONITORS, STREAM_POSITIONS};

pub const DEFAULT_MAX_RETRIES: usize = 10_000;

/// Draws used by the random-geometric calibration.
pub const RG_CALIBRATION_DRAWS: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Er,
    Rg,
    Ba,
    Rpl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Er, ModelKind::Rg, ModelKind::Ba, ModelKind::Rpl];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Er => "ER",
            ModelKind::Rg => "RG",
            ModelKind::Ba => "BA",
            ModelKind::Rpl => "RPL",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model `{s}` (expected ER, RG, BA or RPL)")))
    }
}

/// Generator parameters. `param` is p (ER), d_c (RG), n_min (BA) or α
/// (RPL); when absent it is calibrated from `target_links`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_links: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
}

fn default_max_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

impl GenSpec {
    pub fn new(model: ModelKind, n: usize, param: f64, seed: u64) -> Self {
        GenSpec {
            model,
            n,
            param: Some(param),
            target_links: None,
            seed,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn with_target(model: ModelKind, n: usize, target_links: f64, seed: u64) -> Self {
        GenSpec {
            model,
            n,
            param: None,
            target_links: Some(target_links),
            seed,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    /// The explicit parameter, or the calibrated one (calibration seeded
    /// with `seed`).
    pub fn resolve_param(&self) -> Result<f64> {
        match (self.param, self.target_links) {
            (Some(p), _) => Ok(p),
            (None, Some(t)) => calibrate_param(self.model, self.n, t, self.seed),
            (None, None) => Err(Error::InvalidSpec("either param or target_links is required".into())),
        }
    }

    fn validate(&self, param: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n < 2 {
            return bad(format!("n = {} (need at least 2 nodes)", self.n));
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1".into());
        }
        if !param.is_finite() {
            return bad(format!("parameter {param} is not finite"));
        }
        match self.model {
            ModelKind::Er if !(0.0..=1.0).contains(&param) => bad(format!("p = {param} is outside [0, 1]")),
            ModelKind::Rg if param < 0.0 => bad(format!("d_c = {param} is negative")),
            ModelKind::Ba if self.n < 4 => bad(format!("BA needs n >= 4, got {}", self.n)),
            ModelKind::Ba if param < 1.0 || param.fract() != 0.0 => {
                bad(format!("n_min = {param} is not a positive integer"))
            }
            ModelKind::Rpl if param < 0.0 => bad(format!("alpha = {param} is negative")),
            _ => Ok(()),
        }
    }
}

/// One pre-rejection realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDraw {
    pub edges: Vec<(NodeId, NodeId)>,
    /// Node positions (RG only).
    pub positions: Option<Vec<[f64; 2]>>,
    /// Pairs whose RPL link probability was clamped to 1.
    pub clamped_pairs: usize,
}

/// A connected realization plus what it took to get it.
#[derive(Debug, Clone)]
pub struct Generated {
    pub topology: Topology,
    pub param: f64,
    /// Number of draws, including the accepted one.
    pub attempts: usize,
    pub positions: Option<Vec<[f64; 2]>>,
    pub clamped_pairs: usize,
}

/// Draws one realization without the connectivity check.
pub fn raw_draw<R: Rng + ?Sized>(model: ModelKind, n: usize, param: f64, rng: &mut R) -> RawDraw {
    match model {
        ModelKind::Er => RawDraw {
            edges: pairs(n).filter(|_| rng.gen_bool(param)).collect(),
            positions: None,
            clamped_pairs: 0,
        },
        ModelKind::Rg => {
            let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            RawDraw {
                edges: pairs(n).filter(|&(i, j)| dist(pos[i], pos[j]) <= param).collect(),
                positions: Some(pos),
                clamped_pairs: 0,
            }
        }
        ModelKind::Ba => RawDraw {
            edges: ba_edges(n, param as usize, rng),
            positions: None,
            clamped_pairs: 0,
        },
        ModelKind::Rpl => {
            let probs = rpl_probabilities(n, param);
            let mut clamped_pairs = 0;
            let mut edges = Vec::new();
            for ((i, j), raw) in pairs(n).zip(probs) {
                if raw > 1.0 {
                    clamped_pairs += 1;
                }
                if rng.gen_bool(raw.min(1.0)) {
                    edges.push((i, j));
                }
            }
            RawDraw {
                edges,
                positions: None,
                clamped_pairs,
            }
        }
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (NodeId, NodeId)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Unclamped RPL pair probabilities d_i d_j / Σ d_k with d_i = i^α, in
/// pair order (i < j, 1-based degrees).
pub fn rpl_probabilities(n: usize, alpha: f64) -> Vec<f64> {
    let d: Vec<f64> = (1..=n).map(|i| (i as f64).powf(alpha)).collect();
    let total: f64 = d.iter().sum();
    pairs(n).map(|(i, j)| d[i] * d[j] / total).collect()
}

/// Preferential attachment from the star G_0 on nodes 0..4. Each new node
/// picks `n_min` distinct targets, one at a time, with probability
/// proportional to degree among those not yet picked.
fn ba_edges<R: Rng + ?Sized>(n: usize, n_min: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let mut edges = vec![(0, 1), (0, 2), (0, 3)];
    let mut degree = vec![0usize; n];
    degree[0] = 3;
    degree[1..4].iter_mut().for_each(|d| *d = 1);
    for v in 4..n {
        let targets: Vec<NodeId> = if v <= n_min {
            (0..v).collect()
        } else {
            let mut pool: Vec<NodeId> = (0..v).collect();
            let mut picked = Vec::with_capacity(n_min);
            for _ in 0..n_min {
                let total: usize = pool.iter().map(|&u| degree[u]).sum();
                let mut r = rng.gen_range(0..total);
                let pos = pool
                    .iter()
                    .position(|&u| {
                        if r < degree[u] {
                            true
                        } else {
                            r -= degree[u];
                            false
                        }
                    })
                    .expect("r < total");
                picked.push(pool.remove(pos));
            }
            picked
        };
        for u in targets {
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    edges
}

/// Draws until a connected realization appears.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    let param = spec.resolve_param()?;
    spec.validate(param)?;
    let stream_id = match spec.model {
        ModelKind::Rg => STREAM_POSITIONS,
        _ => STREAM_EDGES,
    };
    let mut rng = rng::stream(spec.seed, stream_id);
    for attempt in 1..=spec.max_retries {
        let draw = raw_draw(spec.model, spec.n, param, &mut rng);
        let topology = Topology::from_edges(spec.n, draw.edges)?;
        if topology.is_connected() {
            return Ok(Generated {
                topology,
                param,
                attempts: attempt,
                positions: draw.positions,
                clamped_pairs: draw.clamped_pairs,
            });
        }
    }
    Err(Error::RetriesExhausted(spec.max_retries))
}

fn generate_model(spec: &GenSpec, model: ModelKind) -> Result<Topology> {
    if spec.model != model {
        return Err(Error::InvalidSpec(format!("expected a {model} spec, got {}", spec.model)));
    }
    generate(spec).map(|g| g.topology)
}

pub fn gen_er(spec: &GenSpec) -> Result<Topology> {
    generate_model(spec, ModelKind::Er)
}

pub fn gen_rg(spec: &GenSpec) -> Result<Topology> {
    generate_model(spec, ModelKind::Rg)
}

pub fn gen_ba(spec: &GenSpec) -> Result<Topology> {
    generate_model(spec, ModelKind::Ba)
}

pub fn gen_rpl(spec: &GenSpec) -> Result<Topology> {
    generate_model(spec, ModelKind::Rpl)
}

/// Link count of a BA graph on `n` nodes.
pub fn ba_link_count(n: usize, n_min: usize) -> usize {
    3 + (4..n).map(|existing| existing.min(n_min)).sum::<usize>()
}

/// Expected pre-rejection link count of an RPL draw.
pub fn rpl_expected_links(n: usize, alpha: f64) -> f64 {
    rpl_probabilities(n, alpha).into_iter().map(|p| p.min(1.0)).sum()
}

/// Parameter whose expected pre-rejection link count matches `target`.
///
/// ER and BA are closed form (BA rounds to the nearest integer n_min). RPL
/// bisects α on the exact expectation. RG takes d_c as the matching
/// quantile of pairwise distances pooled over a fixed sample of position
/// draws, which is where bisection on that sample's mean converges.
pub fn calibrate_param(model: ModelKind, n: usize, target: f64, seed: u64) -> Result<f64> {
    let pairs_total = (n * n.saturating_sub(1) / 2) as f64;
    let unachievable = |reason: String| Error::Unachievable { target, reason };
    if n < 2 {
        return Err(unachievable(format!("n = {n}")));
    }
    if !target.is_finite() || target <= 0.0 || target > pairs_total {
        return Err(unachievable(format!("a graph on {n} nodes has at most {pairs_total} links")));
    }
    match model {
        ModelKind::Er => Ok(target / pairs_total),
        ModelKind::Ba => {
            if n < 4 {
                return Err(unachievable(format!("BA needs n >= 4, got {n}")));
            }
            if n == 4 {
                return Ok(1.0);
            }
            let n_min = ((target - 3.0) / (n - 4) as f64).round().max(1.0);
            let actual = ba_link_count(n, n_min as usize);
            if actual as f64 != target {
                log::info!("BA n={n}: n_min={n_min} yields {actual} links (target {target})");
            }
            Ok(n_min)
        }
        ModelKind::Rpl => {
            let mut hi = 64.0;
            if rpl_expected_links(n, hi) < target {
                return Err(unachievable(format!(
                    "RPL on {n} nodes reaches at most {:.1} expected links",
                    rpl_expected_links(n, hi)
                )));
            }
            let mut lo = 0.0;
            if rpl_expected_links(n, lo) >= target {
                return Ok(0.0);
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if rpl_expected_links(n, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi)
        }
        ModelKind::Rg => {
            let mut rng = rng::stream(seed, STREAM_CALIBRATION);
            let mut distances = Vec::with_capacity(RG_CALIBRATION_DRAWS * pairs_total as usize);
            for _ in 0..RG_CALIBRATION_DRAWS {
                let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
                distances.extend(pairs(n).map(|(i, j)| dist(pos[i], pos[j])));
            }
            distances.sort_by(f64::total_cmp);
            let rank = (target * RG_CALIBRATION_DRAWS as f64).ceil() as usize;
            Ok(distances[rank.clamp(1, distances.len()) - 1])
        }
    }
}

/// Marks a uniformly random μ-subset of nodes as monitors. Placements for
/// the same seed are nested: the monitors for μ are a subset of those for
/// any larger μ.
pub fn place_monitors(g: Topology, mu: usize, seed: u64) -> Result<Topology> {
    let n = g.node_count();
    if mu < 2 || mu > n {
        return Err(Error::InvalidSpec(format!("mu = {mu} must lie in [2, {n}]")));
    }
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, STREAM_MONITORS));
    g.with_monitors(&order[..mu])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn mean_links(model: ModelKind, n: usize, param: f64, draws: usize, seed: u64) -> f64 {
        let mut rng = stream(seed, 99);
        let total: usize = (0..draws).map(|_| raw_draw(model, n, param, &mut rng).edges.len()).sum();
        total as f64 / draws as f64
    }

    /// P(|XY| <= d) for two uniform points in the unit square, d <= 1.
    fn rg_pair_probability(d: f64) -> f64 {
        std::f64::consts::PI * d * d - 8.0 * d.powi(3) / 3.0 + d.powi(4) / 2.0
    }

    #[test]
    fn er_examples() {
        let g = gen_er(&GenSpec::new(ModelKind::Er, 3, 1.0, 1)).unwrap();
        assert_eq!(g.edge_count(), 3);
        let mut spec = GenSpec::new(ModelKind::Er, 2, 0.0, 1);
        spec.max_retries = 50;
        assert!(matches!(gen_er(&spec), Err(Error::RetriesExhausted(50))));
        let p = calibrate_param(ModelKind::Er, 20, 51.0, 0).unwrap();
        assert_eq!(p, 51.0 / 190.0);
        let mean = mean_links(ModelKind::Er, 20, p, 1000, 3);
        assert!((49.0..=53.0).contains(&mean), "{mean}");
        assert!(matches!(calibrate_param(ModelKind::Er, 20, 200.0, 0), Err(Error::Unachievable { .. })));
    }

    #[test]
    fn rg_examples() {
        let g = gen_rg(&GenSpec::new(ModelKind::Rg, 20, 2f64.sqrt(), 5)).unwrap();
        assert_eq!(g.edge_count(), 190);
        let mut spec = GenSpec::new(ModelKind::Rg, 3, 0.0, 1);
        spec.max_retries = 20;
        assert!(gen_rg(&spec).is_err());

        let d = calibrate_param(ModelKind::Rg, 20, 51.0, 11).unwrap();
        assert!((190.0 * rg_pair_probability(d) - 51.0).abs() < 1.5, "d_c = {d}");
        let mean = mean_links(ModelKind::Rg, 20, d, 500, 12);
        assert!((mean - 51.0).abs() <= 3.0, "{mean}");
    }

    #[test]
    fn rg_edges_match_retained_positions() {
        let out = generate(&GenSpec::new(ModelKind::Rg, 15, 0.4, 8)).unwrap();
        let pos = out.positions.unwrap();
        for i in 0..15 {
            for j in i + 1..15 {
                assert_eq!(out.topology.has_edge(i, j), dist(pos[i], pos[j]) <= 0.4);
            }
        }
    }

    #[test]
    fn ba_examples() {
        for n_min in [1, 3, 10] {
            let g = gen_ba(&GenSpec::new(ModelKind::Ba, 4, n_min as f64, 0)).unwrap();
            let edges: Vec<_> = g.edges().collect();
            assert_eq!(edges, [(0, 1), (0, 2), (0, 3)]);
        }
        for seed in 0..20 {
            let g = gen_ba(&GenSpec::new(ModelKind::Ba, 20, 3.0, seed)).unwrap();
            assert_eq!(g.edge_count(), 51);
        }
        let g = gen_ba(&GenSpec::new(ModelKind::Ba, 5, 10.0, 0)).unwrap();
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.degree(4), 4);
        assert_eq!(calibrate_param(ModelKind::Ba, 20, 99.0, 0).unwrap(), 6.0);
        assert_eq!(calibrate_param(ModelKind::Ba, 20, 51.0, 0).unwrap(), 3.0);
        assert!(gen_ba(&GenSpec::new(ModelKind::Ba, 3, 1.0, 0)).is_err());
    }

    #[test]
    fn ba_attachment_degrees() {
        let n_min = 5;
        let g = gen_ba(&GenSpec::new(ModelKind::Ba, 30, n_min as f64, 4)).unwrap();
        assert_eq!(g.edge_count(), ba_link_count(30, n_min));
        // A node's links to lower ids are exactly its attachment links.
        for v in 4..30 {
            let back = g.neighbors(v).iter().filter(|&&u| u < v).count();
            assert_eq!(back, n_min.min(v));
        }
    }

    #[test]
    fn rpl_examples() {
        let probs = rpl_probabilities(5, 0.0);
        assert!(probs.iter().all(|&p| (p - 0.2).abs() < 1e-12));
        // α = 2 on three nodes: degrees (1, 4, 9), sum 14.
        let p = rpl_probabilities(3, 2.0);
        assert!((p[0] - 4.0 / 14.0).abs() < 1e-12);
        assert!((p[2] - 36.0 / 14.0).abs() < 1e-12);

        let alpha = calibrate_param(ModelKind::Rpl, 20, 51.0, 0).unwrap();
        assert!((rpl_expected_links(20, alpha) - 51.0).abs() < 1e-6);
        let mean = mean_links(ModelKind::Rpl, 20, alpha, 500, 2);
        assert!((mean - 51.0).abs() <= 3.0, "{mean}");
        let g = generate(&GenSpec::new(ModelKind::Rpl, 20, 3.0, 1)).unwrap();
        assert!(g.clamped_pairs > 0);
        assert!(calibrate_param(ModelKind::Rpl, 20, 180.0, 0).is_err());
    }

    #[test]
    fn determinism_and_connectivity() {
        for model in ModelKind::ALL {
            let spec = GenSpec::with_target(model, 20, 51.0, 42);
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            assert_eq!(a.topology, b.topology);
            assert!(a.topology.is_connected());
        }
    }

    #[test]
    fn monitor_placement() {
        let g = gen_er(&GenSpec::new(ModelKind::Er, 10, 0.5, 1)).unwrap();
        let all = place_monitors(g.clone(), 10, 3).unwrap();
        assert_eq!(all.sigma(), 0);
        let a = place_monitors(g.clone(), 2, 3).unwrap();
        assert_eq!(a.monitors(), place_monitors(g.clone(), 2, 3).unwrap().monitors());
        assert!(place_monitors(g.clone(), 11, 3).is_err());
        assert!(place_monitors(g.clone(), 1, 3).is_err());
        let b = place_monitors(g, 6, 3).unwrap();
        assert!(a.monitors().iter().all(|&m| b.is_monitor(m)));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: GenSpec = serde_json::from_str(r#"{"model":"RPL","n":20,"target_links":99}"#).unwrap();
        assert_eq!(spec.max_retries, DEFAULT_MAX_RETRIES);
        assert_eq!(spec.param, None);
        assert_eq!("rg".parse::<ModelKind>().unwrap(), ModelKind::Rg);
        assert!("WS".parse::<ModelKind>().is_err());
    }
}
