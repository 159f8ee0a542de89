//! Browser bindings. Every export takes and returns JSON strings; the
//! `*_json` functions hold the logic so they can be tested natively.

use std::path::Path;

use floc::experiment::{analyze_topology, AnalyzeOptions};
use floc::formats::{apply_monitor_list, format_edge_list, format_monitor_list, parse_edge_list};
use floc::oracle::{FailureSet, Oracle, OracleBudget, Probing};
use floc::topogen::{generate, place_monitors, GenSpec, ModelKind};
use floc::up::gen_paths_shortest;
use floc::{Adjacency, Topology};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Exact checks run only up to this many nodes in the page.
const PAGE_ORACLE_NODES: usize = 16;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn load(edges: &str, monitors: &str) -> Result<Topology, String> {
    let mut g = parse_edge_list(edges, Path::new("edges")).map_err(err)?.value;
    apply_monitor_list(&mut g, monitors, Path::new("monitors")).map_err(err)?;
    Ok(g)
}

#[derive(Deserialize)]
struct GenRequest {
    model: String,
    nodes: usize,
    links: f64,
    monitors: usize,
    seed: u64,
}

pub fn generate_json(request: &str) -> Result<String, String> {
    let req: GenRequest = serde_json::from_str(request).map_err(err)?;
    let model: ModelKind = req.model.parse().map_err(err)?;
    let spec = GenSpec::with_target(model, req.nodes, req.links, req.seed);
    let generated = generate(&spec).map_err(err)?;
    let g = place_monitors(generated.topology, req.monitors, req.seed).map_err(err)?;
    Ok(json!({
        "edges": format_edge_list(&g),
        "monitors": format_monitor_list(&g),
        "param": generated.param,
        "positions": generated.positions,
    })
    .to_string())
}

#[derive(Deserialize)]
struct AnalyzeRequest {
    edges: String,
    monitors: String,
}

pub fn analyze_json(request: &str) -> Result<String, String> {
    let req: AnalyzeRequest = serde_json::from_str(request).map_err(err)?;
    let g = load(&req.edges, &req.monitors)?;
    let opts = AnalyzeOptions {
        oracle_budget: PAGE_ORACLE_NODES,
        ..AnalyzeOptions::default()
    };
    let report = analyze_topology(&g, None, &opts).map_err(err)?;
    Ok(json!({
        "summary": report.summary,
        "csp": report.csp,
        "up": report.up,
        "oracle": report.oracle,
        "sets": report.sets,
        "warnings": report.warnings,
        "labels": g.labels(),
        "links": g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>(),
        "is_monitor": (0..g.node_count()).map(|v| g.is_monitor(v)).collect::<Vec<_>>(),
    })
    .to_string())
}

#[derive(Deserialize)]
struct DistinguishRequest {
    edges: String,
    monitors: String,
    a: Vec<String>,
    b: Vec<String>,
}

/// Whether each mechanism tells failure set `a` apart from `b`.
pub fn distinguish_json(request: &str) -> Result<String, String> {
    let req: DistinguishRequest = serde_json::from_str(request).map_err(err)?;
    let g = load(&req.edges, &req.monitors)?;
    let set = |labels: &[String]| -> Result<FailureSet, String> {
        let ids = labels
            .iter()
            .map(|l| g.id_of(l).map_err(err))
            .collect::<Result<Vec<_>, _>>()?;
        FailureSet::new(&g, ids).map_err(err)
    };
    let (a, b) = (set(&req.a)?, set(&req.b)?);
    let paths = gen_paths_shortest(&g).map_err(err)?;
    let budget = OracleBudget {
        max_nodes: PAGE_ORACLE_NODES,
        ..OracleBudget::default()
    };
    let mut out = serde_json::Map::new();
    for (name, probing) in [("CAP", Probing::Cap), ("CSP", Probing::CSP), ("UP", Probing::Up(&paths))] {
        let oracle = Oracle::new(&g, probing, budget).map_err(err)?;
        out.insert(name.into(), oracle.distinguishable(&a, &b).into());
    }
    Ok(serde_json::Value::Object(out).to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn generate_topology(request: &str) -> Result<String, JsValue> {
    to_js(generate_json(request))
}

#[wasm_bindgen]
pub fn analyze(request: &str) -> Result<String, JsValue> {
    to_js(analyze_json(request))
}

#[wasm_bindgen]
pub fn distinguish(request: &str) -> Result<String, JsValue> {
    to_js(distinguish_json(request))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const PATH_EDGES: &str = "m1 a\na b\nb m2\n";
    const PATH_MONITORS: &str = "m1\nm2\n";

    #[test]
    fn generate_round_trip() {
        let out = generate_json(r#"{"model":"RG","nodes":12,"links":24,"monitors":3,"seed":4}"#).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["monitors"].as_str().unwrap().lines().count(), 3);
        assert_eq!(v["positions"].as_array().unwrap().len(), 12);
        let req = json!({"edges": v["edges"], "monitors": v["monitors"]}).to_string();
        let rep: Value = serde_json::from_str(&analyze_json(&req).unwrap()).unwrap();
        assert_eq!(rep["summary"]["nodes"], 12);
        assert_eq!(rep["csp"].as_array().unwrap().len(), 2 * 9);
    }

    #[test]
    fn path_topology() {
        let req = json!({"edges": PATH_EDGES, "monitors": PATH_MONITORS}).to_string();
        let rep: Value = serde_json::from_str(&analyze_json(&req).unwrap()).unwrap();
        assert_eq!(rep["summary"]["sigma"], 2);
        // On a single path, one failure is invisible behind another.
        let d = |a: &[&str], b: &[&str]| -> Value {
            let req = json!({"edges": PATH_EDGES, "monitors": PATH_MONITORS, "a": a, "b": b}).to_string();
            serde_json::from_str(&distinguish_json(&req).unwrap()).unwrap()
        };
        let one = d(&["a"], &["a", "b"]);
        assert_eq!(one["CSP"], false);
        assert_eq!(one["UP"], false);
        assert_eq!(d(&[], &["a"])["CSP"], true);
    }

    #[test]
    fn errors_are_messages() {
        assert!(generate_json(r#"{"model":"XX","nodes":5,"links":4,"monitors":2,"seed":0}"#).is_err());
        let req = json!({"edges": PATH_EDGES, "monitors": PATH_MONITORS, "a": ["zz"], "b": []}).to_string();
        assert!(distinguish_json(&req).unwrap_err().contains("zz"));
        let req = json!({"edges": PATH_EDGES, "monitors": "m1\n"}).to_string();
        assert!(analyze_json(&req).is_err());
    }
}
