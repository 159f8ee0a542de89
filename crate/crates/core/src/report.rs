//! Per-node CSV reports and JSON set listings.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::bounds::MechanismKind;
use crate::csp::CspAnalysis;
use crate::error::Result;
use crate::graph::{NodeId, Topology};
use crate::oracle::Oracle;
use crate::up::{UpAnalysis, UpMode};

pub const CSP_HEADER: [&str; 8] = [
    "node_label",
    "gamma_star",
    "gamma_gm_min",
    "pi",
    "omega_lower",
    "omega_upper",
    "applicability",
    "mechanism",
];
pub const UP_HEADER: [&str; 7] = ["node_label", "msc", "gsc", "d_max", "omega_lower", "omega_upper", "mode"];
pub const ORACLE_HEADER: [&str; 3] = ["node_label", "mechanism", "exact_omega"];

/// One CSP or CAP row. Both share Γ_{G*} and π; only the interval differs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CspRow {
    pub node_label: String,
    pub gamma_star: usize,
    pub gamma_gm_min: usize,
    pub pi: usize,
    pub omega_lower: usize,
    pub omega_upper: usize,
    pub applicability: String,
    pub mechanism: MechanismKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpRow {
    pub node_label: String,
    pub msc: usize,
    pub gsc: usize,
    pub d_max: usize,
    pub omega_lower: usize,
    pub omega_upper: usize,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRow {
    pub node_label: String,
    pub mechanism: MechanismKind,
    pub exact_omega: usize,
}

/// CSP then CAP row for every non-monitor, in node id order.
pub fn csp_rows(an: &CspAnalysis<'_>) -> Result<Vec<CspRow>> {
    let g = an.topology();
    let mut rows = Vec::new();
    for v in g.non_monitors() {
        let m = an.node_metrics(v)?;
        for iv in [an.omega_csp(v)?, an.omega_cap(v)?] {
            rows.push(CspRow {
                node_label: g.label(v).to_string(),
                gamma_star: m.gamma_star.value,
                gamma_gm_min: m.gamma_gm_min().0.value,
                pi: m.pi,
                omega_lower: iv.lower,
                omega_upper: iv.upper,
                applicability: iv.applicability.to_string(),
                mechanism: iv.mechanism,
            });
        }
    }
    Ok(rows)
}

/// One row per non-monitor and requested mode. `mode` records the mode
/// actually used, which differs from the requested one when the exact
/// cover search ran out of budget.
pub fn up_rows(g: &Topology, an: &UpAnalysis<'_>, modes: &[UpMode]) -> Result<Vec<UpRow>> {
    let mut rows = Vec::new();
    for v in g.non_monitors() {
        let m = an.metrics(v)?;
        for &mode in modes {
            let (iv, used) = an.omega(v, mode)?;
            rows.push(UpRow {
                node_label: g.label(v).to_string(),
                msc: m.msc,
                gsc: m.gsc,
                d_max: m.d_max,
                omega_lower: iv.lower,
                omega_upper: iv.upper,
                mode: used.to_string(),
            });
        }
    }
    Ok(rows)
}

pub fn oracle_rows(oracles: &[Oracle<'_>]) -> Vec<OracleRow> {
    let mut rows = Vec::new();
    for o in oracles {
        let g = o.topology();
        for (v, omega) in o.omega_all().into_iter().enumerate() {
            if let Some(exact_omega) = omega {
                rows.push(OracleRow {
                    node_label: g.label(v).to_string(),
                    mechanism: o.mechanism(),
                    exact_omega,
                });
            }
        }
    }
    rows
}

/// Writes `rows` as CSV with `header` always present and `\n` line ends.
pub fn write_csv<W: Write, T: Serialize>(out: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Labels of `set`, sorted.
pub fn sorted_labels(g: &Topology, set: &BTreeSet<NodeId>) -> Vec<String> {
    let mut labels: Vec<String> = set.iter().map(|&v| g.label(v).to_string()).collect();
    labels.sort();
    labels
}

/// JSON array of the sorted labels of `set`.
pub fn label_set_json(g: &Topology, set: &BTreeSet<NodeId>) -> String {
    serde_json::to_string(&sorted_labels(g, set)).expect("strings serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{OracleBudget, Probing};
    use crate::up::gen_paths_shortest;

    #[test]
    fn csp_report_for_k_fixture() {
        let g = fixtures::k();
        let an = CspAnalysis::new(&g).unwrap();
        let csv = csv_string(&CSP_HEADER, &csp_rows(&an).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSP_HEADER.join(","));
        assert_eq!(lines[1], "a,3,1,1,0,1,in-range,CSP");
        assert_eq!(lines[2], "a,3,1,1,3,3,exact,CAP");
        assert_eq!(lines.len(), 7);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn up_report_for_k_fixture() {
        let g = fixtures::k();
        let p = gen_paths_shortest(&g).unwrap();
        let an = UpAnalysis::new(&p);
        let rows = up_rows(&g, &an, &[UpMode::Original, UpMode::Relaxed]).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].msc, rows[0].omega_lower, rows[0].omega_upper), (1, 0, 1));
    }

    #[test]
    fn oracle_report_and_label_sets() {
        let g = fixtures::k();
        let o = Oracle::new(&g, Probing::CSP, OracleBudget::default()).unwrap();
        let csv = csv_string(&ORACLE_HEADER, &oracle_rows(&[o])).unwrap();
        assert_eq!(csv, "node_label,mechanism,exact_omega\na,CSP,1\nb,CSP,1\nc,CSP,1\n");
        let set: BTreeSet<_> = [3, 1].into();
        assert_eq!(label_set_json(&g, &set), r#"["a","c"]"#);
    }

    #[test]
    fn empty_report_keeps_header() {
        let rows: Vec<OracleRow> = Vec::new();
        assert_eq!(csv_string(&ORACLE_HEADER, &rows).unwrap(), "node_label,mechanism,exact_omega\n");
    }
}
