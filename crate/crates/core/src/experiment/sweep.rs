use std::collections::BTreeSet;

use super::config::{ExperimentConfig, UpModeSel};
use super::record::ResultRecord;
use super::RowContext;
use crate::bounds::{IdentSetBounds, MechanismKind};
use crate::csp::{set_bounds_from_pi, CspAnalysis};
use crate::error::Result;
use crate::graph::{NodeId, Topology};
use crate::oracle::{Oracle, OracleBudget, Probing};
use crate::up::{PathSet, UpAnalysis, UpMode};

/// Largest k reported for a topology with `sigma` non-monitors.
pub(crate) fn k_upper(k_max: Option<usize>, sigma: usize) -> usize {
    match k_max {
        Some(k) => k.min(sigma),
        None => sigma.saturating_sub(1),
    }
}

fn threshold_bounds(k: usize, intervals: &[(NodeId, usize, usize)]) -> IdentSetBounds {
    IdentSetBounds {
        k,
        inner: intervals.iter().filter(|t| t.1 >= k).map(|t| t.0).collect(),
        outer: intervals.iter().filter(|t| t.2 >= k).map(|t| t.0).collect(),
        exact: None,
    }
}

/// Bounds on the maximum k-identifiable set for k = 1..=k_hi, as
/// (metric prefix, bounds per k) families. UP in `both` mode yields two.
pub(crate) fn bound_families(
    g: &Topology,
    paths: &PathSet,
    mech: MechanismKind,
    up_mode: UpModeSel,
    k_hi: usize,
) -> Result<Vec<(&'static str, Vec<IdentSetBounds>)>> {
    let sigma = g.sigma();
    let nodes = g.non_monitors();
    let mut families: Vec<(&'static str, Vec<IdentSetBounds>)> = Vec::new();
    match mech {
        MechanismKind::Cap => {
            let csp = CspAnalysis::new(g)?;
            let iv = nodes
                .iter()
                .map(|&v| csp.omega_cap(v).map(|i| (v, i.lower, i.upper)))
                .collect::<Result<Vec<_>>>()?;
            families.push(("", (1..=k_hi).map(|k| threshold_bounds(k, &iv)).collect()));
        }
        MechanismKind::Csp => {
            let csp = CspAnalysis::new(g)?;
            let pis = nodes
                .iter()
                .map(|&v| csp.pi(v).map(|p| (v, p)))
                .collect::<Result<Vec<_>>>()?;
            let cases = csp.sigma_cases(&[])?;
            let two_monitors: BTreeSet<NodeId> =
                nodes.iter().copied().filter(|&v| g.monitor_neighbor_count(v) >= 2).collect();
            let bounds = (1..=k_hi)
                .map(|k| {
                    if k == sigma {
                        IdentSetBounds::exact(k, two_monitors.clone())
                    } else if k + 1 == sigma {
                        IdentSetBounds::exact(k, cases.s_csp_sigma_minus_1.clone())
                    } else {
                        set_bounds_from_pi(k, &pis)
                    }
                })
                .collect();
            families.push(("", bounds));
        }
        MechanismKind::Up => {
            let up = UpAnalysis::new(paths);
            let modes: &[(&str, UpMode)] = match up_mode {
                UpModeSel::Original => &[("", UpMode::Original)],
                UpModeSel::Relaxed => &[("", UpMode::Relaxed)],
                UpModeSel::Both => &[("", UpMode::Original), ("relaxed_", UpMode::Relaxed)],
            };
            for &(prefix, mode) in modes {
                let bounds = (1..=k_hi)
                    .map(|k| up.set_bounds(k, mode))
                    .collect::<Result<Vec<_>>>()?;
                families.push((prefix, bounds));
            }
        }
    }
    Ok(families)
}

pub(crate) fn oracle_for<'a>(
    g: &'a Topology,
    paths: &'a PathSet,
    mech: MechanismKind,
    monitor_transit: bool,
    budget: OracleBudget,
) -> Result<Oracle<'a>> {
    let probing = match mech {
        MechanismKind::Cap => Probing::Cap,
        MechanismKind::Csp => Probing::Csp { monitor_transit },
        MechanismKind::Up => Probing::Up(paths),
    };
    Oracle::new(g, probing, budget)
}

/// Set-size rows for k = 1..=k_upper: inner and outer bound sizes per
/// mechanism, and exact sizes when `with_oracle`.
pub(crate) fn sweep_topology(
    cfg: &ExperimentConfig,
    ctx: &RowContext<'_>,
    g: &Topology,
    paths: &PathSet,
    with_oracle: bool,
) -> Result<Vec<ResultRecord>> {
    let sigma = g.sigma();
    let k_hi = k_upper(cfg.k_max, sigma);
    let mut rows = Vec::new();
    if k_hi == 0 {
        return Ok(rows);
    }
    let budget = OracleBudget::with_max_nodes(cfg.oracle_budget);

    for &mech in &cfg.mechanisms {
        let name = mech.as_str();
        let exact: Option<Vec<Option<usize>>> = if with_oracle {
            let oracle = oracle_for(g, paths, mech, cfg.monitor_transit, budget)?;
            Some(oracle.omega_all())
        } else {
            None
        };

        let families = bound_families(g, paths, mech, cfg.up_mode, k_hi)?;
        for (prefix, bounds) in families {
            for b in bounds {
                let k = Some(b.k);
                rows.push(ctx.record(k, name, &format!("{prefix}inner_size"), b.inner.len() as f64));
                rows.push(ctx.record(k, name, &format!("{prefix}outer_size"), b.outer.len() as f64));
            }
        }
        if let Some(omega) = &exact {
            for k in 1..=k_hi {
                let size = omega.iter().filter(|o| o.is_some_and(|o| o >= k)).count();
                rows.push(ctx.record(Some(k), name, "exact_size", size as f64));
            }
        }
    }
    Ok(rows)
}
