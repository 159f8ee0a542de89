//! Identifiability bounds under controllable simple-path probing (CSP) and
//! controllable arbitrary-path probing (CAP).
//!
//! Everything here reduces to capped vertex cuts between a non-monitor and
//! the virtual monitor `m'`, either in the graph with all monitors merged
//! (G*) or in the graph with one monitor deleted and the rest merged (G_m).
//! All cut values are capped at σ.
//!
//! π_v is `min(Γ_{G*}(v, m') − 1, min_m Γ_{G_m}(v, m'))`, so that the
//! per-node interval `[π_v − 1, π_v]` is the set-level sufficient/necessary
//! pair specialised to `{v}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{Applicability, IdentSetBounds, MechanismKind, OmegaInterval, Verdict};
use crate::error::{Error, Result};
use crate::graph::{
    build_g_m, build_gstar, vertex_connectivity, Adjacency, AuxGraph, CutValue, NodeId, Topology,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspNodeMetrics {
    pub node: NodeId,
    /// Γ_{G*}(v, m').
    pub gamma_star: CutValue,
    /// Γ_{G_m}(v, m') for every monitor m, in monitor id order.
    pub gamma_m: Vec<(NodeId, CutValue)>,
    pub pi: usize,
    pub sigma: usize,
}

impl CspNodeMetrics {
    /// Smallest Γ_{G_m} value and the monitor attaining it.
    pub fn gamma_gm_min(&self) -> (CutValue, NodeId) {
        min_with_arg(self.gamma_m.iter().copied()).expect("at least two monitors")
    }
}

fn min_with_arg(values: impl Iterator<Item = (NodeId, CutValue)>) -> Option<(CutValue, NodeId)> {
    values.fold(None, |best, (m, c)| match best {
        Some((b, _)) if b.value <= c.value => best,
        _ => Some((c, m)),
    })
}

/// Outcome of the σ- and (σ−1)-identifiability characterisations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaCases {
    pub sigma_identifiable: bool,
    pub sigma_minus_1_identifiable: bool,
    /// The unique non-monitor with one monitor neighbor that is adjacent to
    /// every other non-monitor while all others see two monitors, if any.
    pub s_tilde: BTreeSet<NodeId>,
    /// Exact maximum (σ−1)-identifiable set.
    pub s_csp_sigma_minus_1: BTreeSet<NodeId>,
}

/// Precomputed auxiliary graphs for one topology.
#[derive(Debug, Clone)]
pub struct CspAnalysis<'a> {
    g: &'a Topology,
    gstar: AuxGraph,
    g_m: Vec<(NodeId, AuxGraph)>,
}

impl<'a> CspAnalysis<'a> {
    /// Requires at least one monitor; the G_m family is only built when there
    /// are two or more.
    pub fn new(g: &'a Topology) -> Result<Self> {
        let gstar = build_gstar(g)?;
        let g_m = if g.monitor_count() >= 2 {
            g.monitors()
                .into_iter()
                .map(|m| build_g_m(g, m).map(|h| (m, h)))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(CspAnalysis { g, gstar, g_m })
    }

    pub fn topology(&self) -> &Topology {
        self.g
    }

    fn sigma(&self) -> usize {
        self.g.sigma()
    }

    fn check_set(&self, set: &[NodeId]) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        set.iter().try_for_each(|&v| self.g.check_non_monitor(v))
    }

    fn require_two_monitors(&self) -> Result<()> {
        let mu = self.g.monitor_count();
        if mu < 2 {
            Err(Error::TooFewMonitors(mu))
        } else {
            Ok(())
        }
    }

    fn cut_to_virtual(&self, h: &AuxGraph, v: NodeId) -> CutValue {
        let aux = h.aux_id(v).expect("non-monitor is present in every aux graph");
        vertex_connectivity(h, aux, h.virtual_monitor(), self.sigma())
            .expect("aux endpoints are valid and distinct")
    }

    /// Γ_{G*}(S, m') = min over v ∈ S.
    pub fn gamma_gstar(&self, set: &[NodeId]) -> Result<CutValue> {
        self.check_set(set)?;
        Ok(set
            .iter()
            .map(|&v| self.cut_to_virtual(&self.gstar, v))
            .reduce(CutValue::min)
            .expect("non-empty"))
    }

    /// min over monitors m and v ∈ S of Γ_{G_m}(v, m'), with the smallest
    /// monitor id attaining it.
    pub fn gamma_gm_min(&self, set: &[NodeId]) -> Result<(CutValue, NodeId)> {
        self.check_set(set)?;
        self.require_two_monitors()?;
        let per_monitor = self.g_m.iter().map(|(m, h)| {
            let c = set
                .iter()
                .map(|&v| self.cut_to_virtual(h, v))
                .reduce(CutValue::min)
                .expect("non-empty");
            (*m, c)
        });
        Ok(min_with_arg(per_monitor).expect("at least two monitors"))
    }

    pub fn node_metrics(&self, v: NodeId) -> Result<CspNodeMetrics> {
        self.g.check_non_monitor(v)?;
        self.require_two_monitors()?;
        let gamma_star = self.cut_to_virtual(&self.gstar, v);
        let gamma_m: Vec<_> = self.g_m.iter().map(|(m, h)| (*m, self.cut_to_virtual(h, v))).collect();
        let (gm_min, _) = min_with_arg(gamma_m.iter().copied()).expect("at least two monitors");
        Ok(CspNodeMetrics {
            node: v,
            pi: gamma_star.value.saturating_sub(1).min(gm_min.value),
            gamma_star,
            gamma_m,
            sigma: self.sigma(),
        })
    }

    pub fn pi(&self, v: NodeId) -> Result<usize> {
        Ok(self.node_metrics(v)?.pi)
    }

    /// Tri-state k-identifiability test for `set` under CSP.
    pub fn k_identifiable(&self, set: &[NodeId], k: usize) -> Result<Verdict> {
        self.check_set(set)?;
        let sigma = self.sigma();
        if k > sigma {
            return Err(Error::KOutOfRange { k, lo: 0, hi: sigma });
        }
        if k == 0 {
            return Ok(Verdict::Sufficient);
        }
        let cases = self.sigma_cases(set)?;
        let exact = |ok: bool| if ok { Verdict::Sufficient } else { Verdict::No };
        if k == sigma {
            return Ok(exact(cases.sigma_identifiable));
        }
        if k == sigma - 1 {
            return Ok(exact(cases.sigma_minus_1_identifiable));
        }
        let star = self.gamma_gstar(set)?.value;
        let (gm, _) = self.gamma_gm_min(set)?;
        Ok(if star >= k + 2 && gm.value >= k + 1 {
            Verdict::Sufficient
        } else if star < k + 1 || gm.value < k {
            Verdict::No
        } else {
            Verdict::Inconclusive
        })
    }

    /// Interval on Ω_CSP(v).
    pub fn omega_csp(&self, v: NodeId) -> Result<OmegaInterval> {
        let pi = self.pi(v)?;
        Ok(self.omega_csp_from_pi(v, pi))
    }

    /// Same as [`omega_csp`](Self::omega_csp) with an externally supplied π.
    pub fn omega_csp_from_pi(&self, v: NodeId, pi: usize) -> OmegaInterval {
        let sigma = self.sigma();
        let csp = MechanismKind::Csp;
        if pi + 2 <= sigma {
            return OmegaInterval::range(pi.saturating_sub(1), pi, csp, Applicability::InRange);
        }
        if self.g.monitor_neighbor_count(v) >= 2 {
            return OmegaInterval::exact(sigma, csp);
        }
        if self.s_tilde() == Some(v) {
            return OmegaInterval::exact(sigma - 1, csp);
        }
        let upper = pi.min(sigma);
        OmegaInterval::range(pi.saturating_sub(1).min(upper), upper, csp, Applicability::RangeExceeded)
    }

    /// Interval on Ω_CAP(v) from g = Γ_{G*}(v, m'): `[g − 1, g]`, promoted to
    /// exactly σ when v is adjacent to a monitor.
    pub fn omega_cap(&self, v: NodeId) -> Result<OmegaInterval> {
        self.g.check_non_monitor(v)?;
        let g = self.cut_to_virtual(&self.gstar, v);
        Ok(if g.capped {
            OmegaInterval::exact(self.sigma(), MechanismKind::Cap)
        } else {
            OmegaInterval::range(g.value.saturating_sub(1), g.value, MechanismKind::Cap, Applicability::InRange)
        })
    }

    /// Γ_{G*}(v, m') for a single node.
    pub fn gamma_star_node(&self, v: NodeId) -> Result<CutValue> {
        self.g.check_non_monitor(v)?;
        Ok(self.cut_to_virtual(&self.gstar, v))
    }

    /// Inner/outer bounds on S_CSP(k) for `1 ≤ k ≤ σ − 1`; exact at `σ − 1`.
    pub fn set_bounds(&self, k: usize) -> Result<IdentSetBounds> {
        let sigma = self.sigma();
        if k == 0 || k + 1 > sigma {
            return Err(Error::KOutOfRange {
                k,
                lo: 1,
                hi: sigma.saturating_sub(1),
            });
        }
        if k == sigma - 1 {
            let cases = self.sigma_cases(&[])?;
            return Ok(IdentSetBounds::exact(k, cases.s_csp_sigma_minus_1));
        }
        let pis = self
            .g
            .non_monitors()
            .into_iter()
            .map(|v| self.pi(v).map(|p| (v, p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(set_bounds_from_pi(k, &pis))
    }

    fn s_tilde(&self) -> Option<NodeId> {
        let g = self.g;
        let non_monitors = g.non_monitors();
        let weak: Vec<_> = non_monitors
            .iter()
            .copied()
            .filter(|&v| g.monitor_neighbor_count(v) < 2)
            .collect();
        match weak.as_slice() {
            [w] if g.monitor_neighbor_count(*w) == 1
                && non_monitors.iter().all(|&u| u == *w || g.has_edge(*w, u)) =>
            {
                Some(*w)
            }
            _ => None,
        }
    }

    /// σ- and (σ−1)-identifiability of `set` from monitor adjacency alone.
    /// An empty set is vacuously identifiable.
    pub fn sigma_cases(&self, set: &[NodeId]) -> Result<SigmaCases> {
        set.iter().try_for_each(|&v| self.g.check_non_monitor(v))?;
        let g = self.g;
        let two_monitors: BTreeSet<NodeId> = g
            .non_monitors()
            .into_iter()
            .filter(|&v| g.monitor_neighbor_count(v) >= 2)
            .collect();
        let s_tilde: BTreeSet<NodeId> = self.s_tilde().into_iter().collect();
        let s_csp_sigma_minus_1: BTreeSet<NodeId> = two_monitors.union(&s_tilde).copied().collect();
        Ok(SigmaCases {
            sigma_identifiable: set.iter().all(|v| two_monitors.contains(v)),
            sigma_minus_1_identifiable: set.iter().all(|v| s_csp_sigma_minus_1.contains(v)),
            s_tilde,
            s_csp_sigma_minus_1,
        })
    }
}

/// `inner = {π ≥ k + 1}`, `outer = {π ≥ k}`.
pub fn set_bounds_from_pi(k: usize, pis: &[(NodeId, usize)]) -> IdentSetBounds {
    IdentSetBounds {
        k,
        inner: pis.iter().filter(|&&(_, p)| p > k).map(|&(v, _)| v).collect(),
        outer: pis.iter().filter(|&&(_, p)| p >= k).map(|&(v, _)| v).collect(),
        exact: None,
    }
}

pub fn gamma_gstar(g: &Topology, set: &[NodeId]) -> Result<CutValue> {
    CspAnalysis::new(g)?.gamma_gstar(set)
}

pub fn gamma_gm_min(g: &Topology, set: &[NodeId]) -> Result<(CutValue, NodeId)> {
    CspAnalysis::new(g)?.gamma_gm_min(set)
}

pub fn pi_node(g: &Topology, v: NodeId) -> Result<usize> {
    CspAnalysis::new(g)?.pi(v)
}

pub fn csp_k_identifiable(g: &Topology, set: &[NodeId], k: usize) -> Result<Verdict> {
    CspAnalysis::new(g)?.k_identifiable(set, k)
}

pub fn omega_csp_bounds(g: &Topology, v: NodeId) -> Result<OmegaInterval> {
    CspAnalysis::new(g)?.omega_csp(v)
}

pub fn omega_cap_bounds(g: &Topology, v: NodeId) -> Result<OmegaInterval> {
    CspAnalysis::new(g)?.omega_cap(v)
}

pub fn s_csp_bounds(g: &Topology, k: usize) -> Result<IdentSetBounds> {
    CspAnalysis::new(g)?.set_bounds(k)
}

pub fn csp_sigma_cases(g: &Topology, set: &[NodeId]) -> Result<SigmaCases> {
    CspAnalysis::new(g)?.sigma_cases(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(g: &Topology, labels: &[&str]) -> Vec<NodeId> {
        labels.iter().map(|l| g.id_of(l).unwrap()).collect()
    }

    fn set(g: &Topology, labels: &[&str]) -> BTreeSet<NodeId> {
        ids(g, labels).into_iter().collect()
    }

    #[test]
    fn gamma_gstar_examples() {
        let k = fixtures::k();
        let n = k.non_monitors();
        assert_eq!(gamma_gstar(&k, &n).unwrap(), CutValue::capped_at(3));
        assert_eq!(gamma_gstar(&k, &ids(&k, &["a", "b"])).unwrap().value, 3);
        let ch = fixtures::chain();
        assert_eq!(gamma_gstar(&ch, &ids(&ch, &["a"])).unwrap(), CutValue::capped_at(2));
        assert!(matches!(gamma_gstar(&k, &ids(&k, &["m1"])), Err(Error::IsMonitor(_))));
        assert!(matches!(gamma_gstar(&k, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn gamma_gm_examples() {
        let k = fixtures::k();
        let (c, m) = gamma_gm_min(&k, &ids(&k, &["a"])).unwrap();
        assert_eq!((c.value, m), (1, k.id_of("m1").unwrap()));
        let (c, m) = gamma_gm_min(&k, &ids(&k, &["c"])).unwrap();
        assert_eq!((c.value, m), (2, k.id_of("m2").unwrap()));
        let p = fixtures::path();
        let (c, _) = gamma_gm_min(&p, &ids(&p, &["a"])).unwrap();
        assert_eq!(c, CutValue::capped_at(1));

        let single = Topology::from_edges(3, [(0, 1), (1, 2)]).unwrap().with_monitors(&[0]).unwrap();
        assert!(matches!(gamma_gm_min(&single, &[1]), Err(Error::TooFewMonitors(1))));
    }

    #[test]
    fn pi_examples() {
        let k = fixtures::k();
        assert_eq!(pi_node(&k, k.id_of("a").unwrap()).unwrap(), 1);
        assert_eq!(pi_node(&k, k.id_of("c").unwrap()).unwrap(), 2);
        let ch = fixtures::chain();
        assert_eq!(pi_node(&ch, ch.id_of("a").unwrap()).unwrap(), 1);
        assert!(matches!(pi_node(&k, k.id_of("m2").unwrap()), Err(Error::IsMonitor(_))));
    }

    #[test]
    fn tri_state_examples() {
        let k = fixtures::k();
        let n = k.non_monitors();
        assert_eq!(csp_k_identifiable(&k, &n, 1).unwrap(), Verdict::Inconclusive);
        assert_eq!(csp_k_identifiable(&k, &n, 0).unwrap(), Verdict::Sufficient);
        let ch = fixtures::chain();
        assert_eq!(csp_k_identifiable(&ch, &ch.non_monitors(), 1).unwrap(), Verdict::No);
        assert!(matches!(csp_k_identifiable(&k, &n, 4), Err(Error::KOutOfRange { .. })));
        assert!(matches!(csp_k_identifiable(&k, &[], 1), Err(Error::EmptySet)));
    }

    #[test]
    fn omega_csp_examples() {
        let k = fixtures::k();
        let a = omega_csp_bounds(&k, k.id_of("a").unwrap()).unwrap();
        assert_eq!((a.lower, a.upper, a.applicability), (0, 1, Applicability::InRange));
        let c = omega_csp_bounds(&k, k.id_of("c").unwrap()).unwrap();
        assert_eq!((c.lower, c.upper, c.applicability), (1, 2, Applicability::RangeExceeded));
        let p = fixtures::path();
        assert_eq!(
            omega_csp_bounds(&p, p.id_of("a").unwrap()).unwrap(),
            OmegaInterval::exact(1, MechanismKind::Csp)
        );
        let s = fixtures::star();
        assert_eq!(
            omega_csp_bounds(&s, s.id_of("w").unwrap()).unwrap(),
            OmegaInterval::exact(2, MechanismKind::Csp)
        );
    }

    #[test]
    fn omega_cap_examples() {
        let k = fixtures::k();
        assert_eq!(
            omega_cap_bounds(&k, k.id_of("a").unwrap()).unwrap(),
            OmegaInterval::exact(3, MechanismKind::Cap)
        );
        let ch = fixtures::chain();
        assert_eq!(
            omega_cap_bounds(&ch, ch.id_of("a").unwrap()).unwrap(),
            OmegaInterval::exact(2, MechanismKind::Cap)
        );
        // m1 – x – y with a single monitor
        let g = Topology::from_edges(3, [(0, 1), (1, 2)]).unwrap().with_monitors(&[0]).unwrap();
        let y = omega_cap_bounds(&g, 2).unwrap();
        assert_eq!((y.lower, y.upper, y.applicability), (0, 1, Applicability::InRange));
    }

    #[test]
    fn set_bound_examples() {
        let k = fixtures::k();
        let b = s_csp_bounds(&k, 1).unwrap();
        assert_eq!(b.inner, set(&k, &["c"]));
        assert_eq!(b.outer, set(&k, &["a", "b", "c"]));
        assert_eq!(b.exact, None);
        let b = s_csp_bounds(&k, 2).unwrap();
        assert_eq!(b.exact, Some(BTreeSet::new()));
        let ch = fixtures::chain();
        let b = s_csp_bounds(&ch, 1).unwrap();
        assert_eq!(b.exact, Some(BTreeSet::new()));
        assert!(s_csp_bounds(&k, 0).is_err());
        assert!(s_csp_bounds(&k, 3).is_err());
    }

    #[test]
    fn sigma_case_examples() {
        let p = fixtures::path();
        assert!(csp_sigma_cases(&p, &ids(&p, &["a"])).unwrap().sigma_identifiable);

        let s = fixtures::star();
        let cases = csp_sigma_cases(&s, &s.non_monitors()).unwrap();
        assert_eq!(cases.s_tilde, set(&s, &["w"]));
        assert_eq!(cases.s_csp_sigma_minus_1, set(&s, &["a", "b", "w"]));
        assert!(!cases.sigma_identifiable);
        assert!(cases.sigma_minus_1_identifiable);

        let k = fixtures::k();
        let cases = csp_sigma_cases(&k, &k.non_monitors()).unwrap();
        assert!(cases.s_tilde.is_empty());
        assert!(cases.s_csp_sigma_minus_1.is_empty());

        let empty = csp_sigma_cases(&k, &[]).unwrap();
        assert!(empty.sigma_identifiable && empty.sigma_minus_1_identifiable);
    }

    #[test]
    fn pi_is_definitional() {
        for (_, g) in fixtures::all() {
            let a = CspAnalysis::new(&g).unwrap();
            for v in g.non_monitors() {
                let m = a.node_metrics(v).unwrap();
                let star = a.gamma_gstar(&[v]).unwrap().value;
                let (gm, _) = a.gamma_gm_min(&[v]).unwrap();
                assert_eq!(m.pi, star.saturating_sub(1).min(gm.value));
                assert!(m.pi <= g.sigma());
            }
        }
    }
}
