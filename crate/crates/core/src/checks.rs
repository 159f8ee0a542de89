//! Cross-checks of the polynomial-time bounds against the oracle.
//!
//! [`check_instance`] runs every check on one topology and tallies the
//! outcomes; violations carry enough context (node, k, a confusable failure
//! pair when one exists) to reproduce them by hand.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{IdentSetBounds, Verdict};
use crate::cover::harmonic;
use crate::csp::{set_bounds_from_pi, CspAnalysis};
use crate::error::{Error, Result};
use crate::graph::{NodeId, Topology};
use crate::oracle::{FailureSet, Oracle, OracleBudget, Probing};
use crate::rng::{self, STREAM_INSTANCE};
use crate::topogen::{generate, place_monitors, GenSpec, ModelKind};
use crate::up::{gen_paths_shortest, UpAnalysis, UpMode, DEFAULT_COVER_BUDGET};

/// Deliberate defects used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Reports π + 1 instead of π.
    PiOffByOne,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub budget: OracleBudget,
    pub monitor_transit: bool,
    pub cover_budget: u64,
    pub fault: Fault,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: OracleBudget::default(),
            monitor_transit: true,
            cover_budget: DEFAULT_COVER_BUDGET,
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub detail: String,
    /// Two indistinguishable failure sets refuting a claimed bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<[Vec<String>; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

impl Tally {
    pub fn total(&self) -> u64 {
        self.passed + self.failed
    }

    fn add(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    fn merge(&mut self, other: Tally) {
        self.passed += other.passed;
        self.failed += other.failed;
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub tallies: BTreeMap<&'static str, Tally>,
    pub violations: Vec<Violation>,
    /// How often Ω_CAP equals the upper end g of its interval. Informative
    /// only; never counted as a violation.
    pub cap_upper_match: Tally,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn tally(&self, check: &str) -> Tally {
        self.tallies.get(check).copied().unwrap_or_default()
    }

    pub fn merge(&mut self, other: CheckReport) {
        for (k, t) in other.tallies {
            self.tallies.entry(k).or_default().merge(t);
        }
        self.violations.extend(other.violations);
        self.cap_upper_match.merge(other.cap_upper_match);
    }

    fn record(&mut self, check: &'static str, ok: bool, violation: impl FnOnce() -> Violation) {
        self.tallies.entry(check).or_default().add(ok);
        if !ok {
            self.violations.push(violation());
        }
    }
}

/// A failing topology together with what failed on it.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub edges: Vec<[String; 2]>,
    pub monitors: Vec<String>,
    pub violations: Vec<Violation>,
}

impl Counterexample {
    pub fn new(g: &Topology, violations: Vec<Violation>) -> Self {
        Counterexample {
            edges: g
                .edges()
                .map(|(u, v)| [g.label(u).to_string(), g.label(v).to_string()])
                .collect(),
            monitors: g.monitors().iter().map(|&m| g.label(m).to_string()).collect(),
            violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counterexample serializes")
    }
}

fn labels_of(g: &Topology, f: &FailureSet) -> Vec<String> {
    f.members().iter().map(|&v| g.label(v).to_string()).collect()
}

struct Ctx<'a> {
    g: &'a Topology,
    sigma: usize,
}

impl Ctx<'_> {
    fn violation(&self, check: &'static str, v: Option<NodeId>, k: Option<usize>, detail: String) -> Violation {
        Violation {
            check,
            node: v.map(|v| self.g.label(v).to_string()),
            k,
            detail,
            pair: None,
        }
    }

    /// Attaches a confusable pair showing `{v}` is not k-identifiable.
    fn with_pair(&self, mut viol: Violation, oracle: &Oracle<'_>, v: NodeId, k: usize) -> Violation {
        if k <= self.sigma {
            if let Ok(Some((a, b))) = oracle.confusable_pair(&[v], k) {
                viol.pair = Some([labels_of(self.g, &a), labels_of(self.g, &b)]);
            }
        }
        viol
    }

    fn label_set(&self, s: &BTreeSet<NodeId>) -> String {
        let labels: Vec<&str> = s.iter().map(|&v| self.g.label(v)).collect();
        format!("{{{}}}", labels.join(","))
    }
}

fn exact_set(omega: &[Option<usize>], k: usize) -> BTreeSet<NodeId> {
    omega
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_some_and(|o| o >= k))
        .map(|(v, _)| v)
        .collect()
}

/// Runs every bound-versus-oracle check on `g`.
pub fn check_instance(g: &Topology, opts: &CheckOptions) -> Result<CheckReport> {
    let mu = g.monitor_count();
    if mu < 2 {
        return Err(Error::TooFewMonitors(mu));
    }
    let sigma = g.sigma();
    let ctx = Ctx { g, sigma };
    let csp = CspAnalysis::new(g)?;
    let paths = gen_paths_shortest(g)?;
    let up = UpAnalysis::with_budget(&paths, opts.cover_budget);
    let o_cap = Oracle::new(g, Probing::Cap, opts.budget)?;
    let o_csp = Oracle::new(
        g,
        Probing::Csp {
            monitor_transit: opts.monitor_transit,
        },
        opts.budget,
    )?;
    let o_up = Oracle::new(g, Probing::Up(&paths), opts.budget)?;
    let w_cap = o_cap.omega_all();
    let w_csp = o_csp.omega_all();
    let w_up = o_up.omega_all();

    let mut rep = CheckReport::default();
    let nodes = g.non_monitors();
    let mut pis = Vec::with_capacity(nodes.len());

    for &v in &nodes {
        let (ex_cap, ex_csp, ex_up) = (w_cap[v].unwrap(), w_csp[v].unwrap(), w_up[v].unwrap());

        // CSP
        let metrics = csp.node_metrics(v)?;
        let pi = match opts.fault {
            Fault::None => metrics.pi,
            Fault::PiOffByOne => metrics.pi + 1,
        };
        pis.push((v, pi));
        if pi + 2 <= sigma {
            let ok = pi.saturating_sub(1) <= ex_csp && ex_csp <= pi;
            rep.record("csp_sandwich", ok, || {
                let viol = ctx.violation("csp_sandwich", Some(v), None, format!("pi = {pi}, exact = {ex_csp}"));
                ctx.with_pair(viol, &o_csp, v, ex_csp + 1)
            });
        }
        let iv = csp.omega_csp_from_pi(v, pi);
        rep.record("csp_interval", iv.contains(ex_csp), || {
            let viol = ctx.violation(
                "csp_interval",
                Some(v),
                None,
                format!("[{}, {}] ({}), exact = {ex_csp}", iv.lower, iv.upper, iv.applicability),
            );
            ctx.with_pair(viol, &o_csp, v, ex_csp + 1)
        });

        // UP
        let cm = up.metrics(v)?;
        let (iv, _) = up.omega(v, UpMode::Original)?;
        let ok = iv.contains(ex_up) && (cm.msc != sigma || ex_up == sigma);
        rep.record("up_sandwich", ok, || {
            let viol = ctx.violation("up_sandwich", Some(v), None, format!("msc = {}, exact = {ex_up}", cm.msc));
            ctx.with_pair(viol, &o_up, v, ex_up + 1)
        });
        let (riv, _) = up.omega(v, UpMode::Relaxed)?;
        rep.record("up_relaxed_interval", riv.contains(ex_up), || {
            ctx.violation(
                "up_relaxed_interval",
                Some(v),
                None,
                format!("[{}, {}], exact = {ex_up}", riv.lower, riv.upper),
            )
        });
        let greedy_ok = cm.msc <= cm.gsc && cm.gsc as f64 <= harmonic(cm.d_max) * cm.msc as f64 + 1e-9;
        let greedy_ok = greedy_ok || cm.msc == sigma || cm.msc == 0;
        rep.record("greedy_guarantee", !cm.msc_exact || greedy_ok, || {
            ctx.violation(
                "greedy_guarantee",
                Some(v),
                None,
                format!("msc = {}, gsc = {}, d_max = {}", cm.msc, cm.gsc, cm.d_max),
            )
        });

        // CAP
        let gs = csp.gamma_star_node(v)?;
        let ok = if gs.capped {
            ex_cap == sigma
        } else {
            gs.value.saturating_sub(1) <= ex_cap && ex_cap <= gs.value
        };
        rep.record("cap_interval", ok, || {
            let viol = ctx.violation(
                "cap_interval",
                Some(v),
                None,
                format!("g = {} (capped: {}), exact = {ex_cap}", gs.value, gs.capped),
            );
            ctx.with_pair(viol, &o_cap, v, ex_cap + 1)
        });
        rep.cap_upper_match.add(csp.omega_cap(v)?.upper == ex_cap);

        // Mechanism ordering.
        let ordered = ex_csp <= ex_cap && (!opts.monitor_transit || ex_up <= ex_csp);
        rep.record("mechanism_order", ordered, || {
            ctx.violation(
                "mechanism_order",
                Some(v),
                None,
                format!("UP = {ex_up}, CSP = {ex_csp}, CAP = {ex_cap}"),
            )
        });

        // Tri-state tests never contradict the oracle.
        for k in 1..=sigma {
            for (name, verdict, exact) in [
                ("csp_verdict", csp.k_identifiable(&[v], k)?, ex_csp),
                ("up_verdict", up.k_identifiable(&[v], k)?, ex_up),
            ] {
                let ok = match verdict {
                    Verdict::Sufficient => exact >= k,
                    Verdict::No => exact < k,
                    Verdict::Inconclusive => true,
                };
                rep.record(name, ok, || {
                    ctx.violation(name, Some(v), Some(k), format!("{verdict:?}, exact = {exact}"))
                });
            }
        }

        // σ and σ − 1 characterizations, per node.
        let cases = csp.sigma_cases(&[v])?;
        if sigma >= 1 {
            rep.record("sigma_case", cases.sigma_identifiable == (ex_csp >= sigma), || {
                ctx.violation(
                    "sigma_case",
                    Some(v),
                    Some(sigma),
                    format!("test = {}, exact = {ex_csp}", cases.sigma_identifiable),
                )
            });
        }
        if sigma >= 2 {
            rep.record(
                "sigma_minus_1_case",
                cases.sigma_minus_1_identifiable == (ex_csp + 1 >= sigma),
                || {
                    ctx.violation(
                        "sigma_minus_1_case",
                        Some(v),
                        Some(sigma - 1),
                        format!("test = {}, exact = {ex_csp}", cases.sigma_minus_1_identifiable),
                    )
                },
            );
        }
    }

    // σ and σ − 1 characterizations for the whole of N.
    if sigma >= 1 {
        let cases = csp.sigma_cases(&nodes)?;
        let exact = o_csp.k_identifiable(&nodes, sigma)?;
        rep.record("sigma_case", cases.sigma_identifiable == exact, || {
            ctx.violation("sigma_case", None, Some(sigma), format!("whole set: test = {}, exact = {exact}", cases.sigma_identifiable))
        });
        if sigma >= 2 {
            let exact = o_csp.k_identifiable(&nodes, sigma - 1)?;
            rep.record("sigma_minus_1_case", cases.sigma_minus_1_identifiable == exact, || {
                ctx.violation(
                    "sigma_minus_1_case",
                    None,
                    Some(sigma - 1),
                    format!("whole set: test = {}, exact = {exact}", cases.sigma_minus_1_identifiable),
                )
            });
        }
    }

    // Set-level containments.
    for k in 1..sigma {
        let csp_bounds = match opts.fault {
            Fault::None => csp.set_bounds(k)?,
            Fault::PiOffByOne => set_bounds_from_pi(k, &pis),
        };
        let cap_bounds = {
            let mut b = IdentSetBounds {
                k,
                inner: BTreeSet::new(),
                outer: BTreeSet::new(),
                exact: None,
            };
            for &v in &nodes {
                let iv = csp.omega_cap(v)?;
                if iv.lower >= k {
                    b.inner.insert(v);
                }
                if iv.upper >= k {
                    b.outer.insert(v);
                }
            }
            b
        };
        let up_bounds = up.set_bounds(k, UpMode::Original)?;
        for (name, bounds, omega, oracle) in [
            ("csp_containment", &csp_bounds, &w_csp, &o_csp),
            ("up_containment", &up_bounds, &w_up, &o_up),
            ("cap_containment", &cap_bounds, &w_cap, &o_cap),
        ] {
            let exact = exact_set(omega, k);
            rep.record(name, bounds.brackets(&exact), || {
                let viol = ctx.violation(
                    name,
                    None,
                    Some(k),
                    format!(
                        "inner {} exact {} outer {}",
                        ctx.label_set(&bounds.inner),
                        ctx.label_set(&exact),
                        ctx.label_set(&bounds.outer)
                    ),
                );
                match bounds.inner.difference(&exact).next() {
                    Some(&v) => ctx.with_pair(viol, oracle, v, k),
                    None => viol,
                }
            });
            let witness = oracle.witness_inner_set(k);
            rep.record("witness_containment", witness.is_subset(&exact), || {
                ctx.violation(
                    "witness_containment",
                    None,
                    Some(k),
                    format!(
                        "{}: witness set {} exact {}",
                        oracle.mechanism(),
                        ctx.label_set(&witness),
                        ctx.label_set(&exact)
                    ),
                )
            });
        }
    }
    Ok(rep)
}

/// Parameter range sampled for oracle-scale instances of each model.
fn sample_param<R: Rng>(model: ModelKind, rng: &mut R) -> f64 {
    match model {
        ModelKind::Er => rng.gen_range(0.25..=0.6),
        ModelKind::Rg => rng.gen_range(0.4..=0.9),
        ModelKind::Ba => rng.gen_range(1..=3) as f64,
        ModelKind::Rpl => rng.gen_range(0.8..=1.6),
    }
}

/// Range of node counts drawn by [`random_instance`].
pub const INSTANCE_NODES: std::ops::RangeInclusive<usize> = 6..=10;
/// Range of monitor counts drawn by [`random_instance`].
pub const INSTANCE_MONITORS: std::ops::RangeInclusive<usize> = 2..=4;

/// A random connected instance with n ∈ [6, 10] and μ ∈ [2, 4].
pub fn random_instance(model: ModelKind, seed: u64) -> Result<Topology> {
    random_instance_with(model, None, None, &[], seed)
}

/// Like [`random_instance`], with n, the generator parameter or the μ
/// choices pinned where given. μ is capped at n.
pub fn random_instance_with(
    model: ModelKind,
    n: Option<usize>,
    param: Option<f64>,
    mu_choices: &[usize],
    seed: u64,
) -> Result<Topology> {
    let mut rng = rng::stream(seed, STREAM_INSTANCE);
    let drawn_n = rng.gen_range(INSTANCE_NODES);
    let drawn_mu = rng.gen_range(INSTANCE_MONITORS);
    let drawn_param = sample_param(model, &mut rng);
    let n = n.unwrap_or(drawn_n);
    let mu = if mu_choices.is_empty() {
        drawn_mu
    } else {
        mu_choices[rng.gen_range(0..mu_choices.len())]
    };
    let g = generate(&GenSpec::new(model, n, param.unwrap_or(drawn_param), seed))?.topology;
    place_monitors(g, mu.min(n), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::Adjacency;

    #[test]
    fn fixtures_pass_every_check() {
        for (name, g) in fixtures::all() {
            let rep = check_instance(&g, &CheckOptions::default()).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.violations);
            assert!(rep.tally("csp_interval").total() > 0);
        }
    }

    #[test]
    fn random_instances_pass() {
        for i in 0..20 {
            let model = [ModelKind::Er, ModelKind::Ba][i % 2];
            let g = random_instance(model, i as u64).unwrap();
            assert!((6..=10).contains(&g.node_count()));
            assert!((2..=4).contains(&g.monitor_count()));
            let rep = check_instance(&g, &CheckOptions::default()).unwrap();
            assert!(rep.passed(), "instance {i}: {:?}", rep.violations);
        }
    }

    #[test]
    fn pi_fault_is_caught_with_a_pair() {
        let mut caught = false;
        for i in 0..20 {
            let g = random_instance(ModelKind::Er, i).unwrap();
            let opts = CheckOptions {
                fault: Fault::PiOffByOne,
                ..CheckOptions::default()
            };
            let rep = check_instance(&g, &opts).unwrap();
            if let Some(v) = rep.violations.iter().find(|v| v.pair.is_some()) {
                let dump = Counterexample::new(&g, vec![v.clone()]).to_json();
                assert!(dump.contains("\"pair\""));
                caught = true;
                break;
            }
        }
        assert!(caught);
    }
}
