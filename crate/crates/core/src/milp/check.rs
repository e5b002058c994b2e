use thiserror::Error;

use super::model::{Domain, Family, MilpModel, Sense, VarIdx, VarKey};
use crate::ecmp::{max_link_utilization, FlowAllocation, Router, WeightVector};
use crate::error::RoutingError;
use crate::model::{NfviGraph, NodeId, ServiceDemand};

/// Relative feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("candidate has no value for {0}")]
    MissingVariable(String),
    #[error("candidate was built for a different model ({got} values for {expected} variables)")]
    SizeMismatch { expected: usize, got: usize },
}

/// A value for every variable of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCandidate {
    values: Vec<Option<f64>>,
}

impl SolutionCandidate {
    pub fn empty(model: &MilpModel) -> Self {
        SolutionCandidate {
            values: vec![None; model.variables().len()],
        }
    }

    pub fn set(&mut self, i: VarIdx, value: f64) {
        self.values[i.0] = Some(value);
    }

    /// Sets the variable identified by `key`; returns false if the model
    /// has no such variable.
    pub fn set_key(&mut self, model: &MilpModel, key: VarKey, value: f64) -> bool {
        match model.var(key) {
            Some(i) => {
                self.set(i, value);
                true
            }
            None => false,
        }
    }

    pub fn get(&self, i: VarIdx) -> Option<f64> {
        self.values[i.0]
    }

    pub fn get_key(&self, model: &MilpModel, key: VarKey) -> Option<f64> {
        model.var(key).and_then(|i| self.get(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub family: Family,
    /// Row name as written to LP files.
    pub row: String,
    /// Amount by which the row is violated (positive).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainViolation {
    pub variable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<ConstraintViolation>,
    pub domain_violations: Vec<DomainViolation>,
    /// The candidate's value of `r`.
    pub objective: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && self.domain_violations.is_empty()
    }

    pub fn violations_of(&self, family: Family) -> impl Iterator<Item = &ConstraintViolation> {
        self.violations.iter().filter(move |v| v.family == family)
    }
}

/// Evaluates every constraint row and variable domain at `cand`.
pub fn check_solution(model: &MilpModel, cand: &SolutionCandidate) -> Result<FeasibilityReport, CheckError> {
    if cand.values.len() != model.variables().len() {
        return Err(CheckError::SizeMismatch {
            expected: model.variables().len(),
            got: cand.values.len(),
        });
    }
    if let Some(i) = cand.values.iter().position(Option::is_none) {
        return Err(CheckError::MissingVariable(model.variables()[i].key.to_string()));
    }
    let val = |i: VarIdx| cand.values[i.0].unwrap();

    let mut domain_violations = Vec::new();
    for (i, v) in model.variables().iter().enumerate() {
        let x = val(VarIdx(i));
        let ok = match v.domain {
            Domain::Continuous => x >= v.lower - FEASIBILITY_TOL,
            Domain::Integer => x >= v.lower - FEASIBILITY_TOL && (x - x.round()).abs() <= FEASIBILITY_TOL,
            Domain::Binary => x == 0.0 || x == 1.0,
        };
        if !ok || !x.is_finite() {
            domain_violations.push(DomainViolation {
                variable: v.key.to_string(),
                value: x,
            });
        }
    }

    let mut violations = Vec::new();
    for c in model.constraints() {
        let suffixes: &[&str] = if c.rows.len() == 2 { &["_lo", "_hi"] } else { &[""] };
        for (row, suffix) in c.rows.iter().zip(suffixes) {
            let mut activity = 0.0;
            let mut magnitude = 0.0;
            for &(v, k) in &row.terms {
                let t = k * val(v);
                activity += t;
                magnitude += t.abs();
            }
            let tol = FEASIBILITY_TOL * (1.0 + row.rhs.abs() + magnitude);
            let residual = match row.sense {
                Sense::Le => activity - row.rhs,
                Sense::Ge => row.rhs - activity,
                Sense::Eq => (activity - row.rhs).abs(),
            };
            if residual > tol {
                violations.push(ConstraintViolation {
                    family: c.family,
                    row: format!("{}{}", c.name, suffix),
                    residual,
                });
            }
        }
    }
    Ok(FeasibilityReport {
        violations,
        domain_violations,
        objective: val(model.objective()),
    })
}

/// Builds the candidate that ECMP routing with weights `w` induces for
/// `model`, which must have been built from the same `g` and `demands`.
///
/// Each demand is routed in full through its service chain; its traffic is
/// spread over the model's flows with [`crate::ecmp::DemandFlow::flow_rates`].
/// Distances to unreachable targets are set one above the largest finite
/// distance plus the largest weight.
pub fn candidate_from_routing(
    model: &MilpModel,
    g: &NfviGraph,
    demands: &[ServiceDemand],
    w: &WeightVector,
) -> Result<(SolutionCandidate, FlowAllocation), RoutingError> {
    let router = Router::new(g, w);
    let mut alloc = FlowAllocation::empty(g);
    for d in demands {
        alloc.extend(router.route(d, d.volume)?);
    }
    let mut cand = SolutionCandidate::empty(model);
    for e in g.link_ids() {
        cand.set_key(model, VarKey::Weight { link: e.0 }, f64::from(w.get(e)));
    }

    let field = router.field();
    let max_w = w.as_slice().iter().copied().max().unwrap_or(1);
    let far = g
        .node_ids()
        .flat_map(|v| g.node_ids().map(move |t| (v, t)))
        .filter_map(|(v, t)| field.distance(v, t))
        .max()
        .unwrap_or(0)
        + u64::from(max_w)
        + 1;
    for &t in model.destinations() {
        for v in g.node_ids().filter(|&v| v != t) {
            let l = field.distance(v, t).unwrap_or(far);
            cand.set_key(model, VarKey::Distance { node: v.0, target: t.0 }, l as f64);
        }
    }

    let p_count = model.flows_per_demand();
    let mut to_target = vec![vec![0.0; g.link_count()]; g.node_count()];
    for (di, (d, flow)) in demands.iter().zip(alloc.flows()).enumerate() {
        for (p, rates) in flow.flow_rates(g, p_count).into_iter().enumerate() {
            for (e, rate) in rates.into_iter().enumerate() {
                cand.set_key(model, VarKey::Flow { link: e, flow: p, demand: di }, rate);
                let used = if rate > 0.0 { 1.0 } else { 0.0 };
                cand.set_key(model, VarKey::Uses { link: e, flow: p, demand: di }, used);
                to_target[d.destination.0][e] += rate;
            }
        }
    }

    let dag = router.dag();
    for &t in model.destinations() {
        for e in g.link_ids() {
            let on = if dag.on_path(e, t) { 1.0 } else { 0.0 };
            cand.set_key(model, VarKey::OnPath { link: e.0, target: t.0 }, on);
        }
        for v in g.node_ids() {
            let share = share_towards(g, dag, &to_target[t.0], v, t);
            cand.set_key(model, VarKey::Share { node: v.0, target: t.0 }, share);
        }
    }
    let r = max_link_utilization(&alloc, g).max_utilization;
    cand.set(model.objective(), r);
    Ok((cand, alloc))
}

fn share_towards(g: &NfviGraph, dag: &crate::ecmp::EcmpDag, load: &[f64], v: NodeId, t: NodeId) -> f64 {
    dag.next_hops(g, v, t).map(|e| load[e.0]).fold(0.0, f64::max)
}
