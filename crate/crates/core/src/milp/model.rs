use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::ModelError;
use crate::model::{LinkId, NfviGraph, NodeId, ServiceDemand};

/// Lower bound used in place of the strict `> 0` of the VNF-traversal and
/// non-empty-flow constraints, as a fraction of the demand volume.
pub const STRICT_DELTA: f64 = 1e-4;

/// Identity of a model variable. Indices are positions in the graph's node
/// and link lists and in the demand list passed to [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// `w_e`
    Weight { link: usize },
    /// `l_vt`, shortest distance from `node` to `target` (`node != target`).
    Distance { node: usize, target: usize },
    /// `x_epd`
    Flow { link: usize, flow: usize, demand: usize },
    /// `g_vt`
    Share { node: usize, target: usize },
    /// `u_et`
    OnPath { link: usize, target: usize },
    /// `b_epd`
    Uses { link: usize, flow: usize, demand: usize },
    /// `r`
    MaxUtilization,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::Weight { link } => write!(f, "w_{link}"),
            VarKey::Distance { node, target } => write!(f, "l_{node}_{target}"),
            VarKey::Flow { link, flow, demand } => write!(f, "x_{link}_{flow}_{demand}"),
            VarKey::Share { node, target } => write!(f, "g_{node}_{target}"),
            VarKey::OnPath { link, target } => write!(f, "u_{link}_{target}"),
            VarKey::Uses { link, flow, demand } => write!(f, "b_{link}_{flow}_{demand}"),
            VarKey::MaxUtilization => f.write_str("r"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub domain: Domain,
    pub lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarIdx(pub usize);

/// Constraint family, numbered as in the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    FlowBalanceRelay = 1,
    FlowBalanceSource = 2,
    FlowBalanceSink = 3,
    LinkCapacity = 4,
    EcmpSplit = 5,
    OffPathZero = 6,
    PathLength = 7,
    WeightBound = 8,
    VnfTraversal = 9,
    FlowNonEmpty = 10,
    FlowUsesLink = 11,
    FlowContinuesLower = 12,
    FlowContinuesUpper = 13,
    NodeCapacity = 14,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::FlowBalanceRelay,
        Family::FlowBalanceSource,
        Family::FlowBalanceSink,
        Family::LinkCapacity,
        Family::EcmpSplit,
        Family::OffPathZero,
        Family::PathLength,
        Family::WeightBound,
        Family::VnfTraversal,
        Family::FlowNonEmpty,
        Family::FlowUsesLink,
        Family::FlowContinuesLower,
        Family::FlowContinuesUpper,
        Family::NodeCapacity,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Family> {
        Family::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// One linear row `sum(terms) <sense> rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub terms: Vec<(VarIdx, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A logical constraint: one row, or two for double-sided constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: Family,
    pub name: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    index: HashMap<VarKey, VarIdx>,
    constraints: Vec<Constraint>,
    objective: VarIdx,
    big_m: f64,
    delta: f64,
    flows_per_demand: usize,
    destinations: Vec<NodeId>,
    demand_count: usize,
}

impl MilpModel {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: VarIdx) -> &Variable {
        &self.variables[i.0]
    }

    pub fn var(&self, key: VarKey) -> Option<VarIdx> {
        self.index.get(&key).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// The variable minimized (`r`).
    pub fn objective(&self) -> VarIdx {
        self.objective
    }

    /// `M_z`, the largest link capacity.
    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn flows_per_demand(&self) -> usize {
        self.flows_per_demand
    }

    /// Distinct demand destinations `T`, ascending.
    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    pub fn demand_count(&self) -> usize {
        self.demand_count
    }

    /// Logical constraint count per family (families without rows omitted).
    pub fn count_by_family(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            *out.entry(c.family).or_insert(0) += 1;
        }
        out
    }

    pub fn count_variables(&self, pred: impl Fn(&VarKey) -> bool) -> usize {
        self.variables.iter().filter(|v| pred(&v.key)).count()
    }
}

/// Closed-form logical constraint counts for `demands` on `g`.
pub fn expected_counts(
    g: &NfviGraph,
    demands: &[ServiceDemand],
    flows_per_demand: usize,
) -> BTreeMap<Family, usize> {
    let n = g.node_count();
    let e = g.link_count();
    let m = demands.len();
    let p = flows_per_demand;
    let mut t: Vec<NodeId> = demands.iter().map(|d| d.destination).collect();
    t.sort();
    t.dedup();
    let positive: Vec<&ServiceDemand> = demands.iter().filter(|d| d.volume > 0.0).collect();
    let per_demand = if m > 0 { 1 } else { 0 };
    let counts = [
        (Family::FlowBalanceRelay, m * n.saturating_sub(2)),
        (Family::FlowBalanceSource, m),
        (Family::FlowBalanceSink, m),
        (Family::LinkCapacity, e * per_demand),
        (Family::EcmpSplit, e * t.len()),
        (Family::OffPathZero, m * e),
        (Family::PathLength, m * e),
        (Family::WeightBound, e),
        (
            Family::VnfTraversal,
            positive.iter().map(|d| d.chain.len() * p).sum(),
        ),
        (Family::FlowNonEmpty, positive.len() * p),
        (Family::FlowUsesLink, m * p * e),
        (Family::FlowContinuesLower, m * p * e),
        (Family::FlowContinuesUpper, m * p * e),
        (Family::NodeCapacity, n * per_demand),
    ];
    counts.into_iter().filter(|&(_, c)| c > 0).collect()
}

struct Builder {
    variables: Vec<Variable>,
    index: HashMap<VarKey, VarIdx>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn add_var(&mut self, key: VarKey, domain: Domain, lower: f64) -> VarIdx {
        let i = VarIdx(self.variables.len());
        self.variables.push(Variable { key, domain, lower });
        self.index.insert(key, i);
        i
    }

    fn v(&self, key: VarKey) -> VarIdx {
        self.index[&key]
    }

    fn push(&mut self, family: Family, name: String, rows: Vec<Row>) {
        self.constraints.push(Constraint { family, name, rows });
    }
}

fn row(terms: Vec<(VarIdx, f64)>, sense: Sense, rhs: f64) -> Row {
    Row {
        terms: terms.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        sense,
        rhs,
    }
}

/// Builds the load-balancing MILP for `demands` on `g` with
/// `flows_per_demand` flows per demand.
pub fn build_model(
    g: &NfviGraph,
    demands: &[ServiceDemand],
    flows_per_demand: usize,
) -> Result<MilpModel, ModelError> {
    for d in demands {
        d.validate(g)?;
    }
    if flows_per_demand == 0 {
        return Err(ModelError::InvalidDemand {
            id: 0,
            reason: "flows per demand must be positive".into(),
        });
    }
    let n = g.node_count();
    let links = g.link_count();
    let p_count = flows_per_demand;
    let m = demands.len();
    let big_m = g.max_link_capacity();
    let delta = STRICT_DELTA;
    let mut targets: Vec<NodeId> = demands.iter().map(|d| d.destination).collect();
    targets.sort();
    targets.dedup();

    let mut b = Builder {
        variables: Vec::new(),
        index: HashMap::new(),
        constraints: Vec::new(),
    };
    for e in 0..links {
        b.add_var(VarKey::Weight { link: e }, Domain::Integer, 1.0);
    }
    for &t in &targets {
        for v in (0..n).filter(|&v| v != t.0) {
            b.add_var(VarKey::Distance { node: v, target: t.0 }, Domain::Integer, 0.0);
        }
    }
    for d in 0..m {
        for p in 0..p_count {
            for e in 0..links {
                b.add_var(VarKey::Flow { link: e, flow: p, demand: d }, Domain::Continuous, 0.0);
            }
        }
    }
    for &t in &targets {
        for v in 0..n {
            b.add_var(VarKey::Share { node: v, target: t.0 }, Domain::Continuous, 0.0);
        }
    }
    for &t in &targets {
        for e in 0..links {
            b.add_var(VarKey::OnPath { link: e, target: t.0 }, Domain::Binary, 0.0);
        }
    }
    for d in 0..m {
        for p in 0..p_count {
            for e in 0..links {
                b.add_var(VarKey::Uses { link: e, flow: p, demand: d }, Domain::Binary, 0.0);
            }
        }
    }
    let r = b.add_var(VarKey::MaxUtilization, Domain::Continuous, 0.0);

    let x = |e: LinkId, p: usize, d: usize| VarKey::Flow { link: e.0, flow: p, demand: d };
    let flows_out = |b: &Builder, v: NodeId, d: usize, coef: f64| -> Vec<(VarIdx, f64)> {
        let mut t = Vec::new();
        for p in 0..p_count {
            for &e in g.out_links(v) {
                t.push((b.v(x(e, p, d)), coef));
            }
        }
        t
    };
    let flows_in = |b: &Builder, v: NodeId, d: usize, coef: f64| -> Vec<(VarIdx, f64)> {
        let mut t = Vec::new();
        for p in 0..p_count {
            for &e in g.in_links(v) {
                t.push((b.v(x(e, p, d)), coef));
            }
        }
        t
    };

    // families 1-3: flow balance
    for (di, d) in demands.iter().enumerate() {
        for v in g.node_ids().filter(|&v| v != d.source && v != d.destination) {
            let mut terms = flows_out(&b, v, di, 1.0);
            terms.extend(flows_in(&b, v, di, -1.0));
            b.push(
                Family::FlowBalanceRelay,
                format!("c1_d{di}_v{}", v.0),
                vec![row(terms, Sense::Eq, 0.0)],
            );
        }
        let out = flows_out(&b, d.source, di, 1.0);
        b.push(
            Family::FlowBalanceSource,
            format!("c2_d{di}"),
            vec![row(out, Sense::Eq, d.volume)],
        );
        let inn = flows_in(&b, d.destination, di, 1.0);
        b.push(
            Family::FlowBalanceSink,
            format!("c3_d{di}"),
            vec![row(inn, Sense::Eq, d.volume)],
        );
    }

    // family 4: link capacity
    if m > 0 {
        for e in g.link_ids() {
            let mut terms = Vec::new();
            for d in 0..m {
                for p in 0..p_count {
                    terms.push((b.v(x(e, p, d)), 1.0));
                }
            }
            terms.push((r, -g.link(e).capacity));
            b.push(
                Family::LinkCapacity,
                format!("c4_e{}", e.0),
                vec![row(terms, Sense::Le, 0.0)],
            );
        }
    }

    // family 5: ECMP equal split towards each destination
    for &t in &targets {
        let bound: f64 = demands
            .iter()
            .filter(|d| d.destination == t)
            .map(|d| d.volume)
            .sum();
        for e in g.link_ids() {
            let share = b.v(VarKey::Share { node: g.link(e).from.0, target: t.0 });
            let u = b.v(VarKey::OnPath { link: e.0, target: t.0 });
            let mut base = vec![(share, 1.0)];
            for (di, _) in demands.iter().enumerate().filter(|(_, d)| d.destination == t) {
                for p in 0..p_count {
                    base.push((b.v(x(e, p, di)), -1.0));
                }
            }
            let mut upper = base.clone();
            upper.push((u, bound));
            b.push(
                Family::EcmpSplit,
                format!("c5_e{}_t{}", e.0, t.0),
                vec![row(base, Sense::Ge, 0.0), row(upper, Sense::Le, bound)],
            );
        }
    }

    // families 6-7: shortest-path routing
    for (di, d) in demands.iter().enumerate() {
        let t = d.destination;
        for e in g.link_ids() {
            let u = b.v(VarKey::OnPath { link: e.0, target: t.0 });
            let mut terms: Vec<(VarIdx, f64)> =
                (0..p_count).map(|p| (b.v(x(e, p, di)), 1.0)).collect();
            terms.push((u, -d.volume));
            b.push(
                Family::OffPathZero,
                format!("c6_d{di}_e{}", e.0),
                vec![row(terms, Sense::Le, 0.0)],
            );
        }
    }
    for (di, d) in demands.iter().enumerate() {
        let t = d.destination;
        for e in g.link_ids() {
            let link = g.link(e);
            let u = b.v(VarKey::OnPath { link: e.0, target: t.0 });
            // l_{j t} + w_e - l_{i t}, with l_{t t} = 0
            let mut slack = Vec::new();
            if link.to != t {
                slack.push((b.v(VarKey::Distance { node: link.to.0, target: t.0 }), 1.0));
            }
            slack.push((b.v(VarKey::Weight { link: e.0 }), 1.0));
            if link.from != t {
                slack.push((b.v(VarKey::Distance { node: link.from.0, target: t.0 }), -1.0));
            }
            let mut lower = slack.clone();
            lower.push((u, 1.0));
            let mut upper = slack;
            upper.push((u, big_m));
            b.push(
                Family::PathLength,
                format!("c7_d{di}_e{}", e.0),
                vec![row(lower, Sense::Ge, 1.0), row(upper, Sense::Le, big_m)],
            );
        }
    }

    // family 8: weight bound
    for e in 0..links {
        let w = b.v(VarKey::Weight { link: e });
        b.push(
            Family::WeightBound,
            format!("c8_e{e}"),
            vec![row(vec![(w, 1.0)], Sense::Ge, 1.0)],
        );
    }

    // families 9-10: every flow of a positive demand touches each chain function
    for (di, d) in demands.iter().enumerate().filter(|(_, d)| d.volume > 0.0) {
        for (i, &f) in d.chain.iter().enumerate() {
            for p in 0..p_count {
                let terms = g
                    .link_ids()
                    .map(|e| {
                        let l = g.link(e);
                        let k = f64::from(u8::from(g.can_host(l.from, f)))
                            + f64::from(u8::from(g.can_host(l.to, f)));
                        (b.v(x(e, p, di)), k)
                    })
                    .collect();
                b.push(
                    Family::VnfTraversal,
                    format!("c9_d{di}_i{i}_p{p}"),
                    vec![row(terms, Sense::Ge, delta * d.volume)],
                );
            }
        }
    }
    for (di, d) in demands.iter().enumerate().filter(|(_, d)| d.volume > 0.0) {
        for p in 0..p_count {
            let terms = g.link_ids().map(|e| (b.v(x(e, p, di)), 1.0)).collect();
            b.push(
                Family::FlowNonEmpty,
                format!("c10_d{di}_p{p}"),
                vec![row(terms, Sense::Ge, delta * d.volume)],
            );
        }
    }

    // families 11-13: flows continue link by link
    for (di, d) in demands.iter().enumerate() {
        for p in 0..p_count {
            for e in g.link_ids() {
                let xe = b.v(x(e, p, di));
                let be = b.v(VarKey::Uses { link: e.0, flow: p, demand: di });
                b.push(
                    Family::FlowUsesLink,
                    format!("c11_d{di}_e{}_p{p}", e.0),
                    vec![row(vec![(xe, 1.0), (be, -big_m)], Sense::Le, 0.0)],
                );
            }
        }
        for p in 0..p_count {
            for e in g.link_ids() {
                let from = g.link(e).from;
                let mut terms = vec![(b.v(x(e, p, di)), 1.0)];
                terms.extend(g.in_links(from).iter().map(|&e2| (b.v(x(e2, p, di)), -1.0)));
                terms.push((b.v(VarKey::Uses { link: e.0, flow: p, demand: di }), -big_m));
                b.push(
                    Family::FlowContinuesLower,
                    format!("c12_d{di}_e{}_p{p}", e.0),
                    vec![row(terms, Sense::Ge, -big_m)],
                );
            }
        }
        for p in 0..p_count {
            for e in g.link_ids() {
                let from = g.link(e).from;
                let mut terms = vec![(b.v(x(e, p, di)), 1.0)];
                terms.extend(g.in_links(from).iter().map(|&e2| (b.v(x(e2, p, di)), -1.0)));
                // the source has no upstream link; its injected volume bounds the flow
                let rhs = if from == d.source { d.volume } else { 0.0 };
                b.push(
                    Family::FlowContinuesUpper,
                    format!("c13_d{di}_e{}_p{p}", e.0),
                    vec![row(terms, Sense::Le, rhs)],
                );
            }
        }
    }

    // family 14: node compute capacity
    if m > 0 {
        for v in g.node_ids() {
            let mut terms = Vec::new();
            for (di, d) in demands.iter().enumerate() {
                let per_unit: f64 = d
                    .chain
                    .iter()
                    .filter(|&&f| g.can_host(v, f))
                    .map(|&f| g.vnf_cost(v, f))
                    .sum();
                for p in 0..p_count {
                    for &e in g.in_links(v) {
                        terms.push((b.v(x(e, p, di)), per_unit));
                    }
                }
            }
            b.push(
                Family::NodeCapacity,
                format!("c14_v{}", v.0),
                vec![row(terms, Sense::Le, g.node(v).compute)],
            );
        }
    }

    Ok(MilpModel {
        variables: b.variables,
        index: b.index,
        constraints: b.constraints,
        objective: r,
        big_m,
        delta,
        flows_per_demand,
        destinations: targets,
        demand_count: m,
    })
}
