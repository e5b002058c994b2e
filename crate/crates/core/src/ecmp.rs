//! Shortest-path fields, ECMP DAGs and equal-split traffic allocation.
//!
//! Given integer link weights, traffic bound for a node `t` is split at every
//! node equally across all outgoing links that lie on some shortest path to
//! `t`. Service chains are served by concatenating ECMP segments through one
//! hosting node per chain position.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{ModelError, RoutingError};
use crate::model::{LinkId, NfviGraph, NodeId, ServiceDemand, VnfId};

/// Integer link metrics, all at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(g: &NfviGraph, weights: Vec<u32>) -> Result<Self, ModelError> {
        if weights.len() != g.link_count() {
            return Err(ModelError::WeightLength {
                expected: g.link_count(),
                got: weights.len(),
            });
        }
        if let Some(e) = weights.iter().position(|&w| w == 0) {
            return Err(ModelError::ZeroWeight(LinkId(e)));
        }
        Ok(WeightVector(weights))
    }

    pub fn unit(g: &NfviGraph) -> Self {
        WeightVector(vec![1; g.link_count()])
    }

    pub fn get(&self, e: LinkId) -> u32 {
        self.0[e.0]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn set(&mut self, e: usize, w: u32) {
        debug_assert!(w >= 1);
        self.0[e] = w;
    }
}

impl std::fmt::Display for WeightVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// All-pairs shortest distances `l[v][t]`; `None` when `t` is unreachable
/// from `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPathField {
    n: usize,
    dist: Vec<Option<u64>>,
}

impl ShortestPathField {
    pub fn distance(&self, v: NodeId, t: NodeId) -> Option<u64> {
        self.dist[v.0 * self.n + t.0]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

pub fn shortest_path_field(g: &NfviGraph, w: &WeightVector) -> ShortestPathField {
    shortest_path_field_on(g, w, None)
}

/// Distances using only links with `active[e]` set (all links when `None`).
pub(crate) fn shortest_path_field_on(
    g: &NfviGraph,
    w: &WeightVector,
    active: Option<&[bool]>,
) -> ShortestPathField {
    let n = g.node_count();
    let mut dist = vec![None; n * n];
    let mut best = vec![u64::MAX; n];
    let mut heap = BinaryHeap::new();
    for t in 0..n {
        best.fill(u64::MAX);
        best[t] = 0;
        heap.push(Reverse((0u64, t)));
        // reverse Dijkstra towards t
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > best[v] {
                continue;
            }
            for &e in g.in_links(NodeId(v)) {
                if active.is_some_and(|a| !a[e.0]) {
                    continue;
                }
                let u = g.link(e).from.0;
                let nd = d + u64::from(w.get(e));
                if nd < best[u] {
                    best[u] = nd;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        for v in 0..n {
            if best[v] != u64::MAX {
                dist[v * n + t] = Some(best[v]);
            }
        }
    }
    ShortestPathField { n, dist }
}

/// `u[e][t]`: link `e` lies on a shortest path towards `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcmpDag {
    n: usize,
    on_path: Vec<bool>,
}

impl EcmpDag {
    pub fn on_path(&self, e: LinkId, t: NodeId) -> bool {
        self.on_path[e.0 * self.n + t.0]
    }

    /// Outgoing links of `v` on the shortest-path DAG towards `t`.
    pub fn next_hops<'a>(
        &'a self,
        g: &'a NfviGraph,
        v: NodeId,
        t: NodeId,
    ) -> impl Iterator<Item = LinkId> + 'a {
        g.out_links(v).iter().copied().filter(move |&e| self.on_path(e, t))
    }
}

pub fn ecmp_dag(g: &NfviGraph, w: &WeightVector, l: &ShortestPathField) -> EcmpDag {
    ecmp_dag_on(g, w, l, None)
}

pub(crate) fn ecmp_dag_on(
    g: &NfviGraph,
    w: &WeightVector,
    l: &ShortestPathField,
    active: Option<&[bool]>,
) -> EcmpDag {
    let n = g.node_count();
    let mut on_path = vec![false; g.link_count() * n];
    for e in g.link_ids() {
        if active.is_some_and(|a| !a[e.0]) {
            continue;
        }
        let link = g.link(e);
        for t in 0..n {
            let t = NodeId(t);
            if let (Some(li), Some(lj)) = (l.distance(link.from, t), l.distance(link.to, t)) {
                on_path[e.0 * n + t.0] = li == lj + u64::from(w.get(e));
            }
        }
    }
    EcmpDag { n, on_path }
}

/// Traffic carried by one ECMP segment from `entry` to `exit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub entry: NodeId,
    pub exit: NodeId,
    pub amount: f64,
    /// Rate on every link of the graph.
    pub rates: Vec<f64>,
    /// `g[v][exit]`: the equal per-link share leaving each node (0 when the
    /// node carries none of this segment).
    pub shares: Vec<f64>,
}

/// The traffic of one demand, as an ordered list of segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandFlow {
    pub demand: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub chain: Vec<VnfId>,
    pub segments: Vec<Segment>,
}

impl DemandFlow {
    pub fn link_rates(&self, link_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; link_count];
        for s in &self.segments {
            for (o, r) in out.iter_mut().zip(&s.rates) {
                *o += r;
            }
        }
        out
    }

    /// Total rate of this demand entering `v` over all segments.
    pub fn incoming_rate(&self, g: &NfviGraph, v: NodeId) -> f64 {
        let mut sum = 0.0;
        for s in &self.segments {
            for &e in g.in_links(v) {
                sum += s.rates[e.0];
            }
        }
        sum
    }

    /// Decomposes the demand into source-to-destination walks that visit
    /// the segment exits in order. At most one walk per path of each
    /// segment decomposition, so never more than the number of links times
    /// the number of segments.
    pub fn walks(&self, g: &NfviGraph) -> Vec<PathFlow> {
        let per_segment: Vec<Vec<PathFlow>> = self
            .segments
            .iter()
            .map(|s| decompose_segment(g, s))
            .collect();
        let Some(total) = self.segments.first().map(|s| s.amount) else {
            return Vec::new();
        };
        if total.is_nan() || total <= 0.0 || per_segment.iter().any(|p| p.is_empty()) {
            return Vec::new();
        }
        // breakpoints in [0, total) shared across all segments
        let mut cuts: Vec<f64> = vec![0.0, total];
        for paths in &per_segment {
            let mut acc = 0.0;
            for p in &paths[..paths.len() - 1] {
                acc += p.rate;
                cuts.push(acc.min(total));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= total * 1e-12);
        let mut walks = Vec::new();
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            if hi - lo <= total * 1e-12 {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let mut links = Vec::new();
            for paths in &per_segment {
                let mut acc = 0.0;
                let mut chosen = paths.last().unwrap();
                for p in paths {
                    acc += p.rate;
                    if mid < acc {
                        chosen = p;
                        break;
                    }
                }
                links.extend_from_slice(&chosen.links);
            }
            walks.push(PathFlow {
                links,
                rate: hi - lo,
            });
        }
        walks
    }

    /// Assigns the demand's traffic to `count` flows, returning per-flow
    /// link rates. With more walks than flows, surplus walks share the last
    /// flow; with fewer, walks are split evenly between several flows.
    pub fn flow_rates(&self, g: &NfviGraph, count: usize) -> Vec<Vec<f64>> {
        let m = g.link_count();
        let mut flows = vec![vec![0.0; m]; count];
        let walks = self.walks(g);
        if walks.is_empty() || count == 0 {
            return flows;
        }
        if walks.len() >= count {
            for (i, w) in walks.iter().enumerate() {
                let p = i.min(count - 1);
                for e in &w.links {
                    flows[p][e.0] += w.rate;
                }
            }
        } else {
            let k = walks.len();
            for (p, flow) in flows.iter_mut().enumerate() {
                let w = &walks[p % k];
                let sharing = (count - p % k).div_ceil(k);
                for e in &w.links {
                    flow[e.0] += w.rate / sharing as f64;
                }
            }
        }
        flows
    }
}

/// A single path (or walk) and the rate it carries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFlow {
    pub links: Vec<LinkId>,
    pub rate: f64,
}

fn decompose_segment(g: &NfviGraph, s: &Segment) -> Vec<PathFlow> {
    let tol = s.amount.abs() * 1e-12;
    let mut left = s.rates.clone();
    let mut paths = Vec::new();
    if s.entry == s.exit || s.amount.is_nan() || s.amount <= 0.0 {
        return paths;
    }
    for _ in 0..=g.link_count() {
        let mut v = s.entry;
        let mut links = Vec::new();
        while v != s.exit {
            let next = g
                .out_links(v)
                .iter()
                .copied()
                .filter(|e| left[e.0] > tol)
                .max_by(|a, b| left[a.0].total_cmp(&left[b.0]).then(b.0.cmp(&a.0)));
            match next {
                Some(e) => {
                    links.push(e);
                    v = g.link(e).to;
                }
                None => break,
            }
        }
        if v != s.exit || links.is_empty() {
            break;
        }
        let rate = links.iter().map(|e| left[e.0]).fold(f64::INFINITY, f64::min);
        for e in &links {
            left[e.0] -= rate;
        }
        paths.push(PathFlow { links, rate });
    }
    // floating residue stays with the last path
    let carried: f64 = paths.iter().map(|p| p.rate).sum();
    if let Some(last) = paths.last_mut() {
        last.rate += s.amount - carried;
    }
    paths
}

/// Link-level traffic of a set of demands.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FlowAllocation {
    link_count: usize,
    flows: Vec<DemandFlow>,
}

impl FlowAllocation {
    pub fn empty(g: &NfviGraph) -> Self {
        FlowAllocation {
            link_count: g.link_count(),
            flows: Vec::new(),
        }
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    pub fn flows(&self) -> &[DemandFlow] {
        &self.flows
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn push(&mut self, flow: DemandFlow) {
        self.flows.push(flow);
    }

    pub fn extend(&mut self, other: FlowAllocation) {
        debug_assert_eq!(self.link_count, other.link_count);
        self.flows.extend(other.flows);
    }

    /// `chi[e]`: total load per link.
    pub fn link_loads(&self) -> Vec<f64> {
        let mut chi = vec![0.0; self.link_count];
        for f in &self.flows {
            for s in &f.segments {
                for (c, r) in chi.iter_mut().zip(&s.rates) {
                    *c += r;
                }
            }
        }
        chi
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> FlowAllocation {
        let mut out = self.clone();
        for f in &mut out.flows {
            for s in &mut f.segments {
                s.amount *= factor;
                s.rates.iter_mut().for_each(|r| *r *= factor);
                s.shares.iter_mut().for_each(|r| *r *= factor);
            }
        }
        out
    }

    /// CSV with header `link,demand,flow,rate`, one row per nonzero rate
    /// after splitting each demand into `flows_per_demand` flows.
    pub fn to_csv(&self, g: &NfviGraph, flows_per_demand: usize) -> String {
        let mut out = String::from("link,demand,flow,rate\n");
        for f in &self.flows {
            for (p, rates) in f.flow_rates(g, flows_per_demand).iter().enumerate() {
                for (e, &r) in rates.iter().enumerate() {
                    if r != 0.0 {
                        let _ = writeln!(out, "{},{},{},{}", g.links()[e].name, f.demand, p, r);
                    }
                }
            }
        }
        out
    }
}

/// Splits `amount` from `entry` towards `exit` over the DAG. Demand id 0 is
/// used for the single resulting flow.
pub fn split_demand(
    g: &NfviGraph,
    dag: &EcmpDag,
    entry: NodeId,
    exit: NodeId,
    amount: f64,
) -> Result<FlowAllocation, RoutingError> {
    let seg = split_segment(g, dag, entry, exit, amount)?;
    let mut alloc = FlowAllocation::empty(g);
    alloc.push(DemandFlow {
        demand: 0,
        source: entry,
        destination: exit,
        chain: Vec::new(),
        segments: vec![seg],
    });
    Ok(alloc)
}

pub(crate) fn split_segment(
    g: &NfviGraph,
    dag: &EcmpDag,
    entry: NodeId,
    exit: NodeId,
    amount: f64,
) -> Result<Segment, RoutingError> {
    if !amount.is_finite() || amount < 0.0 {
        return Err(RoutingError::BadAmount(amount));
    }
    let n = g.node_count();
    let mut seg = Segment {
        entry,
        exit,
        amount,
        rates: vec![0.0; g.link_count()],
        shares: vec![0.0; n],
    };
    if entry == exit {
        return Ok(seg);
    }
    if dag.next_hops(g, entry, exit).next().is_none() {
        return Err(RoutingError::Unreachable {
            from: entry,
            to: exit,
        });
    }
    // nodes reachable from entry in the DAG and their in-degrees there
    let mut reached = vec![false; n];
    let mut indegree = vec![0usize; n];
    let mut queue = VecDeque::from([entry]);
    reached[entry.0] = true;
    while let Some(v) = queue.pop_front() {
        for e in dag.next_hops(g, v, exit) {
            let j = g.link(e).to;
            indegree[j.0] += 1;
            if !reached[j.0] {
                reached[j.0] = true;
                queue.push_back(j);
            }
        }
    }
    let mut inflow = vec![0.0; n];
    inflow[entry.0] = amount;
    let mut ready = VecDeque::from([entry]);
    while let Some(v) = ready.pop_front() {
        if v == exit {
            continue;
        }
        let hops: Vec<LinkId> = dag.next_hops(g, v, exit).collect();
        let share = inflow[v.0] / hops.len() as f64;
        seg.shares[v.0] = share;
        for e in hops {
            let j = g.link(e).to;
            seg.rates[e.0] += share;
            inflow[j.0] += share;
            indegree[j.0] -= 1;
            if indegree[j.0] == 0 {
                ready.push_back(j);
            }
        }
    }
    Ok(seg)
}

/// Precomputed routing state for one weight vector, optionally restricted
/// to a subset of links.
#[derive(Debug, Clone)]
pub struct Router<'g> {
    g: &'g NfviGraph,
    field: ShortestPathField,
    dag: EcmpDag,
}

impl<'g> Router<'g> {
    pub fn new(g: &'g NfviGraph, w: &WeightVector) -> Self {
        let field = shortest_path_field(g, w);
        let dag = ecmp_dag(g, w, &field);
        Router { g, field, dag }
    }

    /// Router that only uses links with `active[e]` set.
    pub fn restricted(g: &'g NfviGraph, w: &WeightVector, active: &[bool]) -> Self {
        let field = shortest_path_field_on(g, w, Some(active));
        let dag = ecmp_dag_on(g, w, &field, Some(active));
        Router { g, field, dag }
    }

    pub fn graph(&self) -> &'g NfviGraph {
        self.g
    }

    pub fn field(&self) -> &ShortestPathField {
        &self.field
    }

    pub fn dag(&self) -> &EcmpDag {
        &self.dag
    }

    pub fn distance(&self, from: NodeId, to: NodeId) -> Option<u64> {
        self.field.distance(from, to)
    }

    pub fn segment(&self, entry: NodeId, exit: NodeId, amount: f64) -> Result<Segment, RoutingError> {
        split_segment(self.g, &self.dag, entry, exit, amount)
    }

    /// Hosting node for each chain position: the capable node minimizing
    /// `l[prev][v] + l[v][t_d]`, ties to the smallest id.
    pub fn waypoints(&self, d: &ServiceDemand) -> Result<Vec<NodeId>, RoutingError> {
        let mut prev = d.source;
        let mut out = Vec::with_capacity(d.chain.len());
        for (position, &f) in d.chain.iter().enumerate() {
            let best = self
                .g
                .node_ids()
                .filter(|&v| self.g.can_host(v, f))
                .filter_map(|v| {
                    let a = self.distance(prev, v)?;
                    let b = self.distance(v, d.destination)?;
                    Some((a + b, v))
                })
                .min();
            let (_, v) = best.ok_or(RoutingError::NoHost { position })?;
            out.push(v);
            prev = v;
        }
        Ok(out)
    }

    /// Routes `amount` of demand `d` through its chain.
    pub fn route(&self, d: &ServiceDemand, amount: f64) -> Result<FlowAllocation, RoutingError> {
        let waypoints = self.waypoints(d)?;
        let mut stops = Vec::with_capacity(waypoints.len() + 2);
        stops.push(d.source);
        stops.extend(waypoints);
        stops.push(d.destination);
        let routers = vec![self; stops.len() - 1];
        let flow = chain_flow(d, &stops, amount, &routers)?;
        let mut alloc = FlowAllocation::empty(self.g);
        alloc.push(flow);
        Ok(alloc)
    }

}

/// Concatenates segments between consecutive `stops`; hop `i` is routed by
/// `routers[i]`.
pub(crate) fn chain_flow(
    d: &ServiceDemand,
    stops: &[NodeId],
    amount: f64,
    routers: &[&Router<'_>],
) -> Result<DemandFlow, RoutingError> {
    debug_assert_eq!(routers.len() + 1, stops.len());
    if !amount.is_finite() || amount < 0.0 {
        return Err(RoutingError::BadAmount(amount));
    }
    let mut segments = Vec::new();
    for (hop, router) in stops.windows(2).zip(routers) {
        if hop[0] != hop[1] {
            segments.push(router.segment(hop[0], hop[1], amount)?);
        }
    }
    Ok(DemandFlow {
        demand: d.id,
        source: d.source,
        destination: d.destination,
        chain: d.chain.clone(),
        segments,
    })
}

/// Routes `amount` of `d` through its service chain on the full graph.
pub fn route_demand_sfc(
    g: &NfviGraph,
    w: &WeightVector,
    d: &ServiceDemand,
    amount: f64,
) -> Result<FlowAllocation, RoutingError> {
    Router::new(g, w).route(d, amount)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilizationReport {
    /// `r = max_e chi[e] / C1[e]`; 0 for an empty allocation.
    pub max_utilization: f64,
    pub link_utilization: Vec<f64>,
    /// Compute usage per node following the node-capacity constraint.
    pub node_compute: Vec<f64>,
}

pub fn max_link_utilization(alloc: &FlowAllocation, g: &NfviGraph) -> UtilizationReport {
    let link_utilization: Vec<f64> = alloc
        .link_loads()
        .iter()
        .zip(g.links())
        .map(|(chi, l)| chi / l.capacity)
        .collect();
    let max_utilization = link_utilization.iter().copied().fold(0.0, f64::max);
    UtilizationReport {
        max_utilization,
        link_utilization,
        node_compute: node_compute_usage(g, alloc),
    }
}

/// `sum_{d,i} k(v, F_di) * r(v, F_di) * (rate of d entering v)` for every
/// node `v`.
pub fn node_compute_usage(g: &NfviGraph, alloc: &FlowAllocation) -> Vec<f64> {
    let mut usage = vec![0.0; g.node_count()];
    for f in alloc.flows() {
        if f.chain.is_empty() {
            continue;
        }
        for v in g.node_ids() {
            let per_unit: f64 = f
                .chain
                .iter()
                .filter(|&&fun| g.can_host(v, fun))
                .map(|&fun| g.vnf_cost(v, fun))
                .sum();
            if per_unit > 0.0 {
                usage[v.0] += per_unit * f.incoming_rate(g, v);
            }
        }
    }
    usage
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GraphBuilder;

    fn diamond(top: f64, bottom: f64) -> NfviGraph {
        GraphBuilder::new()
            .node("s", 10.0)
            .node("a", 10.0)
            .node("b", 10.0)
            .node("t", 10.0)
            .link("sa", "s", "a", top)
            .link("sb", "s", "b", bottom)
            .link("at", "a", "t", top)
            .link("bt", "b", "t", bottom)
            .build()
            .unwrap()
    }

    const S: NodeId = NodeId(0);
    const A: NodeId = NodeId(1);
    const T: NodeId = NodeId(3);

    #[test]
    fn single_link_distance() {
        let g = GraphBuilder::new()
            .node("s", 0.0)
            .node("t", 0.0)
            .link("st", "s", "t", 1.0)
            .build()
            .unwrap();
        let w = WeightVector::new(&g, vec![5]).unwrap();
        let l = shortest_path_field(&g, &w);
        assert_eq!(l.distance(NodeId(0), NodeId(1)), Some(5));
        assert_eq!(l.distance(NodeId(1), NodeId(0)), None);
        assert_eq!(l.distance(NodeId(1), NodeId(1)), Some(0));
    }

    #[test]
    fn diamond_distances_and_dag() {
        let g = diamond(10.0, 10.0);
        let w = WeightVector::unit(&g);
        let l = shortest_path_field(&g, &w);
        assert_eq!(l.distance(S, T), Some(2));
        let dag = ecmp_dag(&g, &w, &l);
        assert!(g.link_ids().all(|e| dag.on_path(e, T)));

        let w = WeightVector::new(&g, vec![1, 2, 1, 1]).unwrap();
        let l = shortest_path_field(&g, &w);
        let dag = ecmp_dag(&g, &w, &l);
        let on: Vec<bool> = g.link_ids().map(|e| dag.on_path(e, T)).collect();
        assert_eq!(on, vec![true, false, true, true]);
    }

    #[test]
    fn diamond_split_is_even() {
        let g = diamond(10.0, 10.0);
        let w = WeightVector::unit(&g);
        let r = Router::new(&g, &w);
        let alloc = split_demand(&g, r.dag(), S, T, 4.0).unwrap();
        assert_eq!(alloc.link_loads(), vec![2.0, 2.0, 2.0, 2.0]);
        assert_eq!(alloc.flows()[0].segments[0].shares[S.0], 2.0);
        let rep = max_link_utilization(&alloc, &g);
        assert_eq!(rep.max_utilization, 0.2);
    }

    #[test]
    fn single_path_carries_everything() {
        let g = GraphBuilder::new()
            .node("a", 0.0)
            .node("b", 0.0)
            .node("c", 0.0)
            .link("ab", "a", "b", 10.0)
            .link("bc", "b", "c", 10.0)
            .build()
            .unwrap();
        let r = Router::new(&g, &WeightVector::unit(&g));
        let alloc = split_demand(&g, r.dag(), NodeId(0), NodeId(2), 7.0).unwrap();
        assert_eq!(alloc.link_loads(), vec![7.0, 7.0]);
    }

    #[test]
    fn three_way_fan_out() {
        let mut b = GraphBuilder::new();
        b.node("s", 0.0).node("t", 0.0);
        for m in ["x", "y", "z"] {
            b.node(m, 0.0)
                .link(&format!("s{m}"), "s", m, 10.0)
                .link(&format!("{m}t"), m, "t", 10.0);
        }
        let g = b.build().unwrap();
        let r = Router::new(&g, &WeightVector::unit(&g));
        let alloc = split_demand(&g, r.dag(), NodeId(0), NodeId(1), 9.0).unwrap();
        assert!(alloc.link_loads().iter().all(|&x| x == 3.0));
    }

    #[test]
    fn unreachable_and_negative_amount() {
        let g = diamond(10.0, 10.0);
        let r = Router::new(&g, &WeightVector::unit(&g));
        assert_eq!(
            split_demand(&g, r.dag(), T, S, 1.0).unwrap_err(),
            RoutingError::Unreachable { from: T, to: S }
        );
        assert!(matches!(
            split_demand(&g, r.dag(), S, T, -1.0),
            Err(RoutingError::BadAmount(_))
        ));
    }

    #[test]
    fn empty_allocation_has_zero_utilization() {
        let g = diamond(10.0, 10.0);
        let rep = max_link_utilization(&FlowAllocation::empty(&g), &g);
        assert_eq!(rep.max_utilization, 0.0);
    }

    #[test]
    fn overload_is_reported_not_rejected() {
        let g = diamond(10.0, 1.0);
        let r = Router::new(&g, &WeightVector::unit(&g));
        let alloc = split_demand(&g, r.dag(), S, T, 4.0).unwrap();
        assert_eq!(max_link_utilization(&alloc, &g).max_utilization, 2.0);
    }

    fn demand(chain: Vec<VnfId>, volume: f64) -> ServiceDemand {
        ServiceDemand {
            id: 1,
            source: S,
            destination: T,
            volume,
            chain,
        }
    }

    #[test]
    fn empty_chain_matches_split_demand() {
        let g = diamond(10.0, 10.0);
        let w = WeightVector::unit(&g);
        let routed = route_demand_sfc(&g, &w, &demand(vec![], 4.0), 4.0).unwrap();
        let r = Router::new(&g, &w);
        let split = split_demand(&g, r.dag(), S, T, 4.0).unwrap();
        assert_eq!(routed.link_loads(), split.link_loads());
    }

    #[test]
    fn line_with_vnf_in_the_middle() {
        let g = GraphBuilder::new()
            .node("s", 0.0)
            .node("v", 10.0)
            .node("t", 0.0)
            .host("v", "fw", 1.0)
            .link("sv", "s", "v", 10.0)
            .link("vt", "v", "t", 10.0)
            .build()
            .unwrap();
        let d = ServiceDemand {
            id: 0,
            source: NodeId(0),
            destination: NodeId(2),
            volume: 5.0,
            chain: vec![VnfId(0)],
        };
        let alloc = route_demand_sfc(&g, &WeightVector::unit(&g), &d, 5.0).unwrap();
        assert_eq!(alloc.link_loads(), vec![5.0, 5.0]);
        let rep = max_link_utilization(&alloc, &g);
        assert_eq!(rep.node_compute, vec![0.0, 5.0, 0.0]);
    }

    #[test]
    fn vnf_on_one_branch_forces_the_branch() {
        let mut b = GraphBuilder::new();
        b.node("s", 10.0)
            .node("a", 10.0)
            .node("b", 10.0)
            .node("t", 10.0)
            .link("sa", "s", "a", 10.0)
            .link("sb", "s", "b", 10.0)
            .link("at", "a", "t", 10.0)
            .link("bt", "b", "t", 10.0)
            .host("a", "fw", 1.0);
        let g = b.build().unwrap();
        let alloc =
            route_demand_sfc(&g, &WeightVector::unit(&g), &demand(vec![VnfId(0)], 4.0), 4.0).unwrap();
        assert_eq!(alloc.link_loads(), vec![4.0, 0.0, 4.0, 0.0]);
        assert_eq!(alloc.flows()[0].segments[0].exit, A);
    }

    #[test]
    fn missing_host_is_a_rejection() {
        let mut b = GraphBuilder::new();
        b.node("s", 0.0).node("t", 0.0).link("st", "s", "t", 1.0).vnf("nat");
        let g = b.build().unwrap();
        let d = ServiceDemand {
            id: 3,
            source: NodeId(0),
            destination: NodeId(1),
            volume: 1.0,
            chain: vec![VnfId(0)],
        };
        assert_eq!(
            route_demand_sfc(&g, &WeightVector::unit(&g), &d, 1.0).unwrap_err(),
            RoutingError::NoHost { position: 0 }
        );
    }

    #[test]
    fn weights_validated() {
        let g = diamond(1.0, 1.0);
        assert!(WeightVector::new(&g, vec![1, 1, 1]).is_err());
        assert!(WeightVector::new(&g, vec![1, 0, 1, 1]).is_err());
    }

    #[test]
    fn flows_split_across_walks() {
        let g = diamond(10.0, 10.0);
        let alloc =
            route_demand_sfc(&g, &WeightVector::unit(&g), &demand(vec![], 4.0), 4.0).unwrap();
        let f = &alloc.flows()[0];
        let walks = f.walks(&g);
        assert_eq!(walks.len(), 2);
        let two = f.flow_rates(&g, 2);
        assert_eq!(two[0].iter().sum::<f64>() + two[1].iter().sum::<f64>(), 8.0);
        let one = f.flow_rates(&g, 1);
        assert_eq!(one[0], vec![2.0, 2.0, 2.0, 2.0]);
        let four = f.flow_rates(&g, 4);
        assert!(four.iter().all(|r| r.iter().sum::<f64>() == 2.0));
        let csv = alloc.to_csv(&g, 2);
        assert_eq!(csv.lines().count(), 5);
    }
}
