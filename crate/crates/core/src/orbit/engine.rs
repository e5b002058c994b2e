//! Online primal-dual demand processing over a fixed partitioning.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::partition::Partitioning;
use crate::ecmp::{chain_flow, node_compute_usage, FlowAllocation, Router, WeightVector};
use crate::model::{NfviGraph, NodeId, ServiceDemand};

/// Relative slack when comparing a demand's needs with residual capacity.
const CAPACITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("demand {id} arrives after demand {last}; ids must increase")]
    OutOfOrder { id: u64, last: u64 },
    #[error("demand {0} is not valid for this graph")]
    InvalidDemand(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    /// No partition offers every function of the chain.
    NoEligiblePartition,
    /// The combined allocation exceeds residual link or node capacity.
    Capacity,
    /// Some share could not reach its waypoints or destination.
    Unroutable,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NoEligiblePartition => "no_eligible_partition",
            RejectReason::Capacity => "capacity",
            RejectReason::Unroutable => "unroutable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionDecision {
    pub demand: u64,
    pub accepted: bool,
    pub reason: Option<RejectReason>,
    /// `(partition, h_d z_i / sum z)` for every eligible partition.
    pub shares: Vec<(usize, f64)>,
    /// Link load added by the demand; zero when rejected.
    pub link_delta: Vec<f64>,
    /// Sweeps of the update loop, equal to the dual increment `ζ_d`.
    pub iterations: u64,
    pub allocation: Option<FlowAllocation>,
}

/// Per-demand bookkeeping kept after processing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandRecord {
    pub id: u64,
    pub eligible: Vec<usize>,
    pub zeta: u64,
    pub accepted: bool,
    pub reason: Option<RejectReason>,
    /// `sum_{i in Q(d)} z_i` right after the update loop.
    pub sum_z: f64,
}

/// Cost change of one sweep of the update loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationDelta {
    pub demand: u64,
    pub primal: f64,
    pub dual: f64,
    /// `sum_{i in Q(d)} (z_i / ε + 1/|Q(d)|)` evaluated before the sweep.
    pub predicted_primal: f64,
}

/// One event-log line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRow {
    pub demand: u64,
    pub accepted: bool,
    pub reason: Option<RejectReason>,
    pub sum_z: f64,
    pub primal: f64,
    pub dual: f64,
    pub r_current: f64,
    pub acceptance_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitState {
    pub(crate) partitioning: Partitioning,
    pub(crate) z: Vec<f64>,
    pub(crate) records: Vec<DemandRecord>,
    pub(crate) queues: Vec<Vec<u64>>,
    pub(crate) link_capacity: Vec<f64>,
    pub(crate) residual_link: Vec<f64>,
    pub(crate) residual_node: Vec<f64>,
    pub(crate) link_load: Vec<f64>,
    pub(crate) trace: Vec<IterationDelta>,
    pub(crate) events: Vec<EventRow>,
    pub(crate) accepted: usize,
}

impl OrbitState {
    pub fn new(g: &NfviGraph, partitioning: Partitioning) -> Self {
        let kappa = partitioning.kappa();
        let link_capacity: Vec<f64> = g.links().iter().map(|l| l.capacity).collect();
        OrbitState {
            partitioning,
            z: vec![0.0; kappa],
            records: Vec::new(),
            queues: vec![Vec::new(); kappa],
            residual_link: link_capacity.clone(),
            link_capacity,
            residual_node: g.nodes().iter().map(|n| n.compute).collect(),
            link_load: vec![0.0; g.link_count()],
            trace: Vec::new(),
            events: Vec::new(),
            accepted: 0,
        }
    }

    pub fn partitioning(&self) -> &Partitioning {
        &self.partitioning
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Overwrites a primal variable; meant for fault-injection tests.
    pub fn set_z(&mut self, part: usize, value: f64) {
        self.z[part] = value;
    }

    pub fn records(&self) -> &[DemandRecord] {
        &self.records
    }

    /// `q_i`: ids of processed demands partition `i` could serve.
    pub fn queue(&self, part: usize) -> &[u64] {
        &self.queues[part]
    }

    pub fn trace(&self) -> &[IterationDelta] {
        &self.trace
    }

    pub fn residual_link(&self) -> &[f64] {
        &self.residual_link
    }

    pub fn residual_node(&self) -> &[f64] {
        &self.residual_node
    }

    pub fn link_loads(&self) -> &[f64] {
        &self.link_load
    }

    /// `P_o = sum_i π_i z_i`.
    pub fn primal_cost(&self) -> f64 {
        self.z
            .iter()
            .zip(self.partitioning.costs())
            .map(|(z, pi)| pi * z)
            .sum()
    }

    /// `D_o = sum_d ζ_d`.
    pub fn dual_cost(&self) -> f64 {
        self.records.iter().map(|r| r.zeta as f64).sum()
    }

    pub fn processed(&self) -> usize {
        self.records.len()
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    /// Accepted over processed; 1.0 before any demand.
    pub fn acceptance_ratio(&self) -> f64 {
        if self.records.is_empty() {
            1.0
        } else {
            self.accepted as f64 / self.records.len() as f64
        }
    }

    /// Max link utilization of the admitted traffic.
    pub fn max_utilization(&self) -> f64 {
        self.link_load
            .iter()
            .zip(&self.link_capacity)
            .map(|(x, c)| x / c)
            .fold(0.0, f64::max)
    }

    /// `Σ_{d : i in Q(d)} ζ_d` for partition `i`.
    pub fn dual_load(&self, part: usize) -> u64 {
        self.records
            .iter()
            .filter(|r| r.eligible.contains(&part))
            .map(|r| r.zeta)
            .sum()
    }

    pub fn events(&self) -> &[EventRow] {
        &self.events
    }

    /// Event log with header
    /// `demand_id,decision,reason,sum_z,P_o,D_o,r_current,acceptance_ratio`.
    pub fn event_log_csv(&self) -> String {
        let mut out = String::from("demand_id,decision,reason,sum_z,P_o,D_o,r_current,acceptance_ratio\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                e.demand,
                if e.accepted { "accept" } else { "reject" },
                e.reason.map_or("", RejectReason::as_str),
                e.sum_z,
                e.primal,
                e.dual,
                e.r_current,
                e.acceptance_ratio
            );
        }
        out
    }
}

/// One multiplicative-additive update of a primal variable:
/// `z (1 + 1/(π ε)) + 1/(π |Q|)`.
pub fn primal_step(z: f64, pi: f64, epsilon: f64, eligible: usize) -> f64 {
    z * (1.0 + 1.0 / (pi * epsilon)) + 1.0 / (pi * eligible as f64)
}

/// Partitions whose nodes offer every function of `d`'s chain on some node
/// with compute left.
pub fn eligible_partitions(
    d: &ServiceDemand,
    part: &Partitioning,
    g: &NfviGraph,
    residual_compute: &[f64],
) -> Vec<usize> {
    (0..part.kappa())
        .filter(|&i| {
            d.chain.iter().all(|&f| {
                part.parts()[i]
                    .iter()
                    .any(|&v| g.can_host(v, f) && residual_compute[v.0] > 0.0)
            })
        })
        .collect()
}

/// The online engine: graph, routing tables and mutable state.
#[derive(Debug, Clone)]
pub struct Orbit<'g> {
    g: &'g NfviGraph,
    full: Router<'g>,
    local: Vec<Router<'g>>,
    state: OrbitState,
}

impl<'g> Orbit<'g> {
    pub fn new(g: &'g NfviGraph, w: &WeightVector, partitioning: Partitioning) -> Self {
        let local = (0..partitioning.kappa())
            .map(|i| Router::restricted(g, w, &partitioning.internal_links(g, i)))
            .collect();
        Orbit {
            g,
            full: Router::new(g, w),
            local,
            state: OrbitState::new(g, partitioning),
        }
    }

    pub fn state(&self) -> &OrbitState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut OrbitState {
        &mut self.state
    }

    pub fn into_state(self) -> OrbitState {
        self.state
    }

    pub fn graph(&self) -> &'g NfviGraph {
        self.g
    }

    /// Runs every demand of `demands` in order.
    pub fn run<'a>(&mut self, demands: impl IntoIterator<Item = &'a ServiceDemand>) -> Result<(), OrbitError> {
        for d in demands {
            self.process_demand(d)?;
        }
        Ok(())
    }

    pub fn process_demand(&mut self, d: &ServiceDemand) -> Result<AdmissionDecision, OrbitError> {
        if let Some(last) = self.state.records.last() {
            if d.id <= last.id {
                return Err(OrbitError::OutOfOrder { id: d.id, last: last.id });
            }
        }
        if d.validate(self.g).is_err() {
            return Err(OrbitError::InvalidDemand(d.id));
        }
        let st = &mut self.state;
        let q = eligible_partitions(d, &st.partitioning, self.g, &st.residual_node);
        for &i in &q {
            st.queues[i].push(d.id);
        }

        let mut zeta = 0u64;
        if !q.is_empty() {
            let eps = st.partitioning.epsilon();
            let inv_q = 1.0 / q.len() as f64;
            while q.iter().map(|&i| st.z[i]).sum::<f64>() < 1.0 {
                let mut primal = 0.0;
                let mut predicted = 0.0;
                for &i in &q {
                    let pi = st.partitioning.cost(i);
                    let old = st.z[i];
                    st.z[i] = primal_step(old, pi, eps, q.len());
                    primal += pi * (st.z[i] - old);
                    predicted += old / eps + inv_q;
                }
                zeta += 1;
                st.trace.push(IterationDelta {
                    demand: d.id,
                    primal,
                    dual: 1.0,
                    predicted_primal: predicted,
                });
            }
        }
        let sum_z: f64 = q.iter().map(|&i| st.z[i]).sum();
        let shares: Vec<(usize, f64)> = q.iter().map(|&i| (i, d.volume * st.z[i] / sum_z)).collect();

        let outcome = if q.is_empty() {
            Err(RejectReason::NoEligiblePartition)
        } else {
            self.allocate(d, &shares)
        };
        let st = &mut self.state;
        let (accepted, reason, link_delta, allocation) = match outcome {
            Ok((alloc, links, nodes)) => {
                for (e, x) in links.iter().enumerate() {
                    st.residual_link[e] = (st.residual_link[e] - x).max(0.0);
                    st.link_load[e] += x;
                }
                for (v, c) in nodes.iter().enumerate() {
                    st.residual_node[v] = (st.residual_node[v] - c).max(0.0);
                }
                st.accepted += 1;
                (true, None, links, Some(alloc))
            }
            Err(r) => (false, Some(r), vec![0.0; self.g.link_count()], None),
        };
        st.records.push(DemandRecord {
            id: d.id,
            eligible: q,
            zeta,
            accepted,
            reason,
            sum_z,
        });
        let event = EventRow {
            demand: d.id,
            accepted,
            reason,
            sum_z,
            primal: st.primal_cost(),
            dual: st.dual_cost(),
            r_current: st.max_utilization(),
            acceptance_ratio: st.acceptance_ratio(),
        };
        st.events.push(event);
        Ok(AdmissionDecision {
            demand: d.id,
            accepted,
            reason,
            shares,
            link_delta,
            iterations: zeta,
            allocation,
        })
    }

    /// Routes every share and checks the combined need against residuals.
    #[allow(clippy::type_complexity)]
    fn allocate(
        &self,
        d: &ServiceDemand,
        shares: &[(usize, f64)],
    ) -> Result<(FlowAllocation, Vec<f64>, Vec<f64>), RejectReason> {
        let mut alloc = FlowAllocation::empty(self.g);
        for &(i, amount) in shares {
            let flow = self.route_share(d, i, amount).ok_or(RejectReason::Unroutable)?;
            alloc.push(flow);
        }
        let links = alloc.link_loads();
        let nodes = node_compute_usage(self.g, &alloc);
        let st = &self.state;
        let links_fit = links
            .iter()
            .zip(&st.residual_link)
            .zip(&st.link_capacity)
            .all(|((x, res), cap)| *x <= res + CAPACITY_TOL * cap);
        let nodes_fit = nodes
            .iter()
            .zip(&st.residual_node)
            .zip(self.g.nodes())
            .all(|((c, res), n)| *c <= res + CAPACITY_TOL * (1.0 + n.compute));
        if links_fit && nodes_fit {
            Ok((alloc, links, nodes))
        } else {
            Err(RejectReason::Capacity)
        }
    }

    /// Routes `amount` of `d` through partition `i`: access segments on the
    /// full graph, waypoint hops inside the partition when it connects them.
    fn route_share(&self, d: &ServiceDemand, i: usize, amount: f64) -> Option<crate::ecmp::DemandFlow> {
        let part = &self.state.partitioning;
        let members = &part.parts()[i];
        let sub = &self.local[i];
        let full = &self.full;
        let closest = |key: &dyn Fn(NodeId) -> Option<u64>| -> Option<NodeId> {
            members.iter().filter_map(|&v| Some((key(v)?, v))).min().map(|(_, v)| v)
        };
        let entry = if part.contains(i, d.source) {
            d.source
        } else {
            closest(&|v| full.distance(d.source, v))?
        };
        let exit = if part.contains(i, d.destination) {
            d.destination
        } else {
            closest(&|v| full.distance(v, d.destination))?
        };
        let hop = |a: NodeId, b: NodeId| sub.distance(a, b).or_else(|| full.distance(a, b));

        let mut stops = vec![d.source, entry];
        let mut prev = entry;
        for &f in &d.chain {
            let (_, v) = members
                .iter()
                .filter(|&&v| self.g.can_host(v, f) && self.state.residual_node[v.0] > 0.0)
                .filter_map(|&v| Some((hop(prev, v)? + hop(v, exit)?, v)))
                .min()?;
            stops.push(v);
            prev = v;
        }
        stops.push(exit);
        stops.push(d.destination);

        let mut routers: Vec<&Router<'_>> = Vec::with_capacity(stops.len() - 1);
        let last = stops.len() - 2;
        for (k, w) in stops.windows(2).enumerate() {
            let inner = k > 0 && k < last;
            routers.push(if inner && sub.distance(w[0], w[1]).is_some() { sub } else { full });
        }
        chain_flow(d, &stops, amount, &routers).ok()
    }
}
