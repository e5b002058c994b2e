//! Load balancing for network functions virtualization.
//!
//! * [`model`] and [`io`]: infrastructure graphs, service demands, and their
//!   line-oriented file formats.
//! * [`ecmp`]: shortest-path fields, ECMP DAGs and equal-split allocation,
//!   including service-chain routing.
//! * [`milp`]: the offline mixed-integer model, LP export, candidate checking
//!   and an exhaustive weight-search oracle for small instances.
//! * [`orbit`]: the online primal-dual balancer over balanced graph
//!   partitions, with runtime verification of its competitive guarantees.
//! * [`baselines`]: simulated-annealing weight search.

pub mod baselines;
pub mod ecmp;
pub mod error;
pub mod io;
pub mod milp;
pub mod model;
pub mod orbit;
pub mod synth;

pub use ecmp::{
    ecmp_dag, max_link_utilization, route_demand_sfc, shortest_path_field, split_demand, EcmpDag,
    FlowAllocation, Router, ShortestPathField, UtilizationReport, WeightVector,
};
pub use error::{ModelError, ParseError, RoutingError};
pub use model::{
    validate, DemandStream, Diagnostics, GraphBuilder, LinkId, NfviGraph, NodeId, ServiceDemand,
    VnfId,
};
