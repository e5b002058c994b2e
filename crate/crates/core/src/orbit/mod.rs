//! Online admission and load balancing over balanced graph partitions.
//!
//! Each partition `i` carries a primal variable `z_i` and a cost `π_i`;
//! each demand a dual counter `ζ_d`. A demand is split across the
//! partitions able to serve it in proportion to their `z_i`.

mod engine;
mod guarantees;
mod partition;

pub use engine::{
    eligible_partitions, primal_step, AdmissionDecision, DemandRecord, EventRow, IterationDelta, Orbit,
    OrbitError, OrbitState, RejectReason,
};
pub use guarantees::{verify_guarantees, Check, GuaranteeConfig, GuaranteeReport, GuaranteeViolation};
pub use partition::{partition, spanning_cost, PartitionError, Partitioning};
