//! Exhaustive search over link-weight vectors for small instances.
//!
//! For a fixed weight vector the ECMP split and the waypoint rule make the
//! allocation deterministic, so the best ECMP configuration is found by
//! routing every demand under every `w in {1..w_max}^|E|`.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::ecmp::{max_link_utilization, FlowAllocation, Router, UtilizationReport, WeightVector};
use crate::model::{NfviGraph, ServiceDemand};

pub const DEFAULT_LIMIT: u128 = 10_000_000;

/// Relative slack allowed when comparing loads with capacities.
const CAPACITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{count} weight vectors exceed the enumeration limit {limit}")]
    TooManyCombinations { count: u128, limit: u128 },
    #[error("w_max must be at least 1")]
    ZeroWeightBound,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub w_max: u32,
    pub limit: u128,
    /// Enumerate even when the limit is exceeded.
    pub force: bool,
    /// Keep a per-vector log.
    pub record_log: bool,
}

impl OracleConfig {
    pub fn new(w_max: u32) -> Self {
        OracleConfig {
            w_max,
            limit: DEFAULT_LIMIT,
            force: false,
            record_log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub weights: WeightVector,
    pub feasible: bool,
    /// Max link utilization; reported even when infeasible.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best feasible weights and their utilization, `None` if no vector is
    /// feasible.
    pub best: Option<(WeightVector, f64)>,
    pub log: Vec<OracleEntry>,
    pub evaluated: u64,
}

impl OracleResult {
    pub fn best_r(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.1)
    }

    /// Log as CSV with header `w_vector,feasible,r`; weights are
    /// space-separated.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("w_vector,feasible,r\n");
        for e in &self.log {
            let _ = writeln!(out, "{},{},{}", e.weights, e.feasible, e.r);
        }
        out
    }
}

/// Outcome of routing every demand under one weight vector.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// All demands routed and all link and node capacities respected.
    pub feasible: bool,
    pub routed: bool,
    pub report: UtilizationReport,
    pub allocation: FlowAllocation,
}

/// Routes all `demands` in full under `w` and checks capacities.
pub fn evaluate_weights(g: &NfviGraph, demands: &[ServiceDemand], w: &WeightVector) -> Evaluation {
    let router = Router::new(g, w);
    let mut allocation = FlowAllocation::empty(g);
    let mut routed = true;
    for d in demands {
        match router.route(d, d.volume) {
            Ok(a) => allocation.extend(a),
            Err(_) => routed = false,
        }
    }
    let report = max_link_utilization(&allocation, g);
    let links_ok = report
        .link_utilization
        .iter()
        .all(|&u| u <= 1.0 + CAPACITY_TOL);
    let nodes_ok = report
        .node_compute
        .iter()
        .zip(g.nodes())
        .all(|(&used, n)| used <= n.compute * (1.0 + CAPACITY_TOL) + CAPACITY_TOL);
    Evaluation {
        feasible: routed && links_ok && nodes_ok,
        routed,
        report,
        allocation,
    }
}

/// Enumerates `{1..w_max}^|E|` with the default limit and a full log.
pub fn exact_oracle(g: &NfviGraph, demands: &[ServiceDemand], w_max: u32) -> Result<OracleResult, OracleError> {
    exact_oracle_with(g, demands, &OracleConfig::new(w_max))
}

pub fn combination_count(links: usize, w_max: u32) -> Option<u128> {
    let mut count: u128 = 1;
    for _ in 0..links {
        count = count.checked_mul(u128::from(w_max))?;
    }
    Some(count)
}

pub fn exact_oracle_with(
    g: &NfviGraph,
    demands: &[ServiceDemand],
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    if cfg.w_max == 0 {
        return Err(OracleError::ZeroWeightBound);
    }
    let links = g.link_count();
    let count = combination_count(links, cfg.w_max).unwrap_or(u128::MAX);
    if count > cfg.limit && !cfg.force {
        return Err(OracleError::TooManyCombinations {
            count,
            limit: cfg.limit,
        });
    }
    let count = u64::try_from(count).map_err(|_| OracleError::TooManyCombinations {
        count,
        limit: cfg.limit,
    })?;
    let decode = |mut index: u64| {
        // first link is the most significant digit, so index order is
        // lexicographic order of the weight vectors
        let mut w = vec![1u32; links];
        for slot in w.iter_mut().rev() {
            *slot = 1 + (index % u64::from(cfg.w_max)) as u32;
            index /= u64::from(cfg.w_max);
        }
        WeightVector::new(g, w).expect("decoded weights are within bounds")
    };
    let eval = |index: u64| {
        let w = decode(index);
        let e = evaluate_weights(g, demands, &w);
        OracleEntry {
            weights: w,
            feasible: e.feasible,
            r: e.report.max_utilization,
        }
    };
    let better = |a: &(u64, f64), b: &(u64, f64)| a.1 < b.1 || (a.1 == b.1 && a.0 < b.0);

    let (best, log) = if cfg.record_log {
        let log: Vec<OracleEntry> = (0..count).into_par_iter().map(eval).collect();
        let mut best: Option<(u64, f64)> = None;
        for (i, e) in log.iter().enumerate() {
            let cand = (i as u64, e.r);
            if e.feasible && best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        (best, log)
    } else {
        let best = (0..count)
            .into_par_iter()
            .filter_map(|i| {
                let e = eval(i);
                e.feasible.then_some((i, e.r))
            })
            .reduce_with(|a, b| if better(&b, &a) { b } else { a });
        (best, Vec::new())
    };
    Ok(OracleResult {
        best: best.map(|(i, r)| (decode(i), r)),
        log,
        evaluated: count,
    })
}
