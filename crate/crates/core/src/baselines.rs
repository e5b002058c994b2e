//! Offline simulated annealing over link-weight vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ecmp::{max_link_utilization, node_compute_usage, FlowAllocation, Router, UtilizationReport, WeightVector};
use crate::model::{NfviGraph, ServiceDemand};

/// Energy added per rejected demand.
pub const REJECTION_PENALTY: f64 = 1.0;

const CAPACITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("initial temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("cooling factor must lie in (0, 1), got {0}")]
    Cooling(f64),
    #[error("stop temperature must be positive, got {0}")]
    StopTemperature(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealingSchedule {
    pub initial_temperature: f64,
    pub cooling: f64,
    /// Moves tried per temperature level; 0 disables the search.
    pub iterations_per_level: usize,
    pub stop_temperature: f64,
    pub seed: u64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        AnnealingSchedule {
            initial_temperature: 1.0,
            cooling: 0.95,
            iterations_per_level: 100,
            stop_temperature: 1e-3,
            seed: 0,
        }
    }
}

impl AnnealingSchedule {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if !self.initial_temperature.is_finite() || self.initial_temperature <= 0.0 {
            return Err(ScheduleError::Temperature(self.initial_temperature));
        }
        if self.cooling.is_nan() || self.cooling <= 0.0 || self.cooling >= 1.0 {
            return Err(ScheduleError::Cooling(self.cooling));
        }
        if self.stop_temperature.is_nan() || self.stop_temperature <= 0.0 {
            return Err(ScheduleError::StopTemperature(self.stop_temperature));
        }
        Ok(())
    }

    /// Number of temperature levels visited.
    pub fn levels(&self) -> usize {
        let mut t = self.initial_temperature;
        let mut n = 0;
        while t > self.stop_temperature {
            n += 1;
            t *= self.cooling;
        }
        n
    }
}

/// Demands admitted in order, each routed in full or rejected if it would
/// overload a link or node.
#[derive(Debug, Clone)]
pub struct Admission {
    pub allocation: FlowAllocation,
    pub accepted: usize,
    pub rejected: usize,
    pub report: UtilizationReport,
}

impl Admission {
    pub fn acceptance_ratio(&self) -> f64 {
        let total = self.accepted + self.rejected;
        if total == 0 {
            1.0
        } else {
            self.accepted as f64 / total as f64
        }
    }

    pub fn energy(&self) -> f64 {
        self.report.max_utilization + REJECTION_PENALTY * self.rejected as f64
    }
}

pub fn admit_sequentially(g: &NfviGraph, demands: &[ServiceDemand], w: &WeightVector) -> Admission {
    let router = Router::new(g, w);
    let mut allocation = FlowAllocation::empty(g);
    let mut link_res: Vec<f64> = g.links().iter().map(|l| l.capacity).collect();
    let mut node_res: Vec<f64> = g.nodes().iter().map(|n| n.compute).collect();
    let (mut accepted, mut rejected) = (0, 0);
    for d in demands {
        let Ok(a) = router.route(d, d.volume) else {
            rejected += 1;
            continue;
        };
        let links = a.link_loads();
        let nodes = node_compute_usage(g, &a);
        let fits = links
            .iter()
            .zip(&link_res)
            .zip(g.links())
            .all(|((x, r), l)| *x <= r + CAPACITY_TOL * l.capacity)
            && nodes
                .iter()
                .zip(&node_res)
                .zip(g.nodes())
                .all(|((c, r), n)| *c <= r + CAPACITY_TOL * (1.0 + n.compute));
        if !fits {
            rejected += 1;
            continue;
        }
        for (r, x) in link_res.iter_mut().zip(&links) {
            *r = (*r - x).max(0.0);
        }
        for (r, c) in node_res.iter_mut().zip(&nodes) {
            *r = (*r - c).max(0.0);
        }
        allocation.extend(a);
        accepted += 1;
    }
    let report = max_link_utilization(&allocation, g);
    Admission {
        allocation,
        accepted,
        rejected,
        report,
    }
}

#[derive(Debug, Clone)]
pub struct SaResult {
    pub weights: WeightVector,
    pub report: UtilizationReport,
    pub acceptance_ratio: f64,
    pub energy: f64,
    /// Best energy after each move; nonincreasing.
    pub best_trace: Vec<f64>,
}

/// Searches weight vectors from unit weights by ±1 moves on one random
/// link, Metropolis acceptance and geometric cooling. Returns the best
/// state seen.
pub fn simulated_annealing(
    g: &NfviGraph,
    demands: &[ServiceDemand],
    schedule: &AnnealingSchedule,
) -> Result<SaResult, ScheduleError> {
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut current = WeightVector::unit(g);
    let mut current_energy = admit_sequentially(g, demands, &current).energy();
    let mut best = (current.clone(), current_energy);
    let mut best_trace = Vec::new();

    if g.link_count() > 0 && schedule.iterations_per_level > 0 {
        let mut t = schedule.initial_temperature;
        while t > schedule.stop_temperature {
            for _ in 0..schedule.iterations_per_level {
                let e = rng.gen_range(0..g.link_count());
                let up = rng.gen_bool(0.5);
                let old = current.as_slice()[e];
                let new = if up { old + 1 } else { old.saturating_sub(1).max(1) };
                if new == old {
                    best_trace.push(best.1);
                    continue;
                }
                let mut cand = current.clone();
                cand.set(e, new);
                let energy = admit_sequentially(g, demands, &cand).energy();
                let delta = energy - current_energy;
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                    current = cand;
                    current_energy = energy;
                    if current_energy < best.1 {
                        best = (current.clone(), current_energy);
                    }
                }
                best_trace.push(best.1);
            }
            t *= schedule.cooling;
        }
    }

    let admission = admit_sequentially(g, demands, &best.0);
    Ok(SaResult {
        acceptance_ratio: admission.acceptance_ratio(),
        energy: admission.energy(),
        report: admission.report,
        weights: best.0,
        best_trace,
    })
}
