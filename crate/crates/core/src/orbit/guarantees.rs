//! Runtime checks of the primal-dual guarantees on an [`OrbitState`].

use std::fmt;

use serde::Serialize;

use super::engine::OrbitState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeConfig {
    /// Base of the logarithm in the dual-load bound.
    pub log_base: f64,
    pub tolerance: f64,
}

impl Default for GuaranteeConfig {
    fn default() -> Self {
        GuaranteeConfig {
            log_base: std::f64::consts::E,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Check {
    /// `sum_{i in Q(d)} z_i >= 1` for every demand with eligible partitions.
    PrimalFeasible,
    /// `sum_{d : i in Q(d)} ζ_d <= log(3κ+1) (1 + π_i ε)`.
    DualLoad,
    /// `z_i <= 3`.
    PrimalCap,
    /// `P_o <= 2 D_o`.
    CostRatio,
    /// Every sweep adds 1 to the dual and at most 2 to the primal.
    IterationRatio,
    /// `z_i >= ((1 + 1/(π_i ε))^S_i - 1) / κ`.
    GrowthLowerBound,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::PrimalFeasible,
        Check::DualLoad,
        Check::PrimalCap,
        Check::CostRatio,
        Check::IterationRatio,
        Check::GrowthLowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::PrimalFeasible => "primal_feasible",
            Check::DualLoad => "dual_load",
            Check::PrimalCap => "primal_cap",
            Check::CostRatio => "cost_ratio",
            Check::IterationRatio => "iteration_ratio",
            Check::GrowthLowerBound => "growth_lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeViolation {
    pub check: Check,
    /// Demand id, partition index or trace position, depending on the check.
    pub index: u64,
    /// How far the inequality is off (positive).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub violations: Vec<GuaranteeViolation>,
    pub primal: f64,
    pub dual: f64,
    /// `β = max_i log(3κ+1)(1 + π_i ε) / π_i`; `D_o / β` is dual feasible.
    pub dual_scaling: f64,
    /// Largest observed `S_i / (log(3κ+1)(1 + π_i ε))`.
    pub max_dual_load_ratio: f64,
    /// `P_o / D_o`, 0 when no dual cost has accrued.
    pub cost_ratio: f64,
}

impl GuaranteeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn holds(&self, check: Check) -> bool {
        self.violations.iter().all(|v| v.check != check)
    }

    /// `P_o <= competitive_bound * OPT` for the covering program.
    pub fn competitive_bound(&self) -> f64 {
        2.0 * self.dual_scaling
    }
}

impl fmt::Display for GuaranteeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in Check::ALL {
            writeln!(f, "{}: {}", c.name(), if self.holds(c) { "ok" } else { "VIOLATED" })?;
        }
        writeln!(f, "primal_cost: {}", self.primal)?;
        writeln!(f, "dual_cost: {}", self.dual)?;
        writeln!(f, "cost_ratio: {}", self.cost_ratio)?;
        writeln!(f, "dual_scaling: {}", self.dual_scaling)?;
        writeln!(f, "max_dual_load_ratio: {}", self.max_dual_load_ratio)?;
        for v in &self.violations {
            writeln!(f, "violation {} index={} residual={}", v.check.name(), v.index, v.residual)?;
        }
        Ok(())
    }
}

pub fn verify_guarantees(state: &OrbitState, cfg: &GuaranteeConfig) -> GuaranteeReport {
    let part = state.partitioning();
    let kappa = part.kappa() as f64;
    let eps = part.epsilon();
    let tol = cfg.tolerance;
    let log = (3.0 * kappa + 1.0).ln() / cfg.log_base.ln();
    let mut violations = Vec::new();
    let mut flag = |check, index, residual: f64| {
        if residual > tol {
            violations.push(GuaranteeViolation { check, index, residual });
        }
    };

    for r in state.records() {
        if r.eligible.is_empty() {
            continue;
        }
        let now: f64 = r.eligible.iter().map(|&i| state.z()[i]).sum();
        flag(Check::PrimalFeasible, r.id, 1.0 - r.sum_z.min(now));
    }

    let mut max_ratio: f64 = 0.0;
    let mut beta: f64 = 0.0;
    for (i, (&z, &pi)) in state.z().iter().zip(part.costs()).enumerate() {
        let bound = log * (1.0 + pi * eps);
        let load = state.dual_load(i) as f64;
        flag(Check::DualLoad, i as u64, load - bound);
        if bound > 0.0 {
            max_ratio = max_ratio.max(load / bound);
        }
        beta = beta.max(bound / pi);
        flag(Check::PrimalCap, i as u64, z - 3.0);
        let grown = ((1.0 + 1.0 / (pi * eps)).powf(load) - 1.0) / kappa;
        flag(Check::GrowthLowerBound, i as u64, grown - z - tol * grown.abs());
    }

    let primal = state.primal_cost();
    let dual = state.dual_cost();
    flag(Check::CostRatio, 0, primal - 2.0 * dual - tol * primal.abs());
    for (k, step) in state.trace().iter().enumerate() {
        let off = (step.dual - 1.0).abs().max(step.primal - 2.0 * step.dual);
        flag(Check::IterationRatio, k as u64, off);
    }

    GuaranteeReport {
        violations,
        primal,
        dual,
        dual_scaling: beta,
        max_dual_load_ratio: max_ratio,
        cost_ratio: if dual > 0.0 { primal / dual } else { 0.0 },
    }
}
