//! Experiment runner: parameter sweeps, algorithm comparison and MILP
//! export over a topology file and a demand file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use orbitlb_core::baselines::{admit_sequentially, simulated_annealing, AnnealingSchedule};
use orbitlb_core::io::{load_demands, load_topology, TopologyFormat};
use orbitlb_core::milp::{build_model, export_lp, exact_oracle_with, OracleConfig, OracleError};
use orbitlb_core::orbit::{partition, verify_guarantees, GuaranteeConfig, GuaranteeReport, Orbit};
use orbitlb_core::{DemandStream, NfviGraph, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Orbit,
    Oracle,
    Sa,
    MilpExport,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Orbit => "orbit",
            Algorithm::Oracle => "oracle",
            Algorithm::Sa => "sa",
            Algorithm::MilpExport => "milp-export",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "orbit" => Ok(Algorithm::Orbit),
            "oracle" => Ok(Algorithm::Oracle),
            "sa" => Ok(Algorithm::Sa),
            "milp-export" | "milp" => Ok(Algorithm::MilpExport),
            other => Err(format!("unknown algorithm {other:?} (expected orbit, oracle, sa, milp-export)")),
        }
    }
}

/// Link weights handed to ORBIT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Unit,
    /// Best oracle weights for the first `prefix` demands.
    Oracle,
}

impl FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unit" => Ok(WeightMode::Unit),
            "oracle" => Ok(WeightMode::Oracle),
            other => Err(format!("unknown weight mode {other:?} (expected unit or oracle)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub topology: PathBuf,
    pub demands: PathBuf,
    pub format: TopologyFormat,
    pub algorithms: Vec<Algorithm>,
    pub kappa: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub seed: u64,
    pub flows_per_demand: usize,
    pub w_max: u32,
    pub out: PathBuf,
    pub weights: WeightMode,
    pub prefix: usize,
    pub oracle_limit: u128,
    pub schedule: AnnealingSchedule,
}

impl ExperimentConfig {
    pub fn new(topology: impl Into<PathBuf>, demands: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            topology: topology.into(),
            demands: demands.into(),
            format: TopologyFormat::Lines,
            algorithms: vec![Algorithm::Orbit, Algorithm::Oracle, Algorithm::Sa],
            kappa: vec![2, 3],
            epsilon: vec![1.0, 3.0],
            seed: 1,
            flows_per_demand: 2,
            w_max: 3,
            out: out.into(),
            weights: WeightMode::Unit,
            prefix: 10,
            oracle_limit: orbitlb_core::milp::DEFAULT_LIMIT,
            schedule: AnnealingSchedule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_empty() || self.epsilon.is_empty() {
            bail!("kappa and epsilon lists must not be empty");
        }
        if self.algorithms.is_empty() {
            bail!("no algorithm selected");
        }
        if self.flows_per_demand == 0 {
            bail!("--pd must be at least 1");
        }
        for p in [&self.topology, &self.demands] {
            if !p.is_file() {
                bail!("{} does not exist", p.display());
            }
        }
        Ok(())
    }
}

pub struct Instance {
    pub graph: NfviGraph,
    pub demands: DemandStream,
}

pub fn load_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let graph = load_topology(&cfg.topology, cfg.format)
        .with_context(|| format!("reading topology {}", cfg.topology.display()))?;
    let demands = load_demands(&cfg.demands, &graph)
        .with_context(|| format!("reading demands {}", cfg.demands.display()))?;
    Ok(Instance { graph, demands })
}

/// Weights for ORBIT under `cfg.weights`.
pub fn orbit_weights(cfg: &ExperimentConfig, inst: &Instance) -> Result<WeightVector> {
    match cfg.weights {
        WeightMode::Unit => Ok(WeightVector::unit(&inst.graph)),
        WeightMode::Oracle => {
            let mut oc = OracleConfig::new(cfg.w_max);
            oc.limit = cfg.oracle_limit;
            oc.record_log = false;
            let res = exact_oracle_with(&inst.graph, inst.demands.prefix(cfg.prefix), &oc)?;
            Ok(res
                .best
                .map_or_else(|| WeightVector::unit(&inst.graph), |(w, _)| w))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kappa: usize,
    pub epsilon: f64,
    pub max_link_utilization: f64,
    pub acceptance_ratio: f64,
    pub guarantees_hold: bool,
}

pub struct SweepPoint {
    pub row: SweepRow,
    pub report: GuaranteeReport,
    pub events: String,
}

/// Replays the stream through ORBIT at one `(κ, ε)` point.
pub fn run_point(inst: &Instance, w: &WeightVector, kappa: usize, epsilon: f64, seed: u64) -> Result<SweepPoint> {
    let p = partition(&inst.graph, kappa, epsilon, seed)
        .with_context(|| format!("partitioning with kappa={kappa}, epsilon={epsilon}"))?;
    let mut orbit = Orbit::new(&inst.graph, w, p);
    orbit.run(&inst.demands)?;
    let state = orbit.state();
    let report = verify_guarantees(state, &GuaranteeConfig::default());
    Ok(SweepPoint {
        row: SweepRow {
            kappa,
            epsilon,
            max_link_utilization: state.max_utilization(),
            acceptance_ratio: state.acceptance_ratio(),
            guarantees_hold: report.passed(),
        },
        report,
        events: state.event_log_csv(),
    })
}

fn point_tag(kappa: usize, epsilon: f64) -> String {
    format!("k{kappa}_e{epsilon}")
}

/// Runs every `(κ, ε)` pair and writes `sweep.csv`, one guarantee report
/// and one event log per point. Rows are sorted by `(κ, ε)`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let inst = load_instance(cfg)?;
    let w = orbit_weights(cfg, &inst)?;
    let mut grid: Vec<(usize, f64)> = cfg
        .kappa
        .iter()
        .flat_map(|&k| cfg.epsilon.iter().map(move |&e| (k, e)))
        .collect();
    grid.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    grid.dedup();
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&(k, e)| run_point(&inst, &w, k, e, cfg.seed))
        .collect::<Result<_>>()?;

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut csv = String::from("kappa,epsilon,max_link_utilization,acceptance_ratio\n");
    for p in &points {
        let r = &p.row;
        let _ = writeln!(csv, "{},{},{},{}", r.kappa, r.epsilon, r.max_link_utilization, r.acceptance_ratio);
        let tag = point_tag(r.kappa, r.epsilon);
        write(&cfg.out.join(format!("guarantees_{tag}.txt")), &p.report.to_string())?;
        write(&cfg.out.join(format!("events_{tag}.csv")), &p.events)?;
    }
    write(&cfg.out.join("sweep.csv"), &csv)?;
    Ok(points.into_iter().map(|p| p.row).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    /// `None` when the algorithm was skipped or found nothing feasible.
    pub max_link_utilization: Option<f64>,
    pub acceptance_ratio: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub note: Option<String>,
}

/// Runs the selected algorithms on the whole stream and writes
/// `compare.csv`. ORBIT uses the first κ and ε of the config.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let inst = load_instance(cfg)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let mut rows = Vec::new();
    for alg in algorithms {
        let start = Instant::now();
        let row = match alg {
            Algorithm::Orbit => {
                let w = orbit_weights(cfg, &inst)?;
                let p = run_point(&inst, &w, cfg.kappa[0], cfg.epsilon[0], cfg.seed)?;
                measured(alg, p.row.max_link_utilization, p.row.acceptance_ratio, start)
            }
            Algorithm::Oracle => {
                let mut oc = OracleConfig::new(cfg.w_max);
                oc.limit = cfg.oracle_limit;
                match exact_oracle_with(&inst.graph, inst.demands.demands(), &oc) {
                    Ok(res) => {
                        write(&cfg.out.join("oracle_log.csv"), &res.log_csv())?;
                        match res.best {
                            Some((w, r)) => {
                                let mut row = measured(alg, r, 1.0, start);
                                row.note = Some(format!("w={w}"));
                                row
                            }
                            None => skipped(alg, "no feasible weight vector".into()),
                        }
                    }
                    Err(e @ OracleError::TooManyCombinations { .. }) => {
                        eprintln!("warning: oracle skipped: {e}");
                        skipped(alg, e.to_string())
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Algorithm::Sa => {
                let mut schedule = cfg.schedule.clone();
                schedule.seed = cfg.seed;
                let res = simulated_annealing(&inst.graph, inst.demands.demands(), &schedule)?;
                measured(alg, res.report.max_utilization, res.acceptance_ratio, start)
            }
            Algorithm::MilpExport => {
                let path = export(cfg, &inst)?;
                skipped(alg, format!("wrote {}", path.display()))
            }
        };
        rows.push(row);
    }
    write(&cfg.out.join("compare.csv"), &compare_csv(&rows))?;
    Ok(rows)
}

fn measured(algorithm: Algorithm, r: f64, acc: f64, start: Instant) -> CompareRow {
    CompareRow {
        algorithm,
        max_link_utilization: Some(r),
        acceptance_ratio: Some(acc),
        runtime_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        note: None,
    }
}

fn skipped(algorithm: Algorithm, note: String) -> CompareRow {
    CompareRow {
        algorithm,
        max_link_utilization: None,
        acceptance_ratio: None,
        runtime_ms: None,
        note: Some(note),
    }
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    let mut out = String::from("algorithm,max_link_utilization,acceptance_ratio,runtime_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.algorithm.name(),
            na(r.max_link_utilization),
            na(r.acceptance_ratio),
            r.runtime_ms.map_or_else(|| "NA".to_string(), |x| format!("{x:.3}"))
        );
    }
    out
}

fn export(cfg: &ExperimentConfig, inst: &Instance) -> Result<PathBuf> {
    let model = build_model(&inst.graph, inst.demands.demands(), cfg.flows_per_demand)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let path = cfg.out.join("model.lp");
    export_lp(&model, &path).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes the MILP of the whole stream to `model.lp` in the output
/// directory.
pub fn run_export(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let inst = load_instance(cfg)?;
    export(cfg, &inst)
}

/// Utilization and acceptance of routing every demand on the full graph
/// with sequential capacity checks.
pub fn route_everything(inst: &Instance, w: &WeightVector) -> (f64, f64) {
    let a = admit_sequentially(&inst.graph, inst.demands.demands(), w);
    (a.report.max_utilization, a.acceptance_ratio())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
