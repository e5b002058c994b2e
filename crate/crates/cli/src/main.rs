use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitlb_cli::{run_compare, run_export, run_sweep, Algorithm, ExperimentConfig, WeightMode};
use orbitlb_core::baselines::AnnealingSchedule;
use orbitlb_core::io::TopologyFormat;

#[derive(Parser)]
#[command(name = "orbitlb", version, about = "ECMP load balancing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the demand stream through ORBIT for every (kappa, epsilon) pair.
    Sweep(Common),
    /// Run several algorithms on the same stream and tabulate the results.
    Compare(Common),
    /// Write the MILP of the stream in LP format.
    Export(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    demands: PathBuf,
    /// Topology file format.
    #[arg(long, default_value = "lines")]
    format: TopologyFormat,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    kappa: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,3")]
    epsilon: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Flows per demand in the MILP.
    #[arg(long, default_value_t = 2)]
    pd: usize,
    /// Largest link weight the oracle enumerates.
    #[arg(long, default_value_t = 3)]
    wmax: u32,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "orbit,oracle,sa")]
    algorithms: Vec<Algorithm>,
    /// Link weights for ORBIT: unit, or the oracle optimum on a prefix.
    #[arg(long, default_value = "unit")]
    weights: WeightMode,
    /// Demands used by `--weights oracle`.
    #[arg(long, default_value_t = 10)]
    prefix: usize,
    /// Skip the oracle above this many weight vectors.
    #[arg(long, default_value_t = orbitlb_core::milp::DEFAULT_LIMIT)]
    oracle_limit: u128,
    #[arg(long, default_value_t = 1.0)]
    sa_t0: f64,
    #[arg(long, default_value_t = 0.95)]
    sa_cooling: f64,
    #[arg(long, default_value_t = 100)]
    sa_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    sa_stop: f64,
}

impl Common {
    fn into_config(self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.topology, self.demands, self.out);
        cfg.format = self.format;
        cfg.kappa = self.kappa;
        cfg.epsilon = self.epsilon;
        cfg.seed = self.seed;
        cfg.flows_per_demand = self.pd;
        cfg.w_max = self.wmax;
        cfg.algorithms = self.algorithms;
        cfg.weights = self.weights;
        cfg.prefix = self.prefix;
        cfg.oracle_limit = self.oracle_limit;
        cfg.schedule = AnnealingSchedule {
            initial_temperature: self.sa_t0,
            cooling: self.sa_cooling,
            iterations_per_level: self.sa_iters,
            stop_temperature: self.sa_stop,
            seed: self.seed,
        };
        cfg
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Sweep(c) => run_sweep(&c.into_config()).map(|rows| {
            println!("{} sweep points written", rows.len());
            if rows.iter().any(|r| !r.guarantees_hold) {
                eprintln!("warning: a guarantee check failed; see guarantees_*.txt");
            }
        }),
        Command::Compare(c) => run_compare(&c.into_config()).map(|rows| {
            for r in rows {
                println!("{}: {}", r.algorithm.name(), r.note.unwrap_or_else(|| "done".into()));
            }
        }),
        Command::Export(c) => run_export(&c.into_config()).map(|p| println!("wrote {}", p.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
