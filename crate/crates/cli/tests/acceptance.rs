//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.
//! Run with `cargo test -p orbitlb-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbitlb_cli::{run_sweep, ExperimentConfig};
use orbitlb_core::baselines::{simulated_annealing, AnnealingSchedule};
use orbitlb_core::io::{load_demands, load_topology, TopologyFormat};
use orbitlb_core::milp::{build_model, candidate_from_routing, check_solution, exact_oracle, Family};
use orbitlb_core::orbit::{partition, Orbit, OrbitState};
use orbitlb_core::synth::{random_demands, random_graph, DemandSpec, GraphSpec};
use orbitlb_core::{
    ecmp_dag, shortest_path_field, split_demand, GraphBuilder, LinkId, NfviGraph, NodeId, ServiceDemand, WeightVector,
};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn report(n: u32, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Per-stream observations for the three primal-dual criteria.
#[derive(Default)]
struct Ledger {
    streams: usize,
    checked_demands: usize,
    iterations: usize,
    worst_sum_z: f64,
    worst_step_primal: f64,
    dual_step_errors: usize,
    worst_cost_gap: f64,
    worst_dual_load_gap: f64,
    max_z: f64,
}

fn dual_loads(st: &OrbitState) -> Vec<f64> {
    (0..st.z().len()).map(|i| st.dual_load(i) as f64).collect()
}

fn run_streams() -> (Ledger, Duration) {
    let start = Instant::now();
    let mut led = Ledger {
        worst_sum_z: f64::INFINITY,
        worst_cost_gap: f64::NEG_INFINITY,
        worst_dual_load_gap: f64::NEG_INFINITY,
        ..Default::default()
    };
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = rng.gen_range(3..=10);
        let extra_edges = rng.gen_range(0..=nodes);
        let g = random_graph(
            &mut rng,
            &GraphSpec {
                nodes,
                extra_edges,
                capacity: 5.0..40.0,
                compute: 5.0..30.0,
                vnfs: 3,
                host_probability: 0.3,
                ..Default::default()
            },
        );
        let count = rng.gen_range(1..=50);
        let demands = random_demands(&mut rng, &g, &DemandSpec { count, volume: 0.5..10.0, max_chain: 2 });
        let kappa = 1 + (seed % 3) as usize;
        let eps = 1.0 + ((seed / 3) % 3) as f64;
        let p = partition(&g, kappa, eps, seed).expect("kappa <= nodes");
        let bounds: Vec<f64> = p
            .costs()
            .iter()
            .map(|pi| (3.0 * kappa as f64 + 1.0).ln() * (1.0 + pi * eps))
            .collect();
        let mut o = Orbit::new(&g, &WeightVector::unit(&g), p);
        let mut seen = 0;
        for d in &demands {
            o.process_demand(d).unwrap();
            let st = o.state();
            let rec = st.records().last().unwrap();
            if !rec.eligible.is_empty() {
                let s: f64 = rec.eligible.iter().map(|&i| st.z()[i]).sum();
                led.worst_sum_z = led.worst_sum_z.min(s);
                led.checked_demands += 1;
            }
            for step in &st.trace()[seen..] {
                led.iterations += 1;
                led.worst_step_primal = led.worst_step_primal.max(step.primal);
                if step.dual != 1.0 {
                    led.dual_step_errors += 1;
                }
            }
            seen = st.trace().len();
            led.worst_cost_gap = led.worst_cost_gap.max(st.primal_cost() - 2.0 * st.dual_cost());
            for (load, b) in dual_loads(st).iter().zip(&bounds) {
                led.worst_dual_load_gap = led.worst_dual_load_gap.max(load - b);
            }
            led.max_z = st.z().iter().copied().fold(led.max_z, f64::max);
        }
        led.streams += 1;
    }
    (led, start.elapsed())
}

#[test]
fn criterion_1_to_3_primal_dual_ledger() {
    let (led, took) = run_streams();
    report(
        1,
        led.streams >= 1000 && led.worst_sum_z >= 1.0 - 1e-9 && took < Duration::from_secs(60),
        format!(
            "min sum z = {:.6} over {} demands in {} streams, {:.1}s",
            led.worst_sum_z,
            led.checked_demands,
            led.streams,
            took.as_secs_f64()
        ),
    );
    report(
        2,
        led.dual_step_errors == 0 && led.worst_step_primal <= 2.0 + 1e-9 && led.worst_cost_gap <= 1e-9,
        format!(
            "{} iterations, max dP = {:.6}, dD != 1 in {}, max P - 2D = {:.6}",
            led.iterations, led.worst_step_primal, led.dual_step_errors, led.worst_cost_gap
        ),
    );
    report(
        3,
        led.worst_dual_load_gap <= 1e-9 && led.max_z <= 3.0,
        format!(
            "max dual load minus bound = {:.4}, max z = {:.6}",
            led.worst_dual_load_gap, led.max_z
        ),
    );
}

/// Per-link rates for `h` from `s` to `t` by listing every simple path,
/// keeping the shortest ones and splitting evenly at each node over the
/// distinct next links those paths use.
fn brute_force_split(g: &NfviGraph, w: &WeightVector, s: NodeId, t: NodeId, h: f64) -> Option<Vec<f64>> {
    let mut paths: Vec<Vec<LinkId>> = Vec::new();
    let mut stack = vec![(s, Vec::<LinkId>::new(), vec![s])];
    while let Some((v, links, visited)) = stack.pop() {
        if v == t {
            paths.push(links);
            continue;
        }
        for &e in g.out_links(v) {
            let j = g.link(e).to;
            if !visited.contains(&j) {
                let mut l = links.clone();
                l.push(e);
                let mut vis = visited.clone();
                vis.push(j);
                stack.push((j, l, vis));
            }
        }
    }
    let len = |p: &Vec<LinkId>| p.iter().map(|&e| u64::from(w.get(e))).sum::<u64>();
    let best = paths.iter().map(len).min()?;
    let shortest: Vec<&Vec<LinkId>> = paths.iter().filter(|p| len(p) == best).collect();
    let mut next: BTreeMap<NodeId, Vec<LinkId>> = BTreeMap::new();
    for p in &shortest {
        for &e in p.iter() {
            let hops = next.entry(g.link(e).from).or_default();
            if !hops.contains(&e) {
                hops.push(e);
            }
        }
    }
    let mut rates = vec![0.0; g.link_count()];
    for p in &shortest {
        let share: f64 = p.iter().map(|&e| 1.0 / next[&g.link(e).from].len() as f64).product();
        for &e in p.iter() {
            rates[e.0] += h * share;
        }
    }
    Some(rates)
}

#[test]
fn criterion_4_ecmp_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let (mut instances, mut pairs, mut worst) = (0, 0, 0.0f64);
    let mut mismatched_reachability = 0;
    while instances < 150 {
        let n = rng.gen_range(2..=5);
        let mut b = GraphBuilder::new();
        for v in 0..n {
            b.node(&format!("v{v}"), 1.0);
        }
        let mut k = 0;
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(0.55) {
                    b.link(&format!("e{k}"), &format!("v{u}"), &format!("v{v}"), 1.0);
                    k += 1;
                }
            }
        }
        let g = b.build().unwrap();
        let w = WeightVector::new(&g, (0..g.link_count()).map(|_| rng.gen_range(1..=3)).collect()).unwrap();
        let l = shortest_path_field(&g, &w);
        let dag = ecmp_dag(&g, &w, &l);
        let h = rng.gen_range(0.5..20.0);
        for s in g.node_ids() {
            for t in g.node_ids().filter(|&t| t != s) {
                let ours = split_demand(&g, &dag, s, t, h).ok().map(|a| a.link_loads());
                match (ours, brute_force_split(&g, &w, s, t, h)) {
                    (Some(a), Some(b)) => {
                        pairs += 1;
                        for (x, y) in a.iter().zip(&b) {
                            worst = worst.max((x - y).abs());
                        }
                    }
                    (None, None) => {}
                    _ => mismatched_reachability += 1,
                }
            }
        }
        instances += 1;
    }
    let took = start.elapsed();
    report(
        4,
        worst <= 1e-9 && mismatched_reachability == 0 && took < Duration::from_secs(30),
        format!(
            "{instances} graphs, {pairs} pairs, max |diff| = {worst:.2e}, reachability mismatches {mismatched_reachability}, {:.2}s",
            took.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_routing_satisfies_milp_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut violations = 0;
    let mut first = None;
    for _ in 0..100 {
        let nodes = rng.gen_range(3..=7);
        let extra_edges = rng.gen_range(0..=nodes);
        let g = random_graph(
            &mut rng,
            &GraphSpec {
                nodes,
                extra_edges,
                capacity: 100.0..1000.0,
                ..Default::default()
            },
        );
        let count = rng.gen_range(1..=5);
        let demands = random_demands(&mut rng, &g, &DemandSpec { count, volume: 1.0..20.0, max_chain: 0 });
        let w = WeightVector::new(&g, (0..g.link_count()).map(|_| rng.gen_range(1..=3)).collect()).unwrap();
        let model = build_model(&g, &demands, 2).unwrap();
        let (cand, _) = candidate_from_routing(&model, &g, &demands, &w).unwrap();
        let rep = check_solution(&model, &cand).unwrap();
        let bad: Vec<_> = rep.violations.iter().filter(|v| v.family.number() <= 8).collect();
        violations += bad.len() + rep.domain_violations.len();
        if first.is_none() {
            first = bad.first().map(|v| v.row.clone());
        }
    }
    report(5, violations == 0, format!("100 instances, {violations} violations of families 1-8, first {first:?}"));
}

#[test]
fn criterion_6_oracle_is_a_floor() {
    let g = GraphBuilder::new()
        .node("s", 100.0)
        .node("a", 100.0)
        .node("b", 100.0)
        .node("t", 100.0)
        .link("sa", "s", "a", 10.0)
        .link("sb", "s", "b", 2.0)
        .link("at", "a", "t", 10.0)
        .link("bt", "b", "t", 2.0)
        .build()
        .unwrap();
    let demands = [ServiceDemand {
        id: 0,
        source: NodeId(0),
        destination: NodeId(3),
        volume: 8.0,
        chain: vec![],
    }];
    let oracle = exact_oracle(&g, &demands, 3).unwrap();
    let (w, r_star) = oracle.best.clone().unwrap();
    let mut orbit = Orbit::new(&g, &w, partition(&g, 1, 1.0, 0).unwrap());
    orbit.run(&demands).unwrap();
    let r_orbit = orbit.state().max_utilization();
    let sa = simulated_annealing(&g, &demands, &AnnealingSchedule::default()).unwrap();
    let r_sa = sa.report.max_utilization;
    report(
        6,
        r_star == 0.8 && r_orbit >= 0.8 && r_sa >= 0.8 && sa.energy >= r_star,
        format!("r* = {r_star}, orbit r = {r_orbit} (oracle weights {w}), sa r = {r_sa}"),
    );
}

#[test]
fn criterion_7_constraint_counts() {
    let g = load_topology(data("internet2.topo"), TopologyFormat::Lines).unwrap();
    let stream = load_demands(data("internet2.demands"), &g).unwrap();
    let demands = stream.prefix(10);
    let p = 2;
    let model = build_model(&g, demands, p).unwrap();
    let counts = model.count_by_family();
    let (n, e, m) = (g.node_count(), g.link_count(), demands.len());
    let mut targets: Vec<_> = demands.iter().map(|d| d.destination).collect();
    targets.sort();
    targets.dedup();
    let funcs: usize = demands.iter().filter(|d| d.volume > 0.0).map(|d| d.chain.len()).sum();
    let positive = demands.iter().filter(|d| d.volume > 0.0).count();
    let mut want: BTreeMap<u8, usize> = BTreeMap::new();
    want.insert(1, m * (n - 2));
    want.insert(2, m);
    want.insert(3, m);
    want.insert(4, e);
    want.insert(5, e * targets.len());
    want.insert(6, m * e);
    want.insert(7, m * e);
    want.insert(8, e);
    want.insert(9, funcs * p);
    want.insert(10, positive * p);
    want.insert(11, m * p * e);
    want.insert(12, m * p * e);
    want.insert(13, m * p * e);
    want.insert(14, n);
    want.retain(|_, c| *c > 0);
    let got: BTreeMap<u8, usize> = counts.iter().map(|(f, c)| (f.number(), *c)).collect();
    let balance: usize = [Family::FlowBalanceRelay, Family::FlowBalanceSource, Family::FlowBalanceSink]
        .iter()
        .map(|f| counts.get(f).copied().unwrap_or(0))
        .sum();
    report(
        7,
        balance == 120 && got == want,
        format!("flow balance {balance}, families {got:?}"),
    );
}

#[test]
fn criterion_8_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_orbitlb"))
            .args(["sweep", "--topology"])
            .arg(data("geant.topo"))
            .arg("--demands")
            .arg(data("geant.demands"))
            .args(["--kappa", "2,3", "--epsilon", "1,3", "--seed", "17", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let a = run("a");
    let b = run("b");
    report(
        8,
        a == b && a.len() == 5,
        format!("{} csv files compared byte for byte", a.len()),
    );
}

#[test]
fn criterion_9_dataset_sweeps() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rows_seen = Vec::new();
    let mut layout_ok = true;
    for name in ["internet2", "geant"] {
        let mut cfg = ExperimentConfig::new(
            data(&format!("{name}.topo")),
            data(&format!("{name}.demands")),
            dir.path().join(name),
        );
        cfg.kappa = vec![2, 3];
        cfg.epsilon = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let rows = run_sweep(&cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join(name).join("sweep.csv")).unwrap();
        let mut lines = csv.lines();
        layout_ok &= lines.next() == Some("kappa,epsilon,max_link_utilization,acceptance_ratio");
        layout_ok &= lines.filter(|l| l.split(',').count() == 4).count() == 10;
        layout_ok &= rows.iter().all(|r| r.max_link_utilization.is_finite() && (0.0..=1.0).contains(&r.acceptance_ratio));
        rows_seen.push(rows.len());
    }
    let took = start.elapsed();
    report(
        9,
        layout_ok && rows_seen == [10, 10] && took < Duration::from_secs(300),
        format!("rows per dataset {rows_seen:?}, {:.2}s", took.as_secs_f64()),
    );
}
