use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use orbitlb_cli::{load_instance, route_everything, run_compare, run_export, run_sweep, Algorithm, ExperimentConfig};
use orbitlb_core::milp::{build_model, LpFile};
use orbitlb_core::WeightVector;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

const DIAMOND: &str = "node s 100\nnode a 100\nnode b 100\nnode t 100\n\
link sa s a 10\nlink sb s b 2\nlink at a t 10\nlink bt b t 2\n";

fn diamond_files(dir: &Path, demands: &str) -> (PathBuf, PathBuf) {
    let topo = dir.join("diamond.topo");
    let dem = dir.join("diamond.demands");
    fs::write(&topo, DIAMOND).unwrap();
    fs::write(&dem, demands).unwrap();
    (topo, dem)
}

#[test]
fn internet2_sweep_has_ten_sorted_rows() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(data("internet2.topo"), data("internet2.demands"), out.path());
    cfg.kappa = vec![3, 2];
    cfg.epsilon = vec![5.0, 4.0, 3.0, 2.0, 1.0];
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.guarantees_hold));
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.acceptance_ratio)));
    let csv = fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kappa,epsilon,max_link_utilization,acceptance_ratio");
    assert!(lines[1].starts_with("2,1,"));
    assert!(lines[10].starts_with("3,5,"));
    assert!(out.path().join("guarantees_k3_e5.txt").is_file());
    assert!(out.path().join("events_k2_e1.csv").is_file());
}

#[test]
fn single_partition_matches_plain_ecmp() {
    let out = tempfile::tempdir().unwrap();
    for name in ["internet2", "geant"] {
        let mut cfg = ExperimentConfig::new(
            data(&format!("{name}.topo")),
            data(&format!("{name}.demands")),
            out.path(),
        );
        cfg.kappa = vec![1];
        cfg.epsilon = vec![1.0];
        let row = run_sweep(&cfg).unwrap().remove(0);
        let inst = load_instance(&cfg).unwrap();
        let (r, acc) = route_everything(&inst, &WeightVector::unit(&inst.graph));
        assert!((row.max_link_utilization - r).abs() < 1e-12, "{name}");
        assert_eq!(row.acceptance_ratio, acc, "{name}");
    }
}

#[test]
fn compare_on_diamond_puts_oracle_first() {
    let dir = tempfile::tempdir().unwrap();
    let (topo, dem) = diamond_files(dir.path(), "demand 0 s t 8 -\n");
    let mut cfg = ExperimentConfig::new(topo, dem, dir.path().join("out"));
    cfg.kappa = vec![1];
    cfg.epsilon = vec![1.0];
    let rows = run_compare(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    let r = |a: Algorithm| rows.iter().find(|x| x.algorithm == a).unwrap();
    let oracle = r(Algorithm::Oracle).max_link_utilization.unwrap();
    assert_eq!(oracle, 0.8);
    // routes under unit weights are rejected, so compare accepted volume too
    for a in [Algorithm::Orbit, Algorithm::Sa] {
        let row = r(a);
        let acc = row.acceptance_ratio.unwrap();
        assert!(acc < 1.0 || row.max_link_utilization.unwrap() >= oracle);
    }
    let csv = fs::read_to_string(dir.path().join("out/compare.csv")).unwrap();
    assert!(csv.starts_with("algorithm,max_link_utilization,acceptance_ratio,runtime_ms\norbit,"));
    assert_eq!(
        fs::read_to_string(dir.path().join("out/oracle_log.csv")).unwrap().lines().count(),
        1 + 81
    );
}

#[test]
fn empty_stream_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let (topo, dem) = diamond_files(dir.path(), "# nothing\n");
    let mut cfg = ExperimentConfig::new(topo, dem, dir.path().join("out"));
    cfg.kappa = vec![2];
    cfg.epsilon = vec![2.0];
    for row in run_compare(&cfg).unwrap() {
        assert_eq!(row.max_link_utilization, Some(0.0), "{:?}", row.algorithm);
        assert_eq!(row.acceptance_ratio, Some(1.0));
    }
}

#[test]
fn oracle_guard_gives_warning_row() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(data("internet2.topo"), data("internet2.demands"), out.path());
    cfg.algorithms = vec![Algorithm::Oracle];
    let rows = run_compare(&cfg).unwrap();
    assert_eq!(rows[0].max_link_utilization, None);
    let csv = fs::read_to_string(out.path().join("compare.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("oracle,NA,NA,NA"));
}

#[test]
fn export_matches_model_counts() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("ten.demands");
    let text = fs::read_to_string(data("internet2.demands")).unwrap();
    let ten: String = text.lines().filter(|l| l.starts_with("demand")).take(10).map(|l| format!("{l}\n")).collect();
    fs::write(&dem, ten).unwrap();
    let cfg = ExperimentConfig::new(data("internet2.topo"), &dem, dir.path().join("out"));
    let path = run_export(&cfg).unwrap();
    let lp = LpFile::parse(&fs::read_to_string(path).unwrap()).unwrap();
    let inst = load_instance(&cfg).unwrap();
    let model = build_model(&inst.graph, inst.demands.demands(), 2).unwrap();
    assert_eq!(lp.count_by_family(), model.count_by_family());
}

fn orbitlb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_orbitlb")).args(args).output().unwrap()
}

#[test]
fn exit_statuses() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let topo = data("internet2.topo");
    let dem = data("internet2.demands");
    let (t, d) = (topo.to_str().unwrap(), dem.to_str().unwrap());
    let ok = orbitlb(&["sweep", "--topology", t, "--demands", d, "--kappa", "2", "--epsilon", "1", "--out", o]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad_alg = orbitlb(&["compare", "--topology", t, "--demands", d, "--algorithms", "magic", "--out", o]);
    assert_eq!(bad_alg.status.code(), Some(2));
    assert_eq!(orbitlb(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(orbitlb(&["sweep", "--topology", t]).status.code(), Some(2));
    let missing = orbitlb(&["sweep", "--topology", "/nonexistent", "--demands", d, "--out", o]);
    assert_eq!(missing.status.code(), Some(1));
    let infeasible = orbitlb(&["sweep", "--topology", t, "--demands", d, "--kappa", "13", "--out", o]);
    assert_eq!(infeasible.status.code(), Some(1));
}
