//! Browser bindings for the demo page in `web/`.
//!
//! Every export takes plain text (topology and demand files) and returns a
//! JSON string. The `*_json` functions are the host-testable core; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use orbitlb_core::io::{parse_demands, parse_topology};
use orbitlb_core::orbit::{partition, verify_guarantees, GuaranteeConfig, Orbit, Partitioning};
use orbitlb_core::{ecmp_dag, shortest_path_field, split_demand, NfviGraph, WeightVector};

const INTERNET2_TOPO: &str = include_str!("../../../data/internet2.topo");
const INTERNET2_DEMANDS: &str = include_str!("../../../data/internet2.demands");
const GEANT_TOPO: &str = include_str!("../../../data/geant.topo");
const GEANT_DEMANDS: &str = include_str!("../../../data/geant.demands");

#[derive(Serialize)]
struct Dataset<'a> {
    topology: &'a str,
    demands: &'a str,
}

#[derive(Serialize)]
struct NodeView {
    name: String,
    part: usize,
}

#[derive(Serialize)]
struct LinkView {
    name: String,
    from: usize,
    to: usize,
    capacity: f64,
    load: f64,
}

#[derive(Serialize)]
struct PartitionView {
    nodes: Vec<NodeView>,
    links: Vec<LinkView>,
    costs: Vec<f64>,
    cut_capacity: f64,
    max_size: usize,
}

#[derive(Serialize)]
struct SplitView {
    links: Vec<LinkView>,
    distance: Option<u64>,
}

#[derive(Serialize)]
struct OrbitView {
    partition: PartitionView,
    processed: usize,
    accepted: usize,
    acceptance_ratio: f64,
    max_link_utilization: f64,
    primal_cost: f64,
    dual_cost: f64,
    z: Vec<f64>,
    guarantees: String,
    events: String,
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn graph(text: &str) -> Result<NfviGraph, String> {
    parse_topology(text).map_err(|e| e.to_string())
}

fn partition_view(g: &NfviGraph, p: &Partitioning, loads: Option<&[f64]>) -> PartitionView {
    PartitionView {
        nodes: g
            .node_ids()
            .map(|v| NodeView {
                name: g.node(v).name.clone(),
                part: p.part_of(v),
            })
            .collect(),
        links: link_views(g, loads.unwrap_or(&vec![0.0; g.link_count()])),
        costs: p.costs().to_vec(),
        cut_capacity: p.cut_capacity(g),
        max_size: p.max_size(),
    }
}

fn link_views(g: &NfviGraph, loads: &[f64]) -> Vec<LinkView> {
    g.links()
        .iter()
        .zip(loads)
        .map(|(l, &load)| LinkView {
            name: l.name.clone(),
            from: l.from.0,
            to: l.to.0,
            capacity: l.capacity,
            load,
        })
        .collect()
}

/// `{topology, demands}` text of a shipped dataset.
pub fn dataset_json(name: &str) -> Result<String, String> {
    let d = match name {
        "internet2" => Dataset {
            topology: INTERNET2_TOPO,
            demands: INTERNET2_DEMANDS,
        },
        "geant" => Dataset {
            topology: GEANT_TOPO,
            demands: GEANT_DEMANDS,
        },
        other => return Err(format!("unknown dataset {other:?}")),
    };
    json(&d)
}

/// ECMP split of `amount` from node `source` to `destination` under unit
/// weights.
pub fn split_json(topology: &str, source: &str, destination: &str, amount: f64) -> Result<String, String> {
    let g = graph(topology)?;
    let s = g.node_by_name(source).ok_or_else(|| format!("no node {source:?}"))?;
    let t = g.node_by_name(destination).ok_or_else(|| format!("no node {destination:?}"))?;
    let w = WeightVector::unit(&g);
    let l = shortest_path_field(&g, &w);
    let dag = ecmp_dag(&g, &w, &l);
    let alloc = split_demand(&g, &dag, s, t, amount).map_err(|e| e.to_string())?;
    json(&SplitView {
        links: link_views(&g, &alloc.link_loads()),
        distance: l.distance(s, t),
    })
}

pub fn partition_json(topology: &str, kappa: usize, epsilon: f64, seed: u64) -> Result<String, String> {
    let g = graph(topology)?;
    let p = partition(&g, kappa, epsilon, seed).map_err(|e| e.to_string())?;
    json(&partition_view(&g, &p, None))
}

/// Replays the whole demand stream through ORBIT with unit weights.
pub fn orbit_json(topology: &str, demands: &str, kappa: usize, epsilon: f64, seed: u64) -> Result<String, String> {
    let g = graph(topology)?;
    let stream = parse_demands(demands, &g).map_err(|e| e.to_string())?;
    let p = partition(&g, kappa, epsilon, seed).map_err(|e| e.to_string())?;
    let mut o = Orbit::new(&g, &WeightVector::unit(&g), p);
    o.run(&stream).map_err(|e| e.to_string())?;
    let st = o.state();
    json(&OrbitView {
        partition: partition_view(&g, st.partitioning(), Some(st.link_loads())),
        processed: st.processed(),
        accepted: st.accepted(),
        acceptance_ratio: st.acceptance_ratio(),
        max_link_utilization: st.max_utilization(),
        primal_cost: st.primal_cost(),
        dual_cost: st.dual_cost(),
        z: st.z().to_vec(),
        guarantees: verify_guarantees(st, &GuaranteeConfig::default()).to_string(),
        events: st.event_log_csv(),
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dataset(name: &str) -> Result<String, JsValue> {
    js(dataset_json(name))
}

#[wasm_bindgen]
pub fn ecmp_split(topology: &str, source: &str, destination: &str, amount: f64) -> Result<String, JsValue> {
    js(split_json(topology, source, destination, amount))
}

#[wasm_bindgen]
pub fn partition_graph(topology: &str, kappa: usize, epsilon: f64, seed: u64) -> Result<String, JsValue> {
    js(partition_json(topology, kappa, epsilon, seed))
}

#[wasm_bindgen]
pub fn run_orbit(topology: &str, demands: &str, kappa: usize, epsilon: f64, seed: u64) -> Result<String, JsValue> {
    js(orbit_json(topology, demands, kappa, epsilon, seed))
}
