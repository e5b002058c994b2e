//! Seeded random instances for tests, experiments and the demo.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{GraphBuilder, NfviGraph, NodeId, ServiceDemand, VnfId};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub nodes: usize,
    /// Undirected chords added on top of the ring.
    pub extra_edges: usize,
    pub capacity: Range<f64>,
    pub compute: Range<f64>,
    pub vnfs: usize,
    /// Probability that a node hosts a given function.
    pub host_probability: f64,
    pub vnf_cost: Range<f64>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            nodes: 6,
            extra_edges: 3,
            capacity: 100.0..1000.0,
            compute: 50.0..200.0,
            vnfs: 2,
            host_probability: 0.4,
            vnf_cost: 0.1..1.0,
        }
    }
}

/// A bidirectional ring plus random chords, so every node reaches every
/// other. Links come in pairs `u->v`, `v->u` with equal capacity.
pub fn random_graph<R: Rng>(rng: &mut R, spec: &GraphSpec) -> NfviGraph {
    let n = spec.nodes.max(2);
    let mut b = GraphBuilder::new();
    for v in 0..n {
        b.node(&format!("v{v}"), sample(rng, &spec.compute));
    }
    for f in 0..spec.vnfs {
        b.vnf(&format!("f{f}"));
    }
    let mut edges: Vec<(usize, usize)> = if n == 2 { vec![(0, 1)] } else { (0..n).map(|v| (v, (v + 1) % n)).collect() };
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)))
        .collect();
    candidates.shuffle(rng);
    edges.extend(candidates.into_iter().take(spec.extra_edges));
    for (k, &(u, v)) in edges.iter().enumerate() {
        let c = sample(rng, &spec.capacity);
        b.link(&format!("e{k}f"), &format!("v{u}"), &format!("v{v}"), c);
        b.link(&format!("e{k}r"), &format!("v{v}"), &format!("v{u}"), c);
    }
    for v in 0..n {
        for f in 0..spec.vnfs {
            if rng.gen_bool(spec.host_probability.clamp(0.0, 1.0)) {
                b.host(&format!("v{v}"), &format!("f{f}"), sample(rng, &spec.vnf_cost));
            }
        }
    }
    b.build().expect("generated graph is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSpec {
    pub count: usize,
    pub volume: Range<f64>,
    /// Chains have between 0 and this many functions.
    pub max_chain: usize,
}

impl Default for DemandSpec {
    fn default() -> Self {
        DemandSpec {
            count: 10,
            volume: 1.0..10.0,
            max_chain: 2,
        }
    }
}

/// Demands with ids `0..count`, distinct endpoints and random chains from
/// the catalog of `g`.
pub fn random_demands<R: Rng>(rng: &mut R, g: &NfviGraph, spec: &DemandSpec) -> Vec<ServiceDemand> {
    let n = g.node_count();
    let catalog = g.vnf_names().len();
    (0..spec.count as u64)
        .map(|id| {
            let s = rng.gen_range(0..n);
            let t = (s + rng.gen_range(1..n)) % n;
            let len = if catalog == 0 { 0 } else { rng.gen_range(0..=spec.max_chain) };
            ServiceDemand {
                id,
                source: NodeId(s),
                destination: NodeId(t),
                volume: sample(rng, &spec.volume),
                chain: (0..len).map(|_| VnfId(rng.gen_range(0..catalog))).collect(),
            }
        })
        .collect()
}

fn sample<R: Rng>(rng: &mut R, r: &Range<f64>) -> f64 {
    if r.start >= r.end {
        r.start
    } else {
        rng.gen_range(r.clone())
    }
}
