//! (κ, ε)-balanced partitioning by seeded region growing plus pairwise
//! move/swap refinement of the cut capacity.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{NfviGraph, NodeId};

const MAX_REFINE_PASSES: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("number of partitions must be at least 1")]
    NoPartitions,
    #[error("epsilon must be a finite number >= 1, got {0}")]
    BadEpsilon(f64),
    #[error("{kappa} partitions cannot be non-empty on {nodes} nodes")]
    TooManyPartitions { kappa: usize, nodes: usize },
    #[error("assignment does not match the graph or violates the balance bound {max_size}")]
    BadAssignment { max_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partitioning {
    assignment: Vec<usize>,
    parts: Vec<Vec<NodeId>>,
    costs: Vec<f64>,
    kappa: usize,
    epsilon: f64,
    max_size: usize,
    seed: u64,
}

impl Partitioning {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest admissible partition size, `ceil(ε n / κ)`.
    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn parts(&self) -> &[Vec<NodeId>] {
        &self.parts
    }

    pub fn part_of(&self, v: NodeId) -> usize {
        self.assignment[v.0]
    }

    pub fn contains(&self, part: usize, v: NodeId) -> bool {
        self.assignment[v.0] == part
    }

    /// `π_i`: spanning-forest bandwidth of the partition, at least 1.
    pub fn cost(&self, part: usize) -> f64 {
        self.costs[part]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Mask of links with both endpoints in `part`.
    pub fn internal_links(&self, g: &NfviGraph, part: usize) -> Vec<bool> {
        g.links()
            .iter()
            .map(|l| self.assignment[l.from.0] == part && self.assignment[l.to.0] == part)
            .collect()
    }

    /// Total capacity of links between different partitions.
    pub fn cut_capacity(&self, g: &NfviGraph) -> f64 {
        g.links()
            .iter()
            .filter(|l| self.assignment[l.from.0] != self.assignment[l.to.0])
            .map(|l| l.capacity)
            .sum()
    }

    /// Wraps an explicit node-to-partition assignment, checking balance.
    pub fn from_assignment(
        g: &NfviGraph,
        assignment: Vec<usize>,
        kappa: usize,
        epsilon: f64,
    ) -> Result<Self, PartitionError> {
        let max_size = max_size(g.node_count(), kappa, epsilon)?;
        if assignment.len() != g.node_count() || assignment.iter().any(|&p| p >= kappa) {
            return Err(PartitionError::BadAssignment { max_size });
        }
        let parts = group(&assignment, kappa);
        if parts.iter().any(|p| p.is_empty() || p.len() > max_size) {
            return Err(PartitionError::BadAssignment { max_size });
        }
        let costs = parts.iter().map(|p| spanning_cost(g, p).max(1.0)).collect();
        Ok(Partitioning {
            assignment,
            parts,
            costs,
            kappa,
            epsilon,
            max_size,
            seed: 0,
        })
    }
}

fn max_size(n: usize, kappa: usize, epsilon: f64) -> Result<usize, PartitionError> {
    if kappa == 0 {
        return Err(PartitionError::NoPartitions);
    }
    if !epsilon.is_finite() || epsilon < 1.0 {
        return Err(PartitionError::BadEpsilon(epsilon));
    }
    if kappa > n {
        return Err(PartitionError::TooManyPartitions { kappa, nodes: n });
    }
    let bound = epsilon * n as f64 / kappa as f64;
    // absorb representation error such as 3 * 12 / 3 = 12.000000000000002
    Ok(((bound - 1e-9).ceil() as usize).clamp(1, n))
}

fn group(assignment: &[usize], kappa: usize) -> Vec<Vec<NodeId>> {
    let mut parts = vec![Vec::new(); kappa];
    for (v, &p) in assignment.iter().enumerate() {
        parts[p].push(NodeId(v));
    }
    parts
}

/// Sum of link capacities of a minimum spanning forest of the undirected
/// support of the subgraph induced by `nodes`.
pub fn spanning_cost(g: &NfviGraph, nodes: &[NodeId]) -> f64 {
    let mut inside = vec![false; g.node_count()];
    for v in nodes {
        inside[v.0] = true;
    }
    let mut edges: Vec<(f64, usize, usize)> = g
        .links()
        .iter()
        .filter(|l| inside[l.from.0] && inside[l.to.0])
        .map(|l| (l.capacity, l.from.0, l.to.0))
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf = UnionFind::new(g.node_count());
    edges
        .into_iter()
        .filter(|&(_, a, b)| uf.union(a, b))
        .map(|(c, _, _)| c)
        .sum()
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
        true
    }
}

/// Splits `g` into `kappa` non-empty parts of at most `ceil(ε n / κ)` nodes
/// each, heuristically minimizing the capacity of links between parts.
/// Deterministic for a given `seed`.
pub fn partition(g: &NfviGraph, kappa: usize, epsilon: f64, seed: u64) -> Result<Partitioning, PartitionError> {
    let n = g.node_count();
    let max_size = max_size(n, kappa, epsilon)?;
    let mut conn = vec![vec![0.0; n]; n];
    for l in g.links() {
        conn[l.from.0][l.to.0] += l.capacity;
        conn[l.to.0][l.from.0] += l.capacity;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = pick_seeds(&conn, kappa, rng.gen_range(0..n));
    let mut assignment = vec![usize::MAX; n];
    let mut sizes = vec![0usize; kappa];
    for (p, &s) in seeds.iter().enumerate() {
        assignment[s] = p;
        sizes[p] = 1;
    }
    let mut unassigned = n - kappa;
    while unassigned > 0 {
        let p = (0..kappa)
            .filter(|&p| sizes[p] < max_size)
            .min_by_key(|&p| (sizes[p], p))
            .expect("kappa * max_size >= n");
        let pull = |v: usize| -> f64 {
            (0..n)
                .filter(|&u| assignment[u] == p)
                .map(|u| conn[v][u])
                .sum()
        };
        let mut best: Option<(f64, usize)> = None;
        for v in (0..n).filter(|&v| assignment[v] == usize::MAX) {
            let c = pull(v);
            if best.is_none_or(|(bc, _)| c > bc) {
                best = Some((c, v));
            }
        }
        let (_, v) = best.expect("an unassigned node remains");
        assignment[v] = p;
        sizes[p] += 1;
        unassigned -= 1;
    }

    refine(&conn, &mut assignment, &mut sizes, max_size);

    let parts = group(&assignment, kappa);
    let costs = parts.iter().map(|p| spanning_cost(g, p).max(1.0)).collect();
    Ok(Partitioning {
        assignment,
        parts,
        costs,
        kappa,
        epsilon,
        max_size,
        seed,
    })
}

/// Farthest-first seeds by hop distance on the undirected support;
/// disconnected nodes count as infinitely far.
fn pick_seeds(conn: &[Vec<f64>], kappa: usize, first: usize) -> Vec<usize> {
    let n = conn.len();
    let mut seeds = vec![first];
    let mut nearest = hops_from(conn, first);
    while seeds.len() < kappa {
        let next = (0..n)
            .filter(|v| !seeds.contains(v))
            .max_by_key(|&v| (nearest[v], std::cmp::Reverse(v)))
            .expect("kappa <= n");
        seeds.push(next);
        for (d, h) in nearest.iter_mut().zip(hops_from(conn, next)) {
            *d = (*d).min(h);
        }
    }
    seeds
}

fn hops_from(conn: &[Vec<f64>], s: usize) -> Vec<usize> {
    let n = conn.len();
    let mut dist = vec![usize::MAX; n];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if conn[u][v] > 0.0 && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Greedy best-improvement moves and swaps while the cut shrinks.
fn refine(conn: &[Vec<f64>], assignment: &mut [usize], sizes: &mut [usize], max_size: usize) {
    let n = conn.len();
    let kappa = sizes.len();
    let link_to = |assignment: &[usize], v: usize, p: usize| -> f64 {
        (0..n)
            .filter(|&u| u != v && assignment[u] == p)
            .map(|u| conn[v][u])
            .sum()
    };
    for _ in 0..MAX_REFINE_PASSES {
        // (gain, kind) where kind is a move (v, to) or a swap (u, v)
        let mut best: Option<(f64, Change)> = None;
        let mut consider = |gain: f64, c: Change| {
            if gain > 1e-12 && best.as_ref().is_none_or(|(bg, _)| gain > *bg) {
                best = Some((gain, c));
            }
        };
        for v in 0..n {
            let from = assignment[v];
            let own = link_to(assignment, v, from);
            for to in (0..kappa).filter(|&p| p != from) {
                if sizes[to] < max_size && sizes[from] > 1 {
                    consider(link_to(assignment, v, to) - own, Change::Move(v, to));
                }
            }
            for u in (v + 1)..n {
                let other = assignment[u];
                if other == from {
                    continue;
                }
                let gain = link_to(assignment, v, other) - own + link_to(assignment, u, from)
                    - link_to(assignment, u, other)
                    - 2.0 * conn[u][v];
                consider(gain, Change::Swap(v, u));
            }
        }
        match best {
            None => break,
            Some((_, Change::Move(v, to))) => {
                sizes[assignment[v]] -= 1;
                sizes[to] += 1;
                assignment[v] = to;
            }
            Some((_, Change::Swap(v, u))) => assignment.swap(v, u),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Change {
    Move(usize, usize),
    Swap(usize, usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GraphBuilder;

    fn ring(n: usize, cap: f64) -> NfviGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&format!("v{i}"), 1.0);
        }
        for i in 0..n {
            let j = (i + 1) % n;
            b.link(&format!("f{i}"), &format!("v{i}"), &format!("v{j}"), cap);
            b.link(&format!("r{i}"), &format!("v{j}"), &format!("v{i}"), cap);
        }
        b.build().unwrap()
    }

    #[test]
    fn single_partition_is_whole_graph() {
        let g = ring(6, 5.0);
        let p = partition(&g, 1, 1.0, 7).unwrap();
        assert_eq!(p.parts().len(), 1);
        assert_eq!(p.parts()[0].len(), 6);
        // spanning tree of a 6-ring has 5 edges
        assert_eq!(p.cost(0), 25.0);
        assert_eq!(p.cut_capacity(&g), 0.0);
    }

    #[test]
    fn balance_bound_and_cover() {
        let g = ring(12, 1.0);
        for kappa in 1..=4 {
            for eps in [1.0, 1.5, 3.0] {
                let p = partition(&g, kappa, eps, 3).unwrap();
                let total: usize = p.parts().iter().map(Vec::len).sum();
                assert_eq!(total, 12);
                let bound = (eps * 12.0 / kappa as f64).ceil() as usize;
                assert!(p.parts().iter().all(|q| !q.is_empty() && q.len() <= bound));
                assert!(p.costs().iter().all(|&c| c >= 1.0));
            }
        }
    }

    #[test]
    fn ring_halves_cut_twice() {
        let g = ring(8, 1.0);
        let p = partition(&g, 2, 1.0, 11).unwrap();
        // two contiguous arcs: two undirected edges cut, each two links
        assert_eq!(p.cut_capacity(&g), 4.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = ring(10, 2.0);
        assert_eq!(partition(&g, 3, 1.0, 42).unwrap(), partition(&g, 3, 1.0, 42).unwrap());
    }

    #[test]
    fn parameter_errors() {
        let g = ring(4, 1.0);
        assert_eq!(partition(&g, 0, 1.0, 0).unwrap_err(), PartitionError::NoPartitions);
        assert_eq!(partition(&g, 2, 0.5, 0).unwrap_err(), PartitionError::BadEpsilon(0.5));
        assert!(matches!(
            partition(&g, 5, 1.0, 0),
            Err(PartitionError::TooManyPartitions { .. })
        ));
    }

    #[test]
    fn singleton_cost_clamped_to_one() {
        let g = ring(4, 0.25);
        let p = Partitioning::from_assignment(&g, vec![0, 1, 1, 1], 2, 2.0).unwrap();
        assert_eq!(p.cost(0), 1.0);
        assert_eq!(p.cost(1), 1.0); // 0.5 before clamping
        assert!(Partitioning::from_assignment(&g, vec![0, 0, 0, 1], 2, 1.0).is_err());
    }
}
