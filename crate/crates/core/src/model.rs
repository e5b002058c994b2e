//! Infrastructure and demand types.
//!
//! Nodes, links and VNFs are referred to by dense indices (`NodeId`,
//! `LinkId`, `VnfId`) into the owning [`NfviGraph`]; the textual names used
//! in data files are kept alongside for reporting and serialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VnfId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub name: String,
    /// Compute capacity in abstract compute units.
    pub compute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub name: String,
    pub from: NodeId,
    pub to: NodeId,
    /// Bandwidth capacity in traffic-rate units.
    pub capacity: f64,
}

/// Price and hosting capability of one function on one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VnfOffer {
    /// Compute units consumed per unit of traffic rate.
    pub cost: f64,
    pub capable: bool,
}

/// Directed capacitated NFV infrastructure graph.
///
/// Construct through [`GraphBuilder`] or the topology parser; both validate
/// the result, so every `NfviGraph` in circulation satisfies the invariants
/// checked by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NfviGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    vnfs: Vec<String>,
    offers: BTreeMap<(NodeId, VnfId), VnfOffer>,
    #[serde(skip)]
    out_links: Vec<Vec<LinkId>>,
    #[serde(skip)]
    in_links: Vec<Vec<LinkId>>,
}

impl NfviGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.0]
    }

    pub fn link(&self, e: LinkId) -> &Link {
        &self.links[e.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.links.len()).map(LinkId)
    }

    pub fn out_links(&self, v: NodeId) -> &[LinkId] {
        &self.out_links[v.0]
    }

    pub fn in_links(&self, v: NodeId) -> &[LinkId] {
        &self.in_links[v.0]
    }

    pub fn vnf_names(&self) -> &[String] {
        &self.vnfs
    }

    pub fn vnf_name(&self, f: VnfId) -> &str {
        &self.vnfs[f.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn vnf_by_name(&self, name: &str) -> Option<VnfId> {
        self.vnfs.iter().position(|f| f == name).map(VnfId)
    }

    pub fn offers(&self) -> impl Iterator<Item = (NodeId, VnfId, VnfOffer)> + '_ {
        self.offers.iter().map(|(&(v, f), &o)| (v, f, o))
    }

    /// `k(v, f)`: whether node `v` can host function `f`.
    pub fn can_host(&self, v: NodeId, f: VnfId) -> bool {
        self.offers.get(&(v, f)).is_some_and(|o| o.capable)
    }

    /// `r_vf`; zero when the node does not price the function.
    pub fn vnf_cost(&self, v: NodeId, f: VnfId) -> f64 {
        self.offers.get(&(v, f)).map_or(0.0, |o| o.cost)
    }

    pub fn max_link_capacity(&self) -> f64 {
        self.links.iter().map(|l| l.capacity).fold(0.0, f64::max)
    }
}

/// Incremental, name-based construction of an [`NfviGraph`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    links: Vec<(String, String, String, f64)>,
    vnfs: Vec<String>,
    offers: Vec<(String, String, VnfOffer)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: &str, compute: f64) -> &mut Self {
        self.nodes.push(Node {
            name: name.to_string(),
            compute,
        });
        self
    }

    pub fn link(&mut self, name: &str, from: &str, to: &str, capacity: f64) -> &mut Self {
        self.links
            .push((name.to_string(), from.to_string(), to.to_string(), capacity));
        self
    }

    /// Declares a function in the catalog without hosting it anywhere.
    pub fn vnf(&mut self, name: &str) -> &mut Self {
        if !self.vnfs.iter().any(|f| f == name) {
            self.vnfs.push(name.to_string());
        }
        self
    }

    /// Node `node` hosts `vnf` at `cost` compute units per unit rate.
    pub fn host(&mut self, node: &str, vnf: &str, cost: f64) -> &mut Self {
        self.offer(node, vnf, VnfOffer { cost, capable: true })
    }

    /// Node `node` prices `vnf` but cannot host it.
    pub fn price(&mut self, node: &str, vnf: &str, cost: f64) -> &mut Self {
        self.offer(node, vnf, VnfOffer { cost, capable: false })
    }

    fn offer(&mut self, node: &str, vnf: &str, offer: VnfOffer) -> &mut Self {
        self.vnf(vnf);
        self.offers.push((node.to_string(), vnf.to_string(), offer));
        self
    }

    /// Resolves names and validates. All violations are reported together.
    pub fn build(&self) -> Result<NfviGraph, ModelError> {
        let mut issues = Vec::new();
        let mut node_index: HashMap<&str, NodeId> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            // duplicates are reported by `validate`
            node_index.entry(n.name.as_str()).or_insert(NodeId(i));
        }
        let mut links = Vec::with_capacity(self.links.len());
        for (name, from, to, capacity) in &self.links {
            let a = node_index.get(from.as_str()).copied();
            let b = node_index.get(to.as_str()).copied();
            for (end, id) in [(from, a), (to, b)] {
                if id.is_none() {
                    issues.push(Violation::DanglingEndpoint {
                        link: name.clone(),
                        node: end.clone(),
                    });
                }
            }
            if let (Some(a), Some(b)) = (a, b) {
                links.push(Link {
                    name: name.clone(),
                    from: a,
                    to: b,
                    capacity: *capacity,
                });
            }
        }
        let vnf_index: HashMap<&str, VnfId> = self
            .vnfs
            .iter()
            .enumerate()
            .map(|(i, f)| (f.as_str(), VnfId(i)))
            .collect();
        let mut offers = BTreeMap::new();
        for (node, vnf, offer) in &self.offers {
            match node_index.get(node.as_str()) {
                Some(&v) => {
                    offers.insert((v, vnf_index[vnf.as_str()]), *offer);
                }
                None => issues.push(Violation::UnknownOfferNode {
                    node: node.clone(),
                    vnf: vnf.clone(),
                }),
            }
        }
        let graph = NfviGraph::from_parts(self.nodes.clone(), links, self.vnfs.clone(), offers);
        issues.extend(validate(&graph).violations);
        if issues.is_empty() {
            Ok(graph)
        } else {
            Err(ModelError::Invalid(Diagnostics { violations: issues }))
        }
    }
}

impl NfviGraph {
    /// Assembles a graph without validation. Callers must run [`validate`].
    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        links: Vec<Link>,
        vnfs: Vec<String>,
        offers: BTreeMap<(NodeId, VnfId), VnfOffer>,
    ) -> Self {
        let n = nodes.len();
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            if l.from.0 < n && l.to.0 < n {
                out_links[l.from.0].push(LinkId(i));
                in_links[l.to.0].push(LinkId(i));
            }
        }
        NfviGraph {
            nodes,
            links,
            vnfs,
            offers,
            out_links,
            in_links,
        }
    }
}

/// One broken invariant of an infrastructure graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    DuplicateNode(String),
    DuplicateLink(String),
    DanglingEndpoint { link: String, node: String },
    SelfLoop(String),
    NonPositiveLinkCapacity { link: String, capacity: f64 },
    NegativeCompute { node: String, compute: f64 },
    NegativeVnfCost { node: String, vnf: String, cost: f64 },
    UnknownOfferNode { node: String, vnf: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode(n) => write!(f, "node {n} declared more than once"),
            Violation::DuplicateLink(l) => write!(f, "link {l} declared more than once"),
            Violation::DanglingEndpoint { link, node } => {
                write!(f, "link {link} references undeclared node {node}")
            }
            Violation::SelfLoop(l) => write!(f, "link {l} starts and ends at the same node"),
            Violation::NonPositiveLinkCapacity { link, capacity } => {
                write!(f, "link {link} has non-positive capacity {capacity}")
            }
            Violation::NegativeCompute { node, compute } => {
                write!(f, "node {node} has negative compute capacity {compute}")
            }
            Violation::NegativeVnfCost { node, vnf, cost } => {
                write!(f, "node {node} prices {vnf} at negative cost {cost}")
            }
            Violation::UnknownOfferNode { node, vnf } => {
                write!(f, "vnf {vnf} offered on undeclared node {node}")
            }
        }
    }
}

/// Result of [`validate`]: empty iff the graph is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub violations: Vec<Violation>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every invariant violation of `g`.
pub fn validate(g: &NfviGraph) -> Diagnostics {
    let mut violations = Vec::new();
    let mut seen_nodes = BTreeSet::new();
    for n in &g.nodes {
        if !seen_nodes.insert(n.name.as_str()) {
            violations.push(Violation::DuplicateNode(n.name.clone()));
        }
        if n.compute.is_nan() || n.compute < 0.0 {
            violations.push(Violation::NegativeCompute {
                node: n.name.clone(),
                compute: n.compute,
            });
        }
    }
    let mut seen_links = BTreeSet::new();
    for l in &g.links {
        if !seen_links.insert(l.name.as_str()) {
            violations.push(Violation::DuplicateLink(l.name.clone()));
        }
        for end in [l.from, l.to] {
            if end.0 >= g.nodes.len() {
                violations.push(Violation::DanglingEndpoint {
                    link: l.name.clone(),
                    node: end.to_string(),
                });
            }
        }
        if l.from == l.to {
            violations.push(Violation::SelfLoop(l.name.clone()));
        }
        if !l.capacity.is_finite() || l.capacity <= 0.0 {
            violations.push(Violation::NonPositiveLinkCapacity {
                link: l.name.clone(),
                capacity: l.capacity,
            });
        }
    }
    for (&(v, f), o) in &g.offers {
        if o.cost.is_nan() || o.cost < 0.0 {
            violations.push(Violation::NegativeVnfCost {
                node: g.nodes.get(v.0).map_or_else(|| v.to_string(), |n| n.name.clone()),
                vnf: g.vnfs[f.0].clone(),
                cost: o.cost,
            });
        }
    }
    Diagnostics { violations }
}

/// A service demand: traffic from `source` to `destination` that must visit
/// the functions of `chain` in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceDemand {
    pub id: u64,
    pub source: NodeId,
    pub destination: NodeId,
    pub volume: f64,
    pub chain: Vec<VnfId>,
}

impl ServiceDemand {
    /// Checks the demand against `g`.
    pub fn validate(&self, g: &NfviGraph) -> Result<(), ModelError> {
        let bad = |reason: String| {
            Err(ModelError::InvalidDemand {
                id: self.id,
                reason,
            })
        };
        if self.source.0 >= g.node_count() || self.destination.0 >= g.node_count() {
            return bad("endpoint outside the graph".into());
        }
        if self.source == self.destination {
            return bad("source equals destination".into());
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return bad(format!("volume {} is not a non-negative number", self.volume));
        }
        if let Some(f) = self.chain.iter().find(|f| f.0 >= g.vnf_names().len()) {
            return bad(format!("chain entry {} not in the catalog", f.0));
        }
        Ok(())
    }
}

/// Demands in arrival order, with strictly increasing ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DemandStream {
    demands: Vec<ServiceDemand>,
}

impl DemandStream {
    pub fn new(demands: Vec<ServiceDemand>, g: &NfviGraph) -> Result<Self, ModelError> {
        for d in &demands {
            d.validate(g)?;
        }
        if let Some(w) = demands.windows(2).find(|w| w[1].id <= w[0].id) {
            return Err(ModelError::InvalidDemand {
                id: w[1].id,
                reason: format!("id does not increase after {}", w[0].id),
            });
        }
        Ok(DemandStream { demands })
    }

    pub fn demands(&self) -> &[ServiceDemand] {
        &self.demands
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ServiceDemand> {
        self.demands.iter()
    }

    /// The first `n` demands (all of them if fewer).
    pub fn prefix(&self, n: usize) -> &[ServiceDemand] {
        &self.demands[..n.min(self.demands.len())]
    }
}

impl<'a> IntoIterator for &'a DemandStream {
    type Item = &'a ServiceDemand;
    type IntoIter = std::slice::Iter<'a, ServiceDemand>;

    fn into_iter(self) -> Self::IntoIter {
        self.demands.iter()
    }
}
