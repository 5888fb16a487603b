//! Network data model, validation and static graph utilities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("edge {edge:?} references unknown node {node:?}")]
    UnknownNode { edge: String, node: String },
    #[error("unknown {role} node {node:?}")]
    UnknownTerminal { role: &'static str, node: String },
    #[error("unknown edge id {0:?}")]
    UnknownEdge(String),
    #[error("edge set contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

/// One directed edge `tail -> head` with service rate `capacity` and free-flow
/// traversal time `latency`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub capacity: Rational,
    pub latency: Rational,
}

/// Directed graph with capacities and latencies, a source and a sink.
///
/// Nodes and edges are stored sorted by id, so index order is the
/// lexicographic order used everywhere for deterministic iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkSpec", into = "NetworkSpec")]
pub struct Network {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

/// Serialized network: the `"network"` object of scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub source: String,
    pub sink: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub capacity: Rational,
    pub latency: Rational,
}

impl TryFrom<NetworkSpec> for Network {
    type Error = NetError;
    fn try_from(spec: NetworkSpec) -> Result<Self, NetError> {
        Network::new(spec)
    }
}

impl From<Network> for NetworkSpec {
    fn from(net: Network) -> Self {
        net.spec()
    }
}

impl Network {
    pub fn new(spec: NetworkSpec) -> Result<Self, NetError> {
        let mut nodes = spec.nodes;
        nodes.sort();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(NetError::DuplicateNode(w[0].clone()));
            }
        }
        let node_index: HashMap<String, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let lookup = |edge: &str, node: &str| {
            node_index.get(node).copied().ok_or_else(|| NetError::UnknownNode {
                edge: edge.to_string(),
                node: node.to_string(),
            })
        };
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in spec.edges {
            let tail = lookup(&e.id, &e.from)?;
            let head = lookup(&e.id, &e.to)?;
            edges.push(Edge { id: e.id, tail, head, capacity: e.capacity, latency: e.latency });
        }
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        for w in edges.windows(2) {
            if w[0].id == w[1].id {
                return Err(NetError::DuplicateEdge(w[0].id.clone()));
            }
        }
        let terminal = |role: &'static str, id: &str| {
            node_index
                .get(id)
                .copied()
                .ok_or_else(|| NetError::UnknownTerminal { role, node: id.to_string() })
        };
        let source = terminal("source", &spec.source)?;
        let sink = terminal("sink", &spec.sink)?;
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.tail].push(i);
            in_edges[e.head].push(i);
        }
        let edge_index = edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        Ok(Network { nodes, edges, source, sink, out_edges, in_edges, node_index, edge_index })
    }

    pub fn spec(&self) -> NetworkSpec {
        NetworkSpec {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    from: self.nodes[e.tail].clone(),
                    to: self.nodes[e.head].clone(),
                    capacity: e.capacity.clone(),
                    latency: e.latency.clone(),
                })
                .collect(),
            source: self.nodes[self.source].clone(),
            sink: self.nodes[self.sink].clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn node_id(&self, v: usize) -> &str {
        &self.nodes[v]
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge_indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<BTreeSet<usize>, NetError> {
        ids.iter()
            .map(|id| {
                self.edge_index(id.as_ref())
                    .ok_or_else(|| NetError::UnknownEdge(id.as_ref().to_string()))
            })
            .collect()
    }

    /// Map a per-node vector to `id -> value`.
    pub fn by_node_id<T: Clone>(&self, values: &[T]) -> BTreeMap<String, T> {
        self.nodes.iter().cloned().zip(values.iter().cloned()).collect()
    }

    /// Map a per-edge vector to `id -> value`.
    pub fn by_edge_id<T: Clone>(&self, values: &[T]) -> BTreeMap<String, T> {
        self.edges.iter().map(|e| e.id.clone()).zip(values.iter().cloned()).collect()
    }

    /// Model assumptions; empty iff the network is usable.
    pub fn validate(&self) -> Vec<NetworkViolation> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.tail == e.head {
                out.push(NetworkViolation::SelfLoop { edge: e.id.clone() });
            }
            if !e.capacity.is_positive() {
                out.push(NetworkViolation::NonPositiveCapacity {
                    edge: e.id.clone(),
                    capacity: e.capacity.clone(),
                });
            }
            if e.latency.is_negative() {
                out.push(NetworkViolation::NegativeLatency {
                    edge: e.id.clone(),
                    latency: e.latency.clone(),
                });
            }
        }
        let reach = self.reachable_from(self.source);
        for (v, ok) in reach.iter().enumerate() {
            if !ok {
                out.push(NetworkViolation::Unreachable { node: self.nodes[v].clone() });
            }
        }
        for cycle in self.zero_latency_cycles() {
            out.push(NetworkViolation::ZeroLatencyCycle {
                edges: cycle.into_iter().map(|e| self.edges[e].id.clone()).collect(),
            });
        }
        out
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.out_edges[v] {
                let w = self.edges[e].head;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// One witness cycle per strongly connected component of the subgraph of
    /// non-positive-latency edges.
    fn zero_latency_cycles(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<usize, usize>::new();
        let idx: Vec<_> = (0..self.nodes.len()).map(|v| g.add_node(v)).collect();
        for (i, e) in self.edges.iter().enumerate() {
            if !e.latency.is_positive() && e.tail != e.head {
                g.add_edge(idx[e.tail], idx[e.head], i);
            }
        }
        let mut cycles = Vec::new();
        let mut sccs = tarjan_scc(&g);
        sccs.iter_mut().for_each(|c| c.sort());
        sccs.sort();
        for comp in sccs.into_iter().filter(|c| c.len() > 1) {
            let members: BTreeSet<usize> = comp.iter().map(|n| g[*n]).collect();
            let start = *members.iter().next().expect("nonempty component");
            let allowed = |e: usize| {
                let edge = &self.edges[e];
                !edge.latency.is_positive()
                    && edge.tail != edge.head
                    && members.contains(&edge.head)
            };
            // BFS from `start` back to itself inside the component.
            let mut pred: BTreeMap<usize, usize> = BTreeMap::new();
            let mut queue = std::collections::VecDeque::from([start]);
            let mut closing = None;
            'bfs: while let Some(v) = queue.pop_front() {
                for &e in &self.out_edges[v] {
                    if !allowed(e) {
                        continue;
                    }
                    let w = self.edges[e].head;
                    if w == start {
                        closing = Some(e);
                        break 'bfs;
                    }
                    if let std::collections::btree_map::Entry::Vacant(slot) = pred.entry(w) {
                        slot.insert(e);
                        queue.push_back(w);
                    }
                }
            }
            let Some(last) = closing else { continue };
            let mut cycle = vec![last];
            let mut v = self.edges[last].tail;
            while v != start {
                let e = pred[&v];
                cycle.push(e);
                v = self.edges[e].tail;
            }
            cycle.reverse();
            cycles.push(cycle);
        }
        cycles
    }

    /// Shortest `s -> v` travel time with empty queues (Dijkstra on latencies).
    /// Unreachable nodes get `None`.
    pub fn free_flow_labels(&self) -> Vec<Option<Rational>> {
        let n = self.nodes.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut done = vec![false; n];
        dist[self.source] = Some(Rational::zero());
        loop {
            let next = (0..n)
                .filter(|&v| !done[v])
                .filter_map(|v| dist[v].as_ref().map(|d| (d, v)))
                .min();
            let Some((d, v)) = next.map(|(d, v)| (d.clone(), v)) else { break };
            done[v] = true;
            for &e in &self.out_edges[v] {
                let edge = &self.edges[e];
                let cand = &d + &edge.latency;
                if dist[edge.head].as_ref().is_none_or(|cur| cand < *cur) {
                    dist[edge.head] = Some(cand);
                }
            }
        }
        dist
    }

    /// Active and resetting edges induced by node labels:
    /// `E' = {vw : l_w >= l_v + tau}` and `E* = {vw : l_w > l_v + tau}`.
    ///
    /// Violations of the structural hypothesis (acyclic `E'` reaching every
    /// node) are reported alongside, not rejected.
    pub fn derive_edge_sets(&self, labels: &[Rational]) -> DerivedEdgeSets {
        let mut sets = EdgeSetPair::default();
        for (i, e) in self.edges.iter().enumerate() {
            let reach = &labels[e.tail] + &e.latency;
            if labels[e.head] >= reach {
                sets.active.insert(i);
                if labels[e.head] > reach {
                    sets.resetting.insert(i);
                }
            }
        }
        let violations = sets.hypothesis_violations(self);
        DerivedEdgeSets { sets, violations }
    }

    /// Topological order of all nodes w.r.t. `edges`; ties broken
    /// lexicographically with the source first.
    pub fn topological_order(&self, edges: &BTreeSet<usize>) -> Result<Vec<usize>, NetError> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &e in edges {
            indeg[self.edges[e].head] += 1;
        }
        // rank: source first, then index order
        let rank = |v: usize| if v == self.source { (0, v) } else { (1, v) };
        let mut ready: BTreeSet<(u8, usize)> =
            (0..n).filter(|&v| indeg[v] == 0).map(rank).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(first) = ready.pop_first() {
            let v = first.1;
            order.push(v);
            for &e in &self.out_edges[v] {
                if edges.contains(&e) {
                    let w = self.edges[e].head;
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        ready.insert(rank(w));
                    }
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        // Every remaining node has an in-edge from another remaining node;
        // walking those backwards must revisit a node.
        let mut placed = vec![false; n];
        order.iter().for_each(|&v| placed[v] = true);
        let start = (0..n).find(|&v| !placed[v]).expect("some node left");
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut walk = vec![start];
        let mut v = start;
        loop {
            seen.insert(v, walk.len() - 1);
            let e = *self.in_edges[v]
                .iter()
                .find(|&&e| edges.contains(&e) && !placed[self.edges[e].tail])
                .expect("remaining node has a remaining predecessor");
            v = self.edges[e].tail;
            if let Some(&pos) = seen.get(&v) {
                // walk[pos] == v; edges point from later walk entries to earlier ones
                let mut cyc = vec![self.nodes[v].clone()];
                cyc.extend(walk[pos..].iter().rev().map(|&u| self.nodes[u].clone()));
                return Err(NetError::Cycle(cyc));
            }
            walk.push(v);
        }
    }
}

/// A model assumption that a network fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NetworkViolation {
    SelfLoop { edge: String },
    NonPositiveCapacity { edge: String, capacity: Rational },
    NegativeLatency { edge: String, latency: Rational },
    Unreachable { node: String },
    ZeroLatencyCycle { edges: Vec<String> },
}

impl fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkViolation::SelfLoop { edge } => write!(f, "edge {edge} is a loop"),
            NetworkViolation::NonPositiveCapacity { edge, capacity } => {
                write!(f, "edge {edge} has non-positive capacity {capacity}")
            }
            NetworkViolation::NegativeLatency { edge, latency } => {
                write!(f, "edge {edge} has negative latency {latency}")
            }
            NetworkViolation::Unreachable { node } => {
                write!(f, "node {node} is not reachable from the source")
            }
            NetworkViolation::ZeroLatencyCycle { edges } => {
                write!(f, "cycle without positive latency: {}", edges.join(", "))
            }
        }
    }
}

/// Active edges `E'` and resetting edges `E*` (edge indices).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EdgeSetPair {
    pub active: BTreeSet<usize>,
    pub resetting: BTreeSet<usize>,
}

/// How a pair `(E', E*)` fails the structural hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HypothesisViolation {
    ResettingNotActive { edge: String },
    ActiveCycle { nodes: Vec<String> },
    NotCovered { node: String },
}

impl fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisViolation::ResettingNotActive { edge } => {
                write!(f, "resetting edge {edge} is not active")
            }
            HypothesisViolation::ActiveCycle { nodes } => {
                write!(f, "active edges contain the cycle {}", nodes.join(" -> "))
            }
            HypothesisViolation::NotCovered { node } => {
                write!(f, "node {node} has no active path from the source")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedEdgeSets {
    pub sets: EdgeSetPair,
    pub violations: Vec<HypothesisViolation>,
}

impl EdgeSetPair {
    pub fn new(active: BTreeSet<usize>, resetting: BTreeSet<usize>) -> Self {
        EdgeSetPair { active, resetting }
    }

    pub fn from_ids<S: AsRef<str>>(
        net: &Network,
        active: &[S],
        resetting: &[S],
    ) -> Result<Self, NetError> {
        Ok(EdgeSetPair { active: net.edge_indices(active)?, resetting: net.edge_indices(resetting)? })
    }

    pub fn active_ids(&self, net: &Network) -> Vec<String> {
        self.active.iter().map(|&e| net.edge(e).id.clone()).collect()
    }

    pub fn resetting_ids(&self, net: &Network) -> Vec<String> {
        self.resetting.iter().map(|&e| net.edge(e).id.clone()).collect()
    }

    /// `E* ⊆ E'`, `E'` acyclic, every node reachable from the source in `E'`.
    pub fn hypothesis_violations(&self, net: &Network) -> Vec<HypothesisViolation> {
        let mut out = Vec::new();
        for &e in self.resetting.difference(&self.active) {
            out.push(HypothesisViolation::ResettingNotActive { edge: net.edge(e).id.clone() });
        }
        if let Err(NetError::Cycle(nodes)) = net.topological_order(&self.active) {
            out.push(HypothesisViolation::ActiveCycle { nodes });
        }
        let mut seen = vec![false; net.node_count()];
        let mut stack = vec![net.source()];
        seen[net.source()] = true;
        while let Some(v) = stack.pop() {
            for &e in net.out_edges(v) {
                let w = net.edge(e).head;
                if self.active.contains(&e) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        for (v, ok) in seen.iter().enumerate() {
            if !ok {
                out.push(HypothesisViolation::NotCovered { node: net.node_id(v).to_string() });
            }
        }
        out
    }
}
