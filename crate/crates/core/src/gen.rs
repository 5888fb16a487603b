//! Seeded random instances for property tests and the `gen` command.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::EquilibriumTrajectory;
use crate::loading::PathFlowSet;
use crate::netmodel::{EdgeSetPair, EdgeSpec, Network, NetworkSpec};
use crate::pwfn::{PcBuilder, PiecewiseConstantFn};
use crate::rational::Rational;
use crate::verify::Mutation;

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CAPACITIES: [(i64, i64); 6] = [(1, 2), (1, 1), (3, 2), (2, 1), (5, 2), (3, 1)];
const LATENCIES: [(i64, i64); 4] = [(1, 2), (1, 1), (2, 1), (3, 1)];
const RATES: [(i64, i64); 6] = [(0, 1), (1, 2), (1, 1), (2, 1), (3, 1), (4, 1)];

fn pick(rng: &mut GenRng, from: &[(i64, i64)]) -> Rational {
    let (p, q) = *from.choose(rng).expect("nonempty");
    Rational::frac(p, q)
}

#[derive(Debug, Clone, Copy)]
pub struct NetShape {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape { max_nodes: 6, max_edges: 10 }
    }
}

/// A spanning arborescence rooted at `s` plus random extra edges (parallel
/// edges allowed, no self-loops). Every node is reachable from `s`; `t` is
/// the last node created.
pub fn network(rng: &mut GenRng, shape: NetShape) -> Network {
    let n = rng.random_range(2..=shape.max_nodes.max(2));
    let mut names: Vec<String> = vec!["s".into()];
    names.extend((1..n - 1).map(|i| format!("v{i}")));
    names.push("t".into());
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((rng.random_range(0..i), i));
    }
    let max_edges = shape.max_edges.max(n - 1);
    let extra = rng.random_range(0..=max_edges - (n - 1));
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n - 1);
        let b = if b >= a { b + 1 } else { b };
        pairs.push((a, b));
    }
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| EdgeSpec {
            id: format!("e{i}"),
            from: names[a].clone(),
            to: names[b].clone(),
            capacity: pick(rng, &CAPACITIES),
            latency: pick(rng, &LATENCIES),
        })
        .collect();
    Network::new(NetworkSpec { nodes: names, edges, source: "s".into(), sink: "t".into() })
        .expect("generated ids are distinct")
}

/// At most `max_pieces` pieces starting at 0 with breakpoints on a grid of
/// halves below `horizon`.
pub fn inflow(rng: &mut GenRng, horizon: &Rational, max_pieces: usize) -> PiecewiseConstantFn {
    let k = rng.random_range(1..=max_pieces.max(1));
    let halves = (horizon * Rational::from_integer(2)).to_f64().floor().max(1.0) as i64;
    let mut starts: Vec<i64> = (0..k - 1).map(|_| rng.random_range(1..=halves.max(1))).collect();
    starts.push(0);
    starts.sort();
    starts.dedup();
    let mut b = PcBuilder::new(Rational::zero());
    for s in starts {
        b.push(Rational::frac(s, 2), pick(rng, &RATES));
    }
    b.finish()
}

/// A network, an inflow with at most three pieces and a horizon `T <= 20`.
pub fn scenario(rng: &mut GenRng, shape: NetShape) -> (Network, PiecewiseConstantFn, Rational) {
    let net = network(rng, shape);
    let horizon = Rational::frac(rng.random_range(1..=40), 2);
    let u = inflow(rng, &horizon, 3);
    (net, u, horizon)
}

/// Edge sets realized by random queue delays: labels are shortest distances
/// under `tau_e + q_e`, and `(E', E*)` are derived from them, so the
/// structural hypothesis holds.
pub fn edge_sets(rng: &mut GenRng, net: &Network) -> EdgeSetPair {
    const DELAYS: [(i64, i64); 5] = [(0, 1), (0, 1), (1, 2), (1, 1), (2, 1)];
    let n = net.node_count();
    let delays: Vec<Rational> = (0..net.edge_count()).map(|_| pick(rng, &DELAYS)).collect();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    dist[net.source()] = Some(Rational::zero());
    // Bellman-Ford; lengths are positive
    for _ in 0..n {
        for (i, e) in net.edges().iter().enumerate() {
            if let Some(d) = dist[e.tail].clone() {
                let cand = d + &e.latency + &delays[i];
                if dist[e.head].as_ref().is_none_or(|x| cand < *x) {
                    dist[e.head] = Some(cand);
                }
            }
        }
    }
    let labels: Vec<Rational> = dist.into_iter().map(|d| d.expect("reachable")).collect();
    let derived = net.derive_edge_sets(&labels);
    debug_assert!(derived.violations.is_empty());
    derived.sets
}

/// An instance for the thin flow search: network, `(E', E*)` and `u0`.
pub fn ntf_instance(rng: &mut GenRng, shape: NetShape) -> (Network, EdgeSetPair, Rational) {
    let net = network(rng, shape);
    let sets = edge_sets(rng, &net);
    let u0 = Rational::from_integer(rng.random_range(0..=4));
    (net, sets, u0)
}

/// One to three simple paths (random walks of up to four edges from random
/// origins) with rates supported on `[0, horizon]`.
pub fn path_flows(rng: &mut GenRng, net: &Network) -> PathFlowSet {
    let horizon = Rational::from_integer(rng.random_range(1..=10));
    let want = rng.random_range(1..=3);
    let mut paths = Vec::new();
    let mut tries = 0;
    while paths.len() < want && tries < 50 {
        tries += 1;
        let mut v = rng.random_range(0..net.node_count());
        let mut seen = vec![v];
        let mut edges = Vec::new();
        let len = rng.random_range(1..=4);
        while edges.len() < len {
            let outs: Vec<usize> =
                net.out_edges(v).iter().copied().filter(|&e| !seen.contains(&net.edge(e).head)).collect();
            let Some(&e) = outs.choose(rng) else { break };
            edges.push(net.edge(e).id.clone());
            v = net.edge(e).head;
            seen.push(v);
        }
        if edges.is_empty() {
            continue;
        }
        let id = edges.join("-");
        if paths.iter().any(|(p, _, _): &(String, _, _)| *p == id) {
            continue;
        }
        let rate = inflow(rng, &horizon, 3).truncate(&horizon);
        paths.push((id, edges, rate));
    }
    PathFlowSet::new(net, paths, horizon).expect("generated paths are valid")
}

fn nonzero_pieces(f: &PiecewiseConstantFn) -> usize {
    f.steps().iter().filter(|(_, v)| !v.is_zero()).count()
}

/// A random applicable local perturbation of `traj`.
pub fn mutation(rng: &mut GenRng, traj: &EquilibriumTrajectory) -> Option<(Mutation, EquilibriumTrajectory)> {
    const FACTORS: [(i64, i64); 4] = [(0, 1), (1, 2), (3, 2), (2, 1)];
    const DELTAS: [(i64, i64); 4] = [(1, 3), (-1, 3), (1, 2), (-1, 2)];
    let mut cands = Vec::new();
    for e in 0..traj.network.edge_count() {
        for p in 0..nonzero_pieces(&traj.edge_inflow[e]) {
            cands.push(Mutation::ScaleInflow { edge: e, piece: p, factor: pick(rng, &FACTORS) });
        }
        for p in 0..nonzero_pieces(&traj.edge_outflow[e]) {
            cands.push(Mutation::ScaleOutflow { edge: e, piece: p, factor: pick(rng, &FACTORS) });
        }
        if traj.queue_peak(e).is_some_and(|z| z.is_positive()) {
            cands.push(Mutation::ScaleQueue { edge: e, factor: pick(rng, &FACTORS) });
        }
    }
    for v in 0..traj.network.node_count() {
        for p in 0..traj.labels[v].points().len() {
            cands.push(Mutation::ShiftLabel { node: v, point: p, delta: pick(rng, &DELTAS) });
        }
    }
    while !cands.is_empty() {
        let i = rng.random_range(0..cands.len());
        let m = cands.swap_remove(i);
        if let Some(t) = m.apply(traj) {
            return Some((m, t));
        }
    }
    None
}
