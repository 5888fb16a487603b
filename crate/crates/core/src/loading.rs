//! Network loading: link flows, queues and travel times induced by given
//! piecewise-constant path inflows.
//!
//! Every (path, position) pair carries an inflow function that is known up
//! to a horizon. A sweep over the edges sums the known inflows of an edge,
//! evolves its queue, and pushes each path's share through the exit-time
//! function to the next position, whose horizon becomes the exit time of the
//! edge's own horizon. Horizons grow by at least the smallest latency per
//! sweep and become unbounded once a path's whole mass has passed, so the
//! procedure reaches the exact fixed point after finitely many sweeps.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{NetError, Network};
use crate::pwfn::{compose_monotone, min_pointwise, PcBuilder, PiecewiseConstantFn, PiecewiseLinearFn, PlBuilder};
use crate::rational::Rational;

pub const DEFAULT_PASS_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("edge {0} has zero latency; loading needs positive latencies")]
    ZeroLatency(String),
    #[error("path {path}: {reason}")]
    BadPath { path: String, reason: String },
    #[error("duplicate path id {0:?}")]
    DuplicatePath(String),
    #[error("horizon must be nonnegative, got {0}")]
    BadHorizon(Rational),
    #[error("loading did not settle after {0} sweeps")]
    Runaway(usize),
    #[error("malformed loading result: {0}")]
    Malformed(String),
}

/// One path and its inflow rate `h_P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFlow {
    pub id: String,
    pub edges: Vec<usize>,
    pub rate: PiecewiseConstantFn,
}

/// Path inflows supported on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFlowSet {
    pub paths: Vec<PathFlow>,
    pub horizon: Rational,
}

impl PathFlowSet {
    /// Validates adjacency, nonnegativity and support of each path inflow.
    pub fn new(
        net: &Network,
        paths: Vec<(String, Vec<String>, PiecewiseConstantFn)>,
        horizon: Rational,
    ) -> Result<Self, LoadError> {
        if horizon.is_negative() {
            return Err(LoadError::BadHorizon(horizon));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(paths.len());
        for (id, edge_ids, rate) in paths {
            if !seen.insert(id.clone()) {
                return Err(LoadError::DuplicatePath(id));
            }
            let bad = |reason: String| LoadError::BadPath { path: id.clone(), reason };
            if edge_ids.is_empty() {
                return Err(bad("no edges".into()));
            }
            let edges = edge_ids
                .iter()
                .map(|e| net.edge_index(e).ok_or_else(|| NetError::UnknownEdge(e.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            for w in edges.windows(2) {
                if net.edge(w[0]).head != net.edge(w[1]).tail {
                    return Err(bad(format!(
                        "edge {} does not continue edge {}",
                        net.edge(w[1]).id,
                        net.edge(w[0]).id
                    )));
                }
            }
            if !rate.is_nonnegative() {
                return Err(bad("negative rate".into()));
            }
            if !supported_on(&rate, &horizon) {
                return Err(bad(format!("rate does not vanish outside [0, {horizon}]")));
            }
            out.push(PathFlow { id, edges, rate });
        }
        Ok(PathFlowSet { paths: out, horizon })
    }

    pub fn total_mass(&self) -> Rational {
        self.paths.iter().map(|p| mass(&p.rate).expect("bounded support")).sum()
    }

    /// Number of edges on the longest path.
    pub fn max_length(&self) -> usize {
        self.paths.iter().map(|p| p.edges.len()).max().unwrap_or(0)
    }
}

fn supported_on(f: &PiecewiseConstantFn, horizon: &Rational) -> bool {
    f.vanishes_before_zero()
        && f.final_value().is_zero()
        && f.steps().windows(2).all(|w| w[0].1.is_zero() || w[1].0 <= *horizon)
}

/// `integral of f` for a step function vanishing near both infinities.
pub fn mass(f: &PiecewiseConstantFn) -> Option<Rational> {
    if !f.initial().is_zero() || !f.final_value().is_zero() {
        return None;
    }
    Some(f.steps().windows(2).map(|w| &w[0].1 * (&w[1].0 - &w[0].0)).sum())
}

/// Queue length `z` and exit time `T(theta) = theta + z(theta)/nu + tau` of an
/// edge with inflow `f`. `f` must not exceed `nu` before its first breakpoint.
pub fn queue_evolve(
    f: &PiecewiseConstantFn,
    capacity: &Rational,
    latency: &Rational,
) -> (PiecewiseLinearFn, PiecewiseLinearFn) {
    assert!(f.initial() <= capacity, "queue_evolve: unbounded queue before the first breakpoint");
    let steps = f.steps();
    let mut b = PlBuilder::new(Rational::zero());
    let mut z = Rational::zero();
    let mut slope_after = Rational::zero();
    if steps.is_empty() {
        b.push(Rational::zero(), Rational::zero());
    }
    for (i, (a, rate)) in steps.iter().enumerate() {
        b.push(a.clone(), z.clone());
        let end = steps.get(i + 1).map(|s| &s.0);
        let slope = rate - capacity;
        if z.is_zero() && !slope.is_positive() {
            continue;
        }
        if slope.is_negative() {
            let empty_at = a + &z / (capacity - rate);
            if end.is_none_or(|e| empty_at < *e) {
                b.push(empty_at, Rational::zero());
                z = Rational::zero();
                continue;
            }
        }
        match end {
            Some(e) => z += &slope * (e - a),
            None => slope_after = slope,
        }
    }
    let z = b.finish(slope_after);
    let t = z
        .scale(&(Rational::one() / capacity))
        .add(&PiecewiseLinearFn::identity())
        .add_constant(latency);
    (z, t)
}

/// Outflow at the head of an edge for inflow `g` and exit time `t`:
/// `g(theta) / t'(theta)` at `t(theta)`; pieces where `t` is flat carry no flow.
pub fn transfer_outflow(g: &PiecewiseConstantFn, t: &PiecewiseLinearFn) -> PiecewiseConstantFn {
    let rate = |c: &Rational, s: &Rational| if s.is_positive() { c / s } else { Rational::zero() };
    let mut xs: Vec<&Rational> = g.breakpoints().chain(t.breakpoints()).collect();
    xs.sort();
    xs.dedup();
    let mut b = PcBuilder::new(rate(g.initial(), t.slope_before()));
    for x in xs {
        let s = t.right_slope(x);
        let c = g.value_at(x);
        if s.is_positive() {
            b.push(t.eval(x), c / &s);
        } else {
            debug_assert!(c.is_zero(), "inflow mapped onto a plateau of the exit time");
        }
    }
    b.finish()
}

/// Per-path loading data, aligned with the path's edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathLoad {
    pub id: String,
    pub edges: Vec<String>,
    /// `f+_{P,e}` per position.
    pub inflows: Vec<PiecewiseConstantFn>,
    /// `f-_{P,e}` per position.
    pub outflows: Vec<PiecewiseConstantFn>,
    /// Arrival time at the end of the path for departure `theta`.
    pub travel_time: PiecewiseLinearFn,
}

/// Result of [`load`]. Per-edge vectors follow the network's edge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LoadingDoc", into = "LoadingDoc")]
pub struct LoadingResult {
    pub network: Network,
    pub paths: Vec<PathLoad>,
    pub edge_inflow: Vec<PiecewiseConstantFn>,
    pub edge_outflow: Vec<PiecewiseConstantFn>,
    pub queues: Vec<PiecewiseLinearFn>,
    pub exit_times: Vec<PiecewiseLinearFn>,
    /// All flows vanish outside `[0, support_bound]`.
    pub support_bound: Rational,
    pub sweeps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadingDoc {
    format: u32,
    network: Network,
    support_bound: Rational,
    sweeps: usize,
    edge_inflow: BTreeMap<String, PiecewiseConstantFn>,
    edge_outflow: BTreeMap<String, PiecewiseConstantFn>,
    queues: BTreeMap<String, PiecewiseLinearFn>,
    exit_times: BTreeMap<String, PiecewiseLinearFn>,
    paths: Vec<PathLoad>,
}

impl From<LoadingResult> for LoadingDoc {
    fn from(r: LoadingResult) -> Self {
        let net = &r.network;
        LoadingDoc {
            format: 1,
            edge_inflow: net.by_edge_id(&r.edge_inflow),
            edge_outflow: net.by_edge_id(&r.edge_outflow),
            queues: net.by_edge_id(&r.queues),
            exit_times: net.by_edge_id(&r.exit_times),
            support_bound: r.support_bound,
            sweeps: r.sweeps,
            paths: r.paths,
            network: r.network,
        }
    }
}

fn unkey<T>(ids: &[String], mut m: BTreeMap<String, T>, what: &str) -> Result<Vec<T>, LoadError> {
    let out = ids
        .iter()
        .map(|id| m.remove(id).ok_or_else(|| LoadError::Malformed(format!("{what}: missing {id:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    match m.keys().next() {
        Some(extra) => Err(LoadError::Malformed(format!("{what}: unknown id {extra:?}"))),
        None => Ok(out),
    }
}

impl TryFrom<LoadingDoc> for LoadingResult {
    type Error = LoadError;
    fn try_from(d: LoadingDoc) -> Result<Self, LoadError> {
        if d.format != 1 {
            return Err(LoadError::Malformed(format!("unsupported format {}", d.format)));
        }
        let ids: Vec<String> = d.network.edges().iter().map(|e| e.id.clone()).collect();
        Ok(LoadingResult {
            edge_inflow: unkey(&ids, d.edge_inflow, "edge_inflow")?,
            edge_outflow: unkey(&ids, d.edge_outflow, "edge_outflow")?,
            queues: unkey(&ids, d.queues, "queues")?,
            exit_times: unkey(&ids, d.exit_times, "exit_times")?,
            network: d.network,
            paths: d.paths,
            support_bound: d.support_bound,
            sweeps: d.sweeps,
        })
    }
}

/// Known inflow of one (path, position) pair, exact on `(-inf, horizon)`.
#[derive(Clone)]
struct Slot {
    inflow: PiecewiseConstantFn,
    horizon: Option<Rational>,
}

/// Computes the unique network loading of `pf`.
pub fn load(net: &Network, pf: &PathFlowSet) -> Result<LoadingResult, LoadError> {
    load_with_cap(net, pf, DEFAULT_PASS_CAP)
}

pub fn load_with_cap(net: &Network, pf: &PathFlowSet, sweep_cap: usize) -> Result<LoadingResult, LoadError> {
    if let Some(e) = net.edges().iter().find(|e| !e.latency.is_positive()) {
        return Err(LoadError::ZeroLatency(e.id.clone()));
    }
    let m = net.edge_count();
    let mut slots: Vec<Vec<Slot>> = pf
        .paths
        .iter()
        .map(|p| {
            (0..p.edges.len())
                .map(|i| Slot {
                    inflow: if i == 0 { p.rate.clone() } else { PiecewiseConstantFn::zero() },
                    horizon: if i == 0 { None } else { Some(Rational::zero()) },
                })
                .collect()
        })
        .collect();
    let masses: Vec<Rational> = pf.paths.iter().map(|p| mass(&p.rate).expect("bounded support")).collect();
    let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (pi, p) in pf.paths.iter().enumerate() {
        for (k, &e) in p.edges.iter().enumerate() {
            users[e].push((pi, k));
        }
    }
    let order = sweep_order(net, pf);

    let mut edge_in = vec![PiecewiseConstantFn::zero(); m];
    let mut queues = vec![PiecewiseLinearFn::zero(); m];
    let mut exits: Vec<PiecewiseLinearFn> =
        net.edges().iter().map(|e| PiecewiseLinearFn::identity().add_constant(&e.latency)).collect();
    let mut outs: Vec<Vec<PiecewiseConstantFn>> =
        pf.paths.iter().map(|p| vec![PiecewiseConstantFn::zero(); p.edges.len()]).collect();
    let mut sweeps = 0;
    loop {
        let settled = slots.iter().flatten().all(|s| s.horizon.is_none());
        if sweeps >= sweep_cap {
            return Err(LoadError::Runaway(sweeps));
        }
        sweeps += 1;
        for &e in &order {
            if users[e].is_empty() {
                continue;
            }
            let edge = net.edge(e);
            let horizon = users[e]
                .iter()
                .filter_map(|&(pi, k)| slots[pi][k].horizon.as_ref())
                .min()
                .cloned();
            let known = |f: &PiecewiseConstantFn| match &horizon {
                Some(h) => f.truncate(h),
                None => f.clone(),
            };
            let parts: Vec<PiecewiseConstantFn> =
                users[e].iter().map(|&(pi, k)| known(&slots[pi][k].inflow)).collect();
            let total = parts.iter().fold(PiecewiseConstantFn::zero(), |acc, f| acc.add(f));
            let (z, t) = queue_evolve(&total, &edge.capacity, &edge.latency);
            let out_horizon = horizon.as_ref().map(|h| t.eval(h));
            for (&(pi, k), part) in users[e].iter().zip(&parts) {
                let mut out = transfer_outflow(part, &t);
                if let Some(oh) = &out_horizon {
                    out = out.truncate(oh);
                }
                if k + 1 < pf.paths[pi].edges.len() {
                    let complete = mass(&out).as_ref() == Some(&masses[pi]);
                    slots[pi][k + 1] = Slot {
                        inflow: out.clone(),
                        horizon: if complete { None } else { out_horizon.clone() },
                    };
                }
                outs[pi][k] = out;
            }
            edge_in[e] = total;
            queues[e] = z;
            exits[e] = t;
        }
        if settled {
            break;
        }
    }

    let edge_out = (0..m)
        .map(|e| {
            users[e]
                .iter()
                .fold(PiecewiseConstantFn::zero(), |acc, &(pi, k)| acc.add(&outs[pi][k]))
        })
        .collect();
    let paths = pf
        .paths
        .iter()
        .enumerate()
        .map(|(pi, p)| PathLoad {
            id: p.id.clone(),
            edges: p.edges.iter().map(|&e| net.edge(e).id.clone()).collect(),
            inflows: slots[pi].iter().map(|s| s.inflow.clone()).collect(),
            outflows: outs[pi].clone(),
            travel_time: path_travel_time(&exits, &p.edges),
        })
        .collect();
    Ok(LoadingResult {
        network: net.clone(),
        paths,
        edge_inflow: edge_in,
        edge_outflow: edge_out,
        queues,
        exit_times: exits,
        support_bound: support_bound(net, pf),
        sweeps,
    })
}

/// Edges ordered so that, where possible, an edge comes after every edge
/// that feeds it along some path.
fn sweep_order(net: &Network, pf: &PathFlowSet) -> Vec<usize> {
    let m = net.edge_count();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for p in &pf.paths {
        for w in p.edges.windows(2) {
            succ[w[0]].insert(w[1]);
        }
    }
    let mut indeg = vec![0usize; m];
    succ.iter().flatten().for_each(|&f| indeg[f] += 1);
    let mut ready: BTreeSet<usize> = (0..m).filter(|&e| indeg[e] == 0).collect();
    let mut order = Vec::with_capacity(m);
    let mut placed = vec![false; m];
    while order.len() < m {
        let e = match ready.pop_first() {
            Some(e) => e,
            // dependency cycle: break it at the smallest unplaced edge
            None => (0..m).find(|&e| !placed[e]).expect("unplaced edge"),
        };
        if placed[e] {
            continue;
        }
        placed[e] = true;
        order.push(e);
        for &f in &succ[e] {
            indeg[f] = indeg[f].saturating_sub(1);
            if indeg[f] == 0 && !placed[f] {
                ready.insert(f);
            }
        }
    }
    order
}

/// `T_{e_k} o ... o T_{e_1}`.
pub fn path_travel_time(exit_times: &[PiecewiseLinearFn], edges: &[usize]) -> PiecewiseLinearFn {
    edges.iter().fold(PiecewiseLinearFn::identity(), |acc, &e| {
        compose_monotone(&exit_times[e], &acc).expect("exit times are nondecreasing")
    })
}

/// `M = T + m * delta`, `delta = max_e (zbar / nu_e + tau_e)`, `zbar` the total
/// path mass and `m` the longest path length.
pub fn support_bound(net: &Network, pf: &PathFlowSet) -> Rational {
    let zbar = pf.total_mass();
    let delta = net
        .edges()
        .iter()
        .map(|e| &zbar / &e.capacity + &e.latency)
        .max()
        .unwrap_or_else(Rational::zero);
    &pf.horizon + Rational::from_integer(pf.max_length() as i64) * delta
}

/// Earliest arrival functions from `origin` over all walks:
/// `l_w = min over e = vw of T_e o l_v`, with `l_origin` the identity.
/// Nodes not reachable from `origin` get `None`.
pub fn node_labels(net: &Network, exit_times: &[PiecewiseLinearFn], origin: usize) -> Vec<Option<PiecewiseLinearFn>> {
    let n = net.node_count();
    let mut labels: Vec<Option<PiecewiseLinearFn>> = vec![None; n];
    labels[origin] = Some(PiecewiseLinearFn::identity());
    for _ in 1..n.max(2) {
        let mut changed = false;
        for (i, e) in net.edges().iter().enumerate() {
            let Some(lv) = &labels[e.tail] else { continue };
            if e.head == origin {
                continue;
            }
            let cand = compose_monotone(&exit_times[i], lv).expect("labels are nondecreasing");
            let next = match &labels[e.head] {
                None => cand,
                Some(cur) => min_pointwise(&[cur.clone(), cand]).expect("two functions"),
            };
            if labels[e.head].as_ref() != Some(&next) {
                labels[e.head] = Some(next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

/// Travel times of a loading: per path, per node from the network source,
/// and per origin-destination pair of the given paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTimes {
    pub paths: Vec<PiecewiseLinearFn>,
    pub nodes: Vec<Option<PiecewiseLinearFn>>,
    /// `(origin, destination) -> min over its paths of the travel time`.
    pub od: BTreeMap<(String, String), PiecewiseLinearFn>,
}

pub fn path_times(result: &LoadingResult, pf: &PathFlowSet) -> PathTimes {
    let net = &result.network;
    let paths: Vec<PiecewiseLinearFn> =
        pf.paths.iter().map(|p| path_travel_time(&result.exit_times, &p.edges)).collect();
    let mut groups: BTreeMap<(String, String), Vec<PiecewiseLinearFn>> = BTreeMap::new();
    for (p, t) in pf.paths.iter().zip(&paths) {
        let o = net.node_id(net.edge(p.edges[0]).tail).to_string();
        let d = net.node_id(net.edge(*p.edges.last().expect("nonempty")).head).to_string();
        groups.entry((o, d)).or_default().push(t.clone());
    }
    let od = groups
        .into_iter()
        .map(|(k, fs)| (k, min_pointwise(&fs).expect("nonempty group")))
        .collect();
    PathTimes { nodes: node_labels(net, &result.exit_times, net.source()), paths, od }
}
