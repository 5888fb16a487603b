//! Phase-by-phase construction of the dynamic equilibrium for a
//! piecewise-constant network inflow.
//!
//! At a frontier `theta_k` the current labels determine `(E', E*)`, a thin
//! flow gives the label derivatives `l'`, and the labels are extended
//! linearly until an inactive edge becomes active, a queue runs empty or the
//! inflow rate changes. Edge flows are read off the thin flow: on the phase
//! an edge `vw` takes in `x'_e / l'_v` on the tail clock and releases
//! `x'_e / l'_w` on the head clock.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{EdgeSetPair, HypothesisViolation, Network, NetworkViolation};
use crate::ntf::{NtfError, NtfInstance, NtfSolution};
use crate::pwfn::{PcBuilder, PiecewiseConstantFn, PiecewiseLinearFn, PlBuilder};
use crate::rational::Rational;

pub const DEFAULT_PHASE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid network: {}", join(.0))]
    InvalidNetwork(Vec<NetworkViolation>),
    #[error("inflow must be nonnegative and vanish before 0")]
    BadInflow,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(Rational),
    #[error("edge sets at theta = {theta} violate the structural hypothesis: {}", join(.violations))]
    Hypothesis { theta: Rational, violations: Vec<HypothesisViolation> },
    #[error("thin flow at theta = {theta}")]
    Ntf { theta: Rational, source: Box<NtfError> },
    #[error("non-positive phase length {alpha} at theta = {theta} (internal error)")]
    NonPositiveStep { theta: Rational, alpha: Rational },
    #[error(
        "possible phase accumulation: {phases} phases reached theta = {theta} < horizon{}",
        .estimate.as_ref().map(|t| format!(", accumulation point near {t}")).unwrap_or_default()
    )]
    PhaseAccumulation { phases: usize, theta: Rational, estimate: Option<Rational> },
    #[error("the trajectory has already reached a steady state")]
    Finished,
    #[error("flow decomposition left a residual on edge {edge} (internal error)")]
    DecompositionResidual { edge: String },
    #[error("malformed trajectory: {0}")]
    Malformed(String),
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Why a phase ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Binding {
    /// An inactive edge becomes active.
    Activation { edge: String },
    /// The queue of a resetting edge runs empty.
    Depletion { edge: String },
    InflowBreakpoint,
    /// Nothing ever binds again.
    SteadyState,
}

/// One linear piece of the label functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub start: Rational,
    /// `None` for the final steady-state phase.
    pub end: Option<Rational>,
    pub active: Vec<String>,
    pub resetting: Vec<String>,
    pub inflow: Rational,
    /// Labels at `start`.
    pub labels: BTreeMap<String, Rational>,
    /// Thin flow `x'`.
    pub flow: BTreeMap<String, Rational>,
    /// Thin flow labels `l'`.
    pub label_slopes: BTreeMap<String, Rational>,
    pub bindings: Vec<Binding>,
}

/// Solver output. Per-node and per-edge vectors follow the network's index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryDoc", into = "TrajectoryDoc")]
pub struct EquilibriumTrajectory {
    pub network: Network,
    pub inflow: PiecewiseConstantFn,
    pub horizon: Rational,
    /// `l_v` over `theta`.
    pub labels: Vec<PiecewiseLinearFn>,
    /// `x_e(theta) = F_e^+(l_v(theta))`.
    pub cumulative: Vec<PiecewiseLinearFn>,
    /// `f_e^+` over the tail clock.
    pub edge_inflow: Vec<PiecewiseConstantFn>,
    /// `f_e^-` over the head clock.
    pub edge_outflow: Vec<PiecewiseConstantFn>,
    /// `z_e(l_v(theta))` over `theta`.
    pub queues: Vec<PiecewiseLinearFn>,
    pub phases: Vec<Phase>,
    /// Last computed instant; `None` once a steady state is reached. Edge
    /// flows are zero past `l_v(frontier)` and labels extrapolate linearly.
    pub frontier: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    format: u32,
    network: Network,
    inflow: PiecewiseConstantFn,
    horizon: Rational,
    frontier: Option<Rational>,
    labels: BTreeMap<String, PiecewiseLinearFn>,
    cumulative: BTreeMap<String, PiecewiseLinearFn>,
    edge_inflow: BTreeMap<String, PiecewiseConstantFn>,
    edge_outflow: BTreeMap<String, PiecewiseConstantFn>,
    queues: BTreeMap<String, PiecewiseLinearFn>,
    phases: Vec<Phase>,
}

impl From<EquilibriumTrajectory> for TrajectoryDoc {
    fn from(t: EquilibriumTrajectory) -> Self {
        let net = &t.network;
        TrajectoryDoc {
            format: 1,
            labels: net.by_node_id(&t.labels),
            cumulative: net.by_edge_id(&t.cumulative),
            edge_inflow: net.by_edge_id(&t.edge_inflow),
            edge_outflow: net.by_edge_id(&t.edge_outflow),
            queues: net.by_edge_id(&t.queues),
            inflow: t.inflow,
            horizon: t.horizon,
            frontier: t.frontier,
            phases: t.phases,
            network: t.network,
        }
    }
}

fn unkey<T>(ids: &[String], mut m: BTreeMap<String, T>, what: &str) -> Result<Vec<T>, EngineError> {
    let out = ids
        .iter()
        .map(|id| m.remove(id).ok_or_else(|| EngineError::Malformed(format!("{what}: missing {id:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(extra) = m.keys().next() {
        return Err(EngineError::Malformed(format!("{what}: unknown id {extra:?}")));
    }
    Ok(out)
}

impl TryFrom<TrajectoryDoc> for EquilibriumTrajectory {
    type Error = EngineError;
    fn try_from(d: TrajectoryDoc) -> Result<Self, EngineError> {
        if d.format != 1 {
            return Err(EngineError::Malformed(format!("unsupported format {}", d.format)));
        }
        let nodes = d.network.nodes().to_vec();
        let edges: Vec<String> = d.network.edges().iter().map(|e| e.id.clone()).collect();
        Ok(EquilibriumTrajectory {
            labels: unkey(&nodes, d.labels, "labels")?,
            cumulative: unkey(&edges, d.cumulative, "cumulative")?,
            edge_inflow: unkey(&edges, d.edge_inflow, "edge_inflow")?,
            edge_outflow: unkey(&edges, d.edge_outflow, "edge_outflow")?,
            queues: unkey(&edges, d.queues, "queues")?,
            network: d.network,
            inflow: d.inflow,
            horizon: d.horizon,
            frontier: d.frontier,
            phases: d.phases,
        })
    }
}

impl EquilibriumTrajectory {
    /// Last instant at which the phase data is authoritative: the frontier,
    /// or the start of the steady-state phase.
    pub fn cut(&self) -> Rational {
        match &self.frontier {
            Some(f) => f.clone(),
            None => self.phases.last().map(|p| p.start.clone()).unwrap_or_else(Rational::zero),
        }
    }

    /// Phase boundaries, including the frontier when finite.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.phases.iter().map(|p| p.start.clone()).collect();
        if let Some(f) = &self.frontier {
            out.push(f.clone());
        }
        out
    }

    pub fn label(&self, node: &str) -> Option<&PiecewiseLinearFn> {
        self.network.node_index(node).map(|v| &self.labels[v])
    }

    /// Largest queue on `e` over the computed range; `None` if the queue
    /// grows without bound in the steady state.
    pub fn queue_peak(&self, e: usize) -> Option<Rational> {
        let z = &self.queues[e];
        if self.frontier.is_none() && z.slope_after().is_positive() {
            return None;
        }
        let mut best = Rational::zero();
        for (_, y) in z.points() {
            if *y > best {
                best = y.clone();
            }
        }
        if let Some(f) = &self.frontier {
            best = best.max(z.eval(f));
        }
        Some(best)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub phase_cap: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { phase_cap: DEFAULT_PHASE_CAP }
    }
}

/// Labels at `theta = 0`: free-flow shortest distances.
pub fn initialize(net: &Network) -> Result<Vec<Rational>, EngineError> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(EngineError::InvalidNetwork(violations));
    }
    Ok(net.free_flow_labels().into_iter().map(|d| d.expect("validated: all nodes reachable")).collect())
}

/// Phase length and what binds it. `None` means no constraint ever binds.
pub fn max_step(
    net: &Network,
    labels: &[Rational],
    slopes: &[Rational],
    sets: &EdgeSetPair,
    theta: &Rational,
    next_breakpoint: Option<&Rational>,
) -> Result<(Option<Rational>, Vec<Binding>), EngineError> {
    let mut cands: Vec<(Rational, Binding)> = Vec::new();
    for (i, e) in net.edges().iter().enumerate() {
        let (v, w) = (e.tail, e.head);
        let gap = &labels[w] - &labels[v];
        if !sets.active.contains(&i) && slopes[w] > slopes[v] {
            cands.push((
                (&e.latency - &gap) / (&slopes[w] - &slopes[v]),
                Binding::Activation { edge: e.id.clone() },
            ));
        }
        if sets.resetting.contains(&i) && slopes[v] > slopes[w] {
            cands.push((
                (&gap - &e.latency) / (&slopes[v] - &slopes[w]),
                Binding::Depletion { edge: e.id.clone() },
            ));
        }
    }
    if let Some(b) = next_breakpoint {
        cands.push((b - theta, Binding::InflowBreakpoint));
    }
    let Some(alpha) = cands.iter().map(|(a, _)| a).min().cloned() else {
        return Ok((None, vec![Binding::SteadyState]));
    };
    if !alpha.is_positive() {
        return Err(EngineError::NonPositiveStep { theta: theta.clone(), alpha });
    }
    let bindings = cands.into_iter().filter(|(a, _)| *a == alpha).map(|(_, b)| b).collect();
    Ok((Some(alpha), bindings))
}

/// Data of the next phase before it is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePlan {
    pub start: Rational,
    pub sets: EdgeSetPair,
    pub inflow: Rational,
    pub ntf: NtfSolution,
    pub alpha: Option<Rational>,
    pub bindings: Vec<Binding>,
}

/// Incremental solver state.
#[derive(Debug, Clone)]
pub struct EquilibriumBuilder<'a> {
    net: &'a Network,
    inflow: PiecewiseConstantFn,
    theta: Rational,
    labels: Vec<Rational>,
    cum: Vec<Rational>,
    label_fns: Vec<PlBuilder>,
    cum_fns: Vec<PlBuilder>,
    queue_fns: Vec<PlBuilder>,
    fin: Vec<PcBuilder>,
    fout: Vec<PcBuilder>,
    phases: Vec<Phase>,
    steps: Vec<Rational>,
    last: Option<PhasePlan>,
    steady: bool,
}

impl<'a> EquilibriumBuilder<'a> {
    pub fn new(net: &'a Network, inflow: PiecewiseConstantFn) -> Result<Self, EngineError> {
        if !inflow.is_nonnegative() || !inflow.vanishes_before_zero() {
            return Err(EngineError::BadInflow);
        }
        let labels = initialize(net)?;
        let (n, m) = (net.node_count(), net.edge_count());
        Ok(EquilibriumBuilder {
            net,
            inflow,
            theta: Rational::zero(),
            labels,
            cum: vec![Rational::zero(); m],
            label_fns: vec![PlBuilder::new(Rational::one()); n],
            cum_fns: vec![PlBuilder::new(Rational::zero()); m],
            queue_fns: vec![PlBuilder::new(Rational::zero()); m],
            fin: vec![PcBuilder::new(Rational::zero()); m],
            fout: vec![PcBuilder::new(Rational::zero()); m],
            phases: Vec::new(),
            steps: Vec::new(),
            last: None,
            steady: false,
        })
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn labels(&self) -> &[Rational] {
        &self.labels
    }

    pub fn is_steady(&self) -> bool {
        self.steady
    }

    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    /// Thin flow and step size at the current frontier.
    pub fn plan(&self) -> Result<PhasePlan, EngineError> {
        if self.steady {
            return Err(EngineError::Finished);
        }
        let net = self.net;
        let theta = &self.theta;
        let derived = net.derive_edge_sets(&self.labels);
        if !derived.violations.is_empty() {
            return Err(EngineError::Hypothesis { theta: theta.clone(), violations: derived.violations });
        }
        let u0 = self.inflow.value_at(theta).clone();
        let ntf_err = |source| EngineError::Ntf { theta: theta.clone(), source: Box::new(source) };
        let inst = NtfInstance::new(net, derived.sets.clone(), u0.clone()).map_err(ntf_err)?;
        let ntf = inst.find_ntf().map_err(ntf_err)?;
        let next_bp = self.inflow.breakpoints().find(|b| *b > theta);
        let (alpha, bindings) = max_step(net, &self.labels, &ntf.labels, &derived.sets, theta, next_bp)?;
        Ok(PhasePlan { start: theta.clone(), sets: derived.sets, inflow: u0, ntf, alpha, bindings })
    }

    /// Applies a plan computed by [`plan`](Self::plan) at the current frontier.
    pub fn extend(&mut self, plan: PhasePlan) {
        assert_eq!(plan.start, self.theta, "plan does not start at the frontier");
        assert!(!self.steady, "extending a finished trajectory");
        let net = self.net;
        let theta = self.theta.clone();
        let (x, slopes) = (&plan.ntf.flow, &plan.ntf.labels);
        self.push_points();
        for (i, e) in net.edges().iter().enumerate() {
            let (v, w) = (e.tail, e.head);
            if slopes[v].is_positive() {
                self.fin[i].push(self.labels[v].clone(), &x[i] / &slopes[v]);
            }
            if slopes[w].is_positive() {
                self.fout[i].push(self.labels[w].clone(), &x[i] / &slopes[w]);
            }
        }
        self.phases.push(Phase {
            start: theta.clone(),
            end: plan.alpha.as_ref().map(|a| &theta + a),
            active: plan.sets.active_ids(net),
            resetting: plan.sets.resetting_ids(net),
            inflow: plan.inflow.clone(),
            labels: net.by_node_id(&self.labels),
            flow: net.by_edge_id(x),
            label_slopes: net.by_node_id(slopes),
            bindings: plan.bindings.clone(),
        });
        match &plan.alpha {
            Some(a) => {
                self.theta = &theta + a;
                for (l, d) in self.labels.iter_mut().zip(slopes) {
                    *l += a * d;
                }
                for (c, d) in self.cum.iter_mut().zip(x) {
                    *c += a * d;
                }
                self.steps.push(a.clone());
            }
            None => self.steady = true,
        }
        self.last = Some(plan);
    }

    fn push_points(&mut self) {
        let net = self.net;
        for v in 0..net.node_count() {
            self.label_fns[v].push(self.theta.clone(), self.labels[v].clone());
        }
        for (i, e) in net.edges().iter().enumerate() {
            self.cum_fns[i].push(self.theta.clone(), self.cum[i].clone());
            let excess = &self.labels[e.head] - &self.labels[e.tail] - &e.latency;
            self.queue_fns[i].push(self.theta.clone(), &e.capacity * excess.positive_part());
        }
    }

    /// Closes all functions. Without a steady state, flows are zero past the
    /// frontier.
    pub fn finish(mut self, horizon: Rational) -> EquilibriumTrajectory {
        let net = self.net;
        let plan = self.last.take().expect("at least one phase");
        let frontier = if self.steady {
            None
        } else {
            self.push_points();
            for (i, e) in net.edges().iter().enumerate() {
                self.fin[i].push(self.labels[e.tail].clone(), Rational::zero());
                self.fout[i].push(self.labels[e.head].clone(), Rational::zero());
            }
            Some(self.theta.clone())
        };
        let slopes = &plan.ntf.labels;
        let queue_slope = |i: usize| {
            let e = net.edge(i);
            let d = &slopes[e.head] - &slopes[e.tail];
            if plan.sets.active.contains(&i) && !d.is_negative() {
                &e.capacity * d
            } else {
                Rational::zero()
            }
        };
        EquilibriumTrajectory {
            network: net.clone(),
            inflow: self.inflow,
            horizon,
            labels: self.label_fns.into_iter().zip(slopes).map(|(b, s)| b.finish(s.clone())).collect(),
            cumulative: self.cum_fns.into_iter().zip(&plan.ntf.flow).map(|(b, s)| b.finish(s.clone())).collect(),
            edge_inflow: self.fin.into_iter().map(PcBuilder::finish).collect(),
            edge_outflow: self.fout.into_iter().map(PcBuilder::finish).collect(),
            queues: self.queue_fns.into_iter().enumerate().map(|(i, b)| b.finish(queue_slope(i))).collect(),
            phases: self.phases,
            frontier,
        }
    }

    /// Rough limit of the frontier assuming the last step sizes shrink geometrically.
    fn accumulation_estimate(&self) -> Option<Rational> {
        let n = self.steps.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (&self.steps[n - 2], &self.steps[n - 1]);
        let r = b / a;
        (r < 1).then(|| &self.theta + b * &r / (Rational::one() - &r))
    }
}

/// Runs phases until the horizon is reached or a steady state begins.
pub fn solve_equilibrium(
    net: &Network,
    inflow: &PiecewiseConstantFn,
    horizon: &Rational,
    config: &SolveConfig,
) -> Result<EquilibriumTrajectory, EngineError> {
    if !horizon.is_positive() {
        return Err(EngineError::BadHorizon(horizon.clone()));
    }
    let mut b = EquilibriumBuilder::new(net, inflow.clone())?;
    while !b.is_steady() && b.theta() < horizon {
        if b.phase_count() >= config.phase_cap {
            return Err(EngineError::PhaseAccumulation {
                phases: b.phase_count(),
                theta: b.theta().clone(),
                estimate: b.accumulation_estimate(),
            });
        }
        let plan = b.plan()?;
        b.extend(plan);
    }
    Ok(b.finish(horizon.clone()))
}

/// Greedy path decomposition of an acyclic static flow: paths from source to
/// sink over edges with positive flow, in lexicographic order of their edge
/// indices, each taking the minimum residual along it.
pub fn decompose_paths(
    net: &Network,
    active: &BTreeSet<usize>,
    flow: &[Rational],
) -> Result<Vec<(Vec<usize>, Rational)>, EngineError> {
    let mut residual = flow.to_vec();
    let mut out = Vec::new();
    let usable = |e: usize| active.contains(&e) && flow[e].is_positive();
    // iterative DFS; each stack frame is (node, next out-edge position)
    let mut path: Vec<usize> = Vec::new();
    let mut stack = vec![(net.source(), 0usize)];
    while let Some((v, k)) = stack.last_mut() {
        let v = *v;
        if v == net.sink() && !path.is_empty() {
            let h = path.iter().map(|&e| &residual[e]).min().expect("nonempty").clone();
            if h.is_positive() {
                for &e in &path {
                    residual[e] -= &h;
                }
                out.push((path.clone(), h));
            }
            stack.pop();
            path.pop();
            continue;
        }
        let outs = net.out_edges(v);
        if *k < outs.len() {
            let e = outs[*k];
            *k += 1;
            if usable(e) {
                path.push(e);
                stack.push((net.edge(e).head, 0));
            }
        } else {
            stack.pop();
            path.pop();
        }
    }
    if let Some(e) = residual.iter().position(|r| !r.is_zero()) {
        return Err(EngineError::DecompositionResidual { edge: net.edge(e).id.clone() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::testnets::{diamond, example, example_inflow, net, single, steps};

    fn pts(f: &PiecewiseLinearFn) -> Vec<(Rational, Rational)> {
        f.points().to_vec()
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(Rational, Rational)> {
        v.iter().map(|(a, b)| (q(a), q(b))).collect()
    }

    #[test]
    fn initial_labels() {
        let ex = example();
        assert_eq!(initialize(&ex).unwrap(), vec![q("1"), q("0"), q("2")]); // r, s, t
        assert_eq!(initialize(&single("1", "5")).unwrap()[1], q("5"));
        let d = diamond();
        assert_eq!(initialize(&d).unwrap()[d.node_index("t").unwrap()], q("2"));
        let bad = net(&["s", "t", "u"], &[("e", "s", "t", "1", "1")]);
        assert!(matches!(initialize(&bad), Err(EngineError::InvalidNetwork(_))));
    }

    #[test]
    fn step_sizes_of_the_example() {
        let ex = example();
        let by = |vals: [&str; 3]| vec![q(vals[1]), q(vals[0]), q(vals[2])]; // (s, r, t) -> index order r, s, t
        let ab = EdgeSetPair::from_ids(&ex, &["a", "b"], &[]).unwrap();
        let (a, b) = max_step(&ex, &by(["0", "1", "2"]), &by(["1", "2", "2"]), &ab, &q("0"), Some(&q("1"))).unwrap();
        assert_eq!(a, Some(q("1")));
        assert_eq!(b, vec![Binding::InflowBreakpoint]);

        let ab_a = EdgeSetPair::from_ids(&ex, &["a", "b"], &["a"]).unwrap();
        let (a, b) = max_step(&ex, &by(["1", "3", "4"]), &by(["1", "0", "0"]), &ab_a, &q("1"), Some(&q("2"))).unwrap();
        assert_eq!(a, Some(q("1")));
        assert_eq!(b, vec![Binding::Depletion { edge: "a".into() }, Binding::InflowBreakpoint]);

        let (a, b) = max_step(&ex, &by(["2", "3", "4"]), &by(["1", "1", "1"]), &ab, &q("2"), None).unwrap();
        assert_eq!(a, None);
        assert_eq!(b, vec![Binding::SteadyState]);
    }

    #[test]
    fn example_trajectory() {
        let ex = example();
        let t = solve_equilibrium(&ex, &example_inflow(), &q("5"), &SolveConfig::default()).unwrap();
        let lr = t.label("r").unwrap();
        assert_eq!(pts(lr), pairs(&[("0", "1"), ("1", "3"), ("2", "3")]));
        assert_eq!(lr.slope_after(), &q("1"));
        assert_eq!(lr.slope_before(), &q("1"));
        assert_eq!(t.label("t").unwrap(), &lr.add_constant(&q("1")));
        let a = ex.edge_index("a").unwrap();
        let c = ex.edge_index("c").unwrap();
        assert_eq!(t.edge_outflow[a], steps("0", &[("1", "1")]));
        assert_eq!(t.edge_inflow[a], example_inflow());
        assert_eq!(t.edge_inflow[c], PiecewiseConstantFn::zero());
        assert_eq!(t.cumulative[c], PiecewiseLinearFn::zero());
        assert_eq!(t.frontier, None);
        assert_eq!(t.phases.len(), 3);
        assert_eq!(t.phases[1].resetting, vec!["a".to_string()]);
        assert_eq!(t.phases[2].bindings, vec![Binding::SteadyState]);
        assert_eq!(pts(&t.queues[a]), pairs(&[("0", "0"), ("1", "1"), ("2", "0")]));
        assert_eq!(t.queue_peak(a), Some(q("1")));
    }

    #[test]
    fn single_edge_slopes() {
        let n = single("1", "1");
        let u = steps("0", &[("0", "2"), ("1", "0")]);
        let t = solve_equilibrium(&n, &u, &q("3"), &SolveConfig::default()).unwrap();
        let lt = &t.labels[n.node_index("t").unwrap()];
        assert_eq!(lt.slopes(), vec![q("1"), q("2"), q("0"), q("1")]);
        assert_eq!(pts(lt), pairs(&[("0", "1"), ("1", "3"), ("2", "3")]));
        assert_eq!(pts(&t.queues[0]), pairs(&[("0", "0"), ("1", "1"), ("2", "0")]));
    }

    #[test]
    fn zero_inflow_is_free_flow() {
        let d = diamond();
        let t = solve_equilibrium(&d, &PiecewiseConstantFn::zero(), &q("4"), &SolveConfig::default()).unwrap();
        let free = initialize(&d).unwrap();
        for (v, l) in t.labels.iter().enumerate() {
            assert_eq!(l, &PiecewiseLinearFn::linear(q("1"), free[v].clone()));
        }
        assert_eq!(t.phases.len(), 1);
        assert!(t.edge_outflow.iter().all(|f| *f == PiecewiseConstantFn::zero()));
    }

    #[test]
    fn finite_frontier_closes_flows() {
        let ex = example();
        let t = solve_equilibrium(&ex, &example_inflow(), &q("1/2"), &SolveConfig::default()).unwrap();
        assert_eq!(t.frontier, Some(q("1")));
        assert_eq!(t.phases.len(), 1);
        let a = ex.edge_index("a").unwrap();
        assert_eq!(t.edge_inflow[a], steps("0", &[("0", "2"), ("1", "0")]));
        assert_eq!(t.edge_outflow[a], steps("0", &[("1", "1"), ("3", "0")]));
        assert_eq!(t.cut(), q("1"));
    }

    #[test]
    fn phase_cap_reports_accumulation() {
        let ex = example();
        let err = solve_equilibrium(&ex, &example_inflow(), &q("5"), &SolveConfig { phase_cap: 1 }).unwrap_err();
        assert!(matches!(err, EngineError::PhaseAccumulation { phases: 1, .. }));
        assert!(err.to_string().contains("possible phase accumulation"));
    }

    #[test]
    fn rejects_bad_input() {
        let ex = example();
        let cfg = SolveConfig::default();
        assert!(matches!(
            solve_equilibrium(&ex, &example_inflow(), &q("0"), &cfg),
            Err(EngineError::BadHorizon(_))
        ));
        let neg = steps("0", &[("0", "-1")]);
        assert!(matches!(solve_equilibrium(&ex, &neg, &q("1"), &cfg), Err(EngineError::BadInflow)));
        let early = steps("0", &[("-1", "1")]);
        assert!(matches!(solve_equilibrium(&ex, &early, &q("1"), &cfg), Err(EngineError::BadInflow)));
    }

    #[test]
    fn deterministic_and_serializable() {
        let ex = example();
        let cfg = SolveConfig::default();
        let t1 = solve_equilibrium(&ex, &example_inflow(), &q("5"), &cfg).unwrap();
        let t2 = solve_equilibrium(&ex, &example_inflow(), &q("5"), &cfg).unwrap();
        assert_eq!(t1, t2);
        let s = serde_json::to_string(&t1).unwrap();
        assert_eq!(s, serde_json::to_string(&t2).unwrap());
        let back: EquilibriumTrajectory = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t1);
    }

    #[test]
    fn decompositions() {
        let ex = example();
        let all: BTreeSet<usize> = (0..3).collect();
        let ids = |p: &[usize]| p.iter().map(|&e| ex.edge(e).id.as_str()).collect::<Vec<_>>().join("");
        let d = decompose_paths(&ex, &all, &[q("2"), q("2"), q("0")]).unwrap();
        assert_eq!(d.iter().map(|(p, h)| (ids(p), h.clone())).collect::<Vec<_>>(), vec![("ab".into(), q("2"))]);
        let d = decompose_paths(&ex, &all, &[q("3"), q("1"), q("2")]).unwrap();
        assert_eq!(
            d.iter().map(|(p, h)| (ids(p), h.clone())).collect::<Vec<_>>(),
            vec![("ab".into(), q("1")), ("ac".into(), q("2"))]
        );
        assert!(decompose_paths(&ex, &all, &[q("0"), q("0"), q("0")]).unwrap().is_empty());
        assert!(matches!(
            decompose_paths(&ex, &all, &[q("1"), q("0"), q("0")]),
            Err(EngineError::DecompositionResidual { .. })
        ));
    }
}
