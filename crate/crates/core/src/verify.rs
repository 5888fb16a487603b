//! Independent feasibility and equilibrium checks.
//!
//! All functions involved are piecewise constant or piecewise linear, so
//! comparing them at every breakpoint and at one interior point of every
//! piece (plus two points on each unbounded end) decides the comparison on
//! the whole line. No tolerance is used anywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{decompose_paths, EngineError, EquilibriumTrajectory};
use crate::loading::{load, node_labels, queue_evolve, LoadError, LoadingResult, PathFlowSet, PathFlow};
use crate::netmodel::{EdgeSetPair, Network};
use crate::pwfn::{compose_monotone, max_pointwise, merged_breakpoints, min_pointwise, PcBuilder, PiecewiseConstantFn, PiecewiseLinearFn};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Capacity,
    NonDeficit,
    Conservation,
    CapacityOperation,
    InactiveInflow,
    CumulativeMismatch,
    LabelRecursion,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }
}

/// A failed requirement `lhs relation rhs` about `subject` at time `at`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Edge, node or phase the requirement is about.
    pub subject: String,
    pub at: Rational,
    pub relation: Cmp,
    pub lhs: Rational,
    pub rhs: Rational,
    pub detail: String,
}

impl Violation {
    /// The recorded values really violate the recorded relation.
    pub fn is_consistent(&self) -> bool {
        !self.relation.holds(&self.lhs, &self.rhs)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        };
        write!(
            f,
            "{} [{}] at {}: {} (required {} {} {})",
            self.kind, self.subject, self.at, self.detail, self.lhs, rel, self.rhs
        )
    }
}

/// Keeps the first violation per (kind, subject).
#[derive(Debug, Default)]
struct Report {
    seen: BTreeSet<(ViolationKind, String)>,
    out: Vec<Violation>,
}

impl Report {
    #[allow(clippy::too_many_arguments)]
    fn check(
        &mut self,
        kind: ViolationKind,
        subject: &str,
        at: &Rational,
        relation: Cmp,
        lhs: Rational,
        rhs: Rational,
        detail: impl FnOnce() -> String,
    ) -> bool {
        if relation.holds(&lhs, &rhs) {
            return true;
        }
        if self.seen.insert((kind, subject.to_string())) {
            self.out.push(Violation {
                kind,
                subject: subject.to_string(),
                at: at.clone(),
                relation,
                lhs,
                rhs,
                detail: detail(),
            });
        }
        false
    }
}

/// Sorted sample points: the given breakpoints, midpoints between them, one
/// point left of the first and, unless `hi` bounds the range, two points
/// right of the last. Points above `hi` are dropped and `hi` itself is kept.
pub fn sample_points(mut xs: Vec<Rational>, hi: Option<&Rational>) -> Vec<Rational> {
    if let Some(h) = hi {
        xs.push(h.clone());
    }
    xs.sort();
    xs.dedup();
    if xs.is_empty() {
        xs.push(Rational::zero());
    }
    let one = Rational::one();
    let mut out = Vec::with_capacity(2 * xs.len() + 3);
    out.push(&xs[0] - &one);
    for w in xs.windows(2) {
        out.push(w[0].clone());
        out.push(w[0].midpoint(&w[1]));
    }
    let last = xs.last().expect("nonempty").clone();
    if hi.is_none() {
        out.push(&last + &one);
        out.push(&last + Rational::from_integer(2));
    }
    out.push(last);
    out.sort();
    out.dedup();
    if let Some(h) = hi {
        out.retain(|x| x <= h);
    }
    out
}

/// Flow data shared by solver trajectories and loading results.
pub trait FlowOverTime {
    fn network(&self) -> &Network;
    fn inflow_of(&self, e: usize) -> &PiecewiseConstantFn;
    fn outflow_of(&self, e: usize) -> &PiecewiseConstantFn;
    /// Required `sum out f+ - sum in f-` at `v`; `None` leaves `v` unchecked.
    fn injection(&self, v: usize) -> Option<PiecewiseConstantFn>;
}

impl FlowOverTime for EquilibriumTrajectory {
    fn network(&self) -> &Network {
        &self.network
    }
    fn inflow_of(&self, e: usize) -> &PiecewiseConstantFn {
        &self.edge_inflow[e]
    }
    fn outflow_of(&self, e: usize) -> &PiecewiseConstantFn {
        &self.edge_outflow[e]
    }
    fn injection(&self, v: usize) -> Option<PiecewiseConstantFn> {
        let net = &self.network;
        if v == net.sink() {
            None
        } else if v == net.source() {
            // flows past a finite frontier only carry what left before it
            Some(match &self.frontier {
                Some(f) => self.inflow.truncate(f),
                None => self.inflow.clone(),
            })
        } else {
            Some(PiecewiseConstantFn::zero())
        }
    }
}

impl FlowOverTime for LoadingResult {
    fn network(&self) -> &Network {
        &self.network
    }
    fn inflow_of(&self, e: usize) -> &PiecewiseConstantFn {
        &self.edge_inflow[e]
    }
    fn outflow_of(&self, e: usize) -> &PiecewiseConstantFn {
        &self.edge_outflow[e]
    }
    fn injection(&self, v: usize) -> Option<PiecewiseConstantFn> {
        let net = &self.network;
        let mut g = PiecewiseConstantFn::zero();
        for p in &self.paths {
            let first = net.edge_index(&p.edges[0])?;
            let last = net.edge_index(p.edges.last()?)?;
            if net.edge(first).tail == v {
                g = g.add(&p.inflows[0]);
            }
            if net.edge(last).head == v {
                g = g.sub(p.outflows.last()?);
            }
        }
        Some(g)
    }
}

fn piece_point(start: &Option<Rational>, end: &Option<Rational>) -> Rational {
    match (start, end) {
        (Some(a), Some(b)) => a.midpoint(b),
        (Some(a), None) => a + Rational::one(),
        (None, Some(b)) => b - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

/// `z(theta) = F+(theta) - F-(theta + tau)`.
fn queue_from_flows(inflow: &PiecewiseConstantFn, outflow: &PiecewiseConstantFn, latency: &Rational) -> PiecewiseLinearFn {
    inflow.integrate().sub(&outflow.integrate().shift_arg(latency))
}

/// Capacity, nonnegativity, non-deficit, conservation and queue operation at
/// capacity.
pub fn check_feasible<F: FlowOverTime + ?Sized>(flow: &F) -> Vec<Violation> {
    let mut r = Report::default();
    feasible_into(flow, &mut r);
    r.out
}

fn feasible_into<F: FlowOverTime + ?Sized>(flow: &F, r: &mut Report) {
    use ViolationKind::*;
    let net = flow.network();
    for (i, e) in net.edges().iter().enumerate() {
        let (fin, fout) = (flow.inflow_of(i), flow.outflow_of(i));
        for (s, t, v) in fout.pieces() {
            let at = piece_point(&s, &t);
            r.check(Capacity, &e.id, &at, Cmp::Le, v.clone(), e.capacity.clone(), || "outflow rate above capacity".into());
            r.check(Capacity, &e.id, &at, Cmp::Ge, v, Rational::zero(), || "negative outflow rate".into());
        }
        for (s, t, v) in fin.pieces() {
            let at = piece_point(&s, &t);
            r.check(Capacity, &e.id, &at, Cmp::Ge, v, Rational::zero(), || "negative inflow rate".into());
        }
        let z = queue_from_flows(fin, fout, &e.latency);
        for (at, val) in negative_points(&z) {
            r.check(NonDeficit, &e.id, &at, Cmp::Ge, val, Rational::zero(), || {
                "outflow ahead of inflow: F+(t) - F-(t + tau) < 0".into()
            });
        }
        // a queue operates at capacity on every open piece of z, f+ and f-(. + tau)
        let mut xs: Vec<Rational> = z.breakpoints().cloned().collect();
        xs.extend(fin.breakpoints().cloned());
        xs.extend(fout.breakpoints().map(|b| b - &e.latency));
        xs.sort();
        xs.dedup();
        let interior: Vec<Rational> = if xs.is_empty() {
            vec![Rational::zero()]
        } else {
            let mut p = vec![&xs[0] - Rational::one(), xs.last().expect("nonempty") + Rational::one()];
            p.extend(xs.windows(2).map(|w| w[0].midpoint(&w[1])));
            p.sort();
            p
        };
        for x in interior {
            let zx = z.eval(&x);
            let out = fout.eval(&(&x + &e.latency));
            let expected = if zx.is_positive() {
                e.capacity.clone()
            } else {
                fin.value_at(&x).clone().min(e.capacity.clone())
            };
            r.check(CapacityOperation, &e.id, &x, Cmp::Eq, out, expected, || {
                format!("outflow at t + tau with queue {zx} at t is not the capacity-operating rate")
            });
        }
    }
    for v in 0..net.node_count() {
        let Some(g) = flow.injection(v) else { continue };
        let mut bal = PiecewiseConstantFn::zero();
        for &e in net.out_edges(v) {
            bal = bal.add(flow.inflow_of(e));
        }
        for &e in net.in_edges(v) {
            bal = bal.sub(flow.outflow_of(e));
        }
        let diff = bal.sub(&g);
        for (s, t, d) in diff.pieces() {
            if !d.is_zero() {
                let at = piece_point(&s, &t);
                let lhs = bal.eval(&at);
                let rhs = g.eval(&at);
                r.check(Conservation, net.node_id(v), &at, Cmp::Eq, lhs, rhs, || {
                    "out-rate minus in-rate differs from the node's injection".into()
                });
            }
        }
    }
}

/// Points where a piecewise linear function is negative, with the values.
/// Exact: checks breakpoints, and the far ends when the end slopes point down.
fn negative_points(f: &PiecewiseLinearFn) -> Vec<(Rational, Rational)> {
    let pts = f.points();
    let mut out: Vec<(Rational, Rational)> =
        pts.iter().filter(|(_, y)| y.is_negative()).cloned().collect();
    let (x0, y0) = &pts[0];
    if f.slope_before().is_positive() {
        let x = x0 - y0.abs() / f.slope_before() - Rational::one();
        out.push((x.clone(), f.eval(&x)));
    }
    let (xn, yn) = pts.last().expect("nonempty");
    if f.slope_after().is_negative() {
        let x = xn + yn.abs() / -f.slope_after() + Rational::one();
        out.push((x.clone(), f.eval(&x)));
    }
    out
}

fn compare_on<'a>(
    r: &mut Report,
    kind_for: impl Fn(&Rational, &Rational) -> ViolationKind,
    subject: &str,
    a: &'a PiecewiseLinearFn,
    b: &'a PiecewiseLinearFn,
    hi: Option<&Rational>,
    detail: &str,
) {
    for x in sample_points(merged_breakpoints([a, b]), hi) {
        let (va, vb) = (a.eval(&x), b.eval(&x));
        let kind = kind_for(&va, &vb);
        if !r.check(kind, subject, &x, Cmp::Eq, va, vb, || detail.to_string()) {
            return;
        }
    }
}

/// Equilibrium conditions of a solver trajectory: the cumulative identity
/// `F+_e(l_v(theta)) = F-_e(l_w(theta))`, the label recursion
/// `l_w = min over vw of T_e(l_v)` with exit times recomputed from the edge
/// inflows, the queue formula `z_e(l_v) = nu_e [l_w - l_v - tau_e]_+`, and
/// agreement of each phase's edge sets with the labels.
pub fn check_equilibrium(traj: &EquilibriumTrajectory) -> Vec<Violation> {
    use ViolationKind::*;
    let mut r = Report::default();
    let net = &traj.network;
    let hi = traj.frontier.as_ref();
    let s = net.source();

    compare_on(&mut r, |_, _| LabelRecursion, net.node_id(s), &traj.labels[s], &PiecewiseLinearFn::identity(), hi, "source label is not the identity");
    let monotone: Vec<bool> = traj.labels.iter().map(|l| l.is_monotone()).collect();
    for (v, ok) in monotone.iter().enumerate() {
        if !ok {
            let l = &traj.labels[v];
            let (x, y) = decreasing_witness(l);
            r.check(LabelRecursion, net.node_id(v), &x, Cmp::Ge, l.right_slope(&x), Rational::zero(), || {
                format!("label decreases (value {y})")
            });
        }
    }

    let exit_times: Vec<Option<PiecewiseLinearFn>> = net
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let f = &traj.edge_inflow[i];
            (f.initial() <= &e.capacity && f.is_nonnegative()).then(|| queue_evolve(f, &e.capacity, &e.latency).1)
        })
        .collect();

    for (i, e) in net.edges().iter().enumerate() {
        let (v, w) = (e.tail, e.head);
        if !(monotone[v] && monotone[w]) {
            continue;
        }
        let (lv, lw) = (&traj.labels[v], &traj.labels[w]);
        let fin = traj.edge_inflow[i].integrate();
        let fout = traj.edge_outflow[i].integrate();
        let a = compose_monotone(&fin, lv).expect("monotone label");
        let b = compose_monotone(&fout, lw).expect("monotone label");
        compare_on(
            &mut r,
            |x, y| if x > y { InactiveInflow } else { CumulativeMismatch },
            &e.id,
            &a,
            &b,
            hi,
            "cumulative inflow at l_v differs from cumulative outflow at l_w",
        );

        let formula = max_pointwise(&[lw.sub(lv).add_constant(&-&e.latency).scale(&e.capacity), PiecewiseLinearFn::zero()])
            .expect("two functions");
        compare_on(&mut r, |_, _| CapacityOperation, &e.id, &traj.queues[i], &formula, hi, "recorded queue differs from nu [l_w - l_v - tau]_+");
        let z = queue_from_flows(&traj.edge_inflow[i], &traj.edge_outflow[i], &e.latency);
        let z_at = compose_monotone(&z, lv).expect("monotone label");
        compare_on(&mut r, |_, _| CapacityOperation, &e.id, &z_at, &formula, hi, "F+ - F-(. + tau) at l_v differs from nu [l_w - l_v - tau]_+");
    }

    for w in 0..net.node_count() {
        if w == s || !monotone[w] {
            continue;
        }
        let mut cands = Vec::new();
        let mut complete = true;
        for &e in net.in_edges(w) {
            let v = net.edge(e).tail;
            match (&exit_times[e], monotone[v]) {
                (Some(t), true) => cands.push(compose_monotone(t, &traj.labels[v]).expect("monotone label")),
                _ => complete = false,
            }
        }
        if !complete || cands.is_empty() {
            continue;
        }
        let best = min_pointwise(&cands).expect("nonempty");
        compare_on(&mut r, |_, _| LabelRecursion, net.node_id(w), &traj.labels[w], &best, hi, "label differs from the earliest exit time over incoming edges");
    }

    for p in &traj.phases {
        let subject = format!("phase@{}", p.start);
        let labels: Vec<Rational> = traj.labels.iter().map(|l| l.eval(&p.start)).collect();
        for (v, l) in labels.iter().enumerate() {
            let recorded = p.labels.get(net.node_id(v)).cloned().unwrap_or_else(Rational::zero);
            r.check(LabelRecursion, &subject, &p.start, Cmp::Eq, recorded, l.clone(), || {
                format!("recorded label of {} differs from the label function", net.node_id(v))
            });
        }
        let derived = net.derive_edge_sets(&labels).sets;
        let recorded = EdgeSetPair::from_ids(net, &p.active, &p.resetting);
        let same = recorded.as_ref().is_ok_and(|rec| *rec == derived);
        if !same {
            let n = |s: &BTreeSet<usize>| Rational::from_integer(s.len() as i64);
            let rec_active = recorded.as_ref().map(|x| n(&x.active)).unwrap_or_else(|_| Rational::from_integer(-1));
            r.check(LabelRecursion, &subject, &p.start, Cmp::Eq, rec_active, n(&derived.active), || {
                format!(
                    "recorded edge sets {:?}/{:?} differ from those of the labels {:?}/{:?}",
                    p.active,
                    p.resetting,
                    derived.active_ids(net),
                    derived.resetting_ids(net)
                )
            });
            // equal counts would hide the mismatch; force a record
            if r.out.last().is_none_or(|v| v.subject != subject) {
                r.check(LabelRecursion, &subject, &p.start, Cmp::Eq, Rational::zero(), Rational::one(), || {
                    format!("recorded edge sets {:?}/{:?} differ from those of the labels", p.active, p.resetting)
                });
            }
        }
    }
    r.out
}

fn decreasing_witness(f: &PiecewiseLinearFn) -> (Rational, Rational) {
    if f.slope_before().is_negative() {
        let x = &f.points()[0].0 - Rational::one();
        return (x.clone(), f.eval(&x));
    }
    for (x, y) in f.points() {
        if f.right_slope(x).is_negative() {
            return (x.clone(), y.clone());
        }
    }
    let x = f.points().last().expect("nonempty").0.clone();
    (x.clone(), f.eval(&x))
}

/// Queue operation at capacity for a loading: outflow at most the capacity,
/// nonnegative queues, and the waiting time read off the cumulative flows
/// equal to `z_e / nu_e`; also the recorded exit times and queues against
/// their definitions.
pub fn check_capacity_operation(res: &LoadingResult) -> Vec<Violation> {
    use ViolationKind::*;
    let mut r = Report::default();
    let net = &res.network;
    for (i, e) in net.edges().iter().enumerate() {
        let (fin, fout, z, t) = (&res.edge_inflow[i], &res.edge_outflow[i], &res.queues[i], &res.exit_times[i]);
        for (s, u, v) in fout.pieces() {
            let at = piece_point(&s, &u);
            r.check(CapacityOperation, &e.id, &at, Cmp::Le, v, e.capacity.clone(), || "(a) outflow above capacity".into());
        }
        for (at, val) in negative_points(z) {
            r.check(CapacityOperation, &e.id, &at, Cmp::Ge, val, Rational::zero(), || "(b) negative queue".into());
        }
        let big_f_in = fin.integrate();
        let big_f_out = fout.integrate();
        let mut xs: Vec<Rational> = z.breakpoints().chain(fin.breakpoints()).cloned().collect();
        xs.extend(t.breakpoints().cloned());
        xs.extend(fout.breakpoints().map(|b| b - &e.latency));
        for b in fout.breakpoints() {
            if let Some(x) = t.first_reach(&(t.points()[0].0.clone().min(b.clone()) - Rational::one()), b) {
                xs.push(x);
            }
        }
        let expected_t = z.scale(&(Rational::one() / &e.capacity)).add(&PiecewiseLinearFn::identity()).add_constant(&e.latency);
        let z_def = queue_from_flows(fin, fout, &e.latency);
        for x in sample_points(xs, None) {
            let zx = z.eval(&x);
            let wait = &zx / &e.capacity;
            let start = &x + &e.latency;
            let q = big_f_out
                .first_reach(&start, &big_f_in.eval(&x))
                .map(|y| y - &start);
            match q {
                Some(q) => {
                    r.check(CapacityOperation, &e.id, &x, Cmp::Eq, q, wait, || "(c) waiting time differs from z / nu".into());
                }
                None => {
                    r.check(CapacityOperation, &e.id, &x, Cmp::Ge, big_f_out.eval(&start), big_f_in.eval(&x), || {
                        "(c) cumulative outflow never catches up with inflow".into()
                    });
                }
            }
            r.check(CapacityOperation, &e.id, &x, Cmp::Eq, t.eval(&x), expected_t.eval(&x), || "exit time differs from t + z / nu + tau".into());
            r.check(CapacityOperation, &e.id, &x, Cmp::Eq, zx, z_def.eval(&x), || "queue differs from F+(t) - F-(t + tau)".into());
        }
    }
    r.out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossCheckError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// First disagreement between solver and loading labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMismatch {
    pub node: String,
    pub theta: Rational,
    pub trajectory: Option<Rational>,
    pub loading: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    /// Labels are compared on `(-inf, cut]`.
    pub cut: Rational,
    pub paths: BTreeMap<String, PiecewiseConstantFn>,
    pub points_checked: usize,
    pub mismatch: Option<LabelMismatch>,
}

impl CrossCheckReport {
    pub fn agrees(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Path inflows of a trajectory: each phase's thin flow decomposed into
/// source-sink paths, as rates on the departure clock, cut at `cut`.
pub fn trajectory_path_flows(traj: &EquilibriumTrajectory, cut: &Rational) -> Result<PathFlowSet, CrossCheckError> {
    let net = &traj.network;
    let mut pieces: BTreeMap<Vec<usize>, PcBuilder> = BTreeMap::new();
    for p in &traj.phases {
        if p.start >= *cut {
            break;
        }
        let sets = EdgeSetPair::from_ids(net, &p.active, &p.resetting).map_err(|e| EngineError::Malformed(e.to_string()))?;
        let flow: Vec<Rational> = net
            .edges()
            .iter()
            .map(|e| p.flow.get(&e.id).cloned().unwrap_or_else(Rational::zero))
            .collect();
        let parts = decompose_paths(net, &sets.active, &flow)?;
        for b in pieces.values_mut() {
            b.push(p.start.clone(), Rational::zero());
        }
        for (path, h) in parts {
            pieces.entry(path).or_insert_with(|| PcBuilder::new(Rational::zero())).push(p.start.clone(), h);
        }
    }
    let paths = pieces
        .into_iter()
        .map(|(edges, b)| {
            let id = edges.iter().map(|&e| net.edge(e).id.as_str()).collect::<Vec<_>>().join("-");
            PathFlow { id, edges, rate: b.finish().truncate(cut) }
        })
        .collect();
    Ok(PathFlowSet { paths, horizon: cut.clone() })
}

/// Loads the trajectory's own path decomposition and compares the resulting
/// earliest-arrival labels with the trajectory's labels.
pub fn cross_check(traj: &EquilibriumTrajectory) -> Result<CrossCheckReport, CrossCheckError> {
    let net = &traj.network;
    let cut = traj.cut().max(traj.horizon.clone());
    let pf = trajectory_path_flows(traj, &cut)?;
    let res = load(net, &pf)?;
    let loaded = node_labels(net, &res.exit_times, net.source());
    let mut points_checked = 0;
    let mut mismatch = None;
    'nodes: for (v, (mine, theirs)) in traj.labels.iter().zip(&loaded).enumerate() {
        let theirs = theirs.as_ref();
        let mut xs: Vec<Rational> = mine.breakpoints().cloned().collect();
        if let Some(t) = theirs {
            xs.extend(t.breakpoints().cloned());
        }
        xs.push(Rational::zero());
        for x in sample_points(xs, Some(&cut)) {
            points_checked += 1;
            let a = mine.eval(&x);
            let b = theirs.map(|t| t.eval(&x));
            if b.as_ref() != Some(&a) {
                mismatch = Some(LabelMismatch { node: net.node_id(v).to_string(), theta: x, trajectory: Some(a), loading: b });
                break 'nodes;
            }
        }
    }
    let paths = pf.paths.into_iter().map(|p| (p.id, p.rate)).collect();
    Ok(CrossCheckReport { cut, paths, points_checked, mismatch })
}

/// A single local perturbation of a trajectory, for testing the checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mutation {
    /// Multiply the `piece`-th nonzero piece of an edge inflow.
    ScaleInflow { edge: usize, piece: usize, factor: Rational },
    /// Multiply the `piece`-th nonzero piece of an edge outflow.
    ScaleOutflow { edge: usize, piece: usize, factor: Rational },
    /// Move the `point`-th breakpoint of a label vertically.
    ShiftLabel { node: usize, point: usize, delta: Rational },
    /// Multiply a queue profile.
    ScaleQueue { edge: usize, factor: Rational },
}

fn scale_piece(f: &PiecewiseConstantFn, piece: usize, factor: &Rational) -> Option<PiecewiseConstantFn> {
    let mut idx = 0;
    let mut hit = false;
    let mut b = PcBuilder::new(f.initial().clone());
    for (x, v) in f.steps() {
        let mut v = v.clone();
        if !v.is_zero() {
            if idx == piece {
                v = &v * factor;
                hit = true;
            }
            idx += 1;
        }
        b.push(x.clone(), v);
    }
    let g = b.finish();
    (hit && g != *f).then_some(g)
}

impl Mutation {
    /// The mutated trajectory, or `None` if the mutation does not apply or
    /// changes nothing.
    pub fn apply(&self, traj: &EquilibriumTrajectory) -> Option<EquilibriumTrajectory> {
        let mut t = traj.clone();
        match self {
            Mutation::ScaleInflow { edge, piece, factor } => {
                t.edge_inflow[*edge] = scale_piece(traj.edge_inflow.get(*edge)?, *piece, factor)?;
            }
            Mutation::ScaleOutflow { edge, piece, factor } => {
                t.edge_outflow[*edge] = scale_piece(traj.edge_outflow.get(*edge)?, *piece, factor)?;
            }
            Mutation::ShiftLabel { node, point, delta } => {
                let l = traj.labels.get(*node)?;
                if delta.is_zero() || *point >= l.points().len() {
                    return None;
                }
                let mut pts = l.points().to_vec();
                pts[*point].1 += delta;
                let f = PiecewiseLinearFn::from_points(pts, l.slope_before().clone(), l.slope_after().clone()).ok()?;
                t.labels[*node] = f;
            }
            Mutation::ScaleQueue { edge, factor } => {
                let z = traj.queues.get(*edge)?;
                let scaled = z.scale(factor);
                if scaled == *z {
                    return None;
                }
                t.queues[*edge] = scaled;
            }
        }
        Some(t)
    }
}
