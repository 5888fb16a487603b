//! Normalized thin flows with resetting (NTF).
//!
//! An NTF is a static flow `x'` of value `u0` supported on the active edges
//! `E'`, together with node labels `l'` (`l'_s = 1`,
//! `l'_w = min over active vw of rho_e(l'_v, x'_e)`) such that flow only uses
//! edges attaining that minimum. Here
//! `rho_e(l, x) = x / nu_e` on resetting edges and `max(l, x / nu_e)` otherwise.
//!
//! NTFs are found by exhaustive search over the combinatorial "shape" of the
//! solution. For every active edge we guess whether its `rho` constraint is
//! tight and, for tight non-resetting edges, which branch of the `max` is
//! attained. A full guess turns every condition into a linear constraint,
//! and every feasible point of the resulting LP is an NTF. The search is a
//! depth-first walk that prunes partial guesses with an LP feasibility test.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlp::{LinearProgram, LpOutcome, Relation};
use crate::netmodel::{EdgeSetPair, HypothesisViolation, Network};
use crate::rational::Rational;

/// Default cap on `|E'|` for full enumeration.
pub const DEFAULT_ENUMERATION_EDGE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NtfError {
    #[error("edge sets violate the structural hypothesis: {}", join(.0))]
    Hypothesis(Vec<HypothesisViolation>),
    #[error("inflow value must be nonnegative, got {0}")]
    NegativeInflow(Rational),
    #[error("flow is not feasible for the instance: {}", join(.0))]
    InfeasibleFlow(Vec<NtfViolation>),
    #[error("enumeration refused: {active} active edges exceeds the cap of {cap}")]
    EdgeCapExceeded { active: usize, cap: usize },
    #[error("no thin flow found after exhausting all guesses (internal error)")]
    Exhausted,
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// `(E', E*, u0)` on a network, with the structural hypothesis checked.
#[derive(Debug, Clone)]
pub struct NtfInstance<'a> {
    network: &'a Network,
    sets: EdgeSetPair,
    inflow: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NtfSolution {
    /// `x'_e` per edge index (zero off `E'`).
    pub flow: Vec<Rational>,
    /// `l'_v` per node index.
    pub labels: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NtfViolation {
    NegativeFlow { edge: String, flow: Rational },
    FlowOffActive { edge: String, flow: Rational },
    Conservation { node: String, net_outflow: Rational, expected: Rational },
    SourceLabel { label: Rational },
    LabelRecursion { node: String, label: Rational, expected: Rational },
    UnusedTightness { edge: String, flow: Rational, head_label: Rational, rho: Rational },
    WrongLength { what: String, len: usize, expected: usize },
}

impl fmt::Display for NtfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NtfViolation::NegativeFlow { edge, flow } => write!(f, "x'[{edge}] = {flow} < 0"),
            NtfViolation::FlowOffActive { edge, flow } => {
                write!(f, "x'[{edge}] = {flow} on an inactive edge")
            }
            NtfViolation::Conservation { node, net_outflow, expected } => {
                write!(f, "net outflow at {node} is {net_outflow}, expected {expected}")
            }
            NtfViolation::SourceLabel { label } => write!(f, "source label {label} != 1"),
            NtfViolation::LabelRecursion { node, label, expected } => {
                write!(f, "l'[{node}] = {label}, recursion gives {expected}")
            }
            NtfViolation::UnusedTightness { edge, flow, head_label, rho } => write!(
                f,
                "x'[{edge}] = {flow} > 0 although head label {head_label} < rho {rho}"
            ),
            NtfViolation::WrongLength { what, len, expected } => {
                write!(f, "{what} has length {len}, expected {expected}")
            }
        }
    }
}

/// Outcome of [`is_ntf`]: valid iff `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtfCertificate {
    pub violations: Vec<NtfViolation>,
}

impl NtfCertificate {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `rho_e(l_v, x_e)`.
pub fn rho(resetting: bool, tail_label: &Rational, flow: &Rational, capacity: &Rational) -> Rational {
    let ratio = flow / capacity;
    if resetting || ratio > *tail_label {
        ratio
    } else {
        tail_label.clone()
    }
}

impl<'a> NtfInstance<'a> {
    pub fn new(network: &'a Network, sets: EdgeSetPair, inflow: Rational) -> Result<Self, NtfError> {
        if inflow.is_negative() {
            return Err(NtfError::NegativeInflow(inflow));
        }
        let v = sets.hypothesis_violations(network);
        if !v.is_empty() {
            return Err(NtfError::Hypothesis(v));
        }
        Ok(NtfInstance { network, sets, inflow })
    }

    pub fn network(&self) -> &Network {
        self.network
    }

    pub fn sets(&self) -> &EdgeSetPair {
        &self.sets
    }

    pub fn inflow(&self) -> &Rational {
        &self.inflow
    }

    fn order(&self) -> Vec<usize> {
        self.network
            .topological_order(&self.sets.active)
            .expect("hypothesis guarantees an acyclic active set")
    }

    fn rho_of(&self, e: usize, labels: &[Rational], flow: &Rational) -> Rational {
        let edge = self.network.edge(e);
        rho(self.sets.resetting.contains(&e), &labels[edge.tail], flow, &edge.capacity)
    }

    /// Membership of `flow` in `K(E', u0)`.
    pub fn flow_violations(&self, flow: &[Rational]) -> Vec<NtfViolation> {
        let net = self.network;
        let mut out = Vec::new();
        if flow.len() != net.edge_count() {
            out.push(NtfViolation::WrongLength {
                what: "flow".into(),
                len: flow.len(),
                expected: net.edge_count(),
            });
            return out;
        }
        for (e, x) in flow.iter().enumerate() {
            let id = net.edge(e).id.clone();
            if x.is_negative() {
                out.push(NtfViolation::NegativeFlow { edge: id, flow: x.clone() });
            } else if x.is_positive() && !self.sets.active.contains(&e) {
                out.push(NtfViolation::FlowOffActive { edge: id, flow: x.clone() });
            }
        }
        for v in 0..net.node_count() {
            if v == net.sink() {
                continue;
            }
            let expected = if v == net.source() { self.inflow.clone() } else { Rational::zero() };
            let net_out: Rational = net.out_edges(v).iter().map(|&e| &flow[e]).sum::<Rational>()
                - net.in_edges(v).iter().map(|&e| &flow[e]).sum::<Rational>();
            if net_out != expected {
                out.push(NtfViolation::Conservation {
                    node: net.node_id(v).to_string(),
                    net_outflow: net_out,
                    expected,
                });
            }
        }
        out
    }

    /// Labels of `flow` by the topological-scan recursion with `l'_s = 1`.
    pub fn compute_labels(&self, flow: &[Rational]) -> Result<Vec<Rational>, NtfError> {
        let bad = self.flow_violations(flow);
        if !bad.is_empty() {
            return Err(NtfError::InfeasibleFlow(bad));
        }
        Ok(self.labels_unchecked(flow))
    }

    fn labels_unchecked(&self, flow: &[Rational]) -> Vec<Rational> {
        let net = self.network;
        let mut labels = vec![Rational::zero(); net.node_count()];
        labels[net.source()] = Rational::one();
        for w in self.order() {
            if w == net.source() {
                continue;
            }
            labels[w] = net
                .in_edges(w)
                .iter()
                .filter(|e| self.sets.active.contains(e))
                .map(|&e| self.rho_of(e, &labels, &flow[e]))
                .min()
                .expect("hypothesis gives every node an active in-edge");
        }
        labels
    }

    /// Exact NTF certification; the certificate lists every violation.
    pub fn is_ntf(&self, sol: &NtfSolution) -> NtfCertificate {
        let net = self.network;
        let mut violations = self.flow_violations(&sol.flow);
        if sol.labels.len() != net.node_count() {
            violations.push(NtfViolation::WrongLength {
                what: "labels".into(),
                len: sol.labels.len(),
                expected: net.node_count(),
            });
        }
        if !violations.is_empty() {
            return NtfCertificate { violations };
        }
        let s = net.source();
        if sol.labels[s] != 1 {
            violations.push(NtfViolation::SourceLabel { label: sol.labels[s].clone() });
        }
        for w in 0..net.node_count() {
            if w == s {
                continue;
            }
            let expected = net
                .in_edges(w)
                .iter()
                .filter(|e| self.sets.active.contains(e))
                .map(|&e| self.rho_of(e, &sol.labels, &sol.flow[e]))
                .min();
            if let Some(expected) = expected {
                if expected != sol.labels[w] {
                    violations.push(NtfViolation::LabelRecursion {
                        node: net.node_id(w).to_string(),
                        label: sol.labels[w].clone(),
                        expected,
                    });
                }
            }
        }
        for &e in &self.sets.active {
            let x = &sol.flow[e];
            let r = self.rho_of(e, &sol.labels, x);
            let head = &sol.labels[net.edge(e).head];
            if x.is_positive() && *head < r {
                violations.push(NtfViolation::UnusedTightness {
                    edge: net.edge(e).id.clone(),
                    flow: x.clone(),
                    head_label: head.clone(),
                    rho: r,
                });
            }
        }
        NtfCertificate { violations }
    }

    /// First certified NTF in the deterministic guess order.
    pub fn find_ntf(&self) -> Result<NtfSolution, NtfError> {
        if self.inflow.is_zero() {
            let flow = vec![Rational::zero(); self.network.edge_count()];
            let labels = self.labels_unchecked(&flow);
            return Ok(NtfSolution { flow, labels });
        }
        let mut found = None;
        self.search(&mut |sol| {
            found = Some(sol);
            false
        });
        found.ok_or(NtfError::Exhausted)
    }

    /// Distinct label vectors over all certified guesses. Refuses instances
    /// with more than `edge_cap` active edges.
    pub fn enumerate_all_labels(&self, edge_cap: usize) -> Result<BTreeSet<Vec<Rational>>, NtfError> {
        if self.sets.active.len() > edge_cap {
            return Err(NtfError::EdgeCapExceeded { active: self.sets.active.len(), cap: edge_cap });
        }
        let mut all = BTreeSet::new();
        self.search(&mut |sol| {
            all.insert(sol.labels);
            true
        });
        if all.is_empty() {
            return Err(NtfError::Exhausted);
        }
        Ok(all)
    }

    /// Depth-first search over guesses; `visit` returns false to stop.
    fn search(&self, visit: &mut dyn FnMut(NtfSolution) -> bool) {
        let order = self.order();
        let mut pos = vec![0; self.network.node_count()];
        order.iter().enumerate().for_each(|(i, &v)| pos[v] = i);
        let mut decisions: Vec<usize> = self.sets.active.iter().copied().collect();
        decisions.sort_by_key(|&e| (pos[self.network.edge(e).head], e));
        let mut guess = Vec::with_capacity(decisions.len());
        self.descend(&decisions, &mut guess, visit);
    }

    fn options(&self, e: usize) -> &'static [Choice] {
        if self.sets.resetting.contains(&e) {
            &[Choice::Slack, Choice::TightFlow]
        } else {
            &[Choice::Slack, Choice::TightLabel, Choice::TightFlow]
        }
    }

    fn descend(
        &self,
        decisions: &[usize],
        guess: &mut Vec<Choice>,
        visit: &mut dyn FnMut(NtfSolution) -> bool,
    ) -> bool {
        let k = guess.len();
        if k == decisions.len() {
            let lp = self.guess_lp(decisions, guess, true);
            if let LpOutcome::Optimal { assignment, .. } = lp.lp.solve().expect("well-formed LP") {
                let sol = lp.solution(self, &assignment);
                if self.is_ntf(&sol).is_valid() {
                    return visit(sol);
                }
            }
            return true;
        }
        let e = decisions[k];
        let head = self.network.edge(e).head;
        let closes_block = decisions.get(k + 1).is_none_or(|&n| self.network.edge(n).head != head);
        for &choice in self.options(e) {
            guess.push(choice);
            let block_ok = !closes_block || {
                // some active in-edge of `head` must attain the minimum
                (0..=k).rev().take_while(|&i| self.network.edge(decisions[i]).head == head)
                    .any(|i| guess[i] != Choice::Slack)
            };
            let keep_going = if !block_ok {
                true
            } else if closes_block && k + 1 < decisions.len() {
                let feasible = self.guess_lp(decisions, guess, false).lp.solve().expect("well-formed LP");
                matches!(feasible, LpOutcome::Infeasible) || self.descend(decisions, guess, visit)
            } else {
                self.descend(decisions, guess, visit)
            };
            guess.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    /// LP for a (partial) guess over the first `guess.len()` decisions.
    fn guess_lp(&self, decisions: &[usize], guess: &[Choice], with_objective: bool) -> GuessLp {
        let net = self.network;
        let mut lp = LinearProgram::new();
        let mut flow_var = vec![None; net.edge_count()];
        let mut slack = vec![false; net.edge_count()];
        for (e, c) in decisions.iter().zip(guess) {
            slack[*e] = *c == Choice::Slack;
        }
        for &e in &self.sets.active {
            if !slack[e] {
                flow_var[e] = Some(lp.add_var(&format!("x:{}", net.edge(e).id), true));
            }
        }
        let mut label_var = vec![None; net.node_count()];
        for (v, slot) in label_var.iter_mut().enumerate() {
            if v != net.source() {
                *slot = Some(lp.add_var(&format!("l:{}", net.node_id(v)), true));
            }
        }
        for v in 0..net.node_count() {
            if v == net.sink() {
                continue;
            }
            let mut row = Vec::new();
            for &e in net.out_edges(v) {
                if let Some(x) = flow_var[e] {
                    row.push((x, Rational::one()));
                }
            }
            for &e in net.in_edges(v) {
                if let Some(x) = flow_var[e] {
                    row.push((x, -Rational::one()));
                }
            }
            let rhs = if v == net.source() { self.inflow.clone() } else { Rational::zero() };
            if row.is_empty() {
                if !rhs.is_zero() {
                    // unsatisfiable: 0 = rhs
                    lp.add_constraint(vec![], Relation::Eq, rhs);
                }
                continue;
            }
            lp.add_constraint(row, Relation::Eq, rhs);
        }
        // label term: variable or the constant 1 at the source
        let term = |v: usize, c: Rational, row: &mut Vec<(usize, Rational)>, rhs: &mut Rational| {
            match label_var[v] {
                Some(var) => row.push((var, c)),
                None => *rhs -= c,
            }
        };
        for (&e, &choice) in decisions.iter().zip(guess) {
            let edge = net.edge(e);
            let (v, w, nu) = (edge.tail, edge.head, &edge.capacity);
            let one = Rational::one;
            let mut row = Vec::new();
            let mut rhs = Rational::zero();
            match choice {
                Choice::Slack if self.sets.resetting.contains(&e) => {
                    term(w, one(), &mut row, &mut rhs);
                    lp.add_constraint(row, Relation::Le, rhs);
                }
                Choice::Slack => {
                    term(w, one(), &mut row, &mut rhs);
                    term(v, -one(), &mut row, &mut rhs);
                    lp.add_constraint(row, Relation::Le, rhs);
                }
                Choice::TightLabel => {
                    term(w, one(), &mut row, &mut rhs);
                    term(v, -one(), &mut row, &mut rhs);
                    lp.add_constraint(row, Relation::Eq, rhs);
                    let mut row = vec![(flow_var[e].expect("tight edge has a flow"), one())];
                    let mut rhs = Rational::zero();
                    term(v, -nu.clone(), &mut row, &mut rhs);
                    lp.add_constraint(row, Relation::Le, rhs);
                }
                Choice::TightFlow => {
                    let x = flow_var[e].expect("tight edge has a flow");
                    term(w, nu.clone(), &mut row, &mut rhs);
                    row.push((x, -one()));
                    lp.add_constraint(row, Relation::Eq, rhs);
                    if !self.sets.resetting.contains(&e) {
                        let mut row = vec![(x, -one())];
                        let mut rhs = Rational::zero();
                        term(v, nu.clone(), &mut row, &mut rhs);
                        lp.add_constraint(row, Relation::Le, rhs);
                    }
                }
            }
        }
        if with_objective {
            lp.set_objective(label_var.iter().flatten().map(|&v| (v, Rational::one())).collect());
        }
        GuessLp { lp, flow_var, label_var }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    /// `l'_w < rho_e` allowed; forces `x'_e = 0`.
    Slack,
    /// `l'_w = l'_v >= x'_e / nu_e` (non-resetting edges only).
    TightLabel,
    /// `l'_w = x'_e / nu_e`, and `>= l'_v` on non-resetting edges.
    TightFlow,
}

struct GuessLp {
    lp: LinearProgram,
    flow_var: Vec<Option<usize>>,
    label_var: Vec<Option<usize>>,
}

impl GuessLp {
    fn solution(&self, inst: &NtfInstance<'_>, x: &[Rational]) -> NtfSolution {
        let flow = self
            .flow_var
            .iter()
            .map(|v| v.map(|i| x[i].clone()).unwrap_or_else(Rational::zero))
            .collect();
        let labels = self
            .label_var
            .iter()
            .enumerate()
            .map(|(v, var)| match var {
                Some(i) => x[*i].clone(),
                None => {
                    debug_assert_eq!(v, inst.network.source());
                    Rational::one()
                }
            })
            .collect();
        NtfSolution { flow, labels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{EdgeSpec, NetworkSpec};
    use crate::rational::q;

    fn parallel() -> Network {
        Network::new(NetworkSpec {
            nodes: vec!["s".into(), "t".into()],
            edges: vec![
                EdgeSpec { id: "e1".into(), from: "s".into(), to: "t".into(), capacity: q("1"), latency: q("1") },
                EdgeSpec { id: "e2".into(), from: "s".into(), to: "t".into(), capacity: q("2"), latency: q("1") },
            ],
            source: "s".into(),
            sink: "t".into(),
        })
        .unwrap()
    }

    fn example() -> Network {
        let e = |id: &str, f: &str, t: &str, l: &str| EdgeSpec {
            id: id.into(),
            from: f.into(),
            to: t.into(),
            capacity: q("1"),
            latency: q(l),
        };
        Network::new(NetworkSpec {
            nodes: vec!["s".into(), "r".into(), "t".into()],
            edges: vec![e("a", "s", "r", "1"), e("b", "r", "t", "1"), e("c", "r", "t", "2")],
            source: "s".into(),
            sink: "t".into(),
        })
        .unwrap()
    }

    fn inst<'a>(net: &'a Network, active: &[&str], resetting: &[&str], u0: &str) -> NtfInstance<'a> {
        NtfInstance::new(net, EdgeSetPair::from_ids(net, active, resetting).unwrap(), q(u0)).unwrap()
    }

    #[test]
    fn labels_of_given_flows() {
        let net = parallel();
        let i = inst(&net, &["e1", "e2"], &[], "3");
        let l = i.compute_labels(&[q("1"), q("2")]).unwrap();
        assert_eq!(l[net.node_index("t").unwrap()], q("1"));

        let ex = example();
        let i = inst(&ex, &["a", "b"], &["a"], "0");
        let l = i.compute_labels(&[q("0"), q("0"), q("0")]).unwrap();
        assert_eq!(ex.by_node_id(&l).into_values().collect::<Vec<_>>(), vec![q("0"), q("1"), q("0")]);

        let i = inst(&ex, &["a", "b"], &[], "0");
        let l = i.compute_labels(&[q("0"), q("0"), q("0")]).unwrap();
        assert!(l.iter().all(|x| *x == 1));
    }

    #[test]
    fn infeasible_flow_is_rejected() {
        let net = parallel();
        let i = inst(&net, &["e1", "e2"], &[], "3");
        assert!(matches!(i.compute_labels(&[q("1"), q("1")]), Err(NtfError::InfeasibleFlow(_))));
        let i = inst(&net, &["e1"], &[], "1");
        assert!(matches!(i.compute_labels(&[q("0"), q("1")]), Err(NtfError::InfeasibleFlow(_))));
    }

    #[test]
    fn certification() {
        let net = parallel();
        let i = inst(&net, &["e1", "e2"], &[], "3");
        let good = NtfSolution { flow: vec![q("1"), q("2")], labels: vec![q("1"), q("1")] };
        assert!(i.is_ntf(&good).is_valid());
        let flow = vec![q("3"), q("0")];
        let labels = i.compute_labels(&flow).unwrap();
        assert_eq!(labels[1], q("1"));
        let cert = i.is_ntf(&NtfSolution { flow, labels });
        assert_eq!(cert.violations.len(), 1);
        assert!(matches!(&cert.violations[0], NtfViolation::UnusedTightness { edge, .. } if edge == "e1"));
        let z = inst(&net, &["e1", "e2"], &[], "0");
        let flow = vec![q("0"), q("0")];
        let labels = z.compute_labels(&flow).unwrap();
        assert!(z.is_ntf(&NtfSolution { flow, labels }).is_valid());
    }

    #[test]
    fn find_parallel() {
        let net = parallel();
        let s = inst(&net, &["e1", "e2"], &[], "3").find_ntf().unwrap();
        assert_eq!(s.flow, vec![q("1"), q("2")]);
        assert_eq!(s.labels[1], q("1"));
        let s = inst(&net, &["e1", "e2"], &[], "4").find_ntf().unwrap();
        assert_eq!(s.flow, vec![q("4/3"), q("8/3")]);
        assert_eq!(s.labels[1], q("4/3"));
    }

    #[test]
    fn find_single_resetting_edge() {
        let net = Network::new(NetworkSpec {
            nodes: vec!["s".into(), "t".into()],
            edges: vec![EdgeSpec { id: "e".into(), from: "s".into(), to: "t".into(), capacity: q("1"), latency: q("1") }],
            source: "s".into(),
            sink: "t".into(),
        })
        .unwrap();
        let s = inst(&net, &["e"], &["e"], "1/2").find_ntf().unwrap();
        assert_eq!(s.flow, vec![q("1/2")]);
        assert_eq!(s.labels[1], q("1/2"));
    }

    #[test]
    fn enumeration_singletons() {
        let net = parallel();
        let all = inst(&net, &["e1", "e2"], &[], "3").enumerate_all_labels(12).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all.iter().next().unwrap()[1], q("1"));
        let ex = example();
        let all = inst(&ex, &["a", "b"], &[], "2").enumerate_all_labels(12).unwrap();
        let only = all.into_iter().collect::<Vec<_>>();
        assert_eq!(only.len(), 1);
        assert_eq!(ex.by_node_id(&only[0]).into_values().collect::<Vec<_>>(), vec![q("2"), q("1"), q("2")]);
        let all = inst(&ex, &["a", "b"], &[], "0").enumerate_all_labels(12).unwrap();
        assert_eq!(all.len(), 1);
        assert!(matches!(
            inst(&ex, &["a", "b"], &[], "1").enumerate_all_labels(1),
            Err(NtfError::EdgeCapExceeded { active: 2, cap: 1 })
        ));
    }

    #[test]
    fn instance_rejects_bad_hypothesis() {
        let ex = example();
        let sets = EdgeSetPair::from_ids(&ex, &["a"], &[]).unwrap();
        assert!(matches!(NtfInstance::new(&ex, sets, q("1")), Err(NtfError::Hypothesis(_))));
        let sets = EdgeSetPair::from_ids(&ex, &["a", "b"], &[]).unwrap();
        assert!(matches!(NtfInstance::new(&ex, sets, q("-1")), Err(NtfError::NegativeInflow(_))));
    }

    #[test]
    fn search_continues_past_closed_blocks() {
        // the solution needs every block after the first to be explored
        let n = crate::testnets::net(
            &["s", "v1", "v2", "v3", "t"],
            &[
                ("e0", "s", "v1", "1/2", "1/2"),
                ("e1", "s", "v2", "3/2", "1/2"),
                ("e2", "s", "v3", "1/2", "2"),
                ("e3", "s", "t", "1/2", "1"),
                ("e4", "v2", "t", "2", "1/2"),
                ("e5", "t", "v3", "3", "3"),
                ("e6", "v3", "s", "3/2", "1/2"),
            ],
        );
        let sets = EdgeSetPair::from_ids(&n, &["e0", "e1", "e2", "e3", "e4"], &["e0", "e2", "e3", "e4"]).unwrap();
        let inst = NtfInstance::new(&n, sets, q("2")).unwrap();
        let sol = inst.find_ntf().unwrap();
        let t = n.node_index("t").unwrap();
        assert_eq!(sol.labels[t], q("4/5"));
        assert_eq!(sol.flow[n.edge_index("e3").unwrap()], q("2/5"));
        assert_eq!(inst.enumerate_all_labels(DEFAULT_ENUMERATION_EDGE_CAP).unwrap().len(), 1);
    }
}
