//! Small networks shared by unit tests.

use crate::netmodel::{EdgeSpec, Network, NetworkSpec};
use crate::pwfn::PiecewiseConstantFn;
use crate::rational::q;

/// `(id, from, to, capacity, latency)`; source is the first node, sink the last.
pub fn net(nodes: &[&str], edges: &[(&str, &str, &str, &str, &str)]) -> Network {
    Network::new(NetworkSpec {
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        edges: edges
            .iter()
            .map(|(id, f, t, c, l)| EdgeSpec {
                id: id.to_string(),
                from: f.to_string(),
                to: t.to_string(),
                capacity: q(c),
                latency: q(l),
            })
            .collect(),
        source: nodes[0].to_string(),
        sink: nodes[nodes.len() - 1].to_string(),
    })
    .unwrap()
}

/// s -a-> r, then r -b-> t (latency 1) and r -c-> t (latency 2); all capacities 1.
pub fn example() -> Network {
    net(&["s", "r", "t"], &[("a", "s", "r", "1", "1"), ("b", "r", "t", "1", "1"), ("c", "r", "t", "1", "2")])
}

/// 2 on [0,1), 0 on [1,2), 1 afterwards.
pub fn example_inflow() -> PiecewiseConstantFn {
    steps("0", &[("0", "2"), ("1", "0"), ("2", "1")])
}

pub fn single(capacity: &str, latency: &str) -> Network {
    net(&["s", "t"], &[("e", "s", "t", capacity, latency)])
}

pub fn diamond() -> Network {
    net(
        &["s", "a", "b", "t"],
        &[("sa", "s", "a", "1", "1"), ("sb", "s", "b", "1", "1"), ("at", "a", "t", "1", "1"), ("bt", "b", "t", "1", "1")],
    )
}

pub fn steps(initial: &str, s: &[(&str, &str)]) -> PiecewiseConstantFn {
    PiecewiseConstantFn::from_steps(q(initial), s.iter().map(|(b, v)| (q(b), q(v))).collect()).unwrap()
}
