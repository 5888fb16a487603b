//! File formats: scenarios, thin flow instances, path flows and CSV series.
//!
//! # Scenario grammar (`"format": 1`)
//!
//! ```json
//! {
//!   "format": 1,
//!   "network": {
//!     "nodes": ["s", "r", "t"],
//!     "edges": [{"id": "a", "from": "s", "to": "r", "capacity": "1", "latency": "1"}],
//!     "source": "s",
//!     "sink": "t"
//!   },
//!   "inflow": [{"from": "0", "rate": "2"}, {"from": "1", "rate": "0"}],
//!   "horizon": "5",
//!   "path_flows": [{"id": "p", "path": ["a"], "pieces": [{"from": "0", "rate": "1"}]}]
//! }
//! ```
//!
//! Rationals are strings `"p/q"` or `"p"`; JSON integers are accepted too.
//! A piece list describes a right-continuous step function that is zero
//! before the first `from` and takes `rate` on `[from, next from)`. The
//! `from` values must increase strictly, start at or after 0, and rates are
//! nonnegative. `path_flows` is optional and only used by `load`; a missing
//! path `id` defaults to the edge ids joined by `-`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loading::{LoadError, PathFlowSet};
use crate::netmodel::{EdgeSetPair, NetError, Network, NetworkSpec};
use crate::ntf::{NtfError, NtfInstance, NtfSolution};
use crate::pwfn::{PcBuilder, PiecewiseConstantFn, PiecewiseLinearFn};
use crate::rational::Rational;

pub const FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT})")]
    Version(u32),
    #[error("{what}: {reason}")]
    Pieces { what: String, reason: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Ntf(#[from] NtfError),
    #[error("no path flows given")]
    NoPaths,
    #[error("invalid CSV")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub from: Rational,
    pub rate: Rational,
}

pub fn pieces_to_fn(pieces: &[Piece], what: &str) -> Result<PiecewiseConstantFn, FormatError> {
    let bad = |reason: String| FormatError::Pieces { what: what.to_string(), reason };
    if let Some(p) = pieces.first() {
        if p.from.is_negative() {
            return Err(bad(format!("first piece starts at {} < 0", p.from)));
        }
    }
    let mut b = PcBuilder::new(Rational::zero());
    for (i, p) in pieces.iter().enumerate() {
        if i > 0 && p.from <= pieces[i - 1].from {
            return Err(bad(format!("piece starts {} and {} are not increasing", pieces[i - 1].from, p.from)));
        }
        if p.rate.is_negative() {
            return Err(bad(format!("negative rate {} from {}", p.rate, p.from)));
        }
        b.push(p.from.clone(), p.rate.clone());
    }
    Ok(b.finish())
}

/// Inverse of [`pieces_to_fn`] for functions vanishing before 0.
pub fn fn_to_pieces(f: &PiecewiseConstantFn) -> Vec<Piece> {
    debug_assert!(f.vanishes_before_zero());
    f.steps().iter().map(|(x, v)| Piece { from: x.clone(), rate: v.clone() }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFlowSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub path: Vec<String>,
    pub pieces: Vec<Piece>,
}

impl PathFlowSpec {
    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.path.join("-"))
    }
}

fn build_paths(net: &Network, specs: &[PathFlowSpec], horizon: &Rational) -> Result<PathFlowSet, FormatError> {
    let paths = specs
        .iter()
        .map(|p| {
            let id = p.id();
            let f = pieces_to_fn(&p.pieces, &format!("path {id}"))?;
            Ok((id, p.path.clone(), f))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(PathFlowSet::new(net, paths, horizon.clone())?)
}

fn path_specs(net: &Network, pf: &PathFlowSet) -> Vec<PathFlowSpec> {
    pf.paths
        .iter()
        .map(|p| PathFlowSpec {
            id: Some(p.id.clone()),
            path: p.edges.iter().map(|&e| net.edge(e).id.clone()).collect(),
            pieces: fn_to_pieces(&p.rate),
        })
        .collect()
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT {
        Ok(())
    } else {
        Err(FormatError::Version(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: u32,
    pub network: NetworkSpec,
    #[serde(default)]
    pub inflow: Vec<Piece>,
    pub horizon: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_flows: Option<Vec<PathFlowSpec>>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let s: Scenario = serde_json::from_str(text)?;
        check_version(s.format)?;
        Ok(s)
    }

    pub fn new(net: &Network, inflow: &PiecewiseConstantFn, horizon: Rational) -> Self {
        Scenario {
            format: FORMAT,
            network: net.spec(),
            inflow: fn_to_pieces(inflow),
            horizon,
            path_flows: None,
        }
    }

    /// Path rates must vanish after the scenario horizon.
    pub fn with_paths(mut self, net: &Network, pf: &PathFlowSet) -> Self {
        self.path_flows = Some(path_specs(net, pf));
        self
    }

    pub fn network(&self) -> Result<Network, FormatError> {
        Ok(Network::new(self.network.clone())?)
    }

    pub fn inflow(&self) -> Result<PiecewiseConstantFn, FormatError> {
        pieces_to_fn(&self.inflow, "inflow")
    }

    pub fn path_flow_set(&self, net: &Network) -> Result<PathFlowSet, FormatError> {
        let specs = self.path_flows.as_ref().ok_or(FormatError::NoPaths)?;
        build_paths(net, specs, &self.horizon)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Path flows on their own, as written by `decompose`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFlowFile {
    pub format: u32,
    pub horizon: Rational,
    pub path_flows: Vec<PathFlowSpec>,
}

impl PathFlowFile {
    pub fn new(net: &Network, pf: &PathFlowSet) -> Self {
        PathFlowFile { format: FORMAT, horizon: pf.horizon.clone(), path_flows: path_specs(net, pf) }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: PathFlowFile = serde_json::from_str(text)?;
        check_version(f.format)?;
        Ok(f)
    }

    pub fn path_flow_set(&self, net: &Network) -> Result<PathFlowSet, FormatError> {
        build_paths(net, &self.path_flows, &self.horizon)
    }
}

/// `(E', E*, u0)` on a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NtfInstanceFile {
    pub format: u32,
    pub network: NetworkSpec,
    pub active: Vec<String>,
    #[serde(default)]
    pub resetting: Vec<String>,
    pub inflow: Rational,
}

impl NtfInstanceFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: NtfInstanceFile = serde_json::from_str(text)?;
        check_version(f.format)?;
        Ok(f)
    }

    pub fn new(net: &Network, sets: &EdgeSetPair, inflow: Rational) -> Self {
        NtfInstanceFile {
            format: FORMAT,
            network: net.spec(),
            active: sets.active_ids(net),
            resetting: sets.resetting_ids(net),
            inflow,
        }
    }

    pub fn network(&self) -> Result<Network, FormatError> {
        Ok(Network::new(self.network.clone())?)
    }

    pub fn instance<'a>(&self, net: &'a Network) -> Result<NtfInstance<'a>, FormatError> {
        let sets = EdgeSetPair::from_ids(net, &self.active, &self.resetting)?;
        Ok(NtfInstance::new(net, sets, self.inflow.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NtfSolutionFile {
    pub format: u32,
    /// `x'` per edge id.
    pub flow: BTreeMap<String, Rational>,
    /// `l'` per node id.
    pub labels: BTreeMap<String, Rational>,
}

impl NtfSolutionFile {
    pub fn new(net: &Network, sol: &NtfSolution) -> Self {
        NtfSolutionFile { format: FORMAT, flow: net.by_edge_id(&sol.flow), labels: net.by_node_id(&sol.labels) }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: NtfSolutionFile = serde_json::from_str(text)?;
        check_version(f.format)?;
        Ok(f)
    }

    /// Missing entries are zero.
    pub fn solution(&self, net: &Network) -> NtfSolution {
        let get = |m: &BTreeMap<String, Rational>, k: &str| m.get(k).cloned().unwrap_or_else(Rational::zero);
        NtfSolution {
            flow: net.edges().iter().map(|e| get(&self.flow, &e.id)).collect(),
            labels: net.nodes().iter().map(|v| get(&self.labels, v)).collect(),
        }
    }
}

/// One plot series: `(theta, value)` rows.
pub trait Series {
    fn rows(&self, until: Option<&Rational>) -> Vec<(Rational, Rational)>;
}

impl Series for PiecewiseConstantFn {
    /// A row per step start; a constant function gets a row at 0.
    fn rows(&self, _until: Option<&Rational>) -> Vec<(Rational, Rational)> {
        if self.steps().is_empty() {
            return vec![(Rational::zero(), self.initial().clone())];
        }
        self.steps().to_vec()
    }
}

impl Series for PiecewiseLinearFn {
    /// A row per breakpoint, plus the value at `until` when it lies beyond.
    fn rows(&self, until: Option<&Rational>) -> Vec<(Rational, Rational)> {
        let mut out = self.points().to_vec();
        if let Some(u) = until {
            if out.last().is_none_or(|(x, _)| x < u) {
                out.push((u.clone(), self.eval(u)));
            }
        }
        out
    }
}

/// CSV with header `id,theta,value`, rows sorted by `(id, theta)`. With
/// `float` a lossy decimal column `value_float` is appended.
pub fn to_csv<S: Series>(series: &BTreeMap<String, S>, until: Option<&Rational>, float: bool) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if float {
        w.write_record(["id", "theta", "value", "value_float"])?;
    } else {
        w.write_record(["id", "theta", "value"])?;
    }
    for (id, s) in series {
        for (x, y) in s.rows(until) {
            let (x, ys) = (x.to_string(), y.to_string());
            if float {
                w.write_record([id.as_str(), &x, &ys, &format!("{}", y.to_f64())])?;
            } else {
                w.write_record([id.as_str(), &x, &ys])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("utf8"))
}

/// Reads a CSV written by [`to_csv`] back into exact rows per id.
pub fn read_csv(text: &str) -> Result<BTreeMap<String, Vec<(Rational, Rational)>>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out: BTreeMap<String, Vec<(Rational, Rational)>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Rational, FormatError> {
            let s = rec.get(i).unwrap_or("");
            serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(FormatError::Json)
        };
        out.entry(rec.get(0).unwrap_or("").to_string()).or_default().push((parse(1)?, parse(2)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::testnets::{example, example_inflow};

    fn example_json() -> String {
        Scenario::new(&example(), &example_inflow(), q("5")).to_json()
    }

    #[test]
    fn scenario_round_trip() {
        let text = example_json();
        let s = Scenario::parse(&text).unwrap();
        assert_eq!(s.inflow().unwrap(), example_inflow());
        assert_eq!(s.network().unwrap(), example());
        assert_eq!(Scenario::parse(&s.to_json()).unwrap(), s);
        assert!(matches!(s.path_flow_set(&example()), Err(FormatError::NoPaths)));
    }

    #[test]
    fn rejects_bad_scenarios() {
        let base: serde_json::Value = serde_json::from_str(&example_json()).unwrap();
        let with = |k: &str, v: serde_json::Value| {
            let mut b = base.clone();
            b[k] = v;
            b.to_string()
        };
        assert!(matches!(Scenario::parse(&with("format", 2.into())), Err(FormatError::Version(2))));
        assert!(matches!(Scenario::parse(&with("horizon", "1/0".into())), Err(FormatError::Json(_))));
        let dec = serde_json::json!([{"from": "1", "rate": "1"}, {"from": "1", "rate": "2"}]);
        assert!(Scenario::parse(&with("inflow", dec)).unwrap().inflow().is_err());
        let neg = serde_json::json!([{"from": "-1", "rate": "1"}]);
        assert!(Scenario::parse(&with("inflow", neg)).unwrap().inflow().is_err());
        let neg_rate = serde_json::json!([{"from": "0", "rate": "-1"}]);
        assert!(Scenario::parse(&with("inflow", neg_rate)).unwrap().inflow().is_err());
        assert!(Scenario::parse(&with("extra", 1.into())).is_err());
    }

    #[test]
    fn path_flows_default_ids() {
        let mut v: serde_json::Value = serde_json::from_str(&example_json()).unwrap();
        v["path_flows"] = serde_json::json!([{"path": ["a", "b"], "pieces": [{"from": "0", "rate": "1"}, {"from": "2", "rate": "0"}]}]);
        let s = Scenario::parse(&v.to_string()).unwrap();
        let pf = s.path_flow_set(&example()).unwrap();
        assert_eq!(pf.paths[0].id, "a-b");
        let file = PathFlowFile::new(&example(), &pf);
        let back = PathFlowFile::parse(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(back.path_flow_set(&example()).unwrap(), pf);
    }

    #[test]
    fn csv_rows_sorted_and_exact() {
        let mut m = BTreeMap::new();
        m.insert("b".to_string(), PiecewiseLinearFn::from_points(vec![(q("0"), q("1")), (q("1"), q("3"))], q("1"), q("0")).unwrap());
        m.insert("a,x".to_string(), PiecewiseLinearFn::identity());
        let text = to_csv(&m, Some(&q("2")), false).unwrap();
        assert_eq!(text, "id,theta,value\n\"a,x\",0,0\n\"a,x\",2,2\nb,0,1\nb,1,3\nb,2,3\n");
        let rows = read_csv(&text).unwrap();
        assert_eq!(rows["b"], vec![(q("0"), q("1")), (q("1"), q("3")), (q("2"), q("3"))]);
        let lossy = to_csv(&m, None, true).unwrap();
        assert!(lossy.starts_with("id,theta,value,value_float\n"));
        assert!(lossy.contains("b,1,3,3\n"));
        let mut c = BTreeMap::new();
        c.insert("f".to_string(), example_inflow());
        assert_eq!(to_csv(&c, None, false).unwrap(), "id,theta,value\nf,0,2\nf,1,0\nf,2,1\n");
    }
}
