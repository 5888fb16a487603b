//! Python bindings. Every entry point takes and returns the JSON documents the
//! command-line tool reads and writes, so results round-trip between the two.

#![allow(clippy::result_large_err)]

use std::error::Error;

use dyneq::engine::{solve_equilibrium, EquilibriumTrajectory, SolveConfig};
use dyneq::loading::{load as load_paths, LoadingResult};
use dyneq::scenario::{NtfInstanceFile, NtfSolutionFile, PathFlowFile, Scenario};
use dyneq::verify::{check_capacity_operation, check_equilibrium, check_feasible, cross_check};
use dyneq::Rational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl Error) -> PyErr {
    let mut msg = e.to_string();
    let mut src = e.source();
    while let Some(s) = src {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        src = s.source();
    }
    PyValueError::new_err(msg)
}

fn dump<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

/// Solves for the dynamic equilibrium of a scenario document and returns the
/// trajectory as JSON. `horizon` overrides the scenario's own, e.g. `"7/2"`.
#[pyfunction]
#[pyo3(signature = (scenario, horizon=None, phase_cap=dyneq::engine::DEFAULT_PHASE_CAP))]
fn solve(py: Python<'_>, scenario: &str, horizon: Option<&str>, phase_cap: usize) -> PyResult<String> {
    let s = Scenario::parse(scenario).map_err(err)?;
    let net = s.network().map_err(err)?;
    let u = s.inflow().map_err(err)?;
    let horizon = match horizon {
        Some(h) => h.parse::<Rational>().map_err(|e| PyValueError::new_err(format!("horizon: {e}")))?,
        None => s.horizon.clone(),
    };
    let t = py.detach(|| solve_equilibrium(&net, &u, &horizon, &SolveConfig { phase_cap })).map_err(err)?;
    dump(&t)
}

/// Loads path flows onto the scenario's network. Without `paths` the path
/// flows embedded in the scenario are used.
#[pyfunction]
#[pyo3(signature = (scenario, paths=None))]
fn load(py: Python<'_>, scenario: &str, paths: Option<&str>) -> PyResult<String> {
    let s = Scenario::parse(scenario).map_err(err)?;
    let net = s.network().map_err(err)?;
    let pf = match paths {
        Some(p) => PathFlowFile::parse(p).and_then(|f| f.path_flow_set(&net)).map_err(err)?,
        None => s.path_flow_set(&net).map_err(err)?,
    };
    let res = py.detach(|| load_paths(&net, &pf)).map_err(err)?;
    dump(&res)
}

/// Checks a trajectory or loading document. Returns the list of violations as
/// JSON; an empty list means the document passed.
#[pyfunction]
#[pyo3(signature = (document, cross=true))]
fn verify(py: Python<'_>, document: &str, cross: bool) -> PyResult<String> {
    let value: serde_json::Value = serde_json::from_str(document).map_err(err)?;
    py.detach(|| {
        if value.get("phases").is_some() {
            let t: EquilibriumTrajectory = serde_json::from_value(value).map_err(err)?;
            let mut v = check_feasible(&t);
            v.extend(check_equilibrium(&t));
            if cross {
                let report = cross_check(&t).map_err(err)?;
                if let Some(m) = report.mismatch {
                    return Err(PyValueError::new_err(format!(
                        "loading disagrees with the labels at node {} theta {}",
                        m.node, m.theta
                    )));
                }
            }
            dump(&v)
        } else if value.get("sweeps").is_some() {
            let r: LoadingResult = serde_json::from_value(value).map_err(err)?;
            let mut v = check_feasible(&r);
            v.extend(check_capacity_operation(&r));
            dump(&v)
        } else {
            Err(PyValueError::new_err("neither a trajectory nor a loading result"))
        }
    })
}

/// Finds a normalized thin flow for an instance document.
#[pyfunction]
fn ntf(py: Python<'_>, instance: &str) -> PyResult<String> {
    let file = NtfInstanceFile::parse(instance).map_err(err)?;
    let net = file.network().map_err(err)?;
    let inst = file.instance(&net).map_err(err)?;
    let sol = py.detach(|| inst.find_ntf()).map_err(err)?;
    dump(&NtfSolutionFile::new(&net, &sol))
}

#[pymodule]
fn pydyneq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(ntf, m)?)?;
    Ok(())
}
