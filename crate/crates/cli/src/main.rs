//! `dyneq`: solve, load and verify flows over time from JSON scenario files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dyneq::engine::{solve_equilibrium, EquilibriumTrajectory, SolveConfig, DEFAULT_PHASE_CAP};
use dyneq::gen::{self, NetShape};
use dyneq::loading::{load, node_labels, path_times, LoadingResult};
use dyneq::ntf::DEFAULT_ENUMERATION_EDGE_CAP;
use dyneq::scenario::{to_csv, NtfInstanceFile, NtfSolutionFile, PathFlowFile, Scenario, Series};
use dyneq::verify::{check_capacity_operation, check_equilibrium, check_feasible, cross_check, trajectory_path_flows, CrossCheckReport, Violation};
use dyneq::{PiecewiseConstantFn, PiecewiseLinearFn, Rational};

#[derive(Parser)]
#[command(name = "dyneq", version, about = "Dynamic equilibria in fluid queueing networks, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the dynamic equilibrium of a scenario.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario horizon.
        #[arg(long)]
        horizon: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_PHASE_CAP)]
        phase_cap: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Add a lossy decimal column to CSV files.
        #[arg(long)]
        float: bool,
    },
    /// Find a normalized thin flow for `(E', E*, u0)`.
    Ntf {
        #[arg(long)]
        instance: PathBuf,
        /// Enumerate every thin flow label vector instead.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_EDGE_CAP)]
        ntf_edge_cap: usize,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Network loading of the scenario's path flows.
    Load {
        #[arg(long)]
        scenario: PathBuf,
        /// Path-flow file; replaces the scenario's `path_flows`.
        #[arg(long)]
        paths: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        float: bool,
    },
    /// Check trajectory or loading files; exit status 0 iff no violations.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Skip re-deriving trajectory labels by loading its path decomposition.
        #[arg(long)]
        no_cross_check: bool,
        /// Report file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Path decomposition of a trajectory, as a path-flow file.
    Decompose {
        #[arg(long)]
        trajectory: PathBuf,
        /// Cut the path flows here instead of at the trajectory's horizon.
        #[arg(long)]
        horizon: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GenKind::Scenario)]
        kind: GenKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Single-OD scenario for `solve`.
    Scenario,
    /// Scenario with path flows for `load`.
    Paths,
    /// Thin flow instance for `ntf`.
    Ntf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => write(p, body),
        None => match writeln!(std::io::stdout().lock(), "{body}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing to stdout"),
        },
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn scenario(path: &Path) -> Result<Scenario> {
    Scenario::parse(&read(path)?).with_context(|| format!("parsing scenario {}", path.display()))
}

struct Dir<'a> {
    path: &'a Path,
    float: bool,
}

impl Dir<'_> {
    fn create(path: &Path, float: bool) -> Result<Dir<'_>> {
        fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Dir { path, float })
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        write(&self.path.join(name), &json(v))
    }

    fn csv<S: Series>(&self, name: &str, series: &BTreeMap<String, S>, until: Option<&Rational>) -> Result<()> {
        write(&self.path.join(name), &to_csv(series, until, self.float)?)
    }
}

fn edge_flows(ids: impl Iterator<Item = String>, fin: &[PiecewiseConstantFn], fout: &[PiecewiseConstantFn]) -> BTreeMap<String, PiecewiseConstantFn> {
    let mut m = BTreeMap::new();
    for (i, id) in ids.enumerate() {
        m.insert(format!("{id}:in"), fin[i].clone());
        m.insert(format!("{id}:out"), fout[i].clone());
    }
    m
}

fn cmd_solve(path: &Path, horizon: Option<Rational>, phase_cap: usize, out: &Path, float: bool) -> Result<()> {
    let s = scenario(path)?;
    let net = s.network()?;
    let u = s.inflow()?;
    let horizon = horizon.unwrap_or(s.horizon.clone());
    let t = solve_equilibrium(&net, &u, &horizon, &SolveConfig { phase_cap })?;
    let dir = Dir::create(out, float)?;
    dir.json("trajectory.json", &t)?;
    dir.json("phases.json", &t.phases)?;
    dir.csv("labels.csv", &net.by_node_id(&t.labels), Some(&horizon))?;
    dir.csv("queues.csv", &net.by_edge_id(&t.queues), Some(&horizon))?;
    let ids = net.edges().iter().map(|e| e.id.clone());
    dir.csv("flows.csv", &edge_flows(ids, &t.edge_inflow, &t.edge_outflow), None)?;
    let end = match &t.frontier {
        Some(f) => format!("stopped at {f}"),
        None => "steady state".to_string(),
    };
    eprintln!("{} phases, {end}; wrote {}", t.phases.len(), out.display());
    Ok(())
}

fn cmd_ntf(path: &Path, all: bool, cap: usize, out: Option<&Path>) -> Result<()> {
    let file = NtfInstanceFile::parse(&read(path)?).with_context(|| format!("parsing instance {}", path.display()))?;
    let net = file.network()?;
    let inst = file.instance(&net)?;
    let body = if all {
        let labels = inst.enumerate_all_labels(cap)?;
        let rows: Vec<BTreeMap<String, Rational>> = labels.iter().map(|l| net.by_node_id(l)).collect();
        json(&rows)
    } else {
        json(&NtfSolutionFile::new(&net, &inst.find_ntf()?))
    };
    emit(out, body.trim_end())
}

fn cmd_load(path: &Path, paths: Option<&Path>, out: &Path, float: bool) -> Result<()> {
    let s = scenario(path)?;
    let net = s.network()?;
    let pf = match paths {
        Some(p) => PathFlowFile::parse(&read(p)?)
            .with_context(|| format!("parsing path flows {}", p.display()))?
            .path_flow_set(&net)?,
        None => s.path_flow_set(&net)?,
    };
    let res = load(&net, &pf)?;
    let times = path_times(&res, &pf);
    let dir = Dir::create(out, float)?;
    let until = Some(&pf.horizon);
    dir.json("loading.json", &res)?;
    let ids = net.edges().iter().map(|e| e.id.clone());
    dir.csv("flows.csv", &edge_flows(ids, &res.edge_inflow, &res.edge_outflow), None)?;
    dir.csv("queues.csv", &net.by_edge_id(&res.queues), until)?;
    dir.csv("exit_times.csv", &net.by_edge_id(&res.exit_times), until)?;
    let per_path: BTreeMap<String, PiecewiseLinearFn> =
        pf.paths.iter().zip(&times.paths).map(|(p, t)| (p.id.clone(), t.clone())).collect();
    dir.csv("path_times.csv", &per_path, until)?;
    let labels: BTreeMap<String, PiecewiseLinearFn> = node_labels(&net, &res.exit_times, net.source())
        .into_iter()
        .enumerate()
        .filter_map(|(v, l)| l.map(|l| (net.node_id(v).to_string(), l)))
        .collect();
    dir.csv("node_labels.csv", &labels, until)?;
    eprintln!("{} paths loaded in {} sweeps; wrote {}", pf.paths.len(), res.sweeps, out.display());
    Ok(())
}

#[derive(Serialize)]
struct FileReport {
    file: String,
    kind: &'static str,
    violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<CrossCheckReport>,
}

impl FileReport {
    fn ok(&self) -> bool {
        self.violations.is_empty() && self.cross_check.as_ref().is_none_or(CrossCheckReport::agrees)
    }
}

fn verify_file(path: &Path, cross: bool) -> Result<FileReport> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let file = path.display().to_string();
    if value.get("phases").is_some() {
        let t: EquilibriumTrajectory = serde_json::from_value(value).with_context(|| format!("parsing trajectory {file}"))?;
        let mut violations = check_feasible(&t);
        violations.extend(check_equilibrium(&t));
        let cross_check = if cross { Some(cross_check(&t)?) } else { None };
        Ok(FileReport { file, kind: "trajectory", violations, cross_check })
    } else if value.get("sweeps").is_some() {
        let r: LoadingResult = serde_json::from_value(value).with_context(|| format!("parsing loading {file}"))?;
        let mut violations = check_feasible(&r);
        violations.extend(check_capacity_operation(&r));
        Ok(FileReport { file, kind: "loading", violations, cross_check: None })
    } else {
        bail!("{file} is neither a trajectory nor a loading result")
    }
}

fn cmd_verify(files: &[PathBuf], cross: bool, out: Option<&Path>) -> Result<bool> {
    let reports = files.iter().map(|f| verify_file(f, cross)).collect::<Result<Vec<_>>>()?;
    for r in &reports {
        for v in &r.violations {
            eprintln!("{}: {v}", r.file);
        }
        if let Some(m) = r.cross_check.as_ref().and_then(|c| c.mismatch.as_ref()) {
            eprintln!("{}: loading disagrees at node {} theta {}", r.file, m.node, m.theta);
        }
    }
    emit(out, json(&reports).trim_end())?;
    Ok(reports.iter().all(FileReport::ok))
}

fn cmd_decompose(path: &Path, horizon: Option<Rational>, out: Option<&Path>) -> Result<()> {
    let t: EquilibriumTrajectory =
        serde_json::from_str(&read(path)?).with_context(|| format!("parsing trajectory {}", path.display()))?;
    let cut = horizon.unwrap_or_else(|| t.cut().max(t.horizon.clone()));
    let pf = trajectory_path_flows(&t, &cut)?;
    emit(out, json(&PathFlowFile::new(&t.network, &pf)).trim_end())
}

fn cmd_gen(seed: u64, kind: GenKind, out: Option<&Path>) -> Result<()> {
    let mut r = gen::rng(seed);
    let body = match kind {
        GenKind::Scenario => {
            let (net, u, t) = gen::scenario(&mut r, NetShape::default());
            Scenario::new(&net, &u, t).to_json()
        }
        GenKind::Paths => {
            let net = gen::network(&mut r, NetShape::default());
            let pf = gen::path_flows(&mut r, &net);
            Scenario::new(&net, &PiecewiseConstantFn::zero(), pf.horizon.clone()).with_paths(&net, &pf).to_json()
        }
        GenKind::Ntf => {
            let (net, sets, u0) = gen::ntf_instance(&mut r, NetShape::default());
            json(&NtfInstanceFile::new(&net, &sets, u0)).trim_end().to_string()
        }
    };
    emit(out, &body)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { scenario, horizon, phase_cap, out, float } => cmd_solve(&scenario, horizon, phase_cap, &out, float)?,
        Command::Ntf { instance, all, ntf_edge_cap, out } => cmd_ntf(&instance, all, ntf_edge_cap, out.as_deref())?,
        Command::Load { scenario, paths, out, float } => cmd_load(&scenario, paths.as_deref(), &out, float)?,
        Command::Verify { files, no_cross_check, out } => return cmd_verify(&files, !no_cross_check, out.as_deref()),
        Command::Decompose { trajectory, horizon, out } => cmd_decompose(&trajectory, horizon, out.as_deref())?,
        Command::Gen { seed, kind, out } => cmd_gen(seed, kind, out.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
