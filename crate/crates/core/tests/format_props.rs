use dyneq::engine::{solve_equilibrium, EquilibriumTrajectory, SolveConfig};
use dyneq::gen::{self, NetShape};
use dyneq::loading::{load, LoadingResult};
use dyneq::ntf::NtfInstance;
use dyneq::scenario::{read_csv, to_csv, NtfInstanceFile, NtfSolutionFile, PathFlowFile, Scenario};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn emitted_json_reparses(seed in any::<u64>()) {
        let mut r = gen::rng(seed);
        let (net, u, t) = gen::scenario(&mut r, NetShape::default());
        let pf = gen::path_flows(&mut r, &net);

        let scen = Scenario::new(&net, &u, pf.horizon.clone()).with_paths(&net, &pf);
        let back = Scenario::parse(&scen.to_json()).unwrap();
        prop_assert_eq!(&back, &scen);
        prop_assert_eq!(back.inflow().unwrap(), u.clone());
        prop_assert_eq!(back.path_flow_set(&net).unwrap(), pf.clone());

        let traj = solve_equilibrium(&net, &u, &t, &SolveConfig::default()).unwrap();
        let text = serde_json::to_string_pretty(&traj).unwrap();
        let again: EquilibriumTrajectory = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&again, &traj);
        prop_assert_eq!(serde_json::to_string_pretty(&again).unwrap(), text);

        let res = load(&net, &pf).unwrap();
        let again: LoadingResult = serde_json::from_str(&serde_json::to_string(&res).unwrap()).unwrap();
        prop_assert_eq!(again, res);

        let file = PathFlowFile::new(&net, &pf);
        let again = PathFlowFile::parse(&serde_json::to_string(&file).unwrap()).unwrap();
        prop_assert_eq!(again.path_flow_set(&net).unwrap(), pf);

        let sets = gen::edge_sets(&mut r, &net);
        let inst_file = NtfInstanceFile::new(&net, &sets, u.final_value().clone());
        let again = NtfInstanceFile::parse(&serde_json::to_string(&inst_file).unwrap()).unwrap();
        prop_assert_eq!(&again, &inst_file);
        let inst = NtfInstance::new(&net, sets, u.final_value().clone()).unwrap();
        let sol = inst.find_ntf().unwrap();
        let sol_file = NtfSolutionFile::new(&net, &sol);
        let again = NtfSolutionFile::parse(&serde_json::to_string(&sol_file).unwrap()).unwrap();
        prop_assert_eq!(again.solution(&net), sol);
    }

    #[test]
    fn csv_rows_are_sorted_and_cover_breakpoints(seed in any::<u64>()) {
        let (net, u, t) = gen::scenario(&mut gen::rng(seed), NetShape::default());
        let traj = solve_equilibrium(&net, &u, &t, &SolveConfig::default()).unwrap();
        let labels = net.by_node_id(&traj.labels);
        let text = to_csv(&labels, Some(&traj.horizon), false).unwrap();
        let mut keys = Vec::new();
        let mut rdr = text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>());
        for row in rdr.by_ref() {
            keys.push((row[0].clone(), serde_json::from_value::<dyneq::Rational>(row[1].clone().into()).unwrap()));
        }
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(&keys, &sorted);
        let rows = read_csv(&text).unwrap();
        for (id, f) in &labels {
            for (x, y) in f.points() {
                prop_assert!(rows[id].contains(&(x.clone(), y.clone())));
            }
            for (x, y) in &rows[id] {
                prop_assert_eq!(&f.eval(x), y);
            }
        }
        let flows = net.by_edge_id(&traj.edge_inflow);
        let rows = read_csv(&to_csv(&flows, None, true).unwrap()).unwrap();
        for (id, f) in &flows {
            for (x, v) in f.steps() {
                prop_assert!(rows[id].contains(&(x.clone(), v.clone())));
            }
        }
    }
}
