use dyneq::exactlp::{LinearProgram, LpOutcome, Relation};
use dyneq::Rational;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Packing {
    a: Vec<Vec<i64>>,
    b: Vec<i64>,
    c: Vec<i64>,
}

/// `max c.x, A x <= b, x >= 0` with `A >= 0` having a positive entry in
/// every column, so the program is feasible (at 0) and bounded.
fn packing() -> impl Strategy<Value = Packing> {
    (1..=4usize, 1..=4usize).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(proptest::collection::vec(0..=4i64, n), m),
            proptest::collection::vec(1..=12i64, m),
            proptest::collection::vec(-3..=5i64, n),
        )
            .prop_map(|(mut a, b, c)| {
                let m = a.len();
                for j in 0..a[0].len() {
                    if a.iter().all(|row| row[j] == 0) {
                        a[j % m][j] = 1;
                    }
                }
                Packing { a, b, c }
            })
    })
}

fn r(x: i64) -> Rational {
    Rational::from_integer(x)
}

fn primal(p: &Packing) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let n = p.c.len();
    let vars: Vec<usize> = (0..n).map(|j| lp.add_var(&format!("x{j}"), true)).collect();
    lp.set_objective(vars.iter().zip(&p.c).map(|(&v, &c)| (v, r(c))).collect());
    for (row, &b) in p.a.iter().zip(&p.b) {
        lp.add_constraint(vars.iter().zip(row).map(|(&v, &a)| (v, r(a))).collect(), Relation::Le, r(b));
    }
    lp
}

/// `min b.y, A^T y >= c, y >= 0`, written as a maximization of `-b.y`.
fn dual(p: &Packing) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let ys: Vec<usize> = (0..p.b.len()).map(|i| lp.add_var(&format!("y{i}"), true)).collect();
    lp.set_objective(ys.iter().zip(&p.b).map(|(&y, &b)| (y, r(-b))).collect());
    for (j, &c) in p.c.iter().enumerate() {
        lp.add_constraint(ys.iter().zip(&p.a).map(|(&y, row)| (y, r(row[j]))).collect(), Relation::Ge, r(c));
    }
    lp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimum_is_feasible_and_dominates_samples(p in packing(), samples in proptest::collection::vec(proptest::collection::vec(0..=12i64, 4), 200)) {
        let lp = primal(&p);
        let LpOutcome::Optimal { value, assignment } = lp.solve().unwrap() else {
            return Err(TestCaseError::fail("packing program must be optimal"));
        };
        prop_assert!(lp.is_feasible_point(&assignment));
        prop_assert_eq!(lp.objective_value(&assignment), value.clone());
        for s in samples {
            let x: Vec<Rational> = s[..p.c.len()].iter().map(|&k| Rational::frac(k, 2)).collect();
            if lp.is_feasible_point(&x) {
                prop_assert!(lp.objective_value(&x) <= value);
            }
        }
    }

    #[test]
    fn strong_duality(p in packing()) {
        let LpOutcome::Optimal { value: pv, .. } = primal(&p).solve().unwrap() else {
            return Err(TestCaseError::fail("primal optimal"));
        };
        let d = dual(&p);
        let LpOutcome::Optimal { value: dv, assignment } = d.solve().unwrap() else {
            return Err(TestCaseError::fail("dual optimal"));
        };
        prop_assert!(d.is_feasible_point(&assignment));
        prop_assert_eq!(pv, -dv);
    }

    #[test]
    fn equality_rows_and_free_variables(p in packing(), shift in -5..=5i64) {
        // tie a free variable to x0: z = x0 - shift
        let mut lp = primal(&p);
        let z = lp.add_var("z", false);
        lp.add_constraint(vec![(0, r(1)), (z, r(-1))], Relation::Eq, r(shift));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, assignment } => {
                prop_assert!(lp.is_feasible_point(&assignment));
                prop_assert_eq!(&assignment[0] - &assignment[z], r(shift));
                prop_assert_eq!(lp.objective_value(&assignment), value);
            }
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        }
    }

    #[test]
    fn infeasibility_is_detected(p in packing()) {
        let mut lp = primal(&p);
        let total: i64 = p.b.iter().sum();
        // each variable is at most max b, so the sum cannot reach this
        let n = p.c.len();
        lp.add_constraint((0..n).map(|j| (j, r(1))).collect(), Relation::Ge, r(total * 100 + 1));
        prop_assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
    }
}
