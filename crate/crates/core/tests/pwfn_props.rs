use dyneq::pwfn::{compose_monotone, max_pointwise, min_pointwise};
use dyneq::{PiecewiseConstantFn, PiecewiseLinearFn, Rational};
use proptest::prelude::*;

fn rat(lo: i64, hi: i64) -> impl Strategy<Value = Rational> {
    (lo..=hi, 1..=6i64).prop_map(|(p, q)| Rational::frac(p, q))
}

fn increasing(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::btree_set((-40..=40i64).prop_map(|k| Rational::frac(k, 4)), 1..=len)
        .prop_map(|s| s.into_iter().collect())
}

fn pc() -> impl Strategy<Value = PiecewiseConstantFn> {
    (rat(-6, 6), increasing(5)).prop_flat_map(|(init, xs)| {
        let n = xs.len();
        proptest::collection::vec(rat(-6, 6), n).prop_map(move |vs| {
            PiecewiseConstantFn::from_steps(init.clone(), xs.iter().cloned().zip(vs).collect()).unwrap()
        })
    })
}

fn pl() -> impl Strategy<Value = PiecewiseLinearFn> {
    (increasing(5), rat(-4, 4), rat(-4, 4)).prop_flat_map(|(xs, sb, sa)| {
        let n = xs.len();
        proptest::collection::vec(rat(-10, 10), n).prop_map(move |ys| {
            PiecewiseLinearFn::from_points(xs.iter().cloned().zip(ys).collect(), sb.clone(), sa.clone()).unwrap()
        })
    })
}

/// Nondecreasing, with nonnegative end slopes.
fn monotone_pl() -> impl Strategy<Value = PiecewiseLinearFn> {
    (increasing(5), rat(0, 4), rat(0, 4), rat(-5, 5)).prop_flat_map(|(xs, sb, sa, y0)| {
        let n = xs.len();
        proptest::collection::vec(rat(0, 4), n).prop_map(move |incs| {
            let mut y = y0.clone();
            let pts = xs
                .iter()
                .zip(incs)
                .map(|(x, d)| {
                    y = &y + d;
                    (x.clone(), y.clone())
                })
                .collect();
            PiecewiseLinearFn::from_points(pts, sb.clone(), sa.clone()).unwrap()
        })
    })
}

fn canonical_pl(f: &PiecewiseLinearFn) -> bool {
    let p = f.points();
    let strictly = p.windows(2).all(|w| w[0].0 < w[1].0);
    let mut slopes = vec![f.slope_before().clone()];
    slopes.extend(p.windows(2).map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)));
    slopes.push(f.slope_after().clone());
    let kinks = slopes.windows(2).all(|w| w[0] != w[1]);
    // a kink-free function is a single anchor point
    strictly && (kinks || (p.len() == 1 && slopes[0] == slopes[1]))
}

fn canonical_pc(f: &PiecewiseConstantFn) -> bool {
    let mut prev = f.initial();
    let s = f.steps();
    s.windows(2).all(|w| w[0].0 < w[1].0)
        && s.iter().all(|(_, v)| {
            let changed = v != prev;
            prev = v;
            changed
        })
}

fn probes() -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-500..=500i64, 1..=24i64).prop_map(|(p, q)| Rational::frac(p, q)), 1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_telescopes(f in pc()) {
        let big = f.integrate();
        prop_assert_eq!(big.eval(&Rational::zero()), Rational::zero());
        let mut xs: Vec<Rational> = f.breakpoints().cloned().collect();
        xs.push(Rational::zero());
        xs.sort();
        xs.dedup();
        for w in xs.windows(2) {
            let sum = f.value_at(&w[0]) * &(&w[1] - &w[0]);
            prop_assert_eq!(big.eval(&w[1]) - big.eval(&w[0]), sum);
        }
        prop_assert!(canonical_pl(&big));
    }

    #[test]
    fn composition_preserves_monotonicity(f in monotone_pl(), g in monotone_pl(), xs in probes()) {
        let h = compose_monotone(&f, &g).unwrap();
        prop_assert!(h.is_monotone());
        prop_assert!(canonical_pl(&h));
        for x in xs.iter().take(50) {
            prop_assert_eq!(h.eval(x), f.eval(&g.eval(x)));
        }
    }

    #[test]
    fn general_composition_evaluates(f in pl(), g in monotone_pl(), xs in probes()) {
        let h = f.compose(&g).unwrap();
        prop_assert!(canonical_pl(&h));
        for x in xs.iter().take(50) {
            prop_assert_eq!(h.eval(x), f.eval(&g.eval(x)));
        }
    }

    #[test]
    fn pointwise_min_and_max(fs in proptest::collection::vec(pl(), 1..4), xs in probes()) {
        let lo = min_pointwise(&fs).unwrap();
        let hi = max_pointwise(&fs).unwrap();
        prop_assert!(canonical_pl(&lo) && canonical_pl(&hi));
        for x in &xs {
            let vals: Vec<Rational> = fs.iter().map(|f| f.eval(x)).collect();
            prop_assert_eq!(lo.eval(x), vals.iter().min().unwrap().clone());
            prop_assert_eq!(hi.eval(x), vals.iter().max().unwrap().clone());
        }
    }

    #[test]
    fn arithmetic_is_canonical_and_pointwise(f in pl(), g in pl(), a in pc(), b in pc(), c in rat(-3, 3), xs in probes()) {
        let (s, d, k) = (f.add(&g), f.sub(&g), f.scale(&c));
        let (ps, pd) = (a.add(&b), a.sub(&b));
        prop_assert!(canonical_pl(&s) && canonical_pl(&d) && canonical_pl(&k));
        prop_assert!(canonical_pc(&ps) && canonical_pc(&pd) && canonical_pc(&a.scale(&c)));
        for x in xs.iter().take(100) {
            prop_assert_eq!(s.eval(x), f.eval(x) + g.eval(x));
            prop_assert_eq!(d.eval(x), f.eval(x) - g.eval(x));
            prop_assert_eq!(k.eval(x), &c * &f.eval(x));
            prop_assert_eq!(ps.eval(x), a.eval(x) + b.eval(x));
            prop_assert_eq!(pd.eval(x), a.eval(x) - b.eval(x));
        }
    }

    #[test]
    fn derivative_inverts_integral(f in pc()) {
        prop_assert_eq!(f.integrate().derivative(), f);
    }

    #[test]
    fn first_reach_is_earliest(f in monotone_pl(), start in rat(-10, 10), level in rat(-10, 20)) {
        match f.first_reach(&start, &level) {
            Some(x) => {
                prop_assert!(x >= start);
                prop_assert!(f.eval(&x) >= level);
                if x > start {
                    prop_assert_eq!(f.eval(&x), level.clone());
                }
            }
            None => {
                // never reaches: bounded above below the level
                prop_assert!(!f.slope_after().is_positive());
                let last = f.points().last().unwrap();
                prop_assert!(f.eval(&last.0.clone().max(start)) < level);
            }
        }
    }

    #[test]
    fn serde_round_trip(f in pl(), g in pc()) {
        let f2: PiecewiseLinearFn = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        let g2: PiecewiseConstantFn = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(f2, f);
        prop_assert_eq!(g2, g);
    }
}
