mod common;

use defgeo::classify::{classify, ClassifyMode, ClassifyOptions};
use defgeo::closure::{decide_equivalence, def_family, fingerprint, Equivalence, Fingerprint};
use defgeo::eval::solution_set;
use defgeo::geometry::{algebraic_family, equation_solution};
use defgeo::relation::tuple_count;
use defgeo::syntax::{substitute, Var};
use defgeo::{ClosureMode, Limits, MinorMap, Relation};
use proptest::prelude::*;
use rand::Rng;

fn mode_of(boolean: bool) -> ClosureMode {
    if boolean {
        ClosureMode::Boolean
    } else {
        ClosureMode::Lattice
    }
}

fn arb_map(source: usize, target: usize) -> impl Strategy<Value = MinorMap> {
    proptest::collection::vec(1..=target, source).prop_map(move |s| MinorMap::new(target, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minors_compose(bits in any::<u64>(), s in arb_map(2, 3), t in arb_map(3, 2)) {
        let r = Relation::from_indices(2, 2, (0..4).filter(|i| bits >> i & 1 == 1));
        let step = r.minor(&s).unwrap().minor(&t).unwrap();
        prop_assert_eq!(step, r.minor(&s.then(&t).unwrap()).unwrap());
    }

    #[test]
    fn families_are_closed(seed in any::<u64>(), boolean in any::<bool>(), n in 1usize..=3) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let a = common::structure(&mut rng, 2, "A");
        let spec = common::spec(&mut rng, &a, mode_of(boolean), 3);
        let family = def_family(&a, &spec, n, &l).unwrap();
        let members: Vec<Relation> = common::all_relations(2, n).filter(|t| family.member(t).unwrap()).collect();
        for x in &members {
            for y in &members {
                prop_assert!(family.member(&x.intersect(y).unwrap()).unwrap());
                prop_assert!(family.member(&x.union(y).unwrap()).unwrap());
            }
            if boolean {
                prop_assert!(family.member(&x.complement()).unwrap());
            }
            for target in 1..=3 {
                let wider = def_family(&a, &spec, target, &l).unwrap();
                let map = MinorMap::new(target, (0..n).map(|_| rng.gen_range(1..=target)).collect()).unwrap();
                prop_assert!(wider.member(&x.minor(&map).unwrap()).unwrap(), "minor of {} by {:?}", x, map);
            }
        }
        // every generator instance is a member
        for g in spec.generators() {
            if let defgeo::Generator::Formula(phi) = g {
                if phi.free_arity() <= n {
                    prop_assert!(family.member(&solution_set(phi, n, &a, &l).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn point_closure_laws(seed in any::<u64>(), boolean in any::<bool>(), n in 1usize..=4) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let a = common::structure(&mut rng, 2, "A");
        let spec = common::spec(&mut rng, &a, mode_of(boolean), 4);
        let family = def_family(&a, &spec, n, &l).unwrap();
        let points = tuple_count(2, n).unwrap();
        for t in 0..points {
            let Some(v) = family.point_closure(t) else {
                prop_assert!(!family.top().contains_index(t));
                continue;
            };
            prop_assert!(v.contains_index(t));
            prop_assert!(v.is_subset(family.top()));
            prop_assert!(family.member(v).unwrap());
            for s in v.iter() {
                prop_assert!(family.point_closure(s).unwrap().is_subset(v));
            }
        }
        prop_assert!(family.member(family.top()).unwrap());
        if boolean {
            prop_assert!(family.top().is_full());
        }
    }

    #[test]
    fn equivalence_is_an_equivalence(seed in any::<u64>(), boolean in any::<bool>()) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let mode = mode_of(boolean);
        let a = common::structure(&mut rng, 2, "A");
        let s1 = common::spec(&mut rng, &a, mode, 4);
        let s2 = common::redundant_extension(&mut rng, &s1, 4);
        let s3 = common::spec(&mut rng, &a, mode, 4);

        prop_assert!(decide_equivalence(&a, &s1, &a, &s1, &l).unwrap().is_equivalent());
        prop_assert!(decide_equivalence(&a, &s1, &a, &s2, &l).unwrap().is_equivalent());
        let forward = decide_equivalence(&a, &s1, &a, &s3, &l).unwrap();
        let backward = decide_equivalence(&a, &s3, &a, &s1, &l).unwrap();
        prop_assert_eq!(forward.is_equivalent(), backward.is_equivalent());
        if let Equivalence::Inequivalent { witness, in_first } = &forward {
            let f1 = def_family(&a, &s1, witness.arity(), &l).unwrap();
            let f3 = def_family(&a, &s3, witness.arity(), &l).unwrap();
            prop_assert_eq!(f1.member(witness).unwrap(), *in_first);
            prop_assert_eq!(f3.member(witness).unwrap(), !*in_first);
        }
        // s2 ~ s1, so s2 ~ s3 exactly when s1 ~ s3
        let through = decide_equivalence(&a, &s2, &a, &s3, &l).unwrap();
        prop_assert_eq!(through.is_equivalent(), forward.is_equivalent());
    }

    #[test]
    fn fingerprints_parse_back(seed in any::<u64>(), boolean in any::<bool>()) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let a = common::structure(&mut rng, 2, "A");
        let spec = common::spec(&mut rng, &a, mode_of(boolean), 4);
        let fp = fingerprint(&a, &spec, &l).unwrap();
        let back = Fingerprint::parse(&fp.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), fp.to_text());
        prop_assert_eq!(back.digest(), fp.digest());
        prop_assert_eq!(fp.digest().len(), 16);
    }

    #[test]
    fn substitution_matches_minor(seed in any::<u64>()) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let a = common::structure(&mut rng, 3, "A");
        let r = rng.gen_range(1..=3);
        let phi = common::formula(&mut rng, &a, r as Var, 3);
        let n = rng.gen_range(1..=3);
        let sigma: Vec<usize> = (0..r).map(|_| rng.gen_range(1..=n)).collect();
        let vars: Vec<Var> = sigma.iter().map(|&j| j as Var).collect();
        let lhs = solution_set(&substitute(&phi, &vars).unwrap(), n, &a, &l).unwrap();
        let rhs = solution_set(&phi, r, &a, &l).unwrap().minor(&MinorMap::new(n, sigma).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn algebraic_members_solve_their_equations(seed in any::<u64>(), n in 1usize..=3) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let a = common::structure(&mut rng, 2, "A").algebra_reduct();
        let family = algebraic_family(&a, n, &l).unwrap();
        prop_assert!(family.members()[0].is_full());
        for (i, m) in family.members().iter().enumerate() {
            let mut solved = Relation::full(2, n);
            for (s, t) in family.defining_terms(i) {
                solved = solved.intersect(&equation_solution(&s, &t, n, &a, &l).unwrap()).unwrap();
            }
            prop_assert_eq!(&solved, m);
            for other in family.members() {
                prop_assert!(family.contains(&m.intersect(other).unwrap()));
            }
        }
    }

    #[test]
    fn one_element_universe_is_tiny(seed in any::<u64>(), boolean in any::<bool>()) {
        let l = Limits::default();
        let mut rng = common::rng(seed);
        let items: Vec<_> = (0..4).map(|i| common::structure(&mut rng, 1, &format!("s{i}"))).collect();
        for a in &items {
            let spec = common::spec(&mut rng, a, mode_of(boolean), 1);
            let fp = fingerprint(a, &spec, &l).unwrap();
            prop_assert_eq!(fp.arity(), 1);
            prop_assert!(fp.closures().len() <= 1);
        }
        let mode = if boolean { ClassifyMode::L0 } else { ClassifyMode::Algebraic };
        let report = classify(&items, &ClassifyOptions::new(mode), &l).unwrap();
        // at most 2^(2^(1^1)) classes
        prop_assert!(report.classes.len() + report.undetermined.len() <= 4);
        prop_assert_eq!(report.bound_text(), "2^(2^(1^1))");
    }
}
