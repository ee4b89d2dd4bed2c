mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{adjacency, all_paths, random_tree};
use treelab::actions::{Automorphism, LineMap};
use treelab::ends::{dense_or_cyclic, Density, End, EndError};
use treelab::flows::{check_flow_axioms, flow_cut, flow_from_arc, ArcPromise, Cut, DirectedArcSample};
use treelab::metrize::{discrete_to_simplicial, DiscreteMedianClosure, PartialPerm};
use treelab::pretree_core::tree_pretree;
use treelab::rational::{q, qf, Q};
use treelab::tree_model::{Pt, RationalLine, TreeSpace};

fn line_end(step: i64) -> End<'static, RationalLine, LineMap> {
    End::new(&RationalLine, LineMap::translate(q(step)), q(0), 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nu_of_translation_is_its_shift(c in -20i64..=20) {
        let e = line_end(2);
        prop_assert_eq!(e.nu(&LineMap::translate(q(c))).unwrap(), q(c));
    }

    #[test]
    fn end_order_follows_shift(a in -20i64..=20, b in -20i64..=20) {
        let e = line_end(1);
        let d = e.coset_compare(&LineMap::translate(q(a)), &LineMap::translate(q(b))).unwrap();
        prop_assert_eq!(d.verdict, a.cmp(&b));
    }

    #[test]
    fn realized_tree_matches_oracle(n in 2usize..=9, seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_tree(&mut r, n);
        let d = DiscreteMedianClosure { pretree: tree_pretree(n, &edges), gens: vec![] };
        let m = discrete_to_simplicial(&d).unwrap();
        let paths = all_paths(&adjacency(n, &edges));
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(m.tree.dist(&Pt::V(x), &Pt::V(y)), q(paths[x][y].len() as i64 - 1));
            }
        }
    }

    #[test]
    fn limit_flows_satisfy_axioms(l in -5i64..=5, probes in prop::collection::btree_set(-30i64..=30, 2..10)) {
        let l = q(l);
        let arc: Vec<Q> = (1..=5).map(|k| &l - qf(1, 1 << k)).collect();
        let probes: Vec<Q> = probes.into_iter().map(|k| qf(k, 3)).filter(|x| !(*x > &l - qf(1, 2) && *x < l)).collect();
        let a = DirectedArcSample::new(&RationalLine, arc, ArcPromise::ConvergesTo(l)).unwrap();
        let f = flow_from_arc(&RationalLine, &a, &probes);
        prop_assert!(f.inconclusive.is_empty());
        prop_assert!(check_flow_axioms(&f.relation).passed());
    }
}

#[test]
fn shift_beyond_window_is_reported() {
    let e = line_end(2);
    assert!(matches!(e.nu(&LineMap::translate(q(40))), Err(EndError::WindowExhausted(12, _))));
}

#[test]
fn reflection_outside_stabilizer() {
    let e = line_end(1);
    assert!(matches!(e.nu(&LineMap::reflect(q(0))), Err(EndError::NotInStabilizer(_))));
}

#[test]
fn density_verdicts() {
    let ints: Vec<Q> = (-5..=5).map(q).collect();
    assert!(matches!(dense_or_cyclic(&ints, &qf(1, 2)), Ok(Density::CyclicWithGenerator { .. })));
    let fine: Vec<Q> = (0..20).map(|k| qf(k, 16)).collect();
    assert!(matches!(dense_or_cyclic(&fine, &qf(1, 10)), Ok(Density::Dense { .. })));
    assert!(dense_or_cyclic(&[q(0), q(1)], &q(1)).is_err());
}

#[test]
fn limit_between_samples_is_a_gap() {
    let line: Vec<Q> = (-3..=3).map(q).collect();
    let a = DirectedArcSample::new(&RationalLine, vec![qf(-1, 2), qf(1, 4)], ArcPromise::ConvergesTo(qf(1, 2))).unwrap();
    let (cut, _) = flow_cut(&RationalLine, &a, &line).unwrap();
    assert_eq!(cut, Cut::Gap { lower_max: q(0), upper_min: q(1) });
}

#[test]
fn unknown_promise_is_inconclusive() {
    let a = DirectedArcSample::new(&RationalLine, vec![q(0), q(1)], ArcPromise::Unknown).unwrap();
    let f = flow_from_arc(&RationalLine, &a, &[q(5), q(6)]);
    assert_eq!(f.inconclusive.len(), 2);
}

#[test]
fn non_isometric_partial_map_is_reported() {
    // Path 0-1-2-3: the map 0↦0, 1↦2 stretches the edge.
    let t = tree_pretree(4, &[(0, 1), (1, 2), (2, 3)]);
    let g = PartialPerm { name: "stretch".into(), images: vec![Some(0), Some(2), None, None] };
    let m = discrete_to_simplicial(&DiscreteMedianClosure { pretree: t, gens: vec![g] }).unwrap();
    assert!(!m.all_isometric());
    assert_eq!(m.certificates[0].failures, vec![(0, 1)]);
    assert_eq!(RationalLine.dist(&q(0), &LineMap::translate(q(2)).apply(&q(0))), q(2));
}
