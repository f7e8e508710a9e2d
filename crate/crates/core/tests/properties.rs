use mres_core::calculus::{check_proof, replay, resolve_lines, CheckerConfig, ProofLine, RuleError};
use mres_core::families::{gen, parity_c, FamilyId, GenOptions};
use mres_core::mergemap::{MapStore, MergeMap, Node, NodeId};
use mres_core::qbf::{
    parse_qdimacs, write_qdimacs, Clause, Lit, PartialAssignment, Pcnf, QuantBlock, Var,
};
use mres_core::refutations::{build_eq2, build_kbkf_lq_split, build_kbkf_lq_weak, build_mparity};
use proptest::prelude::*;
use proptest::sample::Index;

fn v(i: u32) -> Var {
    Var::new(i)
}

/// ∃x1 x2 x3 x4 ∀u5 ∃x6
fn merge_formula() -> Pcnf {
    Pcnf::new(
        6,
        vec![
            QuantBlock::exists([v(1), v(2), v(3), v(4)]),
            QuantBlock::forall([v(5)]),
            QuantBlock::exists([v(6)]),
        ],
        vec![Clause::from_dimacs(&[1, 5, 6])],
    )
    .unwrap()
}

type Recipe = Vec<(u32, Index, Index)>;

fn recipe() -> impl Strategy<Value = Recipe> {
    prop::collection::vec((1u32..=3, any::<Index>(), any::<Index>()), 0..8)
}

/// Builds a random program over x1..x3 from a recipe of query nodes.
fn build(store: &mut MapStore, recipe: &Recipe) -> NodeId {
    let mut pool = vec![store.leaf(false), store.leaf(true)];
    for (var, lo, hi) in recipe {
        let id = store.query(v(*var), *lo.get(&pool), *hi.get(&pool));
        pool.push(id);
    }
    *pool.last().unwrap()
}

/// Node-by-node structural comparison, possibly across stores.
fn same_shape(sa: &MapStore, a: NodeId, sb: &MapStore, b: NodeId) -> bool {
    match (sa.node(a), sb.node(b)) {
        (Node::Leaf(x), Node::Leaf(y)) => x == y,
        (
            Node::Query {
                var: va,
                if_false: fa,
                if_true: ta,
            },
            Node::Query {
                var: vb,
                if_false: fb,
                if_true: tb,
            },
        ) => va == vb && same_shape(sa, fa, sb, fb) && same_shape(sa, ta, sb, tb),
        _ => false,
    }
}

fn alpha_from(bits: u8) -> PartialAssignment {
    (1..=4).map(|i| (v(i), bits & (1 << (i - 1)) != 0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_branches_on_pivot(a in recipe(), b in recipe(), pivot in 1u32..=4, bits in 0u8..16) {
        let f = merge_formula();
        let mut store = MapStore::new();
        let ma = MergeMap::program(v(5), build(&mut store, &a));
        let mb = MergeMap::program(v(5), build(&mut store, &b));
        let m = store.merge(&f, v(pivot), &ma, &mb).unwrap();
        let alpha = alpha_from(bits);
        let expect = if alpha.get(v(pivot)).unwrap() {
            store.evaluate(&mb, &alpha).unwrap()
        } else {
            store.evaluate(&ma, &alpha).unwrap()
        };
        prop_assert_eq!(store.evaluate(&m, &alpha).unwrap(), expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn isomorphism_is_an_equivalence(a in recipe(), b in recipe(), c in recipe()) {
        let mut store = MapStore::new();
        let ma = MergeMap::program(v(5), build(&mut store, &a));
        let mb = MergeMap::program(v(5), build(&mut store, &b));
        let mc = MergeMap::program(v(5), build(&mut store, &c));
        prop_assert!(store.is_isomorphic(&ma, &ma).unwrap());
        let ab = store.is_isomorphic(&ma, &mb).unwrap();
        prop_assert_eq!(ab, store.is_isomorphic(&mb, &ma).unwrap());
        if ab && store.is_isomorphic(&mb, &mc).unwrap() {
            prop_assert!(store.is_isomorphic(&ma, &mc).unwrap());
        }
    }

    #[test]
    fn hash_consing_is_canonical(a in recipe(), b in recipe()) {
        // shared store: identity of roots coincides with structural identity
        let mut store = MapStore::new();
        let ra = build(&mut store, &a);
        let rb = build(&mut store, &b);
        prop_assert_eq!(ra == rb, same_shape(&store, ra, &store, rb));
        // rebuilding in a fresh store gives the same shape
        let mut other = MapStore::new();
        let ra2 = build(&mut other, &a);
        prop_assert!(same_shape(&store, ra, &other, ra2));
        // dump/parse into the original store returns the same root
        let map = MergeMap::program(v(5), ra);
        let text = store.dump(&map);
        let back = store.parse_dump(&text).unwrap();
        prop_assert_eq!(back, vec![map]);
    }
}

fn random_formula() -> impl Strategy<Value = Pcnf> {
    // up to 6 variables, random quantifiers, random clauses over them
    (1u32..=6)
        .prop_flat_map(|nv| {
            (
                Just(nv),
                prop::collection::vec(any::<bool>(), nv as usize),
                prop::collection::vec(
                    prop::collection::vec((1..=nv as i64, any::<bool>()), 0..4),
                    0..8,
                ),
            )
        })
        .prop_map(|(nv, quants, clauses)| {
            let prefix = (1..=nv)
                .map(|i| {
                    if quants[i as usize - 1] {
                        QuantBlock::forall([v(i)])
                    } else {
                        QuantBlock::exists([v(i)])
                    }
                })
                .collect();
            let matrix = clauses
                .into_iter()
                .map(|lits| lits.into_iter().map(|(x, s)| Lit::from_dimacs(if s { x } else { -x })).collect())
                .collect();
            Pcnf::new(nv, prefix, matrix).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn qdimacs_round_trip(f in random_formula()) {
        let text = write_qdimacs(&f);
        let back = parse_qdimacs(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(write_qdimacs(&back), text);
    }

    #[test]
    fn restriction_is_idempotent(f in random_formula(), bits in any::<u8>(), mask in any::<u8>()) {
        let rho: PartialAssignment = f
            .existentials()
            .filter(|x| mask & (1 << (x.index() - 1)) != 0)
            .map(|x| (x, bits & (1 << (x.index() - 1)) != 0))
            .collect();
        let once = f.restrict(&rho).unwrap();
        let twice = once.restrict(&PartialAssignment::new()).unwrap();
        prop_assert_eq!(&once, &twice);
        for x in rho.vars() {
            prop_assert!(!once.contains_var(x));
            prop_assert!(once.matrix().iter().all(|c| !c.mentions(x)));
        }
    }
}

#[test]
fn parity_c_accepts_exactly_even_assignments() {
    for k in 1..=4u32 {
        let ys: Vec<Var> = (1..=k).map(v).collect();
        let clauses = parity_c(&ys);
        assert_eq!(clauses.len(), 1 << (k - 1));
        for bits in 0u32..1 << k {
            let alpha: PartialAssignment = ys.iter().map(|&y| (y, bits & (1 << (y.index() - 1)) != 0)).collect();
            let sat = clauses
                .iter()
                .all(|c| c.iter().any(|l| alpha.lit_value(l) == Some(true)));
            assert_eq!(sat, bits.count_ones() % 2 == 0, "k={k} bits={bits:b}");
        }
    }
}

/// ∃x1 ∀u2 ∃x3 ∀u4 ∃x5: every pair of map choices for both universals,
/// every pivot. BLOCKED(u) must name the earliest universal left of the
/// pivot whose maps are both programs and differ.
#[test]
fn blocked_exactly_per_side_condition() {
    let f = Pcnf::new(
        5,
        vec![
            QuantBlock::exists([v(1)]),
            QuantBlock::forall([v(2)]),
            QuantBlock::exists([v(3)]),
            QuantBlock::forall([v(4)]),
            QuantBlock::exists([v(5)]),
        ],
        vec![],
    )
    .unwrap();
    let mut store = MapStore::new();
    let (lo, hi) = (store.leaf(false), store.leaf(true));
    let q1 = store.query(v(1), lo, hi);
    let q1n = store.query(v(1), hi, lo);
    let q3 = store.query(v(3), lo, hi);
    let q13 = store.query(v(1), lo, q3);
    let choices = |u: Var| -> Vec<MergeMap> {
        let mut out = vec![MergeMap::trivial_unchecked(u)];
        let roots: Vec<NodeId> = if u == v(2) {
            vec![lo, hi, q1, q1n]
        } else {
            vec![lo, hi, q1, q1n, q3, q13]
        };
        out.extend(roots.into_iter().map(|r| MergeMap::program(u, r)));
        out
    };
    let mut cases = 0;
    for pivot in [v(1), v(3), v(5)] {
        let l1 = Clause::new([pivot.positive()]);
        let l2 = Clause::new([pivot.negative()]);
        for a2 in choices(v(2)) {
            for b2 in choices(v(2)) {
                for a4 in choices(v(4)) {
                    for b4 in choices(v(4)) {
                        let left = ProofLine { clause: l1.clone(), maps: vec![a2, a4] };
                        let right = ProofLine { clause: l2.clone(), maps: vec![b2, b4] };
                        let expected = [(a2, b2), (a4, b4)].into_iter().find_map(|(m1, m2)| {
                            let before = f.precedes(m1.owner, pivot);
                            let clash = !m1.is_trivial() && !m2.is_trivial() && m1.root() != m2.root();
                            (before && clash).then_some(m1.owner)
                        });
                        let got = resolve_lines(&f, &mut store, &left, &right, pivot);
                        match expected {
                            Some(u) => assert_eq!(got, Err(RuleError::Blocked(u))),
                            None => assert!(got.is_ok(), "{got:?}"),
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    assert_eq!(cases, 3 * 25 * 49);
}

#[test]
fn replay_is_deterministic() {
    for bp in [build_kbkf_lq_weak(3), build_kbkf_lq_split(2), build_eq2(2), build_mparity(3).unwrap()] {
        let a = replay(&bp.formula, &bp.proof, bp.config()).unwrap();
        let b = replay(&bp.formula, &bp.proof, bp.config()).unwrap();
        assert_eq!(a.lines, b.lines);
        let dump = |d: &mres_core::calculus::Derivation| -> String {
            d.lines.last().unwrap().maps.iter().map(|m| d.store.dump(m)).collect()
        };
        assert_eq!(dump(&a), dump(&b));
    }
}

#[test]
fn pivot_sets_are_premise_unions() {
    let bp = build_kbkf_lq_split(2);
    let d = replay(&bp.formula, &bp.proof, CheckerConfig::permissive()).unwrap();
    for (k, step) in bp.proof.steps.iter().enumerate() {
        let mut expect = std::collections::BTreeSet::new();
        for p in step.premises() {
            expect.extend(d.pivot_sets[p].iter().copied());
        }
        if let mres_core::calculus::RuleApp::Resolve { pivot, .. } = step {
            expect.insert(*pivot);
        }
        assert_eq!(d.pivot_sets[k], expect);
    }
}

#[test]
fn repeated_pivot_on_a_path_is_irregular() {
    // resolve x twice on one path: (x∨t, u=0),(x̄∨t,u=1) → (t,u=x); weaken by x; resolve again on x
    let f = mres_core::families::example_formula();
    let text = "p mresproof - 6\nA 1 1\nA 2 2\nR 3 1 2 1\nWE 4 3 1\nA 5 2\nR 6 4 5 1\n";
    let proof = mres_core::calculus::Proof::parse(text).unwrap();
    let permissive = check_proof(&f, &proof, CheckerConfig::permissive());
    assert!(permissive.valid, "{:?}", permissive.failure);
    assert!(!permissive.regular);
    let strict = check_proof(&f, &proof, CheckerConfig::permissive().regular());
    assert_eq!(strict.failed_step(), Some(5));
    assert_eq!(strict.failure.unwrap().property, "regularity");
}

#[test]
fn generators_are_deterministic() {
    for fam in FamilyId::ALL {
        let a = write_qdimacs(&gen(fam, 3, &GenOptions::default()).unwrap());
        let b = write_qdimacs(&gen(fam, 3, &GenOptions::default()).unwrap());
        assert_eq!(a, b);
    }
}
