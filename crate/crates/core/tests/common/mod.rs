//! Shared helpers for the integration tests.
#![allow(dead_code)]

use mres_core::calculus::{check_proof, first_invariant_violation, Checker, CheckerConfig, RuleApp};
use mres_core::families::default_partition;
use mres_core::mergemap::Node;
use mres_core::refutations::{
    build_eq2, build_example, build_heq2_wf, build_kbkf_lq_split, build_kbkf_lq_we, build_kbkf_lq_weak,
    build_mparity, BuiltProof,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Every builder at its smallest size.
pub fn smallest_builds() -> Vec<(&'static str, BuiltProof)> {
    vec![
        ("example", build_example()),
        ("kbkf-lq-weak", build_kbkf_lq_weak(1)),
        ("kbkf-lq-split", build_kbkf_lq_split(1)),
        ("kbkf-lq (we)", build_kbkf_lq_we(1)),
        ("mparity", build_mparity(2).unwrap()),
        ("eq2", build_eq2(1)),
        ("heq2 (wf)", build_heq2_wf(2, &default_partition(2).unwrap()).unwrap()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the constant map of universal position `map` in the line of axiom step `step`.
    FlipAxiomConstant { step: usize, map: usize },
    /// Swap the premises of resolve step `step`.
    SwapResolve { step: usize },
}

/// Picks a random mutation applicable to `bp`.
pub fn random_mutation(bp: &BuiltProof, rng: &mut impl Rng) -> Mutation {
    let resolves: Vec<usize> = bp
        .proof
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, RuleApp::Resolve { .. }))
        .map(|(k, _)| k)
        .collect();
    let mut checker = Checker::new(&bp.formula, CheckerConfig::permissive());
    let mut flips = Vec::new();
    for (k, step) in bp.proof.steps.iter().enumerate() {
        checker.apply(step).expect("builder output replays");
        if matches!(step, RuleApp::Axiom { .. }) {
            for (m, map) in checker.lines()[k].maps.iter().enumerate() {
                if let Some(root) = map.root() {
                    if matches!(checker.store().node(root), Node::Leaf(_)) {
                        flips.push(Mutation::FlipAxiomConstant { step: k, map: m });
                    }
                }
            }
        }
    }
    if rng.gen_bool(0.5) && !flips.is_empty() {
        *flips.choose(rng).unwrap()
    } else {
        Mutation::SwapResolve {
            step: *resolves.choose(rng).unwrap(),
        }
    }
}

/// True when the checker rejects the mutated proof or a replayed line breaks the invariant.
pub fn mutation_caught(bp: &BuiltProof, mutation: Mutation) -> bool {
    match mutation {
        Mutation::SwapResolve { step } => {
            let mut proof = bp.proof.clone();
            if let RuleApp::Resolve { left, right, pivot } = proof.steps[step] {
                proof.steps[step] = RuleApp::Resolve {
                    left: right,
                    right: left,
                    pivot,
                };
            }
            !check_proof(&bp.formula, &proof, bp.config()).valid
        }
        Mutation::FlipAxiomConstant { step, map } => {
            let mut checker = Checker::new(&bp.formula, bp.config());
            for (k, s) in bp.proof.steps.iter().enumerate() {
                if checker.apply(s).is_err() {
                    return true;
                }
                if k == step {
                    let m = checker.lines()[k].maps[map];
                    let root = m.root().expect("constant map");
                    let Node::Leaf(b) = checker.store().node(root) else {
                        unreachable!("constant map")
                    };
                    let flipped = checker.store().constant(m.owner, !b);
                    checker.line_mut(k).maps[map] = flipped;
                }
            }
            let d = checker.finish();
            first_invariant_violation(&bp.formula, &d.store, &d.lines, 20)
                .expect("within budget")
                .is_some()
        }
    }
}
