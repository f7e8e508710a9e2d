use std::fmt;

use thiserror::Error;

use crate::mergemap::{MapError, MapStore, MergeMap};
use crate::qbf::{Clause, Lit, Pcnf, Var};

/// A proof line: an existential clause and one merge-map per universal
/// variable (indexed by position in the prefix).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofLine {
    pub clause: Clause,
    pub maps: Vec<MergeMap>,
}

impl ProofLine {
    pub fn map(&self, formula: &Pcnf, universal: Var) -> Option<&MergeMap> {
        formula.universal_position(universal).map(|k| &self.maps[k])
    }

    /// Human-readable rendering: clause, then each non-trivial map as a dump
    /// summary (`u=const b` or `u=<n nodes>`).
    pub fn describe(&self, formula: &Pcnf, store: &MapStore) -> String {
        let lits: Vec<String> = self
            .clause
            .iter()
            .map(|l| {
                let name = formula.display_var(l.var());
                if l.is_positive() {
                    name
                } else {
                    format!("-{name}")
                }
            })
            .collect();
        let maps: Vec<String> = self
            .maps
            .iter()
            .filter_map(|m| {
                let root = m.root()?;
                let u = formula.display_var(m.owner);
                Some(match store.node(root) {
                    crate::mergemap::Node::Leaf(b) => format!("{u}={}", u8::from(b)),
                    _ => format!("{u}=<{} nodes>", store.node_count(m)),
                })
            })
            .collect();
        format!("({{{}}}, {{{}}})", lits.join(", "), maps.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("clause index {index} out of range (formula has {len} clauses)")]
    ClauseIndex { index: usize, len: usize },
    #[error("axiom contains both polarities of universal {0}")]
    UniversalTautology(Var),
    #[error("pivot {0} is not an existential variable")]
    PivotNotExistential(Var),
    #[error("{side} premise does not contain the {} pivot literal", if *side == Side::Left { "positive" } else { "negative" })]
    PivotMissing { side: Side },
    #[error("BLOCKED({0}): merge-maps are non-trivial and non-isomorphic")]
    Blocked(Var),
    #[error("literal {0} is not existential")]
    NotExistential(Lit),
    #[error("clause already contains the complement of {0}")]
    ComplementPresent(Lit),
    #[error("merge-map for {0} is not trivial")]
    MapNotTrivial(Var),
    #[error("variable {0} is not universal")]
    NotUniversal(Var),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Downloads axiom `index` (0-based): the existential part becomes the clause,
/// each universal literal is falsified by a constant map, and the remaining
/// universals get trivial maps.
pub fn axiom_line(formula: &Pcnf, store: &MapStore, index: usize) -> Result<ProofLine, RuleError> {
    let axiom = formula.clause(index).ok_or(RuleError::ClauseIndex {
        index,
        len: formula.matrix().len(),
    })?;
    let mut maps: Vec<MergeMap> = formula
        .universals()
        .iter()
        .map(|&u| MergeMap::trivial_unchecked(u))
        .collect();
    let mut clause = Vec::new();
    for lit in axiom.iter() {
        let var = lit.var();
        match formula.universal_position(var) {
            None => clause.push(lit),
            Some(k) => {
                let falsifying = !lit.is_positive();
                if let Some(root) = maps[k].root() {
                    if root != store.leaf(falsifying) {
                        return Err(RuleError::UniversalTautology(var));
                    }
                }
                maps[k] = store.constant(var, falsifying);
            }
        }
    }
    Ok(ProofLine {
        clause: Clause::new(clause),
        maps,
    })
}

/// The resolution rule. `left` must hold the positive pivot literal and
/// `right` the negative one; the merge branches to `left`'s map when the
/// pivot is 0.
pub fn resolve_lines(
    formula: &Pcnf,
    store: &mut MapStore,
    left: &ProofLine,
    right: &ProofLine,
    pivot: Var,
) -> Result<ProofLine, RuleError> {
    if !formula.is_existential(pivot) {
        return Err(RuleError::PivotNotExistential(pivot));
    }
    if !left.clause.contains(pivot.positive()) {
        return Err(RuleError::PivotMissing { side: Side::Left });
    }
    if !right.clause.contains(pivot.negative()) {
        return Err(RuleError::PivotMissing { side: Side::Right });
    }
    let mut maps = Vec::with_capacity(left.maps.len());
    for (m1, m2) in left.maps.iter().zip(&right.maps) {
        let merged = if m1.is_trivial() {
            *m2
        } else if m2.is_trivial() || store.is_isomorphic(m1, m2)? {
            *m1
        } else if formula.precedes(pivot, m1.owner) {
            store.merge(formula, pivot, m1, m2)?
        } else {
            return Err(RuleError::Blocked(m1.owner));
        };
        maps.push(merged);
    }
    let clause = left
        .clause
        .without(pivot.positive())
        .union(&right.clause.without(pivot.negative()));
    Ok(ProofLine { clause, maps })
}

/// Existential clause weakening: add `lit` unless its complement is present.
pub fn weaken_exist(formula: &Pcnf, line: &ProofLine, lit: Lit) -> Result<ProofLine, RuleError> {
    if !formula.is_existential(lit.var()) {
        return Err(RuleError::NotExistential(lit));
    }
    if line.clause.contains(!lit) {
        return Err(RuleError::ComplementPresent(lit));
    }
    Ok(ProofLine {
        clause: line.clause.with(lit),
        maps: line.maps.clone(),
    })
}

/// Strategy weakening: replace the trivial map of `universal` by a constant.
pub fn weaken_strategy(
    formula: &Pcnf,
    store: &MapStore,
    line: &ProofLine,
    universal: Var,
    value: bool,
) -> Result<ProofLine, RuleError> {
    let k = formula
        .universal_position(universal)
        .ok_or(RuleError::NotUniversal(universal))?;
    if !line.maps[k].is_trivial() {
        return Err(RuleError::MapNotTrivial(universal));
    }
    let mut out = line.clone();
    out.maps[k] = store.constant(universal, value);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::parse_qdimacs;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    /// ∃x(1) ∀u(2) ∃t(3), clauses (x u t) (-x -u t) (x u -t) (-x -u -t)
    fn example() -> Pcnf {
        parse_qdimacs("p cnf 3 5\ne 1 0\na 2 0\ne 3 0\n1 2 3 0\n-1 -2 3 0\n1 2 -3 0\n-1 -2 -3 0\n2 -2 1 0\n")
            .unwrap()
    }

    #[test]
    fn axiom_download() {
        let f = example();
        let store = MapStore::new();
        let l = axiom_line(&f, &store, 0).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[1, 3]));
        assert_eq!(l.maps, vec![store.constant(v(2), false)]);
        let l = axiom_line(&f, &store, 1).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[-1, 3]));
        assert_eq!(l.maps, vec![store.constant(v(2), true)]);
        assert_eq!(axiom_line(&f, &store, 4), Err(RuleError::UniversalTautology(v(2))));
        assert!(matches!(axiom_line(&f, &store, 9), Err(RuleError::ClauseIndex { .. })));
    }

    #[test]
    fn example_resolutions() {
        let f = example();
        let mut store = MapStore::new();
        let lines: Vec<ProofLine> = (0..4).map(|i| axiom_line(&f, &store, i).unwrap()).collect();
        let t = resolve_lines(&f, &mut store, &lines[0], &lines[1], v(1)).unwrap();
        assert_eq!(t.clause, Clause::from_dimacs(&[3]));
        let nt = resolve_lines(&f, &mut store, &lines[2], &lines[3], v(1)).unwrap();
        assert_eq!(t.maps, nt.maps);
        let zero = store.constant(v(2), false);
        let one = store.constant(v(2), true);
        let copy = store.merge(&f, v(1), &zero, &one).unwrap();
        assert_eq!(t.maps, vec![copy]);
        let empty = resolve_lines(&f, &mut store, &t, &nt, v(3)).unwrap();
        assert!(empty.clause.is_empty());
        assert_eq!(empty.maps, vec![copy]);
    }

    #[test]
    fn pivot_checks() {
        let f = example();
        let mut store = MapStore::new();
        let a = axiom_line(&f, &store, 0).unwrap();
        let b = axiom_line(&f, &store, 1).unwrap();
        assert_eq!(
            resolve_lines(&f, &mut store, &b, &a, v(1)),
            Err(RuleError::PivotMissing { side: Side::Left })
        );
        assert_eq!(
            resolve_lines(&f, &mut store, &a, &a, v(1)),
            Err(RuleError::PivotMissing { side: Side::Right })
        );
        assert_eq!(
            resolve_lines(&f, &mut store, &a, &b, v(2)),
            Err(RuleError::PivotNotExistential(v(2)))
        );
    }

    #[test]
    fn blocked_when_maps_disagree_before_pivot() {
        let f = example();
        let mut store = MapStore::new();
        let zero = store.constant(v(2), false);
        let one = store.constant(v(2), true);
        let copy = store.merge(&f, v(1), &zero, &one).unwrap();
        let neg = store.merge(&f, v(1), &one, &zero).unwrap();
        let l1 = ProofLine {
            clause: Clause::from_dimacs(&[3]),
            maps: vec![copy],
        };
        let l2 = ProofLine {
            clause: Clause::from_dimacs(&[-3]),
            maps: vec![neg],
        };
        assert_eq!(resolve_lines(&f, &mut store, &l1, &l2, v(3)), Err(RuleError::Blocked(v(2))));
    }

    #[test]
    fn existential_weakening() {
        let f = example();
        let store = MapStore::new();
        let l = axiom_line(&f, &store, 0).unwrap();
        let w = weaken_exist(&f, &l, Lit::from_dimacs(-3)).unwrap_err();
        assert_eq!(w, RuleError::ComplementPresent(Lit::from_dimacs(-3)));
        let same = weaken_exist(&f, &l, Lit::from_dimacs(3)).unwrap();
        assert_eq!(same, l);
        assert_eq!(
            weaken_exist(&f, &l, Lit::from_dimacs(2)),
            Err(RuleError::NotExistential(Lit::from_dimacs(2)))
        );
    }

    #[test]
    fn strategy_weakening() {
        let f = parse_qdimacs("p cnf 3 1\ne 1 0\na 2 0\ne 3 0\n1 3 0\n").unwrap();
        let store = MapStore::new();
        let l = axiom_line(&f, &store, 0).unwrap();
        assert!(l.maps[0].is_trivial());
        let w = weaken_strategy(&f, &store, &l, v(2), true).unwrap();
        assert_eq!(w.maps[0], store.constant(v(2), true));
        assert_eq!(w.clause, l.clause);
        assert_eq!(weaken_strategy(&f, &store, &w, v(2), false), Err(RuleError::MapNotTrivial(v(2))));
        assert_eq!(weaken_strategy(&f, &store, &l, v(1), false), Err(RuleError::NotUniversal(v(1))));
    }
}
