use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::assignment::PartialAssignment;
use super::clause::Clause;
use super::lit::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    /// The QDIMACS quantifier letter.
    pub fn letter(self) -> char {
        match self {
            Quantifier::Exists => 'e',
            Quantifier::Forall => 'a',
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantBlock {
    pub quantifier: Quantifier,
    pub vars: Vec<Var>,
}

impl QuantBlock {
    pub fn new(quantifier: Quantifier, vars: Vec<Var>) -> QuantBlock {
        QuantBlock { quantifier, vars }
    }

    pub fn exists<I: IntoIterator<Item = Var>>(vars: I) -> QuantBlock {
        QuantBlock::new(Quantifier::Exists, vars.into_iter().collect())
    }

    pub fn forall<I: IntoIterator<Item = Var>>(vars: I) -> QuantBlock {
        QuantBlock::new(Quantifier::Forall, vars.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable {var} exceeds the declared variable count {declared}")]
    VarOutOfRange { var: Var, declared: u32 },
    #[error("variable {0} is quantified more than once")]
    DuplicateQuantification(Var),
    #[error("variable {0} occurs in the matrix but not in the prefix")]
    FreeVariable(Var),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("restriction assigns universal variable {0}")]
    Universal(Var),
    #[error("restriction assigns unknown variable {0}")]
    Unknown(Var),
}

#[derive(Clone, Copy, Debug)]
struct VarInfo {
    block: u32,
    quantifier: Quantifier,
    /// Position among the universals, for universal variables.
    universal: Option<u32>,
}

/// A closed QBF in prenex CNF.
///
/// Construction merges adjacent blocks with the same quantifier and drops empty
/// blocks, so consecutive blocks always alternate. Variable names are optional
/// labels and do not take part in equality.
#[derive(Clone)]
pub struct Pcnf {
    num_vars: u32,
    prefix: Vec<QuantBlock>,
    matrix: Vec<Clause>,
    names: BTreeMap<Var, String>,
    info: Vec<Option<VarInfo>>,
    universals: Vec<Var>,
}

impl Pcnf {
    pub fn new(
        num_vars: u32,
        prefix: Vec<QuantBlock>,
        matrix: Vec<Clause>,
    ) -> Result<Pcnf, FormulaError> {
        let mut merged: Vec<QuantBlock> = Vec::new();
        for block in prefix {
            if block.vars.is_empty() {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.quantifier == block.quantifier => last.vars.extend(block.vars),
                _ => merged.push(block),
            }
        }

        let mut info = vec![None; num_vars as usize + 1];
        let mut universals = Vec::new();
        for (b, block) in merged.iter().enumerate() {
            for &var in &block.vars {
                let slot = info.get_mut(var.index() as usize).ok_or(FormulaError::VarOutOfRange {
                    var,
                    declared: num_vars,
                })?;
                if slot.is_some() {
                    return Err(FormulaError::DuplicateQuantification(var));
                }
                let universal = (block.quantifier == Quantifier::Forall).then(|| {
                    universals.push(var);
                    universals.len() as u32 - 1
                });
                *slot = Some(VarInfo {
                    block: b as u32,
                    quantifier: block.quantifier,
                    universal,
                });
            }
        }
        for clause in &matrix {
            for lit in clause.iter() {
                let var = lit.var();
                match info.get(var.index() as usize) {
                    None => {
                        return Err(FormulaError::VarOutOfRange {
                            var,
                            declared: num_vars,
                        })
                    }
                    Some(None) => return Err(FormulaError::FreeVariable(var)),
                    Some(Some(_)) => {}
                }
            }
        }
        Ok(Pcnf {
            num_vars,
            prefix: merged,
            matrix,
            names: BTreeMap::new(),
            info,
            universals,
        })
    }

    /// Attaches a human-readable label to a variable.
    pub fn set_name(&mut self, var: Var, name: impl Into<String>) {
        self.names.insert(var, name.into());
    }

    pub fn name(&self, var: Var) -> Option<&str> {
        self.names.get(&var).map(String::as_str)
    }

    pub fn names(&self) -> &BTreeMap<Var, String> {
        &self.names
    }

    /// Looks a variable up by label.
    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(&v, _)| v)
    }

    /// Label of `var`, or its index when unnamed.
    pub fn display_var(&self, var: Var) -> String {
        self.name(var).map_or_else(|| var.to_string(), str::to_string)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn prefix(&self) -> &[QuantBlock] {
        &self.prefix
    }

    pub fn matrix(&self) -> &[Clause] {
        &self.matrix
    }

    pub fn clause(&self, index: usize) -> Option<&Clause> {
        self.matrix.get(index)
    }

    fn info(&self, var: Var) -> Option<VarInfo> {
        self.info.get(var.index() as usize).copied().flatten()
    }

    pub fn quantifier(&self, var: Var) -> Option<Quantifier> {
        self.info(var).map(|i| i.quantifier)
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.info(var).is_some()
    }

    pub fn is_existential(&self, var: Var) -> bool {
        self.quantifier(var) == Some(Quantifier::Exists)
    }

    pub fn is_universal(&self, var: Var) -> bool {
        self.quantifier(var) == Some(Quantifier::Forall)
    }

    /// Index of the quantifier block holding `var`.
    pub fn block_of(&self, var: Var) -> Option<usize> {
        self.info(var).map(|i| i.block as usize)
    }

    /// True iff `a` is quantified in a strictly earlier block than `b`.
    ///
    /// Variables of the same block are unordered with respect to each other.
    pub fn precedes(&self, a: Var, b: Var) -> bool {
        match (self.info(a), self.info(b)) {
            (Some(ia), Some(ib)) => ia.block < ib.block,
            _ => false,
        }
    }

    /// Universal variables in prefix order.
    pub fn universals(&self) -> &[Var] {
        &self.universals
    }

    /// Position of `var` within [`Pcnf::universals`].
    pub fn universal_position(&self, var: Var) -> Option<usize> {
        self.info(var).and_then(|i| i.universal).map(|p| p as usize)
    }

    /// Existential variables in prefix order.
    pub fn existentials(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars_in_order()
            .filter(move |&v| self.is_existential(v))
    }

    /// All quantified variables in prefix order.
    pub fn vars_in_order(&self) -> impl Iterator<Item = Var> + '_ {
        self.prefix.iter().flat_map(|b| b.vars.iter().copied())
    }

    pub fn num_existentials(&self) -> usize {
        self.existentials().count()
    }

    pub fn num_quantified(&self) -> usize {
        self.prefix.iter().map(|b| b.vars.len()).sum()
    }

    /// Applies a partial assignment to existential variables.
    ///
    /// Satisfied clauses are dropped, falsified literals removed, and assigned
    /// variables leave the prefix. Variable indices are not renumbered.
    pub fn restrict(&self, rho: &PartialAssignment) -> Result<Pcnf, RestrictError> {
        for var in rho.vars() {
            match self.quantifier(var) {
                None => return Err(RestrictError::Unknown(var)),
                Some(Quantifier::Forall) => return Err(RestrictError::Universal(var)),
                Some(Quantifier::Exists) => {}
            }
        }
        let prefix = self
            .prefix
            .iter()
            .map(|b| {
                QuantBlock::new(
                    b.quantifier,
                    b.vars.iter().copied().filter(|&v| rho.get(v).is_none()).collect(),
                )
            })
            .collect();
        let matrix = self
            .matrix
            .iter()
            .filter(|c| !c.iter().any(|l| rho.lit_value(l) == Some(true)))
            .map(|c| c.iter().filter(|&l| rho.lit_value(l).is_none()).collect())
            .collect();
        let mut out = Pcnf::new(self.num_vars, prefix, matrix)
            .expect("restriction of a valid formula is valid");
        for (&v, name) in &self.names {
            if rho.get(v).is_none() {
                out.set_name(v, name.clone());
            }
        }
        Ok(out)
    }

    /// Renumbers variables to `1..=k` in prefix order and sorts the matrix.
    ///
    /// Two formulas that agree up to clause order, literal order and a
    /// prefix-order-preserving renaming have equal normal forms.
    pub fn normalized(&self) -> Pcnf {
        let mut map = vec![None; self.num_vars as usize + 1];
        for (k, v) in self.vars_in_order().enumerate() {
            map[v.index() as usize] = Some(Var::new(k as u32 + 1));
        }
        let rename = |v: Var| map[v.index() as usize].expect("quantified variable");
        let prefix = self
            .prefix
            .iter()
            .map(|b| QuantBlock::new(b.quantifier, b.vars.iter().map(|&v| rename(v)).collect()))
            .collect();
        let mut matrix: Vec<Clause> = self
            .matrix
            .iter()
            .map(|c| c.iter().map(|l| rename(l.var()).lit(l.is_positive())).collect())
            .collect();
        matrix.sort();
        let mut out = Pcnf::new(self.num_quantified() as u32, prefix, matrix)
            .expect("renaming preserves validity");
        for (&v, name) in &self.names {
            out.set_name(rename(v), name.clone());
        }
        out
    }

    /// Same prefix blocks (as variable sets) and same clause multiset.
    pub fn structurally_eq(&self, other: &Pcnf) -> bool {
        let blocks = |f: &Pcnf| -> Vec<(Quantifier, Vec<Var>)> {
            f.prefix
                .iter()
                .map(|b| {
                    let mut vars = b.vars.clone();
                    vars.sort_unstable();
                    (b.quantifier, vars)
                })
                .collect()
        };
        let clauses = |f: &Pcnf| {
            let mut m = f.matrix.clone();
            m.sort();
            m
        };
        blocks(self) == blocks(other) && clauses(self) == clauses(other)
    }
}

impl PartialEq for Pcnf {
    fn eq(&self, other: &Pcnf) -> bool {
        self.num_vars == other.num_vars && self.prefix == other.prefix && self.matrix == other.matrix
    }
}

impl Eq for Pcnf {}

impl fmt::Debug for Pcnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pcnf")
            .field("num_vars", &self.num_vars)
            .field("prefix", &self.prefix)
            .field("matrix", &self.matrix)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    #[test]
    fn adjacent_blocks_merge() {
        let f = Pcnf::new(
            3,
            vec![
                QuantBlock::exists([v(1)]),
                QuantBlock::exists([v(2)]),
                QuantBlock::forall([]),
                QuantBlock::forall([v(3)]),
            ],
            vec![Clause::from_dimacs(&[1, 2, 3])],
        )
        .unwrap();
        assert_eq!(f.prefix().len(), 2);
        assert_eq!(f.prefix()[0].vars, vec![v(1), v(2)]);
        assert_eq!(f.universals(), &[v(3)]);
        assert!(f.precedes(v(1), v(3)));
        assert!(!f.precedes(v(1), v(2)));
    }

    #[test]
    fn rejects_free_and_duplicate_variables() {
        let err = Pcnf::new(2, vec![QuantBlock::exists([v(1)])], vec![Clause::from_dimacs(&[2])]);
        assert_eq!(err.unwrap_err(), FormulaError::FreeVariable(v(2)));
        let err = Pcnf::new(
            2,
            vec![QuantBlock::exists([v(1)]), QuantBlock::forall([v(1)])],
            vec![],
        );
        assert_eq!(err.unwrap_err(), FormulaError::DuplicateQuantification(v(1)));
        let err = Pcnf::new(1, vec![QuantBlock::exists([v(2)])], vec![]);
        assert!(matches!(err, Err(FormulaError::VarOutOfRange { .. })));
    }

    fn sample() -> Pcnf {
        // ∃1 ∀2 ∃3 . (1 ∨ 2 ∨ 3) ∧ (¬1 ∨ ¬3) ∧ (3)
        Pcnf::new(
            3,
            vec![
                QuantBlock::exists([v(1)]),
                QuantBlock::forall([v(2)]),
                QuantBlock::exists([v(3)]),
            ],
            vec![
                Clause::from_dimacs(&[1, 2, 3]),
                Clause::from_dimacs(&[-1, -3]),
                Clause::from_dimacs(&[3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn restriction_simplifies() {
        let f = sample();
        let rho = PartialAssignment::new().with(v(3), true);
        let r = f.restrict(&rho).unwrap();
        assert_eq!(r.matrix(), &[Clause::from_dimacs(&[-1])]);
        assert_eq!(r.prefix().len(), 2);
        assert!(!r.contains_var(v(3)));
    }

    #[test]
    fn restriction_errors() {
        let f = sample();
        assert_eq!(
            f.restrict(&PartialAssignment::new().with(v(2), true)).unwrap_err(),
            RestrictError::Universal(v(2))
        );
        let unknown = PartialAssignment::new().with(v(9), true);
        assert_eq!(f.restrict(&unknown).unwrap_err(), RestrictError::Unknown(v(9)));
    }

    #[test]
    fn empty_restriction_is_identity() {
        let f = sample();
        assert_eq!(f.restrict(&PartialAssignment::new()).unwrap(), f);
    }

    #[test]
    fn removing_a_block_merges_neighbours() {
        // ∀1 ∃2 ∀3 with 2 assigned -> single universal block
        let f = Pcnf::new(
            3,
            vec![
                QuantBlock::forall([v(1)]),
                QuantBlock::exists([v(2)]),
                QuantBlock::forall([v(3)]),
            ],
            vec![Clause::from_dimacs(&[1, 2, 3])],
        )
        .unwrap();
        let r = f.restrict(&PartialAssignment::new().with(v(2), false)).unwrap();
        assert_eq!(r.prefix().len(), 1);
        assert_eq!(r.prefix()[0].vars, vec![v(1), v(3)]);
    }

    #[test]
    fn normal_form_ignores_order_and_renaming() {
        let a = sample();
        let b = Pcnf::new(
            5,
            vec![
                QuantBlock::exists([v(2)]),
                QuantBlock::forall([v(4)]),
                QuantBlock::exists([v(5)]),
            ],
            vec![
                Clause::from_dimacs(&[5]),
                Clause::from_dimacs(&[-5, -2]),
                Clause::from_dimacs(&[5, 4, 2]),
            ],
        )
        .unwrap();
        assert!(!a.structurally_eq(&b));
        assert_eq!(a.normalized(), b.normalized());
    }
}
