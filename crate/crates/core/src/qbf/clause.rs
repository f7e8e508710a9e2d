use std::fmt;

use super::lit::{Lit, Var};

/// A disjunction of literals with set semantics.
///
/// Literals are kept sorted and free of duplicates, so two clauses over the
/// same literal set compare equal regardless of construction order. A clause
/// holding both polarities of a variable is representable; use
/// [`Clause::is_tautology`] to detect it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Clause {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Clause {
        Clause::default()
    }

    pub fn from_dimacs(codes: &[i64]) -> Clause {
        Clause::new(codes.iter().map(|&c| Lit::from_dimacs(c)))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.contains(var.positive()) || self.contains(var.negative())
    }

    /// True if the clause contains some literal together with its complement.
    pub fn is_tautology(&self) -> bool {
        // sorted order places x and ¬x next to each other
        self.lits.windows(2).any(|w| w[0] == !w[1])
    }

    /// Returns the clause with `lit` added (no-op if already present).
    pub fn with(&self, lit: Lit) -> Clause {
        let mut out = self.clone();
        if let Err(pos) = out.lits.binary_search(&lit) {
            out.lits.insert(pos, lit);
        }
        out
    }

    /// Returns the clause with `lit` removed.
    pub fn without(&self, lit: Lit) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    pub fn union(&self, other: &Clause) -> Clause {
        Clause::new(self.lits.iter().chain(other.lits.iter()).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.lits.iter().copied()
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Clause {
        Clause::new(iter)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.lits.iter()).finish()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "[]");
        }
        for (k, lit) in self.lits.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}
