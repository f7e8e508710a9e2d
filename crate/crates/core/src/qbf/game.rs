//! Brute-force evaluation of the two-player game on a QBF.
//!
//! Variables are set in prefix order. Clause status is tracked
//! incrementally (counts of true and false literals per clause), so a branch
//! ends as soon as some clause is falsified or every clause is satisfied.
//! Everything here is exponential and guarded by a variable budget.

use thiserror::Error;

use super::assignment::Valuation;
use super::formula::{Pcnf, Quantifier};
use super::lit::Var;
use crate::mergemap::{MapError, MapStore, MergeMap};
use crate::strategy::Strategy;

/// Default bound on the number of variables a brute-force search may branch on.
pub const DEFAULT_GAME_BUDGET: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("{count} variables exceed the brute-force budget of {limit}")]
    BudgetExceeded { count: usize, limit: usize },
    #[error(transparent)]
    Map(#[from] MapError),
}

pub(crate) struct Board<'f> {
    formula: &'f Pcnf,
    order: Vec<Var>,
    occurs: Vec<Vec<(u32, bool)>>,
    len: Vec<u32>,
    true_count: Vec<u32>,
    false_count: Vec<u32>,
    falsified: usize,
    satisfied: usize,
    values: Vec<Option<bool>>,
}

impl Valuation for Board<'_> {
    fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.index() as usize).copied().flatten()
    }
}

impl<'f> Board<'f> {
    pub(crate) fn new(formula: &'f Pcnf) -> Board<'f> {
        let n = formula.num_vars() as usize + 1;
        let mut occurs = vec![Vec::new(); n];
        let mut len = Vec::with_capacity(formula.matrix().len());
        let mut falsified = 0;
        for (c, clause) in formula.matrix().iter().enumerate() {
            for lit in clause.iter() {
                occurs[lit.var().index() as usize].push((c as u32, lit.is_positive()));
            }
            len.push(clause.len() as u32);
            if clause.is_empty() {
                falsified += 1;
            }
        }
        let m = len.len();
        Board {
            formula,
            order: formula.vars_in_order().collect(),
            occurs,
            len,
            true_count: vec![0; m],
            false_count: vec![0; m],
            falsified,
            satisfied: 0,
            values: vec![None; n],
        }
    }

    pub(crate) fn assign(&mut self, var: Var, value: bool) {
        let idx = var.index() as usize;
        debug_assert!(self.values[idx].is_none());
        self.values[idx] = Some(value);
        for &(c, positive) in &self.occurs[idx] {
            let c = c as usize;
            if positive == value {
                if self.true_count[c] == 0 {
                    self.satisfied += 1;
                }
                self.true_count[c] += 1;
            } else {
                self.false_count[c] += 1;
                if self.false_count[c] == self.len[c] {
                    self.falsified += 1;
                }
            }
        }
    }

    pub(crate) fn unassign(&mut self, var: Var) {
        let idx = var.index() as usize;
        let value = self.values[idx].take().expect("unassigning a free variable");
        for &(c, positive) in &self.occurs[idx] {
            let c = c as usize;
            if positive == value {
                self.true_count[c] -= 1;
                if self.true_count[c] == 0 {
                    self.satisfied -= 1;
                }
            } else {
                if self.false_count[c] == self.len[c] {
                    self.falsified -= 1;
                }
                self.false_count[c] -= 1;
            }
        }
    }

    fn all_satisfied(&self) -> bool {
        self.satisfied == self.len.len()
    }

    /// Minimax value from position `pos` of the prefix: true iff the
    /// existential player wins.
    fn exists_wins(&mut self, pos: usize) -> bool {
        if self.falsified > 0 {
            return false;
        }
        if self.all_satisfied() {
            return true;
        }
        let Some(&var) = self.order.get(pos) else {
            // every variable set: some clause is either true or false
            unreachable!("total assignment decides every clause")
        };
        if self.value(var).is_some() {
            return self.exists_wins(pos + 1);
        }
        let existential = self.formula.quantifier(var) == Some(Quantifier::Exists);
        for value in [false, true] {
            self.assign(var, value);
            let wins = self.exists_wins(pos + 1);
            self.unassign(var);
            if wins == existential {
                return wins;
            }
        }
        !existential
    }

    /// True iff every play from `pos` in which universals follow `maps`
    /// (trivial maps: any value) falsifies some clause.
    pub(crate) fn universal_wins(
        &mut self,
        pos: usize,
        store: &MapStore,
        maps: &[MergeMap],
    ) -> Result<bool, MapError> {
        if self.falsified > 0 {
            return Ok(true);
        }
        if self.all_satisfied() {
            return Ok(false);
        }
        let Some(&var) = self.order.get(pos) else {
            unreachable!("total assignment decides every clause")
        };
        if self.value(var).is_some() {
            return self.universal_wins(pos + 1, store, maps);
        }
        let forced = match self.formula.universal_position(var) {
            Some(k) if !maps[k].is_trivial() => Some(store.evaluate(&maps[k], self)?),
            _ => None,
        };
        let choices: &[bool] = match forced {
            Some(false) => &[false],
            Some(true) => &[true],
            None => &[false, true],
        };
        for &value in choices {
            self.assign(var, value);
            let wins = self.universal_wins(pos + 1, store, maps);
            self.unassign(var);
            if !wins? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Decides the QBF by game-tree search. Refuses formulas with more than
/// `max_vars` quantified variables.
pub fn eval_qbf_with_budget(formula: &Pcnf, max_vars: usize) -> Result<bool, GameError> {
    let count = formula.num_quantified();
    if count > max_vars {
        return Err(GameError::BudgetExceeded {
            count,
            limit: max_vars,
        });
    }
    Ok(Board::new(formula).exists_wins(0))
}

/// [`eval_qbf_with_budget`] with the default budget.
pub fn eval_qbf(formula: &Pcnf) -> Result<bool, GameError> {
    eval_qbf_with_budget(formula, DEFAULT_GAME_BUDGET)
}

/// True iff `strategy` wins for the universal player: every existential
/// assignment, answered by the maps (and by every value for trivially mapped
/// universals), falsifies some clause.
pub fn check_universal_strategy_with_budget(
    formula: &Pcnf,
    strategy: &Strategy,
    max_existentials: usize,
) -> Result<bool, GameError> {
    strategy.validate(formula)?;
    let count = formula.num_existentials();
    if count > max_existentials {
        return Err(GameError::BudgetExceeded {
            count,
            limit: max_existentials,
        });
    }
    Ok(Board::new(formula).universal_wins(0, &strategy.store, &strategy.maps)?)
}

pub fn check_universal_strategy(formula: &Pcnf, strategy: &Strategy) -> Result<bool, GameError> {
    check_universal_strategy_with_budget(formula, strategy, DEFAULT_GAME_BUDGET)
}
