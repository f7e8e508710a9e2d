//! Semantic line invariant: for every total assignment α falsifying the
//! line's clause, every play in which the universals answer with the line's
//! maps (and with any value where the map is trivial) falsifies some clause
//! of the matrix.

use thiserror::Error;

use super::checker::{replay, CheckerConfig, StepError};
use super::proof::Proof;
use super::rules::ProofLine;
use crate::mergemap::MapStore;
use crate::qbf::game::Board;
use crate::qbf::{GameError, Pcnf};

/// Default bound on the number of free existentials per line.
pub const DEFAULT_INVARIANT_BUDGET: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("proof does not replay: step {}: {error}", step + 1)]
    Replay { step: usize, error: StepError },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Checks one line against the formula.
pub fn line_invariant_holds(
    formula: &Pcnf,
    store: &MapStore,
    line: &ProofLine,
    max_existentials: usize,
) -> Result<bool, GameError> {
    let mut board = Board::new(formula);
    line_holds_on(&mut board, formula, store, line, max_existentials)
}

fn line_holds_on(
    board: &mut Board<'_>,
    formula: &Pcnf,
    store: &MapStore,
    line: &ProofLine,
    max_existentials: usize,
) -> Result<bool, GameError> {
    if line.clause.is_tautology() {
        // no assignment falsifies it
        return Ok(true);
    }
    let free = formula.num_existentials() - line.clause.len();
    if free > max_existentials {
        return Err(GameError::BudgetExceeded {
            count: free,
            limit: max_existentials,
        });
    }
    for lit in line.clause.iter() {
        board.assign(lit.var(), !lit.is_positive());
    }
    let result = board.universal_wins(0, store, &line.maps);
    for lit in line.clause.iter() {
        board.unassign(lit.var());
    }
    Ok(result?)
}

/// Index of the first line violating the invariant, if any.
pub fn first_invariant_violation(
    formula: &Pcnf,
    store: &MapStore,
    lines: &[ProofLine],
    max_existentials: usize,
) -> Result<Option<usize>, GameError> {
    let mut board = Board::new(formula);
    for (k, line) in lines.iter().enumerate() {
        if !line_holds_on(&mut board, formula, store, line, max_existentials)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Replays `proof` with every rule enabled and checks the invariant on each line.
pub fn check_line_invariant_with_budget(
    formula: &Pcnf,
    proof: &Proof,
    max_existentials: usize,
) -> Result<Option<usize>, InvariantError> {
    let derivation = replay(formula, proof, CheckerConfig::permissive())
        .map_err(|(step, error)| InvariantError::Replay { step, error })?;
    Ok(first_invariant_violation(
        formula,
        &derivation.store,
        &derivation.lines,
        max_existentials,
    )?)
}

/// `Ok(true)` iff every line of the proof satisfies the invariant.
pub fn check_line_invariant(formula: &Pcnf, proof: &Proof) -> Result<bool, InvariantError> {
    check_line_invariant_with_budget(formula, proof, DEFAULT_INVARIANT_BUDGET).map(|v| v.is_none())
}
