//! QBF data model: literals, clauses, prenex CNF formulas, QDIMACS I/O,
//! restriction, and the brute-force game oracle.

mod assignment;
mod clause;
mod formula;
pub mod game;
mod lit;
pub mod qdimacs;

pub use assignment::{AssignmentError, PartialAssignment, Valuation};
pub use clause::Clause;
pub use formula::{FormulaError, Pcnf, QuantBlock, Quantifier, RestrictError};
pub use game::{
    check_universal_strategy, check_universal_strategy_with_budget, eval_qbf, eval_qbf_with_budget,
    GameError, DEFAULT_GAME_BUDGET,
};
pub use lit::{Lit, Var};
pub use qdimacs::{formula_hash, parse_qdimacs, write_qdimacs, write_qdimacs_with_comments, ParseError};
