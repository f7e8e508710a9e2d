//! The M-Res calculus: proof lines, inference rules, proof objects, the
//! replaying checker, the semantic line invariant, strategy extraction and
//! circuit export.

pub mod checker;
pub mod circuit;
mod extract;
pub mod invariant;
pub mod proof;
pub mod rules;

pub use checker::{
    check_proof, replay, CheckFailure, CheckReport, Checker, CheckerConfig, Derivation, Mode, RuleCounts,
    SemanticCheck, StepError,
};
pub use circuit::{export_strategy_circuit, strategy_circuit, Circuit, CircuitError};
pub use extract::{extract_strategy, ExtractError};
pub use invariant::{
    check_line_invariant, check_line_invariant_with_budget, first_invariant_violation, line_invariant_holds,
    InvariantError, DEFAULT_INVARIANT_BUDGET,
};
pub use proof::{Proof, ProofParseError, RuleApp};
pub use rules::{axiom_line, resolve_lines, weaken_exist, weaken_strategy, ProofLine, RuleError, Side};
