//! Strategy extraction from refutations.

use thiserror::Error;

use super::checker::{replay, CheckerConfig, StepError};
use super::proof::Proof;
use crate::qbf::Pcnf;
use crate::strategy::Strategy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("proof does not replay: step {}: {error}", step + 1)]
    Replay { step: usize, error: StepError },
    #[error("proof has no steps")]
    EmptyProof,
    #[error("final clause is not empty")]
    NotRefutation,
}

/// The final line's merge-maps. Trivial maps pass through as free-choice markers.
pub fn extract_strategy(formula: &Pcnf, proof: &Proof) -> Result<Strategy, ExtractError> {
    let derivation = replay(formula, proof, CheckerConfig::permissive())
        .map_err(|(step, error)| ExtractError::Replay { step, error })?;
    if derivation.lines.is_empty() {
        return Err(ExtractError::EmptyProof);
    }
    derivation.into_strategy().ok_or(ExtractError::NotRefutation)
}
