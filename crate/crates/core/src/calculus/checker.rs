//! Proof replay and checking.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::invariant::{first_invariant_violation, DEFAULT_INVARIANT_BUDGET};
use super::proof::{Proof, RuleApp};
use super::rules::{axiom_line, resolve_lines, weaken_exist, weaken_strategy, ProofLine, RuleError};
use crate::mergemap::{MapStore, NodeId};
use crate::qbf::{formula_hash, Pcnf, Var};
use crate::strategy::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticCheck {
    Off,
    /// Brute-force the per-line invariant after a successful replay.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckerConfig {
    pub allow_weaken_exist: bool,
    pub allow_weaken_strategy: bool,
    pub require_regular: bool,
    pub forbid_tautologies: bool,
    pub semantic_invariant: SemanticCheck,
    /// Existential-variable budget for the semantic check.
    pub invariant_budget: usize,
}

impl CheckerConfig {
    pub fn for_mode(mode: Mode) -> CheckerConfig {
        CheckerConfig {
            allow_weaken_exist: matches!(mode, Mode::We | Mode::Wef),
            allow_weaken_strategy: matches!(mode, Mode::Wf | Mode::Wef),
            require_regular: false,
            forbid_tautologies: false,
            semantic_invariant: SemanticCheck::Off,
            invariant_budget: DEFAULT_INVARIANT_BUDGET,
        }
    }

    /// Plain M-Res: axioms and resolution only.
    pub fn plain() -> CheckerConfig {
        CheckerConfig::for_mode(Mode::Plain)
    }

    /// Every rule allowed, no regularity requirement.
    pub fn permissive() -> CheckerConfig {
        CheckerConfig::for_mode(Mode::Wef)
    }

    pub fn regular(mut self) -> CheckerConfig {
        self.require_regular = true;
        self
    }

    pub fn with_semantic_check(mut self) -> CheckerConfig {
        self.semantic_invariant = SemanticCheck::Exhaustive;
        self
    }
}

impl Default for CheckerConfig {
    fn default() -> CheckerConfig {
        CheckerConfig::plain()
    }
}

/// Rule sets: plain M-Res, with existential weakening, with strategy
/// weakening, or with both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Plain,
    We,
    Wf,
    Wef,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "plain" => Ok(Mode::Plain),
            "we" => Ok(Mode::We),
            "wf" => Ok(Mode::Wf),
            "wef" => Ok(Mode::Wef),
            _ => Err(format!("unknown mode `{s}` (expected plain, we, wf or wef)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::We => "we",
            Mode::Wf => "wf",
            Mode::Wef => "wef",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("rule {0} is not enabled")]
    Disallowed(&'static str),
    #[error("reference to line {target}, which does not precede this step")]
    ForwardReference { target: usize },
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("irregular: pivot {0} already resolved on a path to this step")]
    Irregular(Var),
    #[error("derived clause is tautological")]
    Tautology,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts {
    pub axiom: usize,
    pub resolve: usize,
    pub weaken_exist: usize,
    pub weaken_strategy: usize,
}

/// Lines reconstructed from a proof, with bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    pub store: MapStore,
    pub lines: Vec<ProofLine>,
    /// Per line: every pivot resolved on some path from a leaf to it.
    pub pivot_sets: Vec<BTreeSet<Var>>,
    pub counts: RuleCounts,
    pub max_map_nodes: usize,
    pub regular: bool,
    pub tautology_lines: usize,
}

impl Derivation {
    pub fn last(&self) -> Option<&ProofLine> {
        self.lines.last()
    }

    pub fn is_refutation(&self) -> bool {
        self.last().is_some_and(|l| l.clause.is_empty())
    }

    /// The final line's maps as a strategy, if the derivation is a refutation.
    pub fn into_strategy(self) -> Option<Strategy> {
        if !self.is_refutation() {
            return None;
        }
        let maps = self.lines.last().expect("non-empty").maps.clone();
        Some(Strategy::new(self.store, maps))
    }
}

/// Replays rule applications one at a time against a formula.
pub struct Checker<'f> {
    formula: &'f Pcnf,
    config: CheckerConfig,
    derivation: Derivation,
    node_counts: HashMap<NodeId, usize>,
}

impl<'f> Checker<'f> {
    pub fn new(formula: &'f Pcnf, config: CheckerConfig) -> Checker<'f> {
        Checker {
            formula,
            config,
            derivation: Derivation {
                regular: true,
                ..Derivation::default()
            },
            node_counts: HashMap::new(),
        }
    }

    pub fn formula(&self) -> &'f Pcnf {
        self.formula
    }

    pub fn lines(&self) -> &[ProofLine] {
        &self.derivation.lines
    }

    pub fn store(&self) -> &MapStore {
        &self.derivation.store
    }

    pub fn store_mut(&mut self) -> &mut MapStore {
        &mut self.derivation.store
    }

    /// Direct access to an already derived line, for fault injection.
    pub fn line_mut(&mut self, id: usize) -> &mut ProofLine {
        &mut self.derivation.lines[id]
    }

    fn line(&self, id: usize) -> Result<&ProofLine, StepError> {
        self.derivation
            .lines
            .get(id)
            .ok_or(StepError::ForwardReference { target: id })
    }

    /// Applies one step; on success the new line gets the next id, which is returned.
    pub fn apply(&mut self, step: &RuleApp) -> Result<usize, StepError> {
        let f = self.formula;
        let (line, pivots) = match *step {
            RuleApp::Axiom { clause } => (axiom_line(f, &self.derivation.store, clause)?, BTreeSet::new()),
            RuleApp::Resolve { left, right, pivot } => {
                let l1 = self.line(left)?.clone();
                let l2 = self.line(right)?.clone();
                let line = resolve_lines(f, &mut self.derivation.store, &l1, &l2, pivot)?;
                let (p1, p2) = (&self.derivation.pivot_sets[left], &self.derivation.pivot_sets[right]);
                let repeated = p1.contains(&pivot) || p2.contains(&pivot);
                if repeated {
                    if self.config.require_regular {
                        return Err(StepError::Irregular(pivot));
                    }
                    self.derivation.regular = false;
                }
                let mut pivots: BTreeSet<Var> = p1.union(p2).copied().collect();
                pivots.insert(pivot);
                (line, pivots)
            }
            RuleApp::WeakenExist { source, lit } => {
                if !self.config.allow_weaken_exist {
                    return Err(StepError::Disallowed("weaken-exist"));
                }
                let line = weaken_exist(f, self.line(source)?, lit)?;
                (line, self.derivation.pivot_sets[source].clone())
            }
            RuleApp::WeakenStrategy {
                source,
                universal,
                value,
            } => {
                if !self.config.allow_weaken_strategy {
                    return Err(StepError::Disallowed("weaken-strategy"));
                }
                let line = weaken_strategy(f, &self.derivation.store, self.line(source)?, universal, value)?;
                (line, self.derivation.pivot_sets[source].clone())
            }
        };
        if line.clause.is_tautology() {
            if self.config.forbid_tautologies {
                return Err(StepError::Tautology);
            }
            self.derivation.tautology_lines += 1;
        }
        let counts = &mut self.derivation.counts;
        match step {
            RuleApp::Axiom { .. } => counts.axiom += 1,
            RuleApp::Resolve { .. } => counts.resolve += 1,
            RuleApp::WeakenExist { .. } => counts.weaken_exist += 1,
            RuleApp::WeakenStrategy { .. } => counts.weaken_strategy += 1,
        }
        for map in &line.maps {
            if let Some(root) = map.root() {
                let store = &self.derivation.store;
                let size = *self
                    .node_counts
                    .entry(root)
                    .or_insert_with(|| store.reachable(root).len());
                self.derivation.max_map_nodes = self.derivation.max_map_nodes.max(size);
            }
        }
        self.derivation.lines.push(line);
        self.derivation.pivot_sets.push(pivots);
        Ok(self.derivation.lines.len() - 1)
    }

    pub fn finish(self) -> Derivation {
        self.derivation
    }
}

/// Replays a whole proof, stopping at the first failing step.
pub fn replay(formula: &Pcnf, proof: &Proof, config: CheckerConfig) -> Result<Derivation, (usize, StepError)> {
    let mut checker = Checker::new(formula, config);
    for (k, step) in proof.steps.iter().enumerate() {
        checker.apply(step).map_err(|e| (k, e))?;
    }
    Ok(checker.finish())
}

/// Why a check failed: an offending step (0-based) or a named property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub step: Option<usize>,
    pub property: &'static str,
    pub message: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {}: {}", s + 1, self.message),
            None => write!(f, "{}: {}", self.property, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub valid: bool,
    pub failure: Option<CheckFailure>,
    pub steps: usize,
    pub lines: usize,
    pub counts: RuleCounts,
    pub max_map_nodes: usize,
    pub final_empty: bool,
    pub regular: bool,
    pub tautology_lines: usize,
    /// Outcome of the semantic check, when it ran.
    pub invariant: Option<bool>,
}

impl CheckReport {
    pub fn is_refutation(&self) -> bool {
        self.valid && self.final_empty
    }

    /// 0-based index of the failing step, if the failure is tied to one.
    pub fn failed_step(&self) -> Option<usize> {
        self.failure.as_ref().and_then(|f| f.step)
    }

    pub fn verdict(&self) -> &'static str {
        match (self.valid, self.final_empty) {
            (false, _) => "invalid",
            (true, true) => "valid refutation",
            (true, false) => "valid derivation, not a refutation",
        }
    }

    /// `key=value` lines for scripts.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("valid", self.valid.to_string());
        kv("refutation", self.is_refutation().to_string());
        kv("steps", self.steps.to_string());
        kv("lines", self.lines.to_string());
        kv("axioms", self.counts.axiom.to_string());
        kv("resolutions", self.counts.resolve.to_string());
        kv("weaken_exist", self.counts.weaken_exist.to_string());
        kv("weaken_strategy", self.counts.weaken_strategy.to_string());
        kv("max_map_nodes", self.max_map_nodes.to_string());
        kv("regular", self.regular.to_string());
        kv("tautology_lines", self.tautology_lines.to_string());
        kv(
            "invariant",
            self.invariant.map_or_else(|| "unchecked".to_string(), |b| b.to_string()),
        );
        if let Some(fail) = &self.failure {
            kv(
                "failed_step",
                fail.step.map_or_else(|| "none".to_string(), |s| (s + 1).to_string()),
            );
            kv("failed_property", fail.property.to_string());
            kv("failure", fail.message.clone());
        }
        out
    }
}

/// Replays `proof` under `config` and reports. Never errors: every problem
/// becomes a report entry.
pub fn check_proof(formula: &Pcnf, proof: &Proof, config: CheckerConfig) -> CheckReport {
    let mut report = CheckReport {
        valid: false,
        failure: None,
        steps: proof.steps.len(),
        lines: 0,
        counts: RuleCounts::default(),
        max_map_nodes: 0,
        final_empty: false,
        regular: true,
        tautology_lines: 0,
        invariant: None,
    };
    if let Some(hash) = &proof.formula_hash {
        let actual = formula_hash(formula);
        if *hash != actual {
            report.failure = Some(CheckFailure {
                step: None,
                property: "formula-hash",
                message: format!("proof is for formula {hash}, got {actual}"),
            });
            return report;
        }
    }

    let mut checker = Checker::new(formula, config);
    let mut failure = None;
    for (k, step) in proof.steps.iter().enumerate() {
        if let Err(e) = checker.apply(step) {
            let property = match e {
                StepError::Rule(RuleError::Blocked(_)) => "blocked",
                StepError::Irregular(_) => "regularity",
                StepError::Disallowed(_) => "rule-set",
                StepError::Tautology => "tautology",
                _ => "rule",
            };
            failure = Some(CheckFailure {
                step: Some(k),
                property,
                message: e.to_string(),
            });
            break;
        }
    }
    let derivation = checker.finish();
    report.lines = derivation.lines.len();
    report.counts = derivation.counts;
    report.max_map_nodes = derivation.max_map_nodes;
    report.regular = derivation.regular;
    report.tautology_lines = derivation.tautology_lines;
    if failure.is_none() {
        report.final_empty = derivation.is_refutation();
        if config.semantic_invariant == SemanticCheck::Exhaustive {
            match first_invariant_violation(formula, &derivation.store, &derivation.lines, config.invariant_budget) {
                Ok(None) => report.invariant = Some(true),
                Ok(Some(line)) => {
                    report.invariant = Some(false);
                    failure = Some(CheckFailure {
                        step: Some(line),
                        property: "line-invariant",
                        message: "line invariant violated".into(),
                    });
                }
                Err(e) => {
                    failure = Some(CheckFailure {
                        step: None,
                        property: "line-invariant",
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    report.valid = failure.is_none();
    report.failure = failure;
    report
}
