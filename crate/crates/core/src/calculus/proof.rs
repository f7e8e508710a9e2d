//! Proof objects and their text format.
//!
//! ```text
//! c optional comments
//! p mresproof <formula-hash> <#steps>
//! A <id> <clauseIndex>
//! R <id> <leftId> <rightId> <pivotVarIndex>
//! WE <id> <srcId> <±litIndex>
//! WF <id> <srcId> <uVarIndex> <0|1>
//! ```
//!
//! Line ids and clause indices are 1-based in the file and must run `1..=k`
//! in order. In memory, [`RuleApp`] uses 0-based indices. Only rule
//! applications are stored; lines are rebuilt by the checker.

use std::fmt::Write as _;

use thiserror::Error;

use crate::qbf::{Lit, Var};

/// One inference step. Line references point to earlier steps (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleApp {
    Axiom {
        clause: usize,
    },
    /// `left` holds the positive pivot literal, `right` the negative one.
    Resolve {
        left: usize,
        right: usize,
        pivot: Var,
    },
    WeakenExist {
        source: usize,
        lit: Lit,
    },
    WeakenStrategy {
        source: usize,
        universal: Var,
        value: bool,
    },
}

impl RuleApp {
    /// Lines this step reads.
    pub fn premises(&self) -> Vec<usize> {
        match *self {
            RuleApp::Axiom { .. } => vec![],
            RuleApp::Resolve { left, right, .. } => vec![left, right],
            RuleApp::WeakenExist { source, .. } | RuleApp::WeakenStrategy { source, .. } => vec![source],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RuleApp::Axiom { .. } => "axiom",
            RuleApp::Resolve { .. } => "resolve",
            RuleApp::WeakenExist { .. } => "weaken-exist",
            RuleApp::WeakenStrategy { .. } => "weaken-strategy",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    /// Hash of the formula this proof refers to (see [`crate::qbf::formula_hash`]).
    pub formula_hash: Option<String>,
    pub steps: Vec<RuleApp>,
    /// Free-form comment lines, written before the header.
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofParseError {
    #[error("line {line}: malformed header (expected `p mresproof <hash> <#steps>`)")]
    Header { line: usize },
    #[error("line {line}: step before header")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed step")]
    Step { line: usize },
    #[error("line {line}: step id {found}, expected {expected}")]
    OutOfOrder { line: usize, expected: usize, found: usize },
    #[error("line {line}: reference to line {target}, which is not earlier")]
    ForwardReference { line: usize, target: usize },
    #[error("header declares {declared} steps, found {found}")]
    StepCount { declared: usize, found: usize },
    #[error("no header found")]
    Empty,
}

impl Proof {
    pub fn new(formula_hash: Option<String>, steps: Vec<RuleApp>) -> Proof {
        Proof {
            formula_hash,
            steps,
            comments: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "c {c}").unwrap();
        }
        writeln!(
            out,
            "p mresproof {} {}",
            self.formula_hash.as_deref().unwrap_or("-"),
            self.steps.len()
        )
        .unwrap();
        for (k, step) in self.steps.iter().enumerate() {
            let id = k + 1;
            match *step {
                RuleApp::Axiom { clause } => writeln!(out, "A {id} {}", clause + 1),
                RuleApp::Resolve { left, right, pivot } => {
                    writeln!(out, "R {id} {} {} {pivot}", left + 1, right + 1)
                }
                RuleApp::WeakenExist { source, lit } => writeln!(out, "WE {id} {} {lit}", source + 1),
                RuleApp::WeakenStrategy {
                    source,
                    universal,
                    value,
                } => writeln!(out, "WF {id} {} {universal} {}", source + 1, u8::from(value)),
            }
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Proof, ProofParseError> {
        let mut proof = Proof::default();
        let mut declared: Option<usize> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            match tokens.first() {
                None => continue,
                Some(&"c") => {
                    let rest = raw.trim_start().strip_prefix('c').unwrap_or("").trim();
                    proof.comments.push(rest.to_string());
                    continue;
                }
                Some(&"p") => {
                    if declared.is_some() {
                        return Err(ProofParseError::Header { line });
                    }
                    match tokens.as_slice() {
                        ["p", "mresproof", hash, count] => {
                            let count = count.parse().map_err(|_| ProofParseError::Header { line })?;
                            declared = Some(count);
                            proof.formula_hash = (*hash != "-").then(|| hash.to_string());
                        }
                        _ => return Err(ProofParseError::Header { line }),
                    }
                    continue;
                }
                Some(_) => {}
            }
            if declared.is_none() {
                return Err(ProofParseError::MissingHeader { line });
            }
            let bad = || ProofParseError::Step { line };
            let num = |s: &str| -> Result<usize, ProofParseError> {
                s.parse::<usize>().ok().filter(|&n| n > 0).ok_or(bad())
            };
            let var = |s: &str| -> Result<Var, ProofParseError> { Ok(Var::new(num(s)? as u32)) };
            let expected = proof.steps.len() + 1;
            let id = tokens.get(1).map(|s| num(s)).transpose()?.ok_or(bad())?;
            if id != expected {
                return Err(ProofParseError::OutOfOrder {
                    line,
                    expected,
                    found: id,
                });
            }
            let line_ref = |s: &str| -> Result<usize, ProofParseError> {
                let target = num(s)?;
                if target >= id {
                    return Err(ProofParseError::ForwardReference { line, target });
                }
                Ok(target - 1)
            };
            let step = match tokens.as_slice() {
                ["A", _, c] => RuleApp::Axiom { clause: num(c)? - 1 },
                ["R", _, l, r, p] => RuleApp::Resolve {
                    left: line_ref(l)?,
                    right: line_ref(r)?,
                    pivot: var(p)?,
                },
                ["WE", _, s, lit] => {
                    let code: i64 = lit.parse().map_err(|_| bad())?;
                    if code == 0 {
                        return Err(bad());
                    }
                    RuleApp::WeakenExist {
                        source: line_ref(s)?,
                        lit: Lit::from_dimacs(code),
                    }
                }
                ["WF", _, s, u, b] => RuleApp::WeakenStrategy {
                    source: line_ref(s)?,
                    universal: var(u)?,
                    value: match *b {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad()),
                    },
                },
                _ => return Err(bad()),
            };
            proof.steps.push(step);
        }
        let declared = declared.ok_or(ProofParseError::Empty)?;
        if declared != proof.steps.len() {
            return Err(ProofParseError::StepCount {
                declared,
                found: proof.steps.len(),
            });
        }
        Ok(proof)
    }

    /// Value of a `c <key> <value...>` comment, if present.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once(char::is_whitespace)?;
            (k == key).then(|| v.trim())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Proof {
        let mut p = Proof::new(
            Some("0123abcd0123abcd".into()),
            vec![
                RuleApp::Axiom { clause: 0 },
                RuleApp::Axiom { clause: 1 },
                RuleApp::Resolve {
                    left: 0,
                    right: 1,
                    pivot: Var::new(1),
                },
                RuleApp::WeakenExist {
                    source: 2,
                    lit: Lit::from_dimacs(-4),
                },
                RuleApp::WeakenStrategy {
                    source: 3,
                    universal: Var::new(2),
                    value: true,
                },
            ],
        );
        p.comments.push("family example 1".into());
        p
    }

    #[test]
    fn text_format() {
        let text = sample().to_text();
        assert_eq!(
            text,
            "c family example 1\np mresproof 0123abcd0123abcd 5\nA 1 1\nA 2 2\nR 3 1 2 1\nWE 4 3 -4\nWF 5 4 2 1\n"
        );
        let back = Proof::parse(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.comment_value("family"), Some("example 1"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Proof::parse("A 1 1\n"), Err(ProofParseError::MissingHeader { .. })));
        assert!(matches!(Proof::parse("p mres x 1\n"), Err(ProofParseError::Header { .. })));
        assert!(matches!(
            Proof::parse("p mresproof - 1\nA 2 1\n"),
            Err(ProofParseError::OutOfOrder { expected: 1, found: 2, .. })
        ));
        assert!(matches!(
            Proof::parse("p mresproof - 2\nA 1 1\nR 2 1 2 1\n"),
            Err(ProofParseError::ForwardReference { target: 2, .. })
        ));
        assert!(matches!(
            Proof::parse("p mresproof - 2\nA 1 1\n"),
            Err(ProofParseError::StepCount { declared: 2, found: 1 })
        ));
        assert!(Proof::parse("p mresproof - 1\nWF 1 1 2 3\n").is_err());
        assert!(matches!(Proof::parse("p mresproof - 1\nA 1 0\n"), Err(ProofParseError::Step { .. })));
        assert!(matches!(Proof::parse(""), Err(ProofParseError::Empty)));
        let p = Proof::parse("p mresproof - 0\n").unwrap();
        assert_eq!(p.formula_hash, None);
    }
}
