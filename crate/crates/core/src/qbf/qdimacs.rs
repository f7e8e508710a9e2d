//! QDIMACS reading and writing.
//!
//! Besides the standard format this module understands one comment
//! convention: `c var <index> <name>` attaches a label to a variable. The
//! writer emits these lines for named variables so that labels survive a
//! round trip.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::clause::Clause;
use super::formula::{FormulaError, Pcnf, QuantBlock, Quantifier};
use super::lit::{Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed problem line")]
    MalformedProblemLine { line: usize },
    #[error("line {line}: missing problem line before content")]
    MissingProblemLine { line: usize },
    #[error("line {line}: duplicate problem line")]
    DuplicateProblemLine { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: variable index {index} outside 1..={declared}")]
    VarOutOfRange { line: usize, index: i64, declared: u32 },
    #[error("line {line}: quantifier line not terminated by 0")]
    UnterminatedQuantifier { line: usize },
    #[error("line {line}: quantifier line after the first clause")]
    LateQuantifier { line: usize },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("problem line declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("no problem line found")]
    Empty,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

fn parse_int(token: &str, line: usize) -> Result<i64, ParseError> {
    token.parse().map_err(|_| ParseError::InvalidToken {
        line,
        token: token.to_string(),
    })
}

/// Parses QDIMACS text. Free variables are rejected.
pub fn parse_qdimacs(text: &str) -> Result<Pcnf, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut prefix: Vec<QuantBlock> = Vec::new();
    let mut matrix: Vec<Clause> = Vec::new();
    let mut names: Vec<(Var, String)> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();
    let mut in_clause = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let first = tokens.next().expect("non-empty line");
        match first {
            "c" => {
                if let (Some("var"), Some(idx), Some(name)) = (tokens.next(), tokens.next(), tokens.next()) {
                    if let Ok(idx) = idx.parse::<u32>() {
                        if idx > 0 {
                            names.push((Var::new(idx), name.to_string()));
                        }
                    }
                }
                continue;
            }
            "p" => {
                if header.is_some() {
                    return Err(ParseError::DuplicateProblemLine { line });
                }
                let parts: Vec<&str> = tokens.collect();
                let parsed = match parts.as_slice() {
                    ["cnf", v, c] => v.parse::<u32>().ok().zip(c.parse::<usize>().ok()),
                    _ => None,
                };
                header = Some(parsed.ok_or(ParseError::MalformedProblemLine { line })?);
                continue;
            }
            _ => {}
        }
        let (declared, _) = header.ok_or(ParseError::MissingProblemLine { line })?;
        let check_var = |value: i64| -> Result<Lit, ParseError> {
            if value.unsigned_abs() > u64::from(declared) {
                Err(ParseError::VarOutOfRange {
                    line,
                    index: value,
                    declared,
                })
            } else {
                Ok(Lit::from_dimacs(value))
            }
        };
        if first == "e" || first == "a" {
            if !matrix.is_empty() || in_clause {
                return Err(ParseError::LateQuantifier { line });
            }
            let quantifier = if first == "e" {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            let mut vars = Vec::new();
            let mut terminated = false;
            for tok in tokens {
                if terminated {
                    return Err(ParseError::InvalidToken {
                        line,
                        token: tok.to_string(),
                    });
                }
                let value = parse_int(tok, line)?;
                if value == 0 {
                    terminated = true;
                } else if value < 0 {
                    return Err(ParseError::InvalidToken {
                        line,
                        token: tok.to_string(),
                    });
                } else {
                    vars.push(check_var(value)?.var());
                }
            }
            if !terminated {
                return Err(ParseError::UnterminatedQuantifier { line });
            }
            prefix.push(QuantBlock::new(quantifier, vars));
            continue;
        }
        for tok in std::iter::once(first).chain(tokens) {
            let value = parse_int(tok, line)?;
            if value == 0 {
                matrix.push(Clause::new(pending.drain(..)));
                in_clause = false;
            } else {
                pending.push(check_var(value)?);
                in_clause = true;
            }
        }
    }

    let (declared_vars, declared_clauses) = header.ok_or(ParseError::Empty)?;
    if in_clause {
        return Err(ParseError::UnterminatedClause);
    }
    if matrix.len() != declared_clauses {
        return Err(ParseError::ClauseCountMismatch {
            declared: declared_clauses,
            found: matrix.len(),
        });
    }
    let mut formula = Pcnf::new(declared_vars, prefix, matrix)?;
    for (var, name) in names {
        if formula.contains_var(var) {
            formula.set_name(var, name);
        }
    }
    Ok(formula)
}

fn write_body(out: &mut String, f: &Pcnf) {
    writeln!(out, "p cnf {} {}", f.num_vars(), f.matrix().len()).unwrap();
    for block in f.prefix() {
        out.push(block.quantifier.letter());
        for v in &block.vars {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
    }
    for clause in f.matrix() {
        for lit in clause.iter() {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
}

/// Serializes a formula, including `c var` lines for named variables.
pub fn write_qdimacs(f: &Pcnf) -> String {
    write_qdimacs_with_comments(f, &[])
}

/// Like [`write_qdimacs`], with extra comment lines placed first.
pub fn write_qdimacs_with_comments(f: &Pcnf, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").unwrap();
    }
    for (v, name) in f.names() {
        writeln!(out, "c var {v} {name}").unwrap();
    }
    write_body(&mut out, f);
    out
}

/// Short content hash of the formula (problem line, prefix and matrix; names
/// and comments excluded). Used to bind proof files to their formula.
pub fn formula_hash(f: &Pcnf) -> String {
    let mut body = String::new();
    write_body(&mut body, f);
    let digest = Sha256::digest(body.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_input() {
        let f = parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n").unwrap();
        assert_eq!(f.prefix().len(), 2);
        assert_eq!(f.prefix()[0].quantifier, Quantifier::Exists);
        assert_eq!(f.prefix()[1].quantifier, Quantifier::Forall);
        assert_eq!(f.matrix(), &[Clause::from_dimacs(&[1, 2])]);
    }

    #[test]
    fn tautology_parses_with_flag() {
        let f = parse_qdimacs("p cnf 1 1\ne 1 0\n1 -1 0").unwrap();
        assert!(f.matrix()[0].is_tautology());
    }

    #[test]
    fn same_quantifier_lines_merge() {
        let f = parse_qdimacs("p cnf 3 0\ne 1 0\ne 2 0\na 3 0\n").unwrap();
        assert_eq!(f.prefix().len(), 2);
        assert_eq!(f.prefix()[0].vars, vec![Var::new(1), Var::new(2)]);
    }

    #[test]
    fn clauses_may_span_lines_and_comments_are_skipped() {
        let f = parse_qdimacs("c hello\np cnf 3 2\ne 1 2 3 0\n1 2\n3 0 -1\nc mid\n0\n").unwrap();
        assert_eq!(f.matrix().len(), 2);
        assert_eq!(f.matrix()[0], Clause::from_dimacs(&[1, 2, 3]));
        assert_eq!(f.matrix()[1], Clause::from_dimacs(&[-1]));
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            parse_qdimacs("p cnf x 1\n"),
            Err(ParseError::MalformedProblemLine { line: 1 })
        ));
        assert!(matches!(
            parse_qdimacs("p dnf 1 1\n"),
            Err(ParseError::MalformedProblemLine { .. })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 1 1\ne 1 0\n2 0\n"),
            Err(ParseError::VarOutOfRange { line: 3, index: 2, .. })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 1 1\ne 1 0\n1\n"),
            Err(ParseError::UnterminatedClause)
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\ne 1 0\n1 2 0\n"),
            Err(ParseError::Formula(FormulaError::FreeVariable(_)))
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\ne 1\n1 0\n"),
            Err(ParseError::UnterminatedQuantifier { line: 2 })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\ne 1 0\n1 0\na 2 0\n"),
            Err(ParseError::LateQuantifier { line: 4 })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 1 2\ne 1 0\n1 0\n"),
            Err(ParseError::ClauseCountMismatch { declared: 2, found: 1 })
        ));
        assert!(matches!(parse_qdimacs("1 0\n"), Err(ParseError::MissingProblemLine { line: 1 })));
        assert!(matches!(parse_qdimacs(""), Err(ParseError::Empty)));
    }

    #[test]
    fn empty_matrix_writes_zero_clause_count() {
        let f = parse_qdimacs("p cnf 2 0\ne 1 0\na 2 0\n").unwrap();
        let text = write_qdimacs(&f);
        assert!(text.contains("p cnf 2 0\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn names_round_trip() {
        let mut f = parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n").unwrap();
        f.set_name(Var::new(1), "x");
        let back = parse_qdimacs(&write_qdimacs(&f)).unwrap();
        assert_eq!(back.name(Var::new(1)), Some("x"));
        assert_eq!(back, f);
    }

    #[test]
    fn hash_ignores_names() {
        let f = parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n").unwrap();
        let mut g = f.clone();
        g.set_name(Var::new(2), "u");
        assert_eq!(formula_hash(&f), formula_hash(&g));
        assert_eq!(formula_hash(&f).len(), 16);
        let h = parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 -2 0\n").unwrap();
        assert_ne!(formula_hash(&f), formula_hash(&h));
    }
}
