use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::lit::{Lit, Var};

/// Read access to variable values. Implemented by [`PartialAssignment`] and by
/// the dense assignment used inside the game search.
pub trait Valuation {
    fn value(&self, var: Var) -> Option<bool>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("variable {var} assigned twice with different values")]
    Conflict { var: Var },
    #[error("malformed assignment token `{0}` (expected `var=0` or `var=1`)")]
    Malformed(String),
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    values: BTreeMap<Var, bool>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    /// Assigns `var`; re-assigning the same value is accepted, a different one is not.
    pub fn assign(&mut self, var: Var, value: bool) -> Result<(), AssignmentError> {
        match self.values.insert(var, value) {
            Some(old) if old != value => {
                self.values.insert(var, old);
                Err(AssignmentError::Conflict { var })
            }
            _ => Ok(()),
        }
    }

    /// Builder-style assign, panicking on conflict. Intended for literals in tests and generators.
    pub fn with(mut self, var: Var, value: bool) -> PartialAssignment {
        self.assign(var, value).expect("conflicting assignment");
        self
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    /// Truth value of `lit`, if its variable is assigned.
    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|b| lit.eval(b))
    }
}

impl Valuation for PartialAssignment {
    fn value(&self, var: Var) -> Option<bool> {
        self.get(var)
    }
}

impl FromIterator<(Var, bool)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> PartialAssignment {
        let mut out = PartialAssignment::new();
        for (v, b) in iter {
            out.assign(v, b).expect("conflicting assignment");
        }
        out
    }
}

/// Parses comma-separated `index=0|1` tokens, e.g. `1=0,4=1`.
impl FromStr for PartialAssignment {
    type Err = AssignmentError;

    fn from_str(s: &str) -> Result<PartialAssignment, AssignmentError> {
        let mut out = PartialAssignment::new();
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (var, value) = token
                .split_once('=')
                .ok_or_else(|| AssignmentError::Malformed(token.to_string()))?;
            let index: u32 = var
                .trim()
                .parse()
                .ok()
                .filter(|&i| i > 0)
                .ok_or_else(|| AssignmentError::Malformed(token.to_string()))?;
            let value = match value.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(AssignmentError::Malformed(token.to_string())),
            };
            out.assign(Var::new(index), value)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (v, b)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}={}", v, u8::from(b))?;
        }
        Ok(())
    }
}
