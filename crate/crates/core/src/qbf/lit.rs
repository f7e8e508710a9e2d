use std::fmt;
use std::ops::Not;

/// A propositional variable, identified by its 1-based QDIMACS index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from a 1-based index.
    ///
    /// Panics if `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variable index must be positive");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }

    /// The literal over `self` that is true under `value`.
    pub fn lit(self, value: bool) -> Lit {
        Lit::new(self, value)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal, packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Converts from the signed DIMACS encoding. Panics on zero.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "zero is not a literal");
        let var = Var::new(u32::try_from(value.unsigned_abs()).expect("variable index overflow"));
        Lit::new(var, value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Truth value of the literal under an assignment of its variable.
    pub fn eval(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_involution() {
        for code in [1i64, -1, 7, -42] {
            let lit = Lit::from_dimacs(code);
            assert_eq!(!!lit, lit);
            assert_ne!(!lit, lit);
            assert_eq!((!lit).var(), lit.var());
            assert_eq!(lit.to_dimacs(), code);
        }
    }

    #[test]
    fn eval_follows_polarity() {
        let x = Var::new(3);
        assert!(x.positive().eval(true));
        assert!(!x.positive().eval(false));
        assert!(x.negative().eval(false));
        assert_eq!(x.lit(false), x.negative());
    }
}
