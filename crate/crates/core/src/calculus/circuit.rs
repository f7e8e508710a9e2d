//! Strategy circuits: one extension gate per branching-program node.
//!
//! ```text
//! gate s_<u>_<node> = const <0|1>
//! gate s_<u>_<node> = mux(x<var>, s_<u>_<ifFalse>, s_<u>_<ifTrue>)
//! output u<idx> = s_<u>_<root>
//! ```
//!
//! Node numbers are map-local and children come first, so every gate only
//! refers to gates above it.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::extract::{extract_strategy, ExtractError};
use super::proof::Proof;
use crate::mergemap::Node;
use crate::qbf::{Pcnf, Valuation, Var};
use crate::strategy::Strategy;

/// Gates for every program map of `strategy`. Trivial maps produce nothing.
pub fn strategy_circuit(strategy: &Strategy) -> String {
    let mut out = String::new();
    for map in &strategy.maps {
        let Some(root) = map.root() else { continue };
        let u = map.owner;
        let order = strategy.store.reachable(root);
        let local: HashMap<_, _> = order.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        for (k, &id) in order.iter().enumerate() {
            match strategy.store.node(id) {
                Node::Leaf(b) => writeln!(out, "gate s_{u}_{k} = const {}", u8::from(b)),
                Node::Query {
                    var,
                    if_false,
                    if_true,
                } => writeln!(
                    out,
                    "gate s_{u}_{k} = mux(x{var}, s_{u}_{}, s_{u}_{})",
                    local[&if_false], local[&if_true]
                ),
            }
            .unwrap();
        }
        writeln!(out, "output u{u} = s_{u}_{}", local[&root]).unwrap();
    }
    out
}

/// Extracts the strategy of a refutation and renders it as a circuit.
pub fn export_strategy_circuit(formula: &Pcnf, proof: &Proof) -> Result<String, ExtractError> {
    extract_strategy(formula, proof).map(|s| strategy_circuit(&s))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("circuit line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no value for input x{0}")]
    MissingInput(Var),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Gate {
    Const(bool),
    Mux { select: Var, if_false: usize, if_true: usize },
}

/// A parsed circuit, ready for simulation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    gates: Vec<Gate>,
    outputs: BTreeMap<Var, usize>,
}

impl Circuit {
    pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
        let mut circuit = Circuit::default();
        let mut names: HashMap<String, usize> = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |msg: &str| CircuitError::Syntax {
                line,
                msg: msg.to_string(),
            };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('c') {
                continue;
            }
            let lookup = |name: &str| names.get(name.trim()).copied().ok_or_else(|| err("undefined gate"));
            if let Some(rest) = raw.strip_prefix("gate ") {
                let (name, body) = rest.split_once('=').ok_or_else(|| err("missing `=`"))?;
                let body = body.trim();
                let gate = if let Some(b) = body.strip_prefix("const ") {
                    match b.trim() {
                        "0" => Gate::Const(false),
                        "1" => Gate::Const(true),
                        _ => return Err(err("bad constant")),
                    }
                } else if let Some(args) = body.strip_prefix("mux(").and_then(|s| s.strip_suffix(')')) {
                    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                    let [sel, lo, hi] = parts.as_slice() else {
                        return Err(err("mux takes three arguments"));
                    };
                    let select = sel
                        .strip_prefix('x')
                        .and_then(|s| s.parse::<u32>().ok())
                        .filter(|&v| v > 0)
                        .ok_or_else(|| err("bad mux selector"))?;
                    Gate::Mux {
                        select: Var::new(select),
                        if_false: lookup(lo)?,
                        if_true: lookup(hi)?,
                    }
                } else {
                    return Err(err("unknown gate kind"));
                };
                if names.insert(name.trim().to_string(), circuit.gates.len()).is_some() {
                    return Err(err("gate defined twice"));
                }
                circuit.gates.push(gate);
            } else if let Some(rest) = raw.strip_prefix("output ") {
                let (name, gate) = rest.split_once('=').ok_or_else(|| err("missing `=`"))?;
                let u = name
                    .trim()
                    .strip_prefix('u')
                    .and_then(|s| s.parse::<u32>().ok())
                    .filter(|&v| v > 0)
                    .ok_or_else(|| err("bad output name"))?;
                circuit.outputs.insert(Var::new(u), lookup(gate)?);
            } else {
                return Err(err("unrecognized line"));
            }
        }
        Ok(circuit)
    }

    pub fn outputs(&self) -> impl Iterator<Item = Var> + '_ {
        self.outputs.keys().copied()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Value of every output under `inputs`.
    pub fn simulate(&self, inputs: &impl Valuation) -> Result<BTreeMap<Var, bool>, CircuitError> {
        let mut values = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match *gate {
                Gate::Const(b) => b,
                Gate::Mux {
                    select,
                    if_false,
                    if_true,
                } => {
                    if inputs.value(select).ok_or(CircuitError::MissingInput(select))? {
                        values[if_true]
                    } else {
                        values[if_false]
                    }
                }
            };
            values.push(v);
        }
        Ok(self.outputs.iter().map(|(&u, &g)| (u, values[g])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mergemap::MapStore;
    use crate::qbf::{parse_qdimacs, PartialAssignment};

    #[test]
    fn copy_map_gives_one_mux() {
        let f = parse_qdimacs("p cnf 3 1\ne 1 0\na 2 0\ne 3 0\n1 2 3 0\n").unwrap();
        let mut store = MapStore::new();
        let zero = store.constant(Var::new(2), false);
        let one = store.constant(Var::new(2), true);
        let copy = store.merge(&f, Var::new(1), &zero, &one).unwrap();
        let text = strategy_circuit(&Strategy::new(store, vec![copy]));
        assert_eq!(
            text,
            "gate s_2_0 = const 0\ngate s_2_1 = const 1\ngate s_2_2 = mux(x1, s_2_0, s_2_1)\noutput u2 = s_2_2\n"
        );
        let c = Circuit::parse(&text).unwrap();
        for b in [false, true] {
            let out = c.simulate(&PartialAssignment::new().with(Var::new(1), b)).unwrap();
            assert_eq!(out[&Var::new(2)], b);
        }
        assert_eq!(c.simulate(&PartialAssignment::new()), Err(CircuitError::MissingInput(Var::new(1))));
    }

    #[test]
    fn constant_and_trivial_maps() {
        let store = MapStore::new();
        let maps = vec![
            store.constant(Var::new(2), true),
            crate::mergemap::MergeMap::trivial_unchecked(Var::new(3)),
        ];
        let text = strategy_circuit(&Strategy::new(store, maps));
        assert_eq!(text, "gate s_2_0 = const 1\noutput u2 = s_2_0\n");
    }

    #[test]
    fn parse_errors() {
        assert!(Circuit::parse("gate a = mux(x1, b, c)\n").is_err());
        assert!(Circuit::parse("gate a = const 2\n").is_err());
        assert!(Circuit::parse("gate a = const 1\ngate a = const 0\n").is_err());
        assert!(Circuit::parse("output v1 = a\n").is_err());
        assert!(Circuit::parse("wire a\n").is_err());
    }
}
