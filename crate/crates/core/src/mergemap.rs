//! Merge-maps: strategy functions for single universal variables, stored as
//! deterministic branching programs in a hash-consed node table.
//!
//! All programs of one proof live in a single [`MapStore`]. Because every
//! node is interned, two programs are structurally identical exactly when
//! their roots are the same [`NodeId`]; isomorphism is therefore an id
//! comparison, and a merge shares every common sub-program for free.
//!
//! Programs are never reduced: a query node whose children coincide is kept
//! as is, and no functional-equivalence test is ever performed.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::qbf::{Pcnf, Valuation, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(bool),
    /// Follow `if_false` when `var` is 0 and `if_true` when it is 1.
    Query {
        var: Var,
        if_false: NodeId,
        if_true: NodeId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// No constraint on the owner yet.
    Trivial,
    Program(NodeId),
}

/// The strategy object for one universal variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MergeMap {
    pub owner: Var,
    pub kind: MapKind,
}

impl MergeMap {
    pub fn trivial_unchecked(owner: Var) -> MergeMap {
        MergeMap {
            owner,
            kind: MapKind::Trivial,
        }
    }

    pub fn program(owner: Var, root: NodeId) -> MergeMap {
        MergeMap {
            owner,
            kind: MapKind::Program(root),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.kind == MapKind::Trivial
    }

    pub fn root(&self) -> Option<NodeId> {
        match self.kind {
            MapKind::Trivial => None,
            MapKind::Program(root) => Some(root),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("variable {0} is not universal")]
    NotUniversal(Var),
    #[error("merge-map for {0} is trivial")]
    Trivial(Var),
    #[error("merge-maps belong to different universals ({left} vs {right})")]
    OwnerMismatch { left: Var, right: Var },
    #[error("pivot {pivot} is not existential")]
    PivotNotExistential { pivot: Var },
    #[error("pivot {pivot} is not quantified before {owner}")]
    PivotNotBefore { pivot: Var, owner: Var },
    #[error("assignment has no value for queried variable {0}")]
    MissingValue(Var),
    #[error("map for {owner} queries {var}, which is not an existential left of it")]
    QueryNotLeft { var: Var, owner: Var },
    #[error("parity map index {i} out of range 1..={max}")]
    IndexOutOfRange { i: usize, max: usize },
    #[error("expected {expected} input variables, got {found}")]
    InputCount { expected: usize, found: usize },
    #[error("map dump line {line}: {msg}")]
    Dump { line: usize, msg: String },
}

/// Interning table for branching-program nodes.
#[derive(Clone, Debug)]
pub struct MapStore {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
}

impl Default for MapStore {
    fn default() -> MapStore {
        MapStore::new()
    }
}

impl MapStore {
    pub fn new() -> MapStore {
        let mut store = MapStore {
            nodes: Vec::new(),
            unique: HashMap::new(),
        };
        store.intern(Node::Leaf(false));
        store.intern(Node::Leaf(true));
        store
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("node table overflow"));
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub fn leaf(&self, value: bool) -> NodeId {
        NodeId(u32::from(value))
    }

    /// Interns a query node. Both children must come from this store.
    pub fn query(&mut self, var: Var, if_false: NodeId, if_true: NodeId) -> NodeId {
        assert!(if_false.index() < self.nodes.len() && if_true.index() < self.nodes.len());
        self.intern(Node::Query {
            var,
            if_false,
            if_true,
        })
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.index()]
    }

    /// Total number of interned nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// A single-leaf program: `owner` always takes `value`.
    pub fn constant(&self, owner: Var, value: bool) -> MergeMap {
        MergeMap::program(owner, self.leaf(value))
    }

    pub fn evaluate(&self, map: &MergeMap, alpha: &impl Valuation) -> Result<bool, MapError> {
        let root = map.root().ok_or(MapError::Trivial(map.owner))?;
        self.eval_node(root, alpha)
    }

    pub fn eval_node(&self, mut id: NodeId, alpha: &impl Valuation) -> Result<bool, MapError> {
        loop {
            match self.node(id) {
                Node::Leaf(b) => return Ok(b),
                Node::Query {
                    var,
                    if_false,
                    if_true,
                } => {
                    id = if alpha.value(var).ok_or(MapError::MissingValue(var))? {
                        if_true
                    } else {
                        if_false
                    };
                }
            }
        }
    }

    /// Structural identity of two programs for the same universal.
    ///
    /// Trivial maps are never isomorphic to anything; rule logic tests
    /// triviality before asking.
    pub fn is_isomorphic(&self, a: &MergeMap, b: &MergeMap) -> Result<bool, MapError> {
        if a.owner != b.owner {
            return Err(MapError::OwnerMismatch {
                left: a.owner,
                right: b.owner,
            });
        }
        Ok(match (a.kind, b.kind) {
            (MapKind::Program(x), MapKind::Program(y)) => x == y,
            _ => false,
        })
    }

    /// The merge construction: branch on `pivot`, going to `on_false` when it
    /// is 0 and to `on_true` otherwise.
    pub fn merge(
        &mut self,
        formula: &Pcnf,
        pivot: Var,
        on_false: &MergeMap,
        on_true: &MergeMap,
    ) -> Result<MergeMap, MapError> {
        if on_false.owner != on_true.owner {
            return Err(MapError::OwnerMismatch {
                left: on_false.owner,
                right: on_true.owner,
            });
        }
        let owner = on_false.owner;
        let lo = on_false.root().ok_or(MapError::Trivial(owner))?;
        let hi = on_true.root().ok_or(MapError::Trivial(owner))?;
        if !formula.is_existential(pivot) {
            return Err(MapError::PivotNotExistential { pivot });
        }
        if !formula.precedes(pivot, owner) {
            return Err(MapError::PivotNotBefore { pivot, owner });
        }
        Ok(MergeMap::program(owner, self.query(pivot, lo, hi)))
    }

    /// The smallest program reading `vars = [x_i, ..., x_n]` in order and
    /// computing their parity (`positive = true`) or its complement.
    ///
    /// `i` is 1-based and may be `n + 1`, giving a constant.
    pub fn build_parity_map(
        &mut self,
        i: usize,
        n: usize,
        positive: bool,
        vars: &[Var],
        owner: Var,
    ) -> Result<MergeMap, MapError> {
        if i == 0 || i > n + 1 {
            return Err(MapError::IndexOutOfRange { i, max: n + 1 });
        }
        if vars.len() != n + 1 - i {
            return Err(MapError::InputCount {
                expected: n + 1 - i,
                found: vars.len(),
            });
        }
        // (parity, complement) of the empty suffix
        let mut even = self.leaf(false);
        let mut odd = self.leaf(true);
        for &x in vars.iter().rev() {
            let next_even = self.query(x, even, odd);
            let next_odd = self.query(x, odd, even);
            even = next_even;
            odd = next_odd;
        }
        Ok(MergeMap::program(owner, if positive { even } else { odd }))
    }

    /// Reachable nodes of a program, children before parents.
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            if seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            stack.push((id, true));
            if let Node::Query {
                if_false, if_true, ..
            } = self.node(id)
            {
                if !seen[if_true.index()] {
                    stack.push((if_true, false));
                }
                if !seen[if_false.index()] {
                    stack.push((if_false, false));
                }
            }
        }
        order
    }

    /// Number of nodes (internal and leaves) of a program; 0 for trivial maps.
    pub fn node_count(&self, map: &MergeMap) -> usize {
        map.root().map_or(0, |r| self.reachable(r).len())
    }

    pub fn internal_count(&self, map: &MergeMap) -> usize {
        map.root().map_or(0, |r| {
            self.reachable(r)
                .into_iter()
                .filter(|&id| matches!(self.node(id), Node::Query { .. }))
                .count()
        })
    }

    pub fn queried_vars(&self, map: &MergeMap) -> BTreeSet<Var> {
        map.root()
            .map(|r| {
                self.reachable(r)
                    .into_iter()
                    .filter_map(|id| match self.node(id) {
                        Node::Query { var, .. } => Some(var),
                        Node::Leaf(_) => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Checks that `map` belongs to a universal and only queries existentials
    /// quantified before it.
    pub fn validate(&self, formula: &Pcnf, map: &MergeMap) -> Result<(), MapError> {
        if !formula.is_universal(map.owner) {
            return Err(MapError::NotUniversal(map.owner));
        }
        for var in self.queried_vars(map) {
            if !formula.is_existential(var) || !formula.precedes(var, map.owner) {
                return Err(MapError::QueryNotLeft {
                    var,
                    owner: map.owner,
                });
            }
        }
        Ok(())
    }

    /// Text dump with map-local node ids (children numbered before parents).
    pub fn dump(&self, map: &MergeMap) -> String {
        let mut out = String::new();
        let Some(root) = map.root() else {
            writeln!(out, "map {} trivial", map.owner).unwrap();
            return out;
        };
        let order = self.reachable(root);
        let local: HashMap<NodeId, usize> = order.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        writeln!(out, "map {} root {}", map.owner, local[&root]).unwrap();
        for (k, &id) in order.iter().enumerate() {
            match self.node(id) {
                Node::Leaf(b) => writeln!(out, "node {k} leaf {}", u8::from(b)).unwrap(),
                Node::Query {
                    var,
                    if_false,
                    if_true,
                } => writeln!(out, "node {k} q {var} {} {}", local[&if_false], local[&if_true]).unwrap(),
            }
        }
        out
    }

    /// Reads maps written by [`MapStore::dump`] into this store.
    pub fn parse_dump(&mut self, text: &str) -> Result<Vec<MergeMap>, MapError> {
        enum Raw {
            Leaf(bool),
            Query(Var, usize, usize),
        }
        struct Pending {
            owner: Var,
            root: Option<usize>,
            line: usize,
            nodes: HashMap<usize, Raw>,
        }

        let err = |line: usize, msg: &str| MapError::Dump {
            line,
            msg: msg.to_string(),
        };
        let mut maps = Vec::new();
        let mut current: Option<Pending> = None;

        let finish = |store: &mut MapStore, p: Pending| -> Result<MergeMap, MapError> {
            let Some(root) = p.root else {
                return Ok(MergeMap::trivial_unchecked(p.owner));
            };
            // post-order construction with cycle detection
            let mut built: HashMap<usize, NodeId> = HashMap::new();
            let mut on_path: BTreeSet<usize> = BTreeSet::new();
            let mut stack = vec![(root, false)];
            while let Some((id, expanded)) = stack.pop() {
                if built.contains_key(&id) {
                    continue;
                }
                let raw = p.nodes.get(&id).ok_or_else(|| err(p.line, &format!("undefined node {id}")))?;
                match *raw {
                    Raw::Leaf(b) => {
                        built.insert(id, store.leaf(b));
                    }
                    Raw::Query(var, f, t) => {
                        if expanded {
                            on_path.remove(&id);
                            let nid = store.query(var, built[&f], built[&t]);
                            built.insert(id, nid);
                        } else {
                            if !on_path.insert(id) {
                                return Err(err(p.line, "cycle in node graph"));
                            }
                            stack.push((id, true));
                            for child in [t, f] {
                                if on_path.contains(&child) {
                                    return Err(err(p.line, "cycle in node graph"));
                                }
                                if !built.contains_key(&child) {
                                    stack.push((child, false));
                                }
                            }
                        }
                    }
                }
            }
            if built.len() != p.nodes.len() {
                return Err(err(p.line, "node not reachable from root"));
            }
            Ok(MergeMap::program(p.owner, built[&root]))
        };

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            let num = |s: &str| -> Result<usize, MapError> { s.parse().map_err(|_| err(line, "bad number")) };
            let var = |s: &str| -> Result<Var, MapError> {
                match s.parse::<u32>() {
                    Ok(v) if v > 0 => Ok(Var::new(v)),
                    _ => Err(err(line, "bad variable index")),
                }
            };
            match tokens.as_slice() {
                [] => {}
                ["c", ..] => {}
                ["map", u, rest @ ..] => {
                    if let Some(p) = current.take() {
                        maps.push(finish(self, p)?);
                    }
                    let root = match rest {
                        ["trivial"] => None,
                        ["root", r] => Some(num(r)?),
                        _ => return Err(err(line, "expected `root <id>` or `trivial`")),
                    };
                    current = Some(Pending {
                        owner: var(u)?,
                        root,
                        line,
                        nodes: HashMap::new(),
                    });
                }
                ["node", id, kind @ ..] => {
                    let p = current.as_mut().ok_or_else(|| err(line, "node before map header"))?;
                    if p.root.is_none() {
                        return Err(err(line, "trivial map cannot have nodes"));
                    }
                    let node = match kind {
                        ["leaf", "0"] => Raw::Leaf(false),
                        ["leaf", "1"] => Raw::Leaf(true),
                        ["q", v, f, t] => Raw::Query(var(v)?, num(f)?, num(t)?),
                        _ => return Err(err(line, "malformed node")),
                    };
                    if p.nodes.insert(num(id)?, node).is_some() {
                        return Err(err(line, "duplicate node id"));
                    }
                }
                _ => return Err(err(line, "unrecognized line")),
            }
        }
        if let Some(p) = current.take() {
            maps.push(finish(self, p)?);
        }
        Ok(maps)
    }
}

/// A trivial map for `owner`, which must be universal in `formula`.
pub fn trivial_map(formula: &Pcnf, owner: Var) -> Result<MergeMap, MapError> {
    if formula.is_universal(owner) {
        Ok(MergeMap::trivial_unchecked(owner))
    } else {
        Err(MapError::NotUniversal(owner))
    }
}
