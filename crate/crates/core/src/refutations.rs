//! Constructive refutation builders for the families with known short proofs.
//!
//! Each builder emits a [`Proof`] together with the rule set it needs, its
//! exact step count, and the strategy its final line should compute.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::calculus::{CheckerConfig, Mode, Proof, RuleApp};
use crate::families::{
    eq2_cell, example_formula, gen, parity_c, CoveringPartition, Eq2Layout, FamilyError, FamilyId, GenOptions,
    KbkfLayout, MParityLayout,
};
use crate::mergemap::MapError;
use crate::qbf::{formula_hash, Clause, Lit, PartialAssignment, Pcnf, Var};
use crate::strategy::Strategy;

/// Records rule applications; axioms are looked up by clause content and
/// downloaded at most once.
pub struct ProofBuilder<'f> {
    formula: &'f Pcnf,
    by_clause: HashMap<Clause, usize>,
    downloaded: HashMap<usize, usize>,
    steps: Vec<RuleApp>,
}

impl<'f> ProofBuilder<'f> {
    pub fn new(formula: &'f Pcnf) -> ProofBuilder<'f> {
        let mut by_clause = HashMap::new();
        for (k, c) in formula.matrix().iter().enumerate() {
            by_clause.entry(c.clone()).or_insert(k);
        }
        ProofBuilder {
            formula,
            by_clause,
            downloaded: HashMap::new(),
            steps: Vec::new(),
        }
    }

    fn push(&mut self, step: RuleApp) -> usize {
        self.steps.push(step);
        self.steps.len() - 1
    }

    /// Line id of the axiom with exactly these literals. Panics if the
    /// formula has no such clause.
    pub fn axiom(&mut self, lits: impl IntoIterator<Item = Lit>) -> usize {
        let clause = Clause::new(lits);
        let index = *self
            .by_clause
            .get(&clause)
            .unwrap_or_else(|| panic!("no axiom {clause}"));
        if let Some(&line) = self.downloaded.get(&index) {
            return line;
        }
        let line = self.push(RuleApp::Axiom { clause: index });
        self.downloaded.insert(index, line);
        line
    }

    pub fn resolve(&mut self, left: usize, right: usize, pivot: Var) -> usize {
        self.push(RuleApp::Resolve { left, right, pivot })
    }

    pub fn weaken_exist(&mut self, source: usize, lit: Lit) -> usize {
        self.push(RuleApp::WeakenExist { source, lit })
    }

    pub fn weaken_strategy(&mut self, source: usize, universal: Var, value: bool) -> usize {
        self.push(RuleApp::WeakenStrategy {
            source,
            universal,
            value,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn finish(self, comments: Vec<String>) -> Proof {
        Proof {
            formula_hash: Some(formula_hash(self.formula)),
            steps: self.steps,
            comments,
        }
    }
}

/// What the final line's maps should compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpectedStrategy {
    /// Each universal copies an existential: `u = x`.
    Copy(Vec<(Var, Var)>),
    /// Every owner computes the XOR of `inputs`.
    Parity { owners: Vec<Var>, inputs: Vec<Var> },
}

impl ExpectedStrategy {
    pub fn describe(&self, f: &Pcnf) -> String {
        match self {
            ExpectedStrategy::Copy(pairs) => pairs
                .iter()
                .map(|&(u, x)| format!("{}={}", f.display_var(u), f.display_var(x)))
                .collect::<Vec<_>>()
                .join(", "),
            ExpectedStrategy::Parity { owners, inputs } => {
                let xs: Vec<String> = inputs.iter().map(|&x| f.display_var(x)).collect();
                owners
                    .iter()
                    .map(|&u| format!("{}={}", f.display_var(u), xs.join("^")))
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        }
    }

    fn expected(&self, u: Var) -> Option<(Vec<Var>, bool)> {
        match self {
            ExpectedStrategy::Copy(pairs) => pairs.iter().find(|p| p.0 == u).map(|&(_, x)| (vec![x], false)),
            ExpectedStrategy::Parity { owners, inputs } => owners.contains(&u).then(|| (inputs.clone(), true)),
        }
    }

    /// Exhaustively compares every described map of `strategy` with its
    /// expected function, over all values of the variables either side reads.
    pub fn matches(&self, strategy: &Strategy) -> Result<bool, MapError> {
        let owners: Vec<Var> = match self {
            ExpectedStrategy::Copy(pairs) => pairs.iter().map(|p| p.0).collect(),
            ExpectedStrategy::Parity { owners, .. } => owners.clone(),
        };
        for u in owners {
            let Some(map) = strategy.map_for(u) else {
                return Ok(false);
            };
            if map.is_trivial() {
                return Ok(false);
            }
            let (inputs, xor) = self.expected(u).expect("owner listed");
            let vars: Vec<Var> = strategy
                .store
                .queried_vars(map)
                .into_iter()
                .chain(inputs.iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for bits in 0u64..1 << vars.len() {
                let alpha: PartialAssignment = vars
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| (x, bits & (1 << k) != 0))
                    .collect();
                let want = if xor {
                    inputs.iter().filter(|&&x| alpha.get(x) == Some(true)).count() % 2 == 1
                } else {
                    alpha.get(inputs[0]) == Some(true)
                };
                if strategy.store.evaluate(map, &alpha)? != want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Named lines of a built proof, for inspection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Landmark {
    /// `L^e_i`
    Le(usize),
    /// `L^d_i`, `i < n`
    Ld(usize),
    /// `L'_i`
    LPrime(usize),
    /// `L''_i`
    LDoublePrime(usize),
    /// The line `(weak-B^k_i)`, however it was obtained.
    WeakB(usize, bool),
    /// `(C, M^b_{i+1})` of the MParity first phase.
    PsiTilde { i: usize, clause: Clause, b: bool },
    /// `(t_{i,j}, {u_i = x_i, v_j = y_j})`
    Cell(usize, usize),
}

#[derive(Clone, Debug)]
pub struct BuiltProof {
    pub family: Option<FamilyId>,
    pub n: usize,
    pub formula: Pcnf,
    pub proof: Proof,
    /// Smallest rule set the proof needs.
    pub mode: Mode,
    /// Whether the proof is built to be regular.
    pub regular: bool,
    /// Closed-form step count for this size.
    pub expected_steps: usize,
    pub expected_strategy: ExpectedStrategy,
    pub landmarks: Vec<(Landmark, usize)>,
}

impl BuiltProof {
    /// Checker configuration matching the builder's declared rule set.
    pub fn config(&self) -> CheckerConfig {
        let cfg = CheckerConfig::for_mode(self.mode);
        if self.regular {
            cfg.regular()
        } else {
            cfg
        }
    }

    pub fn line_of(&self, mark: &Landmark) -> Option<usize> {
        self.landmarks.iter().find(|(m, _)| m == mark).map(|&(_, l)| l)
    }
}

fn family_comment(family: FamilyId, n: usize) -> Vec<String> {
    vec![format!("family {family} {n}")]
}

/// The four-axiom example: `(t, u=x)`, `(t̄, u=x)`, then `(□, u=x)`.
pub fn build_example() -> BuiltProof {
    let f = example_formula();
    let (x, u, t) = (Var::new(1), Var::new(2), Var::new(3));
    let mut b = ProofBuilder::new(&f);
    let a1 = b.axiom([x.positive(), u.positive(), t.positive()]);
    let a2 = b.axiom([x.negative(), u.negative(), t.positive()]);
    let pos = b.resolve(a1, a2, x);
    let a3 = b.axiom([x.positive(), u.positive(), t.negative()]);
    let a4 = b.axiom([x.negative(), u.negative(), t.negative()]);
    let neg = b.resolve(a3, a4, x);
    b.resolve(pos, neg, t);
    let proof = b.finish(vec!["family example 1".into()]);
    BuiltProof {
        family: None,
        n: 1,
        formula: f,
        proof,
        mode: Mode::Plain,
        regular: true,
        expected_steps: 7,
        expected_strategy: ExpectedStrategy::Copy(vec![(u, x)]),
        landmarks: Vec::new(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum WeakSource {
    Axiom,
    Split,
    Weaken,
}

fn kbkf_proof(n: usize, family: FamilyId, source: WeakSource) -> BuiltProof {
    let formula = gen(family, n, &GenOptions::default()).expect("n >= 1");
    let l = KbkfLayout {
        n,
        split: source == WeakSource::Split,
    };
    let not_f = |from: usize| -> Vec<Lit> { (from..=n).map(|k| l.f(k).negative()).collect() };
    let mut b = ProofBuilder::new(&formula);
    let mut marks = Vec::new();

    // weak-B lines
    let mut weak = vec![[0usize; 2]; n + 1];
    for i in 1..=n {
        for k in [false, true] {
            let x_lit = l.x(i).lit(!k);
            let d_lit = l.d(i).lit(!k);
            let mut body = vec![x_lit, l.f(i).positive()];
            body.extend(not_f(i + 1));
            let line = match source {
                WeakSource::Axiom => b.axiom(body.into_iter().chain([d_lit])),
                WeakSource::Split => {
                    let split = b.axiom(body.into_iter().chain([l.t().positive()]));
                    let tk = b.axiom([l.t().negative(), d_lit]);
                    b.resolve(split, tk, l.t())
                }
                WeakSource::Weaken => {
                    let base = b.axiom(body);
                    b.weaken_exist(base, d_lit)
                }
            };
            marks.push((Landmark::WeakB(i, k), line));
            weak[i][usize::from(k)] = line;
        }
    }

    // A-chain down to L'_1
    let mut a0 = vec![l.d(1).negative(), l.e(1).negative()];
    a0.extend(not_f(1));
    let mut cur = b.axiom(a0);
    for i in 1..=n {
        let mut next = Vec::new();
        if i < n {
            next = vec![l.d(i + 1).negative(), l.e(i + 1).negative()];
        }
        let ae = b.axiom(
            [l.e(i).positive(), l.x(i).negative()]
                .into_iter()
                .chain(next.iter().copied())
                .chain(not_f(1)),
        );
        cur = b.resolve(ae, cur, l.e(i));
        marks.push((Landmark::Le(i), cur));
        let ad = b.axiom(
            [l.d(i).positive(), l.x(i).positive()]
                .into_iter()
                .chain(next.iter().copied())
                .chain(not_f(1)),
        );
        cur = b.resolve(ad, cur, l.d(i));
        if i < n {
            marks.push((Landmark::Ld(i), cur));
        }
    }
    marks.push((Landmark::LPrime(1), cur));

    // L''_i, folded into L'_i on f_i
    for i in 1..=n {
        let ldd = b.resolve(weak[i][0], weak[i][1], l.d(i));
        marks.push((Landmark::LDoublePrime(i), ldd));
        cur = b.resolve(ldd, cur, l.f(i));
        if i < n {
            marks.push((Landmark::LPrime(i + 1), cur));
        }
    }

    let (mode, expected_steps) = match source {
        WeakSource::Axiom => (Mode::Plain, 8 * n + 1),
        WeakSource::Split => (Mode::Plain, 12 * n + 1),
        WeakSource::Weaken => (Mode::We, 10 * n + 1),
    };
    let proof = b.finish(family_comment(family, n));
    BuiltProof {
        family: Some(family),
        n,
        formula,
        proof,
        mode,
        regular: true,
        expected_steps,
        expected_strategy: ExpectedStrategy::Copy((1..=n).map(|i| (l.x(i), l.d(i))).collect()),
        landmarks: marks,
    }
}

/// Plain M-Res refutation of KBKF-lq-weak with strategy `x_i = d_i`.
pub fn build_kbkf_lq_weak(n: usize) -> BuiltProof {
    assert!(n >= 1, "n must be positive");
    kbkf_proof(n, FamilyId::KbkfLqWeak, WeakSource::Axiom)
}

/// Plain M-Res refutation of KBKF-lq-split: resolving `split-B^k_i` with
/// `T^k_i` on `t` recovers each weak-B line.
pub fn build_kbkf_lq_split(n: usize) -> BuiltProof {
    assert!(n >= 1, "n must be positive");
    kbkf_proof(n, FamilyId::KbkfLqSplit, WeakSource::Split)
}

/// Refutation of KBKF-lq using existential weakening: `B^0_i` gains `d_i`,
/// `B^1_i` gains `d̄_i`.
pub fn build_kbkf_lq_we(n: usize) -> BuiltProof {
    assert!(n >= 1, "n must be positive");
    kbkf_proof(n, FamilyId::KbkfLq, WeakSource::Weaken)
}

/// Closed-form step count of [`build_mparity`].
pub fn mparity_steps(n: usize) -> usize {
    let axioms = 4 + 8 * (n - 1) + 2 + n * (n - 1);
    let resolutions = 12 * (n - 1) * (n - 1) + 6 * (n - 1) + 3;
    axioms + resolutions
}

/// Plain M-Res refutation of MParity (n >= 2). The first phase trades the
/// `a` variables for parity maps `M^b_{i+1}`; the second eliminates
/// `t_n, ..., t_1`, ending in `(□, M^1_1)` for both `z_1` and `z_2`.
pub fn build_mparity(n: usize) -> Result<BuiltProof, ProveError> {
    if n < 2 {
        return Err(FamilyError::UnsupportedSize {
            family: FamilyId::MParity,
            n,
            min: 2,
        }
        .into());
    }
    let formula = gen(FamilyId::MParity, n, &GenOptions::default())?;
    let l = MParityLayout { n };
    let (z1, z2) = (l.z1(), l.z2());
    let zs = |positive: bool| [z1.lit(positive), z2.lit(positive)];
    let mut b = ProofBuilder::new(&formula);
    let mut marks = Vec::new();
    let mut psi: HashMap<(usize, Clause, bool), usize> = HashMap::new();

    for i in 1..=n {
        let cs = if i == 1 {
            parity_c(&[l.x(1), l.t(1)])
        } else {
            parity_c(&[l.t(i - 1), l.x(i), l.t(i)])
        };
        for c in cs {
            let tail: Vec<Lit> = if i < n { vec![l.a(i, n).positive()] } else { Vec::new() };
            // z = 0 falsifies A^0 and gives M^1_{n+1}; A^1 gives M^0_{n+1}
            let mut p1 = b.axiom(c.iter().chain(zs(true)).chain(tail.iter().copied()));
            let mut p0 = b.axiom(c.iter().chain(zs(false)).chain(tail.iter().copied()));
            for j in (i + 1..=n).rev() {
                let a = l.a(i, j);
                let carry: Vec<Lit> = if j > i + 1 {
                    vec![l.a(i, j - 1).positive()]
                } else {
                    Vec::new()
                };
                let b0 = b.axiom([a.negative(), l.x(j).positive()].into_iter().chain(carry.iter().copied()));
                let b1 = b.axiom([a.negative(), l.x(j).negative()].into_iter().chain(carry.iter().copied()));
                let r1 = b.resolve(p1, b0, a);
                let r2 = b.resolve(p0, b1, a);
                let r3 = b.resolve(p1, b1, a);
                let r4 = b.resolve(p0, b0, a);
                p1 = b.resolve(r1, r2, l.x(j));
                p0 = b.resolve(r4, r3, l.x(j));
            }
            for (bit, line) in [(true, p1), (false, p0)] {
                marks.push((
                    Landmark::PsiTilde {
                        i,
                        clause: c.clone(),
                        b: bit,
                    },
                    line,
                ));
                psi.insert((i, c.clone(), bit), line);
            }
        }
    }

    let tn = l.t(n);
    let mut pos = b.axiom([tn.positive()].into_iter().chain(zs(true)));
    let mut neg = b.axiom([tn.negative()].into_iter().chain(zs(false)));
    let get = |i: usize, lits: &[Lit], bit: bool| psi[&(i, Clause::new(lits.iter().copied()), bit)];
    for i in (2..=n).rev() {
        let (tp, x, ti) = (l.t(i - 1), l.x(i), l.t(i));
        let r = b.resolve(pos, get(i, &[tp.positive(), x.positive(), ti.negative()], true), ti);
        let s = b.resolve(get(i, &[tp.positive(), x.negative(), ti.positive()], false), neg, ti);
        let new_pos = b.resolve(r, s, x);
        let r = b.resolve(pos, get(i, &[tp.negative(), x.negative(), ti.negative()], true), ti);
        let s = b.resolve(get(i, &[tp.negative(), x.positive(), ti.positive()], false), neg, ti);
        let new_neg = b.resolve(s, r, x);
        pos = new_pos;
        neg = new_neg;
    }
    let (x, t1) = (l.x(1), l.t(1));
    let r = b.resolve(pos, get(1, &[x.positive(), t1.negative()], true), t1);
    let s = b.resolve(get(1, &[x.negative(), t1.positive()], false), neg, t1);
    b.resolve(r, s, x);

    let proof = b.finish(family_comment(FamilyId::MParity, n));
    Ok(BuiltProof {
        family: Some(FamilyId::MParity),
        n,
        formula,
        proof,
        mode: Mode::Plain,
        regular: false,
        expected_steps: mparity_steps(n),
        expected_strategy: ExpectedStrategy::Parity {
            owners: vec![z1, z2],
            inputs: (1..=n).map(|i| l.x(i)).collect(),
        },
        landmarks: marks,
    })
}

fn eq2_proof(n: usize, partition: Option<&CoveringPartition>) -> BuiltProof {
    let (family, opts) = match partition {
        None => (FamilyId::Eq2, GenOptions::default()),
        Some(p) => (
            FamilyId::HEq2,
            GenOptions {
                partition: Some(p.clone()),
            },
        ),
    };
    let formula = gen(family, n, &opts).expect("validated size and partition");
    let l = Eq2Layout { n };
    let mut b = ProofBuilder::new(&formula);
    let mut marks = Vec::new();
    let mut cells = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            let full = eq2_cell(&l, i, j, None);
            let lines: Vec<usize> = match partition {
                None => full.iter().map(|c| b.axiom(c.iter())).collect(),
                Some(p) => {
                    let holed = eq2_cell(&l, i, j, Some(p.region(i, j)));
                    full.iter()
                        .zip(&holed)
                        .map(|(want, have)| {
                            let mut line = b.axiom(have.iter());
                            for lit in want.iter().filter(|lit| !have.contains(*lit)) {
                                line = b.weaken_strategy(line, lit.var(), !lit.is_positive());
                            }
                            line
                        })
                        .collect()
                }
            };
            // y first: v merges on y_j, then u merges on x_i
            let p = b.resolve(lines[0], lines[1], l.y(j));
            let q = b.resolve(lines[2], lines[3], l.y(j));
            let cell = b.resolve(p, q, l.x(i));
            marks.push((Landmark::Cell(i, j), cell));
            cells.push((l.t(i, j), cell));
        }
    }
    let mut cur = b.axiom(cells.iter().map(|&(t, _)| t.negative()));
    for (t, cell) in cells {
        cur = b.resolve(cell, cur, t);
    }
    let mut expected = Vec::new();
    for i in 1..=n {
        expected.push((l.u(i), l.x(i)));
    }
    for j in 1..=n {
        expected.push((l.w(j), l.y(j)));
    }
    let (mode, expected_steps) = match partition {
        None => (Mode::Plain, 8 * n * n + 1),
        Some(_) => (Mode::Wf, 12 * n * n + 1),
    };
    let proof = b.finish(family_comment(family, n));
    BuiltProof {
        family: Some(family),
        n,
        formula,
        proof,
        mode,
        regular: true,
        expected_steps,
        expected_strategy: ExpectedStrategy::Copy(expected),
        landmarks: marks,
    }
}

/// Regular plain M-Res refutation of Eq².
pub fn build_eq2(n: usize) -> BuiltProof {
    assert!(n >= 1, "n must be positive");
    eq2_proof(n, None)
}

/// Regular refutation of H-Eq² with strategy weakening: every axiom line is
/// padded with constants up to its Eq² counterpart, then the Eq² proof runs.
pub fn build_heq2_wf(n: usize, partition: &CoveringPartition) -> Result<BuiltProof, ProveError> {
    if n < 2 {
        return Err(FamilyError::UnsupportedSize {
            family: FamilyId::HEq2,
            n,
            min: 2,
        }
        .into());
    }
    if partition.n() != n {
        return Err(FamilyError::PartitionSize {
            expected: n,
            found: partition.n(),
        }
        .into());
    }
    partition.validate()?;
    Ok(eq2_proof(n, Some(partition)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error("no short refutation of {family} in mode {mode}: {reason}")]
    NoUpperBound {
        family: FamilyId,
        mode: Mode,
        reason: &'static str,
    },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Picks the builder for `family` under the rule set `mode`.
pub fn prove(family: FamilyId, n: usize, mode: Mode, opts: &GenOptions) -> Result<BuiltProof, ProveError> {
    let refuse = |reason| {
        Err(ProveError::NoUpperBound {
            family,
            mode,
            reason,
        })
    };
    if n < family.min_n() {
        return Err(FamilyError::UnsupportedSize {
            family,
            n,
            min: family.min_n(),
        }
        .into());
    }
    let with_we = matches!(mode, Mode::We | Mode::Wef);
    let with_wf = matches!(mode, Mode::Wf | Mode::Wef);
    match family {
        FamilyId::KbkfLqWeak => Ok(build_kbkf_lq_weak(n)),
        FamilyId::KbkfLqSplit => Ok(build_kbkf_lq_split(n)),
        FamilyId::KbkfLq if with_we => Ok(build_kbkf_lq_we(n)),
        FamilyId::KbkfLq => refuse(
            "KBKF-lq requires exponential-size M-Res refutations (lower bound); \
             use --mode we for the existential-weakening refutation",
        ),
        FamilyId::MParity => build_mparity(n),
        FamilyId::Eq2 => Ok(build_eq2(n)),
        FamilyId::HEq2 if with_wf => {
            let partition = match &opts.partition {
                Some(p) => p.clone(),
                None => crate::families::default_partition(n)?,
            };
            build_heq2_wf(n, &partition)
        }
        FamilyId::HEq2 => refuse(
            "H-Eq2 requires exponential-size regular M-Res refutations (lower bound); \
             use --mode wf for the strategy-weakening refutation",
        ),
        FamilyId::QParity => refuse(
            "QParity requires exponential-size Q-Res and QU-Res refutations (lower bound); \
             its short refutation lives in LD-Q-Res, which is not implemented here",
        ),
        FamilyId::LqParity => refuse(
            "LQParity requires exponential-size LD-Q-Res refutations (lower bound) \
             and no polynomial-size M-Res refutation is known",
        ),
        FamilyId::QuParity => refuse(
            "QUParity requires exponential-size LQU+-Res refutations (lower bound) \
             and no polynomial-size M-Res refutation is known",
        ),
    }
}
