//! Generators for the benchmark QBF families.
//!
//! Every family has a fixed variable numbering, in prefix order:
//!
//! | family | numbering |
//! |---|---|
//! | KBKF-lq, -weak | `d_i = 3i-2`, `e_i = 3i-1`, `x_i = 3i`, `f_i = 3n+i` |
//! | KBKF-lq-split | `t = 1`, everything else shifted by one |
//! | QParity, LQParity | `x_i = i`, `z = n+1`, `t_i = n+1+i` |
//! | QUParity | `x_i = i`, `z_1 = n+1`, `z_2 = n+2`, `t_i = n+2+i` |
//! | MParity | `a_{i,j} = (i-1)n+j`, `x_i = n²+i`, `z_1 = n²+n+1`, `z_2 = n²+n+2`, `t_i = n²+n+2+i` |
//! | Eq², H-Eq² | `x_i = i`, `y_i = n+i`, `u_i = 2n+i`, `v_i = 3n+i`, `t_{i,j} = 4n+(i-1)n+j` |
//!
//! Clauses are emitted in a fixed canonical order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::qbf::{Clause, Lit, Pcnf, QuantBlock, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    KbkfLq,
    KbkfLqWeak,
    KbkfLqSplit,
    QParity,
    LqParity,
    QuParity,
    MParity,
    Eq2,
    HEq2,
}

impl FamilyId {
    pub const ALL: [FamilyId; 9] = [
        FamilyId::KbkfLq,
        FamilyId::KbkfLqWeak,
        FamilyId::KbkfLqSplit,
        FamilyId::QParity,
        FamilyId::LqParity,
        FamilyId::QuParity,
        FamilyId::MParity,
        FamilyId::Eq2,
        FamilyId::HEq2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::KbkfLq => "kbkf-lq",
            FamilyId::KbkfLqWeak => "kbkf-lq-weak",
            FamilyId::KbkfLqSplit => "kbkf-lq-split",
            FamilyId::QParity => "qparity",
            FamilyId::LqParity => "lqparity",
            FamilyId::QuParity => "quparity",
            FamilyId::MParity => "mparity",
            FamilyId::Eq2 => "eq2",
            FamilyId::HEq2 => "heq2",
        }
    }

    /// Smallest supported size.
    pub fn min_n(self) -> usize {
        match self {
            FamilyId::HEq2 => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<FamilyId, FamilyError> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        FamilyId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{family} needs n >= {min}, got {n}")]
    UnsupportedSize { family: FamilyId, n: usize, min: usize },
    #[error("partition is for a {found}x{found} grid, expected {expected}x{expected}")]
    PartitionSize { expected: usize, found: usize },
    #[error("region R{region} misses {axis} {index}")]
    NotCovering { region: u8, axis: &'static str, index: usize },
}

/// A split of the `n × n` grid into regions `R0` and `R1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringPartition {
    n: usize,
    /// Row-major, `true` for `R1`.
    cells: Vec<bool>,
}

impl CoveringPartition {
    /// Builds a partition from a region function over 1-based cells.
    /// Not validated; see [`CoveringPartition::validate`].
    pub fn from_fn(n: usize, region: impl Fn(usize, usize) -> u8) -> CoveringPartition {
        let mut cells = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                cells.push(region(i, j) == 1);
            }
        }
        CoveringPartition { n, cells }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Region (0 or 1) of 1-based cell `(i, j)`.
    pub fn region(&self, i: usize, j: usize) -> u8 {
        u8::from(self.cells[(i - 1) * self.n + (j - 1)])
    }

    pub fn cells_in(&self, region: u8) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n * n)
            .filter(move |&k| u8::from(self.cells[k]) == region)
            .map(move |k| (k / n + 1, k % n + 1))
    }

    /// Each region must meet every row and every column.
    pub fn validate(&self) -> Result<(), FamilyError> {
        for region in [0, 1] {
            for i in 1..=self.n {
                if !(1..=self.n).any(|j| self.region(i, j) == region) {
                    return Err(FamilyError::NotCovering {
                        region,
                        axis: "row",
                        index: i,
                    });
                }
                if !(1..=self.n).any(|j| self.region(j, i) == region) {
                    return Err(FamilyError::NotCovering {
                        region,
                        axis: "column",
                        index: i,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Block-diagonal partition: `R0 = [1,h]² ∪ [h+1,n]²` with `h = ⌊n/2⌋`.
pub fn default_partition(n: usize) -> Result<CoveringPartition, FamilyError> {
    if n < 2 {
        return Err(FamilyError::UnsupportedSize {
            family: FamilyId::HEq2,
            n,
            min: 2,
        });
    }
    let h = n / 2;
    let p = CoveringPartition::from_fn(n, |i, j| u8::from((i <= h) != (j <= h)));
    p.validate()?;
    Ok(p)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenOptions {
    /// Region split for H-Eq²; the default partition when absent.
    pub partition: Option<CoveringPartition>,
}

fn v(i: usize) -> Var {
    Var::new(u32::try_from(i).expect("variable index overflow"))
}

/// Variable layout of the KBKF families.
#[derive(Clone, Copy, Debug)]
pub struct KbkfLayout {
    pub n: usize,
    pub split: bool,
}

impl KbkfLayout {
    fn off(&self) -> usize {
        usize::from(self.split)
    }
    pub fn t(&self) -> Var {
        assert!(self.split, "only the split family has t");
        v(1)
    }
    pub fn d(&self, i: usize) -> Var {
        v(3 * i - 2 + self.off())
    }
    pub fn e(&self, i: usize) -> Var {
        v(3 * i - 1 + self.off())
    }
    pub fn x(&self, i: usize) -> Var {
        v(3 * i + self.off())
    }
    pub fn f(&self, i: usize) -> Var {
        v(3 * self.n + i + self.off())
    }
    pub fn num_vars(&self) -> usize {
        4 * self.n + self.off()
    }
}

/// Variable layout of QParity/LQParity (`dup = false`) and QUParity (`dup = true`).
#[derive(Clone, Copy, Debug)]
pub struct ParityLayout {
    pub n: usize,
    pub dup: bool,
}

impl ParityLayout {
    pub fn x(&self, i: usize) -> Var {
        v(i)
    }
    /// `k` is 1 or 2; without duplication both give `z`.
    pub fn z(&self, k: usize) -> Var {
        if self.dup {
            v(self.n + k)
        } else {
            v(self.n + 1)
        }
    }
    pub fn t(&self, i: usize) -> Var {
        v(self.n + 1 + usize::from(self.dup) + i)
    }
    pub fn num_vars(&self) -> usize {
        2 * self.n + 1 + usize::from(self.dup)
    }
}

/// Variable layout of MParity.
#[derive(Clone, Copy, Debug)]
pub struct MParityLayout {
    pub n: usize,
}

impl MParityLayout {
    pub fn a(&self, i: usize, j: usize) -> Var {
        v((i - 1) * self.n + j)
    }
    pub fn x(&self, i: usize) -> Var {
        v(self.n * self.n + i)
    }
    pub fn z1(&self) -> Var {
        v(self.n * self.n + self.n + 1)
    }
    pub fn z2(&self) -> Var {
        v(self.n * self.n + self.n + 2)
    }
    pub fn t(&self, i: usize) -> Var {
        v(self.n * self.n + self.n + 2 + i)
    }
    pub fn num_vars(&self) -> usize {
        self.n * self.n + 2 * self.n + 2
    }
}

/// Variable layout of Eq² and H-Eq².
#[derive(Clone, Copy, Debug)]
pub struct Eq2Layout {
    pub n: usize,
}

impl Eq2Layout {
    pub fn x(&self, i: usize) -> Var {
        v(i)
    }
    pub fn y(&self, i: usize) -> Var {
        v(self.n + i)
    }
    pub fn u(&self, i: usize) -> Var {
        v(2 * self.n + i)
    }
    pub fn w(&self, i: usize) -> Var {
        v(3 * self.n + i)
    }
    pub fn t(&self, i: usize, j: usize) -> Var {
        v(4 * self.n + (i - 1) * self.n + j)
    }
    pub fn num_vars(&self) -> usize {
        4 * self.n + self.n * self.n
    }
}

/// `parity^c(y_1..y_k)`: one clause per odd-size set `S` of negated positions,
/// satisfied together exactly when the XOR of the `y` is 0. Sets are visited
/// as bitmasks in increasing order.
pub fn parity_c(vars: &[Var]) -> Vec<Clause> {
    let k = vars.len();
    (0u32..1 << k)
        .filter(|mask| mask.count_ones() % 2 == 1)
        .map(|mask| {
            vars.iter()
                .enumerate()
                .map(|(b, &y)| y.lit(mask & (1 << b) == 0))
                .collect()
        })
        .collect()
}

fn build(num_vars: usize, prefix: Vec<QuantBlock>, matrix: Vec<Clause>, names: Vec<(Var, String)>) -> Pcnf {
    let mut f = Pcnf::new(num_vars as u32, prefix, matrix).expect("generated formula is well formed");
    for (var, name) in names {
        f.set_name(var, name);
    }
    f
}

fn kbkf(n: usize, variant: FamilyId) -> Pcnf {
    let split = variant == FamilyId::KbkfLqSplit;
    let l = KbkfLayout { n, split };
    let not_f_from = |from: usize| -> Vec<Lit> { (from..=n).map(|k| l.f(k).negative()).collect() };
    let all_not_f = not_f_from(1);

    let mut prefix = Vec::new();
    if split {
        prefix.push(QuantBlock::exists([l.t()]));
    }
    for i in 1..=n {
        prefix.push(QuantBlock::exists([l.d(i), l.e(i)]));
        prefix.push(QuantBlock::forall([l.x(i)]));
    }
    prefix.push(QuantBlock::exists((1..=n).map(|i| l.f(i))));

    let mut matrix = Vec::new();
    let mut a0 = vec![l.d(1).negative(), l.e(1).negative()];
    a0.extend(&all_not_f);
    matrix.push(Clause::new(a0));
    for i in 1..=n {
        let mut next = Vec::new();
        if i < n {
            next = vec![l.d(i + 1).negative(), l.e(i + 1).negative()];
        }
        let mut ad = vec![l.d(i).positive(), l.x(i).positive()];
        ad.extend(&next);
        ad.extend(&all_not_f);
        let mut ae = vec![l.e(i).positive(), l.x(i).negative()];
        ae.extend(&next);
        ae.extend(&all_not_f);
        matrix.push(Clause::new(ad));
        matrix.push(Clause::new(ae));
    }
    for i in 1..=n {
        let mut tail = vec![l.f(i).positive()];
        tail.extend(not_f_from(i + 1));
        let b0 = Clause::new(tail.clone()).with(l.x(i).positive());
        let b1 = Clause::new(tail).with(l.x(i).negative());
        match variant {
            FamilyId::KbkfLq => {
                matrix.push(b0);
                matrix.push(b1);
            }
            FamilyId::KbkfLqWeak => {
                matrix.push(b0.with(l.d(i).positive()));
                matrix.push(b1.with(l.d(i).negative()));
            }
            _ => {
                matrix.push(b0.with(l.t().positive()));
                matrix.push(b1.with(l.t().positive()));
                matrix.push(Clause::new([l.t().negative(), l.d(i).positive()]));
                matrix.push(Clause::new([l.t().negative(), l.d(i).negative()]));
            }
        }
    }

    let mut names = Vec::new();
    if split {
        names.push((l.t(), "t".to_string()));
    }
    for i in 1..=n {
        names.push((l.d(i), format!("d{i}")));
        names.push((l.e(i), format!("e{i}")));
        names.push((l.x(i), format!("x{i}")));
        names.push((l.f(i), format!("f{i}")));
    }
    build(l.num_vars(), prefix, matrix, names)
}

fn parity_family(n: usize, variant: FamilyId) -> Pcnf {
    let l = ParityLayout {
        n,
        dup: variant == FamilyId::QuParity,
    };
    let zs: Vec<Var> = if l.dup { vec![l.z(1), l.z(2)] } else { vec![l.z(1)] };
    let with_z = |c: &Clause, positive: bool| -> Clause {
        zs.iter().fold(c.clone(), |acc, &z| acc.with(z.lit(positive)))
    };

    let mut base = parity_c(&[l.x(1), l.t(1)]);
    for i in 2..=n {
        base.extend(parity_c(&[l.t(i - 1), l.x(i), l.t(i)]));
    }
    let mut matrix = Vec::new();
    for c in &base {
        if variant == FamilyId::QParity {
            matrix.push(c.clone());
        } else {
            matrix.push(with_z(c, true));
            matrix.push(with_z(c, false));
        }
    }
    let tn = Clause::new([l.t(n).positive()]);
    let not_tn = Clause::new([l.t(n).negative()]);
    matrix.push(with_z(&tn, true));
    matrix.push(with_z(&not_tn, false));

    let prefix = vec![
        QuantBlock::exists((1..=n).map(|i| l.x(i))),
        QuantBlock::forall(zs.clone()),
        QuantBlock::exists((1..=n).map(|i| l.t(i))),
    ];
    let mut names: Vec<(Var, String)> = (1..=n).map(|i| (l.x(i), format!("x{i}"))).collect();
    if l.dup {
        names.push((l.z(1), "z1".into()));
        names.push((l.z(2), "z2".into()));
    } else {
        names.push((l.z(1), "z".into()));
    }
    names.extend((1..=n).map(|i| (l.t(i), format!("t{i}"))));
    build(l.num_vars(), prefix, matrix, names)
}

fn mparity(n: usize) -> Pcnf {
    let l = MParityLayout { n };
    let (z1, z2) = (l.z1(), l.z2());
    let mut matrix = Vec::new();
    for i in 1..=n {
        let cs = if i == 1 {
            parity_c(&[l.x(1), l.t(1)])
        } else {
            parity_c(&[l.t(i - 1), l.x(i), l.t(i)])
        };
        for c in cs {
            let mut a0 = c.with(z1.positive()).with(z2.positive());
            let mut a1 = c.with(z1.negative()).with(z2.negative());
            if i < n {
                a0 = a0.with(l.a(i, n).positive());
                a1 = a1.with(l.a(i, n).positive());
            }
            matrix.push(a0);
            matrix.push(a1);
        }
    }
    matrix.push(Clause::new([l.t(n).positive(), z1.positive(), z2.positive()]));
    matrix.push(Clause::new([l.t(n).negative(), z1.negative(), z2.negative()]));
    for i in 1..n {
        for j in (i + 1..=n).rev() {
            let mut base = vec![l.a(i, j).negative()];
            if j > i + 1 {
                base.push(l.a(i, j - 1).positive());
            }
            matrix.push(Clause::new(base.clone()).with(l.x(j).positive()));
            matrix.push(Clause::new(base).with(l.x(j).negative()));
        }
    }

    let prefix = vec![
        QuantBlock::exists((1..=n).flat_map(|i| (1..=n).map(move |j| l.a(i, j)))),
        QuantBlock::exists((1..=n).map(|i| l.x(i))),
        QuantBlock::forall([z1, z2]),
        QuantBlock::exists((1..=n).map(|i| l.t(i))),
    ];
    let mut names = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            names.push((l.a(i, j), format!("a{i}_{j}")));
        }
    }
    names.extend((1..=n).map(|i| (l.x(i), format!("x{i}"))));
    names.push((z1, "z1".into()));
    names.push((z2, "z2".into()));
    names.extend((1..=n).map(|i| (l.t(i), format!("t{i}"))));
    build(l.num_vars(), prefix, matrix, names)
}

/// The four clauses of cell `(i, j)`, in canonical order. `holes` selects the
/// region pattern of H-Eq²; `None` gives the full Eq² cell.
pub fn eq2_cell(l: &Eq2Layout, i: usize, j: usize, holes: Option<u8>) -> [Clause; 4] {
    let (x, y, u, w, t) = (l.x(i), l.y(j), l.u(i), l.w(j), l.t(i, j).positive());
    // (x polarity, y polarity): u follows x, v follows y
    let shape = [(true, true), (true, false), (false, true), (false, false)];
    shape.map(|(px, py)| {
        let keep_u = match holes {
            None => true,
            Some(0) => px,
            Some(_) => !px,
        };
        let keep_v = match holes {
            None => true,
            Some(0) => py,
            Some(_) => !py,
        };
        let mut c = Clause::new([x.lit(px), y.lit(py), t]);
        if keep_u {
            c = c.with(u.lit(px));
        }
        if keep_v {
            c = c.with(w.lit(py));
        }
        c
    })
}

fn eq2(n: usize, partition: Option<&CoveringPartition>) -> Pcnf {
    let l = Eq2Layout { n };
    let mut matrix = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            matrix.extend(eq2_cell(&l, i, j, partition.map(|p| p.region(i, j))));
        }
    }
    matrix.push(
        (1..=n)
            .flat_map(|i| (1..=n).map(move |j| l.t(i, j).negative()))
            .collect(),
    );
    let prefix = vec![
        QuantBlock::exists((1..=n).map(|i| l.x(i)).chain((1..=n).map(|i| l.y(i)))),
        QuantBlock::forall((1..=n).map(|i| l.u(i)).chain((1..=n).map(|i| l.w(i)))),
        QuantBlock::exists((1..=n).flat_map(|i| (1..=n).map(move |j| l.t(i, j)))),
    ];
    let mut names = Vec::new();
    for (prefix, f) in [
        ("x", Eq2Layout::x as fn(&Eq2Layout, usize) -> Var),
        ("y", Eq2Layout::y),
        ("u", Eq2Layout::u),
        ("v", Eq2Layout::w),
    ] {
        names.extend((1..=n).map(|i| (f(&l, i), format!("{prefix}{i}"))));
    }
    for i in 1..=n {
        for j in 1..=n {
            names.push((l.t(i, j), format!("t{i}_{j}")));
        }
    }
    build(l.num_vars(), prefix, matrix, names)
}

/// Generates `family` at size `n`.
pub fn gen(family: FamilyId, n: usize, opts: &GenOptions) -> Result<Pcnf, FamilyError> {
    if n < family.min_n() {
        return Err(FamilyError::UnsupportedSize {
            family,
            n,
            min: family.min_n(),
        });
    }
    Ok(match family {
        FamilyId::KbkfLq | FamilyId::KbkfLqWeak | FamilyId::KbkfLqSplit => kbkf(n, family),
        FamilyId::QParity | FamilyId::LqParity | FamilyId::QuParity => parity_family(n, family),
        FamilyId::MParity => mparity(n),
        FamilyId::Eq2 => eq2(n, None),
        FamilyId::HEq2 => {
            let partition = match &opts.partition {
                Some(p) => {
                    if p.n() != n {
                        return Err(FamilyError::PartitionSize {
                            expected: n,
                            found: p.n(),
                        });
                    }
                    p.validate()?;
                    p.clone()
                }
                None => default_partition(n)?,
            };
            eq2(n, Some(&partition))
        }
    })
}

/// The running example: `∃x ∀u ∃t` with `x = 1`, `u = 2`, `t = 3` and clauses
/// `(x ∨ u ∨ t)`, `(x̄ ∨ ū ∨ t)`, `(x ∨ u ∨ t̄)`, `(x̄ ∨ ū ∨ t̄)`.
pub fn example_formula() -> Pcnf {
    let (x, u, t) = (v(1), v(2), v(3));
    let matrix = vec![
        Clause::new([x.positive(), u.positive(), t.positive()]),
        Clause::new([x.negative(), u.negative(), t.positive()]),
        Clause::new([x.positive(), u.positive(), t.negative()]),
        Clause::new([x.negative(), u.negative(), t.negative()]),
    ];
    let prefix = vec![
        QuantBlock::exists([x]),
        QuantBlock::forall([u]),
        QuantBlock::exists([t]),
    ];
    build(
        3,
        prefix,
        matrix,
        vec![(x, "x".into()), (u, "u".into()), (t, "t".into())],
    )
}
