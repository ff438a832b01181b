//! Table entries, leaf initialisation and the child join.

use rustc_hash::{FxBuildHasher, FxHashMap};

use indexmap::IndexMap;
use smallvec::SmallVec;

use crate::decomp::{DecompTree, NodeId};
use crate::graph::{Graph, VertexSet};
use crate::nec::{union_unchecked, Families, NecClassId, NecFamily, TupleClass};
use crate::problems::{ProblemSpec, SizeConstraint, Weight, WeightDomain};

pub type SizeTuple = SmallVec<[u32; 4]>;

/// An ordered q-tuple of disjoint vertex sets.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition(pub SmallVec<[VertexSet; 6]>);

impl std::fmt::Debug for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Partition {
    pub fn empty(q: usize) -> Self {
        Self(SmallVec::from_elem(VertexSet::new(), q))
    }

    pub fn from_parts(parts: Vec<VertexSet>) -> Self {
        Self(parts.into_iter().collect())
    }

    /// Places `v` in part `j` of an otherwise empty partition.
    pub fn single(q: usize, v: usize, j: usize) -> Self {
        let mut p = Self::empty(q);
        p.0[j].insert(v);
        p
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn part(&self, j: usize) -> &VertexSet {
        &self.0[j]
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.0
    }

    pub fn color_of(&self, v: usize) -> Option<usize> {
        self.0.iter().position(|p| p.contains(v))
    }

    /// `X_C`: union of the parts listed in `colors`.
    pub fn union_of(&self, colors: &[usize]) -> VertexSet {
        let mut s = VertexSet::new();
        for &j in colors {
            s.union_with(&self.0[j]);
        }
        s
    }

    pub fn support(&self) -> VertexSet {
        let mut s = VertexSet::new();
        for p in &self.0 {
            s.union_with(p);
        }
        s
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.iter().map(VertexSet::len).collect()
    }

    pub fn merge(&self, other: &Partition) -> Partition {
        Partition(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.union(b))
                .collect(),
        )
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = VertexSet::new();
        for p in &self.0 {
            if seen.intersects(p) {
                return false;
            }
            seen.union_with(p);
        }
        true
    }
}

/// `(R, R', K')`. `sizes` is empty when the size dimension is collapsed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TableKey {
    pub r: TupleClass,
    pub r_out: TupleClass,
    pub sizes: SizeTuple,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Candidate {
    pub x: Partition,
    /// `w(X, R')` for the key this candidate is stored under.
    pub weight: Weight,
}

pub type Table = IndexMap<TableKey, Vec<Candidate>, FxBuildHasher>;

/// Insertion-ordered set with a fast hasher.
pub type FxIndexSet<T> = indexmap::IndexSet<T, FxBuildHasher>;

/// How size tuples are tracked in keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeMode {
    /// No size constraint: keys carry no sizes.
    Collapsed,
    /// Exact sizes, filtered against the constraint.
    Exact { sizes: SizeConstraint, n: usize },
    /// Lower bounds only: sizes are capped at the bound, which is all the
    /// root needs to decide `K_j ≥ m_j`.
    Capped(Vec<u32>),
}

impl SizeMode {
    pub fn new(sizes: &SizeConstraint, n: usize) -> Self {
        match sizes {
            SizeConstraint::All => SizeMode::Collapsed,
            SizeConstraint::AtLeast(m) => SizeMode::Capped(m.iter().map(|&x| x as u32).collect()),
            s => SizeMode::Exact {
                sizes: s.clone(),
                n,
            },
        }
    }

    pub fn unit(&self, q: usize, j: usize) -> SizeTuple {
        match self {
            SizeMode::Collapsed => SizeTuple::new(),
            SizeMode::Exact { .. } => (0..q).map(|i| u32::from(i == j)).collect(),
            SizeMode::Capped(m) => (0..q).map(|i| u32::from(i == j).min(m[i])).collect(),
        }
    }

    pub fn add(&self, a: &SizeTuple, b: &SizeTuple) -> SizeTuple {
        match self {
            SizeMode::Capped(m) => a
                .iter()
                .zip(b)
                .zip(m)
                .map(|((x, y), c)| (x + y).min(*c))
                .collect(),
            _ => a.iter().zip(b).map(|(x, y)| x + y).collect(),
        }
    }

    /// Whether a partial tuple over `inner` vertices can still be completed.
    pub fn feasible(&self, k: &SizeTuple, inner: usize, n: usize) -> bool {
        let rem = n - inner;
        match self {
            SizeMode::Collapsed => true,
            SizeMode::Exact { sizes, n } => {
                let k: Vec<usize> = k.iter().map(|&x| x as usize).collect();
                sizes.admits_partial(&k, rem, *n)
            }
            SizeMode::Capped(m) => {
                k.iter()
                    .zip(m)
                    .map(|(x, c)| c.saturating_sub(*x) as usize)
                    .sum::<usize>()
                    <= rem
            }
        }
    }

    /// Root membership in `𝒦`.
    pub fn admits(&self, k: &SizeTuple) -> bool {
        match self {
            SizeMode::Collapsed => true,
            SizeMode::Exact { sizes, n } => {
                let k: Vec<usize> = k.iter().map(|&x| x as usize).collect();
                sizes.admits(&k, *n)
            }
            SizeMode::Capped(m) => k.iter().zip(m).all(|(x, c)| x >= c),
        }
    }

    /// The key sizes of a concrete partition.
    pub fn of_partition(&self, x: &Partition) -> SizeTuple {
        match self {
            SizeMode::Collapsed => SizeTuple::new(),
            SizeMode::Exact { .. } => x.0.iter().map(|p| p.len() as u32).collect(),
            SizeMode::Capped(m) => {
                x.0.iter()
                    .zip(m)
                    .map(|(p, c)| (p.len() as u32).min(*c))
                    .collect()
            }
        }
    }
}

/// Capped counts for `v ∈ T_v` against `X ∪ Y` with `Y ≡ R'`.
fn counts(
    g: &Graph,
    d: usize,
    outer: &NecFamily,
    x: &Partition,
    r_out: &TupleClass,
    v: usize,
    buf: &mut Vec<u8>,
) {
    buf.clear();
    let nv = g.neighbors(v);
    for (h, part) in x.0.iter().enumerate() {
        let c = nv.intersection_len(part) + outer.neighbor_count(v, r_out.get(h));
        buf.push(c.min(d) as u8);
    }
}

/// `w(X, R')`: the combined weight of the vertices of `X` when `X` is
/// completed by any partition of the outer side equivalent to `R'`.
pub fn weight_of(
    spec: &ProblemSpec,
    g: &Graph,
    families: &Families,
    node: NodeId,
    x: &Partition,
    r_out: &TupleClass,
) -> Weight {
    let dom = spec.domain();
    let outer = families.outer(node);
    let mut buf = Vec::with_capacity(spec.q());
    let mut acc = dom.neutral();
    for (j, part) in x.0.iter().enumerate() {
        for v in part.iter() {
            counts(g, spec.d(), outer, x, r_out, v, &mut buf);
            acc = dom.combine(acc, spec.weight_capped(v, j, &buf));
        }
    }
    acc
}

/// Whether every vertex of `T_v` passes the check function (and its allowed
/// colour list) under `X` completed by `R'`.
pub fn is_valid(
    spec: &ProblemSpec,
    g: &Graph,
    t: &DecompTree,
    families: &Families,
    node: NodeId,
    x: &Partition,
    r_out: &TupleClass,
) -> bool {
    let inner = t.inner(node);
    if !x.is_disjoint() || x.support() != *inner {
        return false;
    }
    let outer = families.outer(node);
    let mut buf = Vec::with_capacity(spec.q());
    x.0.iter().enumerate().all(|(j, part)| {
        part.iter().all(|v| {
            counts(g, spec.d(), outer, x, r_out, v, &mut buf);
            spec.check_capped(v, j, &buf)
        })
    })
}

/// Unreduced table of a leaf holding vertex `u`: one candidate per
/// admissible colour and outer class in `outs`.
pub fn init_leaf(
    spec: &ProblemSpec,
    t: &DecompTree,
    families: &Families,
    mode: &SizeMode,
    leaf: NodeId,
    outs: &FxIndexSet<TupleClass>,
) -> Table {
    let u = t.leaf_vertex(leaf).expect("leaf node");
    let q = spec.q();
    let n = t.n_vertices();
    let inner = families.inner(leaf);
    let outer = families.outer(leaf);
    let single = inner.classify(&VertexSet::singleton(u));
    let mut table = Table::default();
    let mut buf = Vec::with_capacity(q);
    for r_out in outs {
        buf.clear();
        buf.extend((0..q).map(|h| outer.neighbor_count(u, r_out.get(h)) as u8));
        for j in 0..q {
            if !spec.check_capped(u, j, &buf) {
                continue;
            }
            let sizes = mode.unit(q, j);
            if !mode.feasible(&sizes, 1, n) {
                continue;
            }
            let mut r = TupleClass::empty(q);
            r.0[j] = single;
            let cand = Candidate {
                x: Partition::single(q, u, j),
                weight: spec.weight_capped(u, j, &buf),
            };
            // an isolated vertex is equivalent to ∅ in every colour, so
            // several colours can share a key
            table
                .entry(TableKey {
                    r,
                    r_out: r_out.clone(),
                    sizes,
                })
                .or_default()
                .push(cand);
        }
    }
    table
}

/// Memoised scalar class unions across a partition of a coarse side into two
/// fine sides.
pub(crate) struct UnionMemo<'a> {
    coarse: &'a NecFamily,
    fa: &'a NecFamily,
    fb: &'a NecFamily,
    // dense when the pair count is small, keyed otherwise
    dense: Vec<u32>,
    map: FxHashMap<(u32, u32), NecClassId>,
}

const DENSE_LIMIT: usize = 1 << 22;
const UNSET: u32 = u32::MAX;

impl<'a> UnionMemo<'a> {
    pub(crate) fn new(coarse: &'a NecFamily, fa: &'a NecFamily, fb: &'a NecFamily) -> Self {
        let pairs = fa.len().saturating_mul(fb.len());
        Self {
            coarse,
            fa,
            fb,
            dense: if pairs <= DENSE_LIMIT {
                vec![UNSET; pairs]
            } else {
                Vec::new()
            },
            map: FxHashMap::default(),
        }
    }

    pub(crate) fn scalar(&mut self, ca: NecClassId, cb: NecClassId) -> NecClassId {
        let (coarse, fa, fb) = (self.coarse, self.fa, self.fb);
        if !self.dense.is_empty() {
            let slot = &mut self.dense[ca.index() * fb.len() + cb.index()];
            if *slot == UNSET {
                *slot = union_unchecked(coarse, fa, ca, fb, cb).0;
            }
            return NecClassId(*slot);
        }
        *self
            .map
            .entry((ca.0, cb.0))
            .or_insert_with(|| union_unchecked(coarse, fa, ca, fb, cb))
    }

    pub(crate) fn tuple(&mut self, a: &TupleClass, b: &TupleClass) -> TupleClass {
        TupleClass(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| self.scalar(x, y))
                .collect(),
        )
    }
}

/// The three union tables needed at an internal node `v` with children
/// `a`, `b`.
pub(crate) struct NodeUnions<'a> {
    /// `R_a ∪ R_b` on `T_v`.
    pub inner: UnionMemo<'a>,
    /// `R_b ∪ R'` on the outer side of `a`.
    pub a_out: UnionMemo<'a>,
    /// `R_a ∪ R'` on the outer side of `b`.
    pub b_out: UnionMemo<'a>,
}

impl<'a> NodeUnions<'a> {
    pub(crate) fn new(families: &'a Families, v: NodeId, a: NodeId, b: NodeId) -> Self {
        Self {
            inner: UnionMemo::new(families.inner(v), families.inner(a), families.inner(b)),
            a_out: UnionMemo::new(families.outer(a), families.inner(b), families.outer(v)),
            b_out: UnionMemo::new(families.outer(b), families.inner(a), families.outer(v)),
        }
    }
}

/// Pre-reduction pools of the join at `v`: for every parent outer class in
/// `outs` and every compatible pair of child keys, all products `Xa ∪ Xb`.
///
/// With `stream = Some(invert)` each pool keeps only its first lightest
/// candidate (heaviest when inverted), which is what reduction would keep
/// when there are no connectivity constraints.
///
/// Errors with the offending count when `max_keys` or `max_pool` would be
/// exceeded.
#[allow(clippy::too_many_arguments)]
pub(crate) fn join_pools(
    dom: &impl WeightDomain<Elem = Weight>,
    mode: &SizeMode,
    unions: &mut NodeUnions<'_>,
    inner_size: usize,
    n: usize,
    ta: &Table,
    tb: &Table,
    outs: &FxIndexSet<TupleClass>,
    max_keys: usize,
    max_pool: usize,
    stream: Option<bool>,
) -> Result<Table, JoinOverflow> {
    // Ta grouped by outer class then inner class; Tb by inner then outer
    let mut ta_groups: FxHashMap<&TupleClass, IndexMap<&TupleClass, Vec<usize>, FxBuildHasher>> =
        FxHashMap::default();
    for (i, k) in ta.keys().enumerate() {
        ta_groups
            .entry(&k.r_out)
            .or_default()
            .entry(&k.r)
            .or_default()
            .push(i);
    }
    let mut tb_groups: IndexMap<&TupleClass, FxHashMap<&TupleClass, Vec<usize>>, FxBuildHasher> =
        IndexMap::default();
    for (i, k) in tb.keys().enumerate() {
        tb_groups
            .entry(&k.r)
            .or_default()
            .entry(&k.r_out)
            .or_default()
            .push(i);
    }
    let mut pools = Table::default();
    let mut total = 0usize;
    for r_out in outs {
        for (&rb, tb_by_out) in &tb_groups {
            let ra_out = unions.a_out.tuple(rb, r_out);
            let Some(ta_by_r) = ta_groups.get(&ra_out) else {
                continue;
            };
            for (&ra, a_idx) in ta_by_r {
                let rb_out = unions.b_out.tuple(ra, r_out);
                let Some(b_idx) = tb_by_out.get(&rb_out) else {
                    continue;
                };
                let r = unions.inner.tuple(ra, rb);
                for &i in a_idx {
                    let (ka, la) = ta.get_index(i).expect("indexed key");
                    for &j in b_idx {
                        let (kb, lb) = tb.get_index(j).expect("indexed key");
                        let sizes = mode.add(&ka.sizes, &kb.sizes);
                        if !mode.feasible(&sizes, inner_size, n) {
                            continue;
                        }
                        let key = TableKey {
                            r: r.clone(),
                            r_out: r_out.clone(),
                            sizes,
                        };
                        if !pools.contains_key(&key) && pools.len() >= max_keys {
                            return Err(JoinOverflow::Keys(pools.len() + 1));
                        }
                        total += la.len() * lb.len();
                        if total > max_pool {
                            return Err(JoinOverflow::Pool(total));
                        }
                        let pool = pools.entry(key).or_default();
                        for za in la {
                            for zb in lb {
                                let weight = dom.combine(za.weight, zb.weight);
                                if let (Some(invert), Some(best)) = (stream, pool.first()) {
                                    let better = if invert {
                                        dom.lt(best.weight, weight)
                                    } else {
                                        dom.lt(weight, best.weight)
                                    };
                                    if better {
                                        pool[0] = Candidate {
                                            x: za.x.merge(&zb.x),
                                            weight,
                                        };
                                    }
                                    continue;
                                }
                                pool.push(Candidate {
                                    x: za.x.merge(&zb.x),
                                    weight,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(pools)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum JoinOverflow {
    Keys(usize),
    Pool(usize),
}
