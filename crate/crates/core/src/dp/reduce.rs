//! Shrinking a pool of candidates for one key to a representative subset
//! that preserves an optimal connected completion for every outer partition
//! of the key's outer class.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};

use crate::decomp::NodeId;
use crate::graph::{connected_components, is_connected, Graph, VertexSet};
use crate::nec::{NecClassId, NecFamily, TupleClass};
use crate::problems::{ProblemSpec, Weight, WeightDomain};

use super::gf2::{min_weight_basis, F2Matrix};
use super::table::{Candidate, Partition, TableKey};

/// Called after every reduction. Implementations must be cheap or filter
/// early; the solver calls this from worker threads.
pub trait ReduceObserver: Sync + Send {
    fn on_reduce(&self, event: &ReduceEvent<'_>);
}

pub struct ReduceEvent<'a> {
    pub node: NodeId,
    pub key: &'a TableKey,
    pub pool: &'a [Candidate],
    pub reduced: &'a [Candidate],
}

/// Column pairs `(R1, R2)` of outer scalar classes for a constraint whose
/// outer class is `rc`. Pairs whose combined class differs from `rc` cannot
/// be realised by a cut of any `Y_C ≡ rc`, so they are left out.
pub fn connectivity_columns(outer: &NecFamily, rc: NecClassId) -> Vec<(NecClassId, NecClassId)> {
    let d = outer.d() as u8;
    let target = outer.signature(rc);
    // a class can be part of the split only if its signature fits below rc
    let fits = |c: NecClassId| {
        outer
            .signature(c)
            .iter()
            .zip(target)
            .all(|(&s, &t)| if t < d { s <= t } else { true })
    };
    let parts: Vec<NecClassId> = outer.ids().filter(|&c| fits(c)).collect();
    let mut out = Vec::new();
    for &r1 in &parts {
        for &r2 in &parts {
            if outer.class_sum([r1, r2]) == Some(rc) {
                out.push((r1, r2));
            }
        }
    }
    out
}

/// `L(X_C, (R1, R2))`: no component of `X_C` is adjacent to both classes.
pub fn l_entry(
    components: &[VertexSet],
    outer: &NecFamily,
    r1: NecClassId,
    r2: NecClassId,
) -> bool {
    let (t1, t2) = (outer.touched(r1), outer.touched(r2));
    !components
        .iter()
        .any(|k| k.intersects(t1) && k.intersects(t2))
}

/// A connectivity constraint's colours with its column pairs.
pub type ConstraintColumns<'a> = (&'a [usize], &'a [(NecClassId, NecClassId)]);

/// One row of `L*` over the product of the per-constraint column lists,
/// first constraint varying slowest.
pub fn l_star_row(
    g: &Graph,
    outer: &NecFamily,
    x: &Partition,
    constraints: &[ConstraintColumns<'_>],
) -> Vec<bool> {
    let per: Vec<Vec<bool>> = constraints
        .iter()
        .map(|(colors, cols)| {
            let comps = connected_components(g, &x.union_of(colors));
            cols.iter()
                .map(|&(r1, r2)| l_entry(&comps, outer, r1, r2))
                .collect()
        })
        .collect();
    kron(&per)
}

fn kron(per: &[Vec<bool>]) -> Vec<bool> {
    let mut row = vec![true];
    for bits in per {
        let mut next = Vec::with_capacity(row.len() * bits.len());
        for &a in &row {
            for &b in bits {
                next.push(a && b);
            }
        }
        row = next;
    }
    row
}

/// Precomputed column lists, keyed by outer scalar class.
pub type ColumnCache = HashMap<NecClassId, Vec<(NecClassId, NecClassId)>>;

pub struct ReduceCtx<'a> {
    pub g: &'a Graph,
    pub spec: &'a ProblemSpec,
    pub outer: &'a NecFamily,
    pub columns: &'a ColumnCache,
    /// Keep maximum instead of minimum weights (fault injection).
    pub invert: bool,
}

/// Orders by `⪰` instead of `⪯`.
struct Reversed<'a, D>(&'a D);

impl<D: WeightDomain> WeightDomain for Reversed<'_, D> {
    type Elem = D::Elem;
    fn le(&self, a: D::Elem, b: D::Elem) -> bool {
        self.0.le(b, a)
    }
    fn combine(&self, a: D::Elem, b: D::Elem) -> D::Elem {
        self.0.combine(a, b)
    }
    fn neutral(&self) -> D::Elem {
        self.0.neutral()
    }
    fn error(&self) -> D::Elem {
        self.0.error()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Empty,
    Connected,
}

/// Representative subset of `pool` for outer class `r_out`, in pool order.
pub fn reduce(ctx: &ReduceCtx<'_>, r_out: &TupleClass, pool: &[Candidate]) -> Vec<Candidate> {
    let dom = ctx.spec.domain();
    let cons = ctx.spec.connectivity();
    if pool.is_empty() {
        return Vec::new();
    }
    if cons.is_empty() {
        let mut best = 0;
        for (i, c) in pool.iter().enumerate().skip(1) {
            let better = if ctx.invert {
                dom.lt(pool[best].weight, c.weight)
            } else {
                dom.lt(c.weight, pool[best].weight)
            };
            if better {
                best = i;
            }
        }
        return vec![pool[best].clone()];
    }

    let mut rcs = Vec::with_capacity(cons.len());
    for c in cons {
        match ctx.outer.tuple_class_c(r_out, c) {
            Some(rc) => rcs.push(rc),
            // no disjoint outer partition has this class: nothing to complete
            None => return Vec::new(),
        }
    }
    let c1: Vec<usize> = (0..cons.len())
        .filter(|&i| rcs[i] == NecClassId::EMPTY)
        .collect();
    let c2: Vec<usize> = (0..cons.len())
        .filter(|&i| rcs[i] != NecClassId::EMPTY)
        .collect();
    let cols: Vec<Cow<'_, [(NecClassId, NecClassId)]>> = c2
        .iter()
        .map(|&i| match ctx.columns.get(&rcs[i]) {
            Some(c) => Cow::Borrowed(c.as_slice()),
            None => Cow::Owned(connectivity_columns(ctx.outer, rcs[i])),
        })
        .collect();
    let width: usize = cols.iter().map(|c| c.len()).product();

    struct Row {
        idx: usize,
        kinds: Vec<Kind>,
        bits: Vec<bool>,
    }
    let mut rows = Vec::new();
    'cand: for (idx, cand) in pool.iter().enumerate() {
        let mut kinds = Vec::with_capacity(c1.len());
        for &i in &c1 {
            let xc = cand.x.union_of(&cons[i]);
            if xc.is_empty() {
                kinds.push(Kind::Empty);
            } else if is_connected(ctx.g, &xc) {
                kinds.push(Kind::Connected);
            } else {
                continue 'cand;
            }
        }
        let mut per = Vec::with_capacity(c2.len());
        for (n, &i) in c2.iter().enumerate() {
            let comps = connected_components(ctx.g, &cand.x.union_of(&cons[i]));
            let reach = ctx.outer.touched(rcs[i]);
            if comps.iter().any(|k| !k.intersects(reach)) {
                continue 'cand;
            }
            per.push(
                cols[n]
                    .iter()
                    .map(|&(r1, r2)| l_entry(&comps, ctx.outer, r1, r2))
                    .collect(),
            );
        }
        rows.push(Row {
            idx,
            kinds,
            bits: kron(&per),
        });
    }

    let mut keep = BTreeSet::new();
    for tau in 0u32..(1 << c1.len()) {
        let group: Vec<&Row> = rows
            .iter()
            .filter(|r| {
                r.kinds
                    .iter()
                    .enumerate()
                    .all(|(b, &k)| tau >> b & 1 == 1 || k == Kind::Empty)
            })
            .collect();
        if group.is_empty() {
            continue;
        }
        let mut m = F2Matrix::new(width);
        let mut ws: Vec<Weight> = Vec::with_capacity(group.len());
        for r in &group {
            m.push_bools(&r.bits);
            ws.push(pool[r.idx].weight);
        }
        let basis = if ctx.invert {
            min_weight_basis(&Reversed(&dom), &m, &ws)
        } else {
            min_weight_basis(&dom, &m, &ws)
        };
        keep.extend(basis.into_iter().map(|i| group[i].idx));
    }
    keep.into_iter().map(|i| pool[i].clone()).collect()
}
