//! d-neighbor equivalence across the cuts of a decomposition tree.
//!
//! Two subsets `S, S'` of one side of a cut are equivalent when every vertex
//! `y` on the opposite side satisfies `min(d, |N(y) ∩ S|) = min(d, |N(y) ∩ S'|)`.
//! A class is identified by that vector of capped counts (its signature).
//! Classes of q-tuples are q-tuples of scalar classes and are never
//! enumerated up front.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

use crate::decomp::{cut_of, DecompTree, NodeId, Side};
use crate::graph::{Graph, VertexSet};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NecClassId(pub u32);

impl NecClassId {
    /// The class of the empty set.
    pub const EMPTY: NecClassId = NecClassId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NecClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Capped neighbor counts seen from the opposite side, in opposite-vertex id
/// order.
pub type NecSignature = Box<[u8]>;

/// A q-tuple of scalar classes from one family.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleClass(pub SmallVec<[NecClassId; 8]>);

impl TupleClass {
    pub fn empty(q: usize) -> Self {
        Self(SmallVec::from_elem(NecClassId::EMPTY, q))
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, j: usize) -> NecClassId {
        self.0[j]
    }
}

impl fmt::Debug for TupleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NecError {
    #[error("fine sides do not partition the coarse side")]
    NotAPartition,
}

#[derive(Debug, Clone)]
struct ClassEntry {
    rep: VertexSet,
    sig: NecSignature,
    /// Opposite vertices with a nonzero count.
    touched: VertexSet,
}

/// The classes of one side of one cut.
#[derive(Debug, Clone)]
pub struct NecFamily {
    side: VertexSet,
    opposite: Vec<usize>,
    opp_pos: Vec<u32>,
    d: u8,
    /// Neighborhoods of the opposite vertices, restricted to the side.
    probes: Vec<VertexSet>,
    classes: Vec<ClassEntry>,
    index: HashMap<NecSignature, NecClassId>,
}

impl NecFamily {
    pub fn side(&self) -> &VertexSet {
        &self.side
    }

    pub fn opposite(&self) -> &[usize] {
        &self.opposite
    }

    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NecClassId> {
        (0..self.classes.len() as u32).map(NecClassId)
    }

    pub fn rep(&self, c: NecClassId) -> &VertexSet {
        &self.classes[c.index()].rep
    }

    pub fn signature(&self, c: NecClassId) -> &[u8] {
        &self.classes[c.index()].sig
    }

    /// Opposite vertices adjacent to class `c`.
    pub fn touched(&self, c: NecClassId) -> &VertexSet {
        &self.classes[c.index()].touched
    }

    pub fn signature_of(&self, s: &VertexSet) -> NecSignature {
        let d = self.d as usize;
        self.probes
            .iter()
            .map(|p| p.intersection_len(s).min(d) as u8)
            .collect()
    }

    pub fn class_of_signature(&self, sig: &[u8]) -> Option<NecClassId> {
        self.index.get(sig).copied()
    }

    /// Class of `s ⊆ side`.
    pub fn classify(&self, s: &VertexSet) -> NecClassId {
        debug_assert!(s.is_subset(&self.side));
        let sig = self.signature_of(s);
        *self
            .index
            .get(&sig)
            .expect("closure enumerates every class of the side")
    }

    /// `|N(w) ∩ R|` capped at d, for `w` on the opposite side.
    pub fn neighbor_count(&self, w: usize, c: NecClassId) -> usize {
        let pos = self.opp_pos[w];
        assert!(pos != u32::MAX, "vertex {w} is not on the opposite side");
        self.classes[c.index()].sig[pos as usize] as usize
    }

    pub fn classify_tuple(&self, parts: &[VertexSet]) -> TupleClass {
        TupleClass(parts.iter().map(|p| self.classify(p)).collect())
    }

    /// Class of a disjoint union of members of `classes`: capped sum of their
    /// signatures. `None` when no disjoint realisation exists in the family.
    pub fn class_sum(&self, classes: impl IntoIterator<Item = NecClassId>) -> Option<NecClassId> {
        let d = self.d;
        let mut acc = vec![0u8; self.opposite.len()];
        for c in classes {
            for (a, s) in acc.iter_mut().zip(self.classes[c.index()].sig.iter()) {
                *a = (*a + s).min(d);
            }
        }
        self.class_of_signature(&acc)
    }

    /// `[X]_C` for a tuple class: the class of the union of the parts whose
    /// colour index is in `colors`.
    pub fn tuple_class_c(&self, t: &TupleClass, colors: &[usize]) -> Option<NecClassId> {
        self.class_sum(colors.iter().map(|&j| t.get(j)))
    }
}

/// Enumerates the classes of `side` against the complementary vertices by a
/// breadth-first closure from the empty set, adding vertices in id order.
pub fn enumerate_classes(g: &Graph, side: &VertexSet, d: usize) -> NecFamily {
    assert!(d >= 1, "d must be positive");
    assert!(d <= u8::MAX as usize / 2);
    let opposite: Vec<usize> = g.vertices().difference(side).iter().collect();
    let mut opp_pos = vec![u32::MAX; g.n()];
    for (i, &w) in opposite.iter().enumerate() {
        opp_pos[w] = i as u32;
    }
    let probes = opposite
        .iter()
        .map(|&w| g.neighbors(w).intersection(side))
        .collect();
    let mut fam = NecFamily {
        side: side.clone(),
        opposite,
        opp_pos,
        d: d as u8,
        probes,
        classes: Vec::new(),
        index: HashMap::new(),
    };
    let empty = VertexSet::new();
    fam.push_class(empty.clone());
    let mut queue = VecDeque::from([empty]);
    let members: Vec<usize> = side.iter().collect();
    while let Some(rep) = queue.pop_front() {
        for &u in &members {
            if rep.contains(u) {
                continue;
            }
            let mut next = rep.clone();
            next.insert(u);
            let sig = fam.signature_of(&next);
            if !fam.index.contains_key(&sig) {
                fam.push_class(next.clone());
                queue.push_back(next);
            }
        }
    }
    fam
}

impl NecFamily {
    fn push_class(&mut self, rep: VertexSet) {
        let sig = self.signature_of(&rep);
        let touched = self
            .opposite
            .iter()
            .zip(sig.iter())
            .filter(|(_, &c)| c > 0)
            .map(|(&w, _)| w)
            .collect();
        let id = NecClassId(self.classes.len() as u32);
        self.index.insert(sig.clone(), id);
        self.classes.push(ClassEntry { rep, sig, touched });
    }
}

pub fn classify(fam: &NecFamily, s: &VertexSet) -> NecClassId {
    fam.classify(s)
}

pub fn neighbor_count(fam: &NecFamily, w: usize, c: NecClassId) -> usize {
    fam.neighbor_count(w, c)
}

pub fn classify_tuple(fam: &NecFamily, parts: &[VertexSet]) -> TupleClass {
    fam.classify_tuple(parts)
}

pub fn tuple_class_c(fam: &NecFamily, t: &TupleClass, colors: &[usize]) -> Option<NecClassId> {
    fam.tuple_class_c(t, colors)
}

/// Class in `coarse` of `rep(ca) ∪ rep(cb)`, where the sides of `fa` and `fb`
/// partition the side of `coarse`.
pub fn class_union_classify(
    coarse: &NecFamily,
    fa: &NecFamily,
    ca: NecClassId,
    fb: &NecFamily,
    cb: NecClassId,
) -> Result<NecClassId, NecError> {
    if fa.side.intersects(&fb.side) || fa.side.union(&fb.side) != coarse.side {
        return Err(NecError::NotAPartition);
    }
    Ok(union_unchecked(coarse, fa, ca, fb, cb))
}

pub(crate) fn union_unchecked(
    coarse: &NecFamily,
    fa: &NecFamily,
    ca: NecClassId,
    fb: &NecFamily,
    cb: NecClassId,
) -> NecClassId {
    coarse.classify(&fa.rep(ca).union(fb.rep(cb)))
}

/// Families for both sides of every node of a tree.
#[derive(Debug, Clone)]
pub struct Families {
    pub d: usize,
    inner: Vec<NecFamily>,
    outer: Vec<NecFamily>,
}

impl Families {
    pub fn build(g: &Graph, t: &DecompTree, d: usize) -> Self {
        let per_node: Vec<(NecFamily, NecFamily)> = (0..t.len())
            .into_par_iter()
            .map(|v| {
                let c = cut_of(t, v);
                (
                    enumerate_classes(g, &c.inner, d),
                    enumerate_classes(g, &c.outer, d),
                )
            })
            .collect();
        let (inner, outer) = per_node.into_iter().unzip();
        Self { d, inner, outer }
    }

    pub fn get(&self, node: NodeId, side: Side) -> &NecFamily {
        match side {
            Side::Inner => &self.inner[node],
            Side::Outer => &self.outer[node],
        }
    }

    pub fn inner(&self, node: NodeId) -> &NecFamily {
        &self.inner[node]
    }

    pub fn outer(&self, node: NodeId) -> &NecFamily {
        &self.outer[node]
    }

    pub fn nodes(&self) -> usize {
        self.inner.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnecStats {
    /// `snec_d(T)`: most scalar classes on any side of any node.
    pub snec_d: usize,
    /// `snec_{d,q}(T) = snec_d(T)^q`, saturating.
    pub snec_dq: u128,
}

pub fn snec_stats(families: &Families, q: usize) -> SnecStats {
    let snec_d = (0..families.nodes())
        .map(|v| families.inner(v).len().max(families.outer(v).len()))
        .max()
        .unwrap_or(1);
    SnecStats {
        snec_d,
        snec_dq: (snec_d as u128).saturating_pow(q as u32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::caterpillar_from_order;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn p3_side_ab() {
        // a=0, b=1, c=2
        let g = Graph::path(3);
        let fam = enumerate_classes(&g, &set(&[0, 1]), 1);
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.signature(NecClassId(0)), &[0]);
        assert_eq!(fam.signature(NecClassId(1)), &[1]);
        assert_eq!(fam.rep(NecClassId(1)), &set(&[1]));
        assert_eq!(fam.classify(&VertexSet::new()), NecClassId::EMPTY);
        assert_eq!(fam.classify(&set(&[0])), NecClassId::EMPTY);
        assert_eq!(fam.classify(fam.rep(NecClassId(1))), NecClassId(1));
        assert_eq!(fam.neighbor_count(2, NecClassId::EMPTY), 0);
        assert_eq!(fam.neighbor_count(2, fam.classify(&set(&[1]))), 1);
    }

    #[test]
    fn star_leaves_d2() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let fam = enumerate_classes(&star, &set(&[1, 2, 3]), 2);
        assert_eq!(fam.len(), 3);
        let all = fam.classify(&set(&[1, 2, 3]));
        assert_eq!(fam.neighbor_count(0, all), 2);
    }

    #[test]
    fn side_without_cross_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let fam = enumerate_classes(&g, &set(&[0, 1]), 3);
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn tuple_examples() {
        let g = Graph::path(3);
        let fam = enumerate_classes(&g, &set(&[0, 1]), 1);
        let e = VertexSet::new();
        assert_eq!(
            fam.classify_tuple(&[e.clone(), e.clone()]),
            TupleClass::empty(2)
        );
        let t = fam.classify_tuple(&[set(&[1]), set(&[0])]);
        assert_eq!(
            t.0.as_slice(),
            &[fam.classify(&set(&[1])), NecClassId::EMPTY]
        );
        let reps: Vec<VertexSet> = t.0.iter().map(|&c| fam.rep(c).clone()).collect();
        assert_eq!(fam.classify_tuple(&reps), t);

        assert_eq!(fam.tuple_class_c(&t, &[]), Some(NecClassId::EMPTY));
        assert_eq!(fam.tuple_class_c(&t, &[0]), Some(t.get(0)));
        assert_eq!(
            fam.tuple_class_c(&t, &[0, 1]),
            Some(fam.classify(&set(&[0, 1])))
        );
    }

    #[test]
    fn union_across_nested_cuts() {
        let g = Graph::path(3);
        let coarse = enumerate_classes(&g, &set(&[0, 1]), 1);
        let fa = enumerate_classes(&g, &set(&[0]), 1);
        let fb = enumerate_classes(&g, &set(&[1]), 1);
        let e = NecClassId::EMPTY;
        assert_eq!(class_union_classify(&coarse, &fa, e, &fb, e), Ok(e));
        let ca = fa.classify(&set(&[0]));
        let cb = fb.classify(&set(&[1]));
        let u = class_union_classify(&coarse, &fa, ca, &fb, cb).unwrap();
        assert_eq!(u, coarse.classify(&set(&[0, 1])));
        assert_eq!(coarse.signature(u), &[1]);
        assert_eq!(
            class_union_classify(&coarse, &fa, ca, &fb, e).unwrap(),
            coarse.classify(&set(&[0]))
        );
        assert_eq!(
            class_union_classify(&coarse, &fa, ca, &fa, ca),
            Err(NecError::NotAPartition)
        );
    }

    #[test]
    fn capped_sum_is_disjoint_union_class() {
        // vertex 0 on the opposite side sees 1, 2, 3; with d=2 the union of
        // two copies of a one-vertex rep must not collapse to one count
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let fam = enumerate_classes(&star, &set(&[1, 2, 3]), 2);
        let one = fam.classify(&set(&[1]));
        let t = TupleClass(SmallVec::from_slice(&[one, one]));
        let two = fam.tuple_class_c(&t, &[0, 1]).unwrap();
        assert_eq!(fam.neighbor_count(0, two), 2);
    }

    #[test]
    fn snec_examples() {
        let g = Graph::path(3);
        let t = caterpillar_from_order(&g, &[0, 1, 2]).unwrap();
        assert_eq!(snec_stats(&Families::build(&g, &t, 1), 2).snec_d, 2);
        let e = Graph::empty(4);
        let t = caterpillar_from_order(&e, &[0, 1, 2, 3]).unwrap();
        assert_eq!(snec_stats(&Families::build(&e, &t, 1), 2).snec_d, 1);
        let k = Graph::complete(5);
        let t = caterpillar_from_order(&k, &[3, 1, 0, 4, 2]).unwrap();
        let s = snec_stats(&Families::build(&k, &t, 1), 3);
        assert_eq!(s.snec_d, 2);
        assert_eq!(s.snec_dq, 8);
    }

    #[test]
    fn capped_count_additivity() {
        for d in 1..=4usize {
            for a in 0..=2 * d + 2 {
                for b in 0..=2 * d + 2 {
                    assert_eq!((a + b).min(d), (a.min(d) + b.min(d)).min(d));
                }
            }
        }
    }
}
