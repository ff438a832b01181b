//! Simple undirected graphs over dense vertex ids and a compact bitset for
//! vertex subsets.
//!
//! Vertex ids are `0..n` internally. The text format uses the DIMACS
//! convention of 1-based endpoints:
//!
//! ```text
//! # comment
//! p 3 2
//! e 1 2
//! e 2 3
//! ```

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

const WORD: usize = 64;

/// A subset of `{0, .., n-1}` stored as a dense bitset.
///
/// Sets over different universes may be mixed; missing words read as zero and
/// trailing zero words are never stored, so equality and hashing are
/// extensional.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    words: SmallVec<[u64; 2]>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: usize) -> Self {
        let mut s = Self::new();
        s.insert(v);
        s
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut words: SmallVec<[u64; 2]> = SmallVec::from_elem(u64::MAX, n / WORD);
        if !n.is_multiple_of(WORD) {
            words.push((1u64 << (n % WORD)) - 1);
        }
        Self { words }
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / WORD;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % WORD);
    }

    pub fn remove(&mut self, v: usize) {
        let w = v / WORD;
        if w < self.words.len() {
            self.words[w] &= !(1 << (v % WORD));
            self.trim();
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words
            .get(v / WORD)
            .is_some_and(|w| w & (1 << (v % WORD)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, o) in words.iter_mut().zip(short.words.iter()) {
            *w |= o;
        }
        Self { words }
    }

    pub fn union_with(&mut self, other: &Self) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (w, o) in self.words.iter_mut().zip(other.words.iter()) {
            *w |= o;
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Self {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        out.trim();
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(other.words.iter()) {
            *w &= !o;
        }
        out.trim();
        out
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().enumerate().all(|(i, w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD + bit)
            })
        })
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `p <n> <m>` header")]
    MissingHeader,
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
}

/// Finite simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<VertexSet>,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![VertexSet::new(); n],
            labels: None,
        }
    }

    /// Builds a graph from 0-based edges. Duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        for x in [u, v] {
            if x >= n {
                return Err(GraphError::OutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).expect("complete graph edges are valid");
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.adj[u]
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn isolated_vertices(&self) -> VertexSet {
        (0..self.n()).filter(|&v| self.adj[v].is_empty()).collect()
    }

    /// External name of a vertex: its label if present, else the 1-based id.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => (v + 1).to_string(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    /// `N[S]`: the closed neighborhood of a set.
    pub fn closed_neighborhood(&self, s: &VertexSet) -> VertexSet {
        let mut out = s.clone();
        for v in s.iter() {
            out.union_with(&self.adj[v]);
        }
        out
    }

    /// Writes the graph in the `p`/`e` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("p {} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            out.push_str(&format!("e {} {}\n", u + 1, v + 1));
        }
        out
    }
}

/// Parses the `p`/`e` text format.
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('c') {
            continue;
        }
        let err = |msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut tok = trimmed.split_whitespace();
        match tok.next() {
            Some("p") => {
                if graph.is_some() {
                    return Err(err("duplicate header"));
                }
                // tolerate the DIMACS `p edge n m` spelling
                let mut fields: Vec<&str> = tok.collect();
                if fields.first().is_some_and(|f| f.parse::<usize>().is_err()) {
                    fields.remove(0);
                }
                if fields.len() != 2 {
                    return Err(err("expected `p <n> <m>`"));
                }
                let n: usize = fields[0].parse().map_err(|_| err("bad vertex count"))?;
                fields[1]
                    .parse::<usize>()
                    .map_err(|_| err("bad edge count"))?;
                graph = Some(Graph::empty(n));
            }
            Some("e") => {
                let g = graph.as_mut().ok_or(GraphError::MissingHeader)?;
                let ends: Vec<&str> = tok.collect();
                if ends.len() != 2 {
                    return Err(err("expected `e <u> <v>`"));
                }
                let u: usize = ends[0].parse().map_err(|_| err("bad endpoint"))?;
                let v: usize = ends[1].parse().map_err(|_| err("bad endpoint"))?;
                let n = g.n();
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(err(&format!("endpoint out of range 1..={n}")));
                }
                if u == v {
                    return Err(err(&format!("self-loop at vertex {u}")));
                }
                g.add_edge(u - 1, v - 1).expect("checked above");
            }
            Some(other) => return Err(err(&format!("unknown record `{other}`"))),
            None => unreachable!(),
        }
    }
    graph.ok_or(GraphError::MissingHeader)
}

/// Connected components of `G[s]`, ordered by smallest member.
pub fn connected_components(g: &Graph, s: &VertexSet) -> Vec<VertexSet> {
    let mut rest = s.clone();
    let mut out = Vec::new();
    while let Some(start) = rest.first() {
        let mut comp = VertexSet::singleton(start);
        let mut frontier = comp.clone();
        while !frontier.is_empty() {
            let mut next = VertexSet::new();
            for v in frontier.iter() {
                next.union_with(g.neighbors(v));
            }
            next = next.intersection(s).difference(&comp);
            comp.union_with(&next);
            frontier = next;
        }
        rest = rest.difference(&comp);
        out.push(comp);
    }
    out
}

/// Whether `G[s]` has at most one component. The empty set counts as
/// connected.
pub fn is_connected(g: &Graph, s: &VertexSet) -> bool {
    let Some(start) = s.first() else {
        return true;
    };
    let mut seen = VertexSet::singleton(start);
    let mut frontier = seen.clone();
    while !frontier.is_empty() {
        let mut next = VertexSet::new();
        for v in frontier.iter() {
            next.union_with(g.neighbors(v));
        }
        next = next.intersection(s).difference(&seen);
        seen.union_with(&next);
        frontier = next;
    }
    seen.len() == s.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn parses_path() {
        let g = load_graph("p 3 2\ne 1 2\ne 2 3\n").unwrap();
        assert_eq!(g, Graph::path(3));
    }

    #[test]
    fn parses_single_vertex() {
        let g = load_graph("p 1 0").unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn rejects_self_loop_with_line() {
        let err = load_graph("p 2 1\ne 1 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn rejects_out_of_range_and_garbage() {
        assert!(matches!(
            load_graph("p 2 1\ne 1 3\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load_graph("p 2 1\n\nx 1 2\n"),
            Err(GraphError::Parse { line: 3, .. })
        ));
        assert_eq!(load_graph("e 1 2"), Err(GraphError::MissingHeader));
        assert_eq!(load_graph("# nothing"), Err(GraphError::MissingHeader));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = load_graph("# dup\np 2 2\ne 1 2\ne 2 1\n").unwrap();
        assert_eq!(g.m(), 1);
        let again = load_graph(&g.to_text()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn components_examples() {
        let p3 = Graph::path(3);
        assert_eq!(
            connected_components(&p3, &set(&[0, 2])),
            vec![set(&[0]), set(&[2])]
        );
        assert_eq!(
            connected_components(&p3, &set(&[0, 1, 2])),
            vec![set(&[0, 1, 2])]
        );
        assert!(connected_components(&p3, &VertexSet::new()).is_empty());
    }

    #[test]
    fn connectivity_examples() {
        let c5 = Graph::cycle(5);
        assert!(is_connected(&c5, &c5.vertices()));
        let p3 = Graph::path(3);
        assert!(!is_connected(&p3, &set(&[0, 2])));
        assert!(is_connected(&p3, &VertexSet::new()));
    }

    #[test]
    fn bitset_basics() {
        let a = set(&[1, 70, 130]);
        let b = set(&[70, 3]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.union(&b), set(&[1, 3, 70, 130]));
        assert_eq!(a.intersection(&b), set(&[70]));
        assert_eq!(a.difference(&b), set(&[1, 130]));
        assert_eq!(a.intersection_len(&b), 1);
        let mut c = set(&[130]);
        c.remove(130);
        assert_eq!(c, VertexSet::new());
        assert_eq!(VertexSet::full(65).len(), 65);
        assert!(set(&[1]).is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..30).prop_map(move |es| {
                let es: Vec<_> = es.into_iter().filter(|(u, v)| u != v).collect();
                Graph::from_edges(n, &es).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn components_partition_the_set(g in arb_graph(), mask in any::<u16>()) {
            let s: VertexSet = (0..g.n()).filter(|v| mask & (1 << v) != 0).collect();
            let comps = connected_components(&g, &s);
            let mut union = VertexSet::new();
            for (i, c) in comps.iter().enumerate() {
                prop_assert!(!c.is_empty());
                prop_assert!(is_connected(&g, c));
                prop_assert!(!union.intersects(c));
                for d in &comps[i + 1..] {
                    for v in c.iter() {
                        prop_assert!(!g.neighbors(v).intersects(d));
                    }
                }
                union.union_with(c);
            }
            prop_assert_eq!(&union, &s);
            prop_assert_eq!(is_connected(&g, &s), comps.len() <= 1);
            for w in comps.windows(2) {
                prop_assert!(w[0].first() < w[1].first());
            }
        }

        #[test]
        fn adjacency_is_symmetric(g in arb_graph()) {
            for u in 0..g.n() {
                prop_assert!(!g.has_edge(u, u));
                for v in g.neighbors(u).iter() {
                    prop_assert!(g.has_edge(v, u));
                }
            }
        }
    }
}
