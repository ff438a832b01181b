//! Binary decomposition trees: a rooted binary tree whose leaves are in
//! bijection with the vertices of a graph. Every node `v` induces the cut
//! `(T_v, V(G) \ T_v)` where `T_v` collects the vertices below `v`.
//!
//! Decomposition file format, one node per line:
//!
//! ```text
//! <id> <parent-id|-> <L|I> [vertex-id-if-leaf]
//! ```
//!
//! Vertex ids are 1-based, matching the graph format. Interval files list
//! `<vertex-id> <left> <right>` per line; sorting by left endpoint gives an
//! order whose caterpillar has mim-width 1.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexSet};

pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node {0} has {1} children")]
    Arity(String, usize),
    #[error("node {0} is declared more than once")]
    DuplicateNode(String),
    #[error("node {node} references unknown parent {parent}")]
    UnknownParent { node: String, parent: String },
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("node {0} is not reachable from the root (cycle)")]
    Unreachable(String),
    #[error("leaf {0} carries no vertex")]
    LeafWithoutVertex(String),
    #[error("internal node {0} carries a vertex")]
    InternalWithVertex(String),
    #[error("vertex {0} unmapped")]
    Unmapped(usize),
    #[error("vertex {0} mapped to more than one leaf")]
    DuplicateVertex(usize),
    #[error("vertex {0} does not exist in the graph")]
    UnknownVertex(usize),
    #[error("order is not a permutation of the vertices: {0}")]
    BadOrder(String),
    #[error("a decomposition needs at least one vertex")]
    EmptyGraph,
    #[error("diagnostic limit: {edges} cross edges exceed the cap of {cap}")]
    DiagnosticLimit { edges: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Option<[NodeId; 2]>,
    /// Graph vertex at a leaf.
    pub vertex: Option<usize>,
}

/// A validated binary decomposition tree. Node ids are dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompTree {
    nodes: Vec<Node>,
    root: NodeId,
    leaf_of: Vec<NodeId>,
    inner: Vec<VertexSet>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Inner,
    Outer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub node: NodeId,
    pub inner: VertexSet,
    pub outer: VertexSet,
}

impl Cut {
    pub fn side(&self, side: Side) -> &VertexSet {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }
}

impl DecompTree {
    /// Validates raw nodes against a graph on `n` vertices and precomputes
    /// `T_v` for every node.
    fn build(nodes: Vec<Node>, labels: Vec<String>, n: usize) -> Result<Self, DecompError> {
        if n == 0 {
            return Err(DecompError::EmptyGraph);
        }
        let roots: Vec<_> = (0..nodes.len())
            .filter(|&i| nodes[i].parent.is_none())
            .collect();
        if roots.len() != 1 {
            return Err(DecompError::RootCount(roots.len()));
        }
        let root = roots[0];
        let mut leaf_of = vec![usize::MAX; n];
        for (i, node) in nodes.iter().enumerate() {
            match (node.children, node.vertex) {
                (None, None) => return Err(DecompError::LeafWithoutVertex(labels[i].clone())),
                (Some(_), Some(_)) => {
                    return Err(DecompError::InternalWithVertex(labels[i].clone()))
                }
                (None, Some(v)) => {
                    if v >= n {
                        return Err(DecompError::UnknownVertex(v + 1));
                    }
                    if leaf_of[v] != usize::MAX {
                        return Err(DecompError::DuplicateVertex(v + 1));
                    }
                    leaf_of[v] = i;
                }
                (Some(_), None) => {}
            }
        }
        if let Some(v) = leaf_of.iter().position(|&l| l == usize::MAX) {
            return Err(DecompError::Unmapped(v + 1));
        }
        // reachability from the root rules out cycles among the non-root nodes
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(DecompError::Unreachable(labels[v].clone()));
            }
            if let Some(ch) = nodes[v].children {
                stack.extend(ch);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(DecompError::Unreachable(labels[v].clone()));
        }
        let mut tree = Self {
            nodes,
            root,
            leaf_of,
            inner: Vec::new(),
            labels,
        };
        let mut inner = vec![VertexSet::new(); tree.nodes.len()];
        for v in tree.postorder() {
            inner[v] = match (tree.nodes[v].children, tree.nodes[v].vertex) {
                (Some([a, b]), _) => inner[a].union(&inner[b]),
                (None, Some(u)) => VertexSet::singleton(u),
                _ => unreachable!(),
            };
        }
        tree.inner = inner;
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v]
    }

    pub fn children(&self, v: NodeId) -> Option<[NodeId; 2]> {
        self.nodes[v].children
    }

    pub fn leaf_vertex(&self, v: NodeId) -> Option<usize> {
        self.nodes[v].vertex
    }

    pub fn leaf_of(&self, vertex: usize) -> NodeId {
        self.leaf_of[vertex]
    }

    pub fn n_vertices(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    /// `T_v`.
    pub fn inner(&self, v: NodeId) -> &VertexSet {
        &self.inner[v]
    }

    /// Children before parents; deterministic.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            match self.nodes[v].children {
                Some([a, b]) if !expanded => {
                    stack.push((v, true));
                    stack.push((b, false));
                    stack.push((a, false));
                }
                _ => out.push(v),
            }
        }
        out
    }

    /// Leaf vertices from left to right.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.postorder()
            .into_iter()
            .filter_map(|v| self.nodes[v].vertex)
            .collect()
    }

    /// Writes the tree in the decomposition file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let parent = node
                .parent
                .map_or("-".to_string(), |p| self.labels[p].clone());
            match node.vertex {
                Some(u) => out.push_str(&format!("{} {} L {}\n", self.labels[i], parent, u + 1)),
                None => out.push_str(&format!("{} {} I\n", self.labels[i], parent)),
            }
        }
        out
    }
}

/// Parses and validates a decomposition file against `g`.
pub fn load_decomposition(text: &str, g: &Graph) -> Result<DecompTree, DecompError> {
    struct Raw {
        label: String,
        parent: Option<String>,
        leaf: bool,
        vertex: Option<usize>,
        line: usize,
    }
    let mut raws = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let err = |msg: &str| DecompError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() < 3 || f.len() > 4 {
            return Err(err("expected `<id> <parent|-> <L|I> [vertex]`"));
        }
        let leaf = match f[2] {
            "L" => true,
            "I" => false,
            _ => return Err(err("kind must be L or I")),
        };
        let vertex = match f.get(3) {
            Some(s) => {
                let v: usize = s.parse().map_err(|_| err("bad vertex id"))?;
                if v == 0 {
                    return Err(err("vertex ids are 1-based"));
                }
                Some(v - 1)
            }
            None => None,
        };
        if index.insert(f[0].to_string(), raws.len()).is_some() {
            return Err(DecompError::DuplicateNode(f[0].to_string()));
        }
        raws.push(Raw {
            label: f[0].to_string(),
            parent: (f[1] != "-").then(|| f[1].to_string()),
            leaf,
            vertex,
            line: line_no,
        });
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); raws.len()];
    let mut nodes = Vec::with_capacity(raws.len());
    for (i, r) in raws.iter().enumerate() {
        let parent = match &r.parent {
            Some(p) => {
                let &pi = index.get(p).ok_or_else(|| DecompError::UnknownParent {
                    node: r.label.clone(),
                    parent: p.clone(),
                })?;
                children[pi].push(i);
                Some(pi)
            }
            None => None,
        };
        nodes.push(Node {
            parent,
            children: None,
            vertex: r.vertex,
        });
    }
    for (i, r) in raws.iter().enumerate() {
        let ch = &children[i];
        if r.leaf {
            if !ch.is_empty() {
                return Err(DecompError::Arity(r.label.clone(), ch.len()));
            }
            if r.vertex.is_none() {
                return Err(DecompError::LeafWithoutVertex(r.label.clone()));
            }
        } else {
            if r.vertex.is_some() {
                return Err(DecompError::InternalWithVertex(r.label.clone()));
            }
            if ch.len() != 2 {
                return Err(DecompError::Arity(r.label.clone(), ch.len()));
            }
            nodes[i].children = Some([ch[0], ch[1]]);
        }
        let _ = r.line;
    }
    let labels = raws.into_iter().map(|r| r.label).collect();
    DecompTree::build(nodes, labels, g.n())
}

/// Left-deep tree whose leaves, read left to right, follow `order`.
pub fn caterpillar_from_order(g: &Graph, order: &[usize]) -> Result<DecompTree, DecompError> {
    let n = g.n();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(DecompError::BadOrder(format!(
            "length {} for {n} vertices",
            order.len()
        )));
    }
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(DecompError::BadOrder(format!(
                "vertex {} repeated or out of range",
                v + 1
            )));
        }
    }
    let mut nodes: Vec<Node> = order
        .iter()
        .map(|&v| Node {
            parent: None,
            children: None,
            vertex: Some(v),
        })
        .collect();
    let mut acc = 0;
    for leaf in 1..n {
        let id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: Some([acc, leaf]),
            vertex: None,
        });
        nodes[acc].parent = Some(id);
        nodes[leaf].parent = Some(id);
        acc = id;
    }
    let labels = (0..nodes.len()).map(|i| i.to_string()).collect();
    DecompTree::build(nodes, labels, n)
}

/// Uniformly random merge tree: repeatedly joins two random subtrees.
pub fn random_decomposition<R: Rng>(g: &Graph, rng: &mut R) -> Result<DecompTree, DecompError> {
    let n = g.n();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let mut nodes: Vec<Node> = (0..n)
        .map(|v| Node {
            parent: None,
            children: None,
            vertex: Some(v),
        })
        .collect();
    let mut roots: Vec<usize> = (0..n).collect();
    roots.shuffle(rng);
    while roots.len() > 1 {
        let i = rng.gen_range(0..roots.len());
        let a = roots.swap_remove(i);
        let j = rng.gen_range(0..roots.len());
        let b = roots.swap_remove(j);
        let id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: Some([a, b]),
            vertex: None,
        });
        nodes[a].parent = Some(id);
        nodes[b].parent = Some(id);
        roots.push(id);
    }
    let labels = (0..nodes.len()).map(|i| i.to_string()).collect();
    DecompTree::build(nodes, labels, n)
}

pub fn cut_of(t: &DecompTree, node: NodeId) -> Cut {
    let inner = t.inner(node).clone();
    let outer = VertexSet::full(t.n_vertices()).difference(&inner);
    Cut { node, inner, outer }
}

/// Default cap on cross edges for [`mim_of_cut`].
pub const MIM_EDGE_CAP: usize = 24;

/// Maximum induced matching of the bipartite graph `G[inner, outer]`, by
/// exhaustive search over subsets of cross edges.
pub fn mim_of_cut(g: &Graph, c: &Cut) -> Result<usize, DecompError> {
    mim_of_cut_capped(g, c, MIM_EDGE_CAP)
}

pub fn mim_of_cut_capped(g: &Graph, c: &Cut, cap: usize) -> Result<usize, DecompError> {
    let cross: Vec<(usize, usize)> = c
        .inner
        .iter()
        .flat_map(|u| {
            g.neighbors(u)
                .intersection(&c.outer)
                .iter()
                .map(move |w| (u, w))
                .collect::<Vec<_>>()
        })
        .collect();
    if cross.len() > cap {
        return Err(DecompError::DiagnosticLimit {
            edges: cross.len(),
            cap,
        });
    }
    let m = cross.len();
    let mut best = 0;
    for mask in 0u64..(1u64 << m) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let chosen: Vec<_> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cross[i])
            .collect();
        // induced: the only cross edges among chosen endpoints are the chosen ones
        let induced = chosen.iter().enumerate().all(|(i, &(u1, w1))| {
            chosen
                .iter()
                .enumerate()
                .all(|(j, &(u2, w2))| i == j || (u1 != u2 && w1 != w2 && !g.has_edge(u1, w2)))
        });
        if induced {
            best = size;
        }
    }
    Ok(best)
}

/// `mimw(T, δ)`: maximum of [`mim_of_cut`] over all nodes.
pub fn mim_width(g: &Graph, t: &DecompTree) -> Result<usize, DecompError> {
    let mut best = 0;
    for v in 0..t.len() {
        best = best.max(mim_of_cut(g, &cut_of(t, v))?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub vertex: usize,
    pub left: f64,
    pub right: f64,
}

fn parse_rational(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then_some(p / q)
        }
        None => s.parse().ok(),
    }
}

/// Parses `<vertex-id> <left> <right>` lines. Endpoints may be integers,
/// decimals or fractions `p/q`.
pub fn load_intervals(text: &str) -> Result<Vec<Interval>, DecompError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let err = |msg: &str| DecompError::Parse {
            line: idx + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err("expected `<vertex> <left> <right>`"));
        }
        let v: usize = f[0].parse().map_err(|_| err("bad vertex id"))?;
        if v == 0 {
            return Err(err("vertex ids are 1-based"));
        }
        let left = parse_rational(f[1]).ok_or_else(|| err("bad left endpoint"))?;
        let right = parse_rational(f[2]).ok_or_else(|| err("bad right endpoint"))?;
        if left > right {
            return Err(err("left endpoint exceeds right endpoint"));
        }
        out.push(Interval {
            vertex: v - 1,
            left,
            right,
        });
    }
    Ok(out)
}

/// Vertices sorted by left endpoint, ties by vertex id.
pub fn interval_order(intervals: &[Interval]) -> Vec<usize> {
    let mut iv: Vec<&Interval> = intervals.iter().collect();
    iv.sort_by(|a, b| a.left.total_cmp(&b.left).then(a.vertex.cmp(&b.vertex)));
    iv.into_iter().map(|i| i.vertex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn loads_three_vertex_caterpillar() {
        let g = Graph::path(3);
        let text = "r - I\nx r I\n1 x L 1\n2 x L 2\n3 r L 3\n";
        let t = load_decomposition(text, &g).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!((0..t.len()).filter(|&v| t.children(v).is_some()).count(), 2);
        assert_eq!(t.leaf_order(), vec![0, 1, 2]);
        assert_eq!(cut_of(&t, t.root()).inner, set(&[0, 1, 2]));
        let again = load_decomposition(&t.to_text(), &g).unwrap();
        assert_eq!(again.leaf_order(), t.leaf_order());
    }

    #[test]
    fn reports_unmapped_vertex() {
        let g = Graph::path(3);
        let err = load_decomposition("r - I\n1 r L 1\n3 r L 3\n", &g).unwrap_err();
        assert_eq!(err.to_string(), "vertex 2 unmapped");
    }

    #[test]
    fn reports_non_binary_node() {
        let g = Graph::path(3);
        let err = load_decomposition("k - I\na k L 1\nb k L 2\nc k L 3\n", &g).unwrap_err();
        assert_eq!(err.to_string(), "node k has 3 children");
    }

    #[test]
    fn reports_structural_errors() {
        let g = Graph::path(2);
        assert!(matches!(
            load_decomposition("r - I\na r L 1\nb r L 1\n", &g),
            Err(DecompError::DuplicateVertex(1))
        ));
        assert!(matches!(
            load_decomposition("a - L 1\nb - L 2\n", &g),
            Err(DecompError::RootCount(2))
        ));
        // a two-node cycle detached from the root
        assert!(matches!(
            load_decomposition("r - L 1\nx y I\ny x I\n", &Graph::path(1)),
            Err(DecompError::Arity(..))
        ));
        assert!(matches!(
            load_decomposition("r - I\na r L 1\nb q L 2\n", &g),
            Err(DecompError::UnknownParent { .. })
        ));
        assert!(matches!(
            load_decomposition("r - I\na r L 1\nb r L 5\n", &g),
            Err(DecompError::UnknownVertex(5))
        ));
    }

    #[test]
    fn caterpillar_shapes() {
        let g = Graph::path(3);
        let t = caterpillar_from_order(&g, &[0, 1, 2]).unwrap();
        let [left, right] = t.children(t.root()).unwrap();
        assert_eq!(t.leaf_vertex(right), Some(2));
        let [l1, l2] = t.children(left).unwrap();
        assert_eq!((t.leaf_vertex(l1), t.leaf_vertex(l2)), (Some(0), Some(1)));
        assert_eq!(cut_of(&t, left).inner, set(&[0, 1]));

        let one = caterpillar_from_order(&Graph::empty(1), &[0]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.leaf_vertex(one.root()), Some(0));

        let two = caterpillar_from_order(&Graph::path(2), &[1, 0]).unwrap();
        assert_eq!(two.len(), 3);
        assert_eq!(two.leaf_order(), vec![1, 0]);

        assert!(caterpillar_from_order(&g, &[0, 0, 1]).is_err());
        assert!(caterpillar_from_order(&g, &[0, 1]).is_err());
    }

    #[test]
    fn cut_examples() {
        let g = Graph::path(3);
        let t = caterpillar_from_order(&g, &[0, 1, 2]).unwrap();
        let root = cut_of(&t, t.root());
        assert!(root.outer.is_empty());
        let leaf = cut_of(&t, t.leaf_of(1));
        assert_eq!(leaf.inner, set(&[1]));
        assert_eq!(leaf.outer, set(&[0, 2]));
    }

    #[test]
    fn mim_examples() {
        let g = Graph::path(3);
        let c = Cut {
            node: 0,
            inner: set(&[0, 1]),
            outer: set(&[2]),
        };
        assert_eq!(mim_of_cut(&g, &c).unwrap(), 1);
        // K_{2,2} with parts {0,1} and {2,3}
        let k22 = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let c = Cut {
            node: 0,
            inner: set(&[0, 1]),
            outer: set(&[2, 3]),
        };
        assert_eq!(mim_of_cut(&k22, &c).unwrap(), 1);
        let c = Cut {
            node: 0,
            inner: set(&[0, 1]),
            outer: set(&[2, 3]),
        };
        assert_eq!(mim_of_cut(&Graph::empty(4), &c).unwrap(), 0);
        // perfect matching 0-2, 1-3 is induced
        let m2 = Graph::from_edges(4, &[(0, 2), (1, 3)]).unwrap();
        assert_eq!(mim_of_cut(&m2, &c).unwrap(), 2);
    }

    #[test]
    fn mim_guard() {
        let k = Graph::complete(12);
        let c = Cut {
            node: 0,
            inner: (0..6).collect(),
            outer: (6..12).collect(),
        };
        assert!(matches!(
            mim_of_cut(&k, &c),
            Err(DecompError::DiagnosticLimit { edges: 36, .. })
        ));
    }

    #[test]
    fn interval_caterpillar_has_width_one() {
        let text = "1 0 2\n2 1 3\n3 5/2 4\n4 3.5 6\n5 0.5 1/2\n";
        let iv = load_intervals(text).unwrap();
        let mut edges = Vec::new();
        for a in &iv {
            for b in &iv {
                if a.vertex < b.vertex && a.left <= b.right && b.left <= a.right {
                    edges.push((a.vertex, b.vertex));
                }
            }
        }
        let g = Graph::from_edges(5, &edges).unwrap();
        let order = interval_order(&iv);
        assert_eq!(order, vec![0, 4, 1, 2, 3]);
        let t = caterpillar_from_order(&g, &order).unwrap();
        assert_eq!(mim_width(&g, &t).unwrap(), 1);
        assert!(load_intervals("1 3 2\n").is_err());
    }

    #[test]
    fn sibling_cuts_partition_parent() {
        let g = load_graph("p 6 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 6\n").unwrap();
        let mut rng = rand::thread_rng();
        for _ in 0..20 {
            let t = random_decomposition(&g, &mut rng).unwrap();
            let mut widths = Vec::new();
            for v in 0..t.len() {
                let c = cut_of(&t, v);
                assert_eq!(c.inner.union(&c.outer), g.vertices());
                assert!(!c.inner.intersects(&c.outer));
                if let Some([a, b]) = t.children(v) {
                    assert_eq!(t.inner(a).union(t.inner(b)), *t.inner(v));
                    assert!(!t.inner(a).intersects(t.inner(b)));
                }
                widths.push(mim_of_cut(&g, &c).unwrap());
            }
            assert_eq!(
                mim_width(&g, &t).unwrap(),
                widths.into_iter().max().unwrap()
            );
        }
    }
}
