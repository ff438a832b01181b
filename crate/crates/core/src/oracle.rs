//! Exhaustive reference implementations for small instances.
//!
//! Nothing here uses the equivalence-class or table code; neighbour counting
//! and connectivity are recomputed from adjacency lists.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::decomp::DecompTree;
use crate::graph::{Graph, VertexSet};
use crate::problems::{ProblemSpec, Weight, WeightDomain};

pub const DEFAULT_BUDGET: u128 = 2_000_000;

/// Most optimal colourings kept in an [`OracleResult`].
pub const KEEP_OPTIMA: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {needed} steps, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub weight: Weight,
    pub feasible: bool,
    /// Optimal colourings in enumeration order, at most [`KEEP_OPTIMA`].
    pub optima: Vec<Vec<usize>>,
}

fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().collect())
        .collect()
}

fn connected(adj: &[Vec<usize>], members: &[bool]) -> bool {
    let Some(start) = members.iter().position(|&m| m) else {
        return true;
    };
    let mut seen = vec![false; members.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if members[u] && !seen[u] {
                seen[u] = true;
                reached += 1;
                stack.push(u);
            }
        }
    }
    reached == members.iter().filter(|&&m| m).count()
}

fn raw_counts(adj: &[Vec<usize>], coloring: &[usize], q: usize, v: usize, d: usize) -> Vec<usize> {
    let mut k = vec![0; q];
    for &u in &adj[v] {
        k[coloring[u]] += 1;
    }
    k.iter().map(|&c| c.min(d)).collect()
}

/// Weight of a complete colouring if it is proper, meets the size
/// constraint and every connectivity constraint; `None` otherwise.
pub fn evaluate_coloring(spec: &ProblemSpec, g: &Graph, coloring: &[usize]) -> Option<Weight> {
    let adj = adjacency(g);
    evaluate_with(spec, &adj, coloring)
}

fn evaluate_with(spec: &ProblemSpec, adj: &[Vec<usize>], coloring: &[usize]) -> Option<Weight> {
    let q = spec.q();
    let n = adj.len();
    if coloring.len() != n || coloring.iter().any(|&c| c >= q) {
        return None;
    }
    let dom = spec.domain();
    let mut w = dom.neutral();
    for v in 0..n {
        let k = raw_counts(adj, coloring, q, v, spec.d());
        if !spec.check_eval(v, coloring[v], &k).ok()? {
            return None;
        }
        w = dom.combine(w, spec.weight_eval(v, coloring[v], &k).ok()?);
    }
    let mut sizes = vec![0; q];
    for &c in coloring {
        sizes[c] += 1;
    }
    if !spec.sizes.admits(&sizes, n) {
        return None;
    }
    for c in spec.connectivity() {
        let members: Vec<bool> = coloring.iter().map(|a| c.contains(a)).collect();
        if !connected(adj, &members) {
            return None;
        }
    }
    Some(w)
}

pub fn brute_solve(spec: &ProblemSpec, g: &Graph) -> Result<OracleResult, OracleError> {
    brute_solve_with(spec, g, DEFAULT_BUDGET)
}

/// Enumerates every colouring, pruning a branch once some vertex whose
/// closed neighbourhood is fully coloured fails its check.
pub fn brute_solve_with(
    spec: &ProblemSpec,
    g: &Graph,
    budget: u128,
) -> Result<OracleResult, OracleError> {
    let n = g.n();
    let q = spec.q();
    let needed = (q as u128).saturating_pow(n as u32);
    if needed > budget {
        return Err(OracleError::Budget { needed, budget });
    }
    let adj = adjacency(g);
    // vertices whose closed neighbourhood is complete once vertex i is coloured
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, nb) in adj.iter().enumerate() {
        let last = nb.iter().copied().chain([v]).max().unwrap_or(v);
        ready[last].push(v);
    }
    let dom = spec.domain();

    struct Search<'a> {
        spec: &'a ProblemSpec,
        adj: &'a [Vec<usize>],
        ready: &'a [Vec<usize>],
        coloring: Vec<usize>,
        best: Option<Weight>,
        optima: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize) {
            let n = self.adj.len();
            if i == n {
                if let Some(w) = evaluate_with(self.spec, self.adj, &self.coloring) {
                    let dom = self.spec.domain();
                    match self.best {
                        Some(b) if dom.lt(b, w) => {}
                        Some(b) if dom.cmp(w, b).is_eq() => {
                            if self.optima.len() < KEEP_OPTIMA {
                                self.optima.push(self.coloring.clone());
                            }
                        }
                        _ => {
                            self.best = Some(w);
                            self.optima = vec![self.coloring.clone()];
                        }
                    }
                }
                return;
            }
            for a in 0..self.spec.q() {
                if !self.spec.is_allowed(i, a) {
                    continue;
                }
                self.coloring[i] = a;
                let ok = self.ready[i].iter().all(|&v| {
                    let k = raw_counts(self.adj, &self.coloring, self.spec.q(), v, self.spec.d());
                    self.spec
                        .check_eval(v, self.coloring[v], &k)
                        .unwrap_or(false)
                });
                if ok {
                    self.go(i + 1);
                }
            }
        }
    }

    if n == 0 {
        return Ok(OracleResult {
            weight: dom.neutral(),
            feasible: true,
            optima: vec![Vec::new()],
        });
    }
    // split on the first vertex's colour; merge in colour order
    let parts: Vec<(Option<Weight>, Vec<Vec<usize>>)> = (0..q)
        .into_par_iter()
        .map(|a| {
            if !spec.is_allowed(0, a) {
                return (None, Vec::new());
            }
            let mut s = Search {
                spec,
                adj: &adj,
                ready: &ready,
                coloring: vec![0; n],
                best: None,
                optima: Vec::new(),
            };
            s.coloring[0] = a;
            let ok = ready[0].iter().all(|&v| {
                let k = raw_counts(&adj, &s.coloring, q, v, spec.d());
                spec.check_eval(v, s.coloring[v], &k).unwrap_or(false)
            });
            if ok {
                s.go(1);
            }
            (s.best, s.optima)
        })
        .collect();
    let mut best: Option<Weight> = None;
    let mut optima = Vec::new();
    for (w, o) in parts {
        let Some(w) = w else { continue };
        match best {
            Some(b) if dom.lt(b, w) => {}
            Some(b) if dom.cmp(w, b).is_eq() => optima.extend(o),
            _ => {
                best = Some(w);
                optima = o;
            }
        }
    }
    optima.truncate(KEEP_OPTIMA);
    let weight = best.unwrap_or(Weight::Error);
    let feasible = !weight.is_error();
    if !feasible {
        optima.clear();
    }
    Ok(OracleResult {
        weight,
        feasible,
        optima,
    })
}

/// Subsets of `side` grouped by capped-count signature against the other
/// vertices, which are listed in increasing id order.
pub type BruteFamily = BTreeMap<Vec<u8>, Vec<VertexSet>>;

pub fn brute_nec(g: &Graph, side: &VertexSet, d: usize) -> Result<BruteFamily, OracleError> {
    let members: Vec<usize> = side.iter().collect();
    if members.len() > 20 {
        return Err(OracleError::Budget {
            needed: 1u128 << members.len(),
            budget: 1 << 20,
        });
    }
    let adj = adjacency(g);
    let opposite: Vec<usize> = (0..g.n()).filter(|&v| !side.contains(v)).collect();
    let mut out = BruteFamily::new();
    for mask in 0u32..(1 << members.len()) {
        let mut inside = vec![false; g.n()];
        let mut set = VertexSet::new();
        for (i, &v) in members.iter().enumerate() {
            if mask >> i & 1 == 1 {
                inside[v] = true;
                set.insert(v);
            }
        }
        let sig = opposite
            .iter()
            .map(|&y| adj[y].iter().filter(|&&u| inside[u]).count().min(d) as u8)
            .collect();
        out.entry(sig).or_default().push(set);
    }
    Ok(out)
}

/// Checks that `reduced` represents `pool` at a node for the outer class
/// whose representative parts are `outer_reps`: every outer partition `Y`
/// of the complement of `T_v` equivalent to those parts, and every `X` in
/// the pool that `Y` completes validly with every connectivity constraint
/// met, must be matched by some `X'` in `reduced` with the same property
/// and `w(X', Y) ⪯ w(X, Y)`.
pub fn brute_representativity(
    spec: &ProblemSpec,
    g: &Graph,
    t: &DecompTree,
    node: usize,
    outer_reps: &[VertexSet],
    pool: &[Vec<VertexSet>],
    reduced: &[Vec<VertexSet>],
) -> Result<bool, OracleError> {
    brute_representativity_with(
        spec,
        g,
        t.inner(node),
        outer_reps,
        pool,
        reduced,
        DEFAULT_BUDGET,
    )
}

pub fn brute_representativity_with(
    spec: &ProblemSpec,
    g: &Graph,
    inner: &VertexSet,
    outer_reps: &[VertexSet],
    pool: &[Vec<VertexSet>],
    reduced: &[Vec<VertexSet>],
    budget: u128,
) -> Result<bool, OracleError> {
    let q = spec.q();
    let d = spec.d();
    let n = g.n();
    let adj = adjacency(g);
    let outside: Vec<usize> = (0..n).filter(|&v| !inner.contains(v)).collect();
    let needed = (q as u128).saturating_pow(outside.len() as u32);
    if needed > budget {
        return Err(OracleError::Budget { needed, budget });
    }
    let inner_v: Vec<usize> = inner.iter().collect();
    // per inner vertex and colour, capped neighbours in that colour's part
    let capped_sig = |parts: &[VertexSet]| -> Vec<u8> {
        let mut sig = Vec::with_capacity(inner_v.len() * q);
        for &x in &inner_v {
            for p in parts {
                sig.push(adj[x].iter().filter(|&&u| p.contains(u)).count().min(d) as u8);
            }
        }
        sig
    };
    // representatives of different colours may overlap, so each part counts on its own
    let target = capped_sig(outer_reps);
    let dom = spec.domain();

    // colouring of the whole graph from X (inner) and Y (outer)
    let full = |x: &[VertexSet], y: &[usize]| -> Vec<usize> {
        let mut c = vec![0; n];
        for (j, p) in x.iter().enumerate() {
            for v in p.iter() {
                c[v] = j;
            }
        }
        for (i, &u) in outside.iter().enumerate() {
            c[u] = y[i];
        }
        c
    };
    // Some(weight of X's vertices) if X is valid on T_v and all unions connect
    let score = |x: &[VertexSet], y: &[usize]| -> Option<Weight> {
        let c = full(x, y);
        let mut w = dom.neutral();
        for &v in &inner_v {
            let k = raw_counts(&adj, &c, q, v, d);
            if !spec.check_eval(v, c[v], &k).ok()? {
                return None;
            }
            w = dom.combine(w, spec.weight_eval(v, c[v], &k).ok()?);
        }
        for cons in spec.connectivity() {
            let members: Vec<bool> = c.iter().map(|a| cons.contains(a)).collect();
            if !connected(&adj, &members) {
                return None;
            }
        }
        Some(w)
    };

    let mut y = vec![0usize; outside.len()];
    loop {
        let mut parts = vec![VertexSet::new(); q];
        for (i, &u) in outside.iter().enumerate() {
            parts[y[i]].insert(u);
        }
        let sig = capped_sig(&parts);
        if sig == target {
            let best_reduced = reduced
                .iter()
                .filter_map(|x| score(x, &y))
                .reduce(|a, b| dom.min(a, b));
            for x in pool {
                if let Some(w) = score(x, &y) {
                    match best_reduced {
                        Some(b) if dom.le(b, w) => {}
                        _ => return Ok(false),
                    }
                }
            }
        }
        // next outer colouring
        let mut i = 0;
        loop {
            if i == y.len() {
                return Ok(true);
            }
            y[i] += 1;
            if y[i] < q {
                break;
            }
            y[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{catalog, CatalogParams};

    fn spec(name: &str, p: &str) -> ProblemSpec {
        catalog(name, &p.parse::<CatalogParams>().unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        let r = brute_solve(&spec("mis", ""), &Graph::cycle(5)).unwrap();
        assert_eq!(r.weight, Weight::Value(2));
        assert_eq!(r.optima.len(), 5);
        let r = brute_solve(&spec("dominating-set", ""), &Graph::path(4)).unwrap();
        assert_eq!(r.weight, Weight::Value(2));
        let r = brute_solve(&spec("cfon-star", "k=2"), &Graph::complete(3)).unwrap();
        assert_eq!((r.weight, r.feasible), (Weight::Value(0), true));
        let r = brute_solve(&spec("equitable", "q=2"), &Graph::complete(3)).unwrap();
        assert_eq!((r.weight, r.feasible), (Weight::Error, false));
        let r = brute_solve(&spec("connected-dominating-set", ""), &Graph::path(5)).unwrap();
        assert_eq!(r.weight, Weight::Value(3));
    }

    #[test]
    fn evaluate_checks_everything() {
        let g = Graph::path(4);
        let cds = spec("connected-dominating-set", "");
        assert_eq!(
            evaluate_coloring(&cds, &g, &[1, 0, 0, 1]),
            Some(Weight::Value(2))
        );
        // dominating but not connected
        assert_eq!(evaluate_coloring(&cds, &g, &[0, 1, 1, 0]), None);
        let eq = spec("equitable", "q=2");
        assert_eq!(
            evaluate_coloring(&eq, &g, &[0, 1, 0, 1]),
            Some(Weight::Value(0))
        );
        assert_eq!(evaluate_coloring(&eq, &g, &[0, 1, 0, 0]), None);
    }

    #[test]
    fn budget() {
        assert!(matches!(
            brute_solve_with(&spec("mis", ""), &Graph::path(12), 1000),
            Err(OracleError::Budget {
                needed: 4096,
                budget: 1000
            })
        ));
    }

    #[test]
    fn nec_examples() {
        let g = Graph::path(3);
        let side: VertexSet = [0, 1].into_iter().collect();
        assert_eq!(brute_nec(&g, &side, 1).unwrap().len(), 2);
        assert_eq!(brute_nec(&Graph::empty(4), &side, 1).unwrap().len(), 1);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let leaves: VertexSet = [1, 2, 3].into_iter().collect();
        assert_eq!(brute_nec(&star, &leaves, 2).unwrap().len(), 3);
    }

    #[test]
    fn representativity_examples() {
        // P4 split {0,1} | {2,3}; dominating set, outer parts empty-class
        let g = Graph::path(4);
        let ds = spec("connected-dominating-set", "");
        let inner: VertexSet = [0, 1].into_iter().collect();
        let s = |v: &[usize]| v.iter().copied().collect::<VertexSet>();
        let reps = vec![s(&[2]), s(&[])];
        let pool = vec![vec![s(&[1]), s(&[0])], vec![s(&[0, 1]), s(&[])]];
        let ok = |red: &[Vec<VertexSet>]| {
            brute_representativity_with(&ds, &g, &inner, &reps, &pool, red, 1 << 20).unwrap()
        };
        assert!(ok(&pool));
        assert!(ok(&pool[..1]));
        assert!(!ok(&[]));
        assert!(!ok(&pool[1..]));
    }
}
