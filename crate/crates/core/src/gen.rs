//! Random instances: G(n,p), connected variants and interval graphs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::decomp::Interval;
use crate::graph::Graph;

pub fn gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p.clamp(0.0, 1.0)) {
                g.add_edge(u, v).expect("in range");
            }
        }
    }
    g
}

/// G(n,p) plus a uniformly random recursive spanning tree.
pub fn connected_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = gnp(n, p, rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        if !g.has_edge(order[i], order[j]) {
            g.add_edge(order[i], order[j]).expect("in range");
        }
    }
    g
}

/// Connected interval graph on `n` vertices with integer endpoints. Each
/// new interval starts inside the span covered so far, so the union stays
/// one interval. Vertex ids are shuffled against left endpoints.
pub fn interval_graph<R: Rng>(n: usize, rng: &mut R) -> (Graph, Vec<Interval>) {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut intervals = Vec::with_capacity(n);
    let (mut left, mut reach) = (0i64, 0i64);
    for &v in &ids {
        left = rng.gen_range(left..=reach);
        let right = left + rng.gen_range(0..=4);
        reach = reach.max(right);
        intervals.push(Interval {
            vertex: v,
            left: left as f64,
            right: right as f64,
        });
    }
    intervals.sort_by_key(|i| i.vertex);
    (graph_of_intervals(&intervals), intervals)
}

/// Intersection graph; interval `i` is vertex `intervals[i].vertex`.
pub fn graph_of_intervals(intervals: &[Interval]) -> Graph {
    let n = intervals.iter().map(|i| i.vertex + 1).max().unwrap_or(0);
    let mut g = Graph::empty(n);
    for (i, a) in intervals.iter().enumerate() {
        for b in &intervals[i + 1..] {
            if a.left <= b.right && b.left <= a.right && a.vertex != b.vertex {
                g.add_edge(a.vertex, b.vertex).expect("in range");
            }
        }
    }
    g
}

pub fn intervals_to_text(intervals: &[Interval]) -> String {
    intervals
        .iter()
        .map(|i| format!("{} {} {}\n", i.vertex + 1, i.left, i.right))
        .collect()
}

pub fn random_order<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
