//! Bottom-up dynamic programming over a decomposition tree.
//!
//! Each node `v` keeps a table keyed by `(R, R', K')`: the inner tuple class
//! of a partial colouring `X` of `T_v`, the class of the outer partition it
//! will be completed with, and (when a size constraint is present) the size
//! tuple of `X`. Entries hold few candidates `X`, each valid against `R'`.
//! Connectivity constraints are enforced by keeping, per key, a set of
//! candidates that represents every connected completion (see [`reduce`]).

mod gf2;
mod reduce;
mod table;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use log::{debug, info};
use rayon::prelude::*;
use thiserror::Error;

use crate::decomp::{DecompTree, NodeId};
use crate::graph::{is_connected, Graph, VertexSet};
use crate::nec::{snec_stats, Families, NecClassId, TupleClass};
use crate::problems::{Domain, ProblemSpec, Weight, WeightDomain};

pub use gf2::{min_weight_basis, F2Matrix};
pub use reduce::{
    connectivity_columns, l_entry, l_star_row, reduce, ColumnCache, ConstraintColumns, ReduceCtx,
    ReduceEvent, ReduceObserver,
};
pub use table::{
    init_leaf, is_valid, weight_of, Candidate, FxIndexSet, Partition, SizeMode, SizeTuple, Table,
    TableKey,
};

use table::{join_pools, JoinOverflow, NodeUnions};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("decomposition covers {tree} vertices but the graph has {graph}")]
    Structure { tree: usize, graph: usize },
    #[error("problem refers to vertex {0}, graph has fewer vertices")]
    VertexOutOfRange(usize),
    #[error("budget exceeded at node {node}: {what} = {count} > {cap}")]
    Budget {
        node: NodeId,
        what: &'static str,
        count: usize,
        cap: usize,
    },
    #[error("table invariant violated at node {node}: {msg}")]
    Invariant { node: NodeId, msg: String },
}

/// Deliberate defects for negative-control testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Reductions keep the heaviest candidates instead of the lightest.
    InvertReductionOrder,
}

#[derive(Clone)]
pub struct SolverConfig {
    /// Most keys a single table may hold.
    pub budget_keys: usize,
    /// Most pre-reduction candidates a single join may produce.
    pub budget_pool: usize,
    /// Re-verify every stored candidate after each node.
    pub check_invariants: bool,
    pub fault: Option<Fault>,
    pub observer: Option<Arc<dyn ReduceObserver>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            budget_keys: 2_000_000,
            budget_pool: 20_000_000,
            check_invariants: cfg!(debug_assertions),
            fault: None,
            observer: None,
        }
    }
}

impl std::fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverConfig")
            .field("budget_keys", &self.budget_keys)
            .field("budget_pool", &self.budget_pool)
            .field("check_invariants", &self.check_invariants)
            .field("fault", &self.fault)
            .field("observer", &self.observer.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub snec_d: usize,
    pub snec_dq: u128,
    /// Largest pool handed to reduction for one key. Without connectivity
    /// constraints or an observer, joins keep only the lightest candidate
    /// per key, so this stays at 1.
    pub max_pool: usize,
    /// Largest stored candidate list.
    pub max_list: usize,
    pub reductions: usize,
    /// Keys stored, summed over nodes.
    pub keys: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub domain: Domain,
    pub weight: Weight,
    /// Colour index per vertex.
    pub witness: Option<Vec<usize>>,
    pub stats: SolveStats,
}

impl SolveResult {
    /// Line-oriented serialisation; vertex ids are 1-based.
    pub fn to_text(&self, spec: &ProblemSpec) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status {}", self.status.as_str());
        let _ = writeln!(
            s,
            "weight {}:{}",
            self.domain.name(),
            self.domain.format_elem(self.weight)
        );
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness {}", w.len());
            for (v, &c) in w.iter().enumerate() {
                let _ = writeln!(s, "{} {}", v + 1, spec.colors()[c]);
            }
        }
        let st = &self.stats;
        let _ = writeln!(s, "stat snec_d {}", st.snec_d);
        let _ = writeln!(s, "stat snec_dq {}", st.snec_dq);
        let _ = writeln!(s, "stat max_pool {}", st.max_pool);
        let _ = writeln!(s, "stat max_list {}", st.max_list);
        let _ = writeln!(s, "stat reductions {}", st.reductions);
        let _ = writeln!(s, "stat keys {}", st.keys);
        s
    }

    /// Reads back [`Self::to_text`] output.
    pub fn from_text(text: &str, spec: &ProblemSpec) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut status = None;
        let mut weight = None;
        let mut witness = None;
        let mut stats = SolveStats::default();
        while let Some(line) = lines.next() {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.as_slice() {
                ["status", "feasible"] => status = Some(Status::Feasible),
                ["status", "infeasible"] => status = Some(Status::Infeasible),
                ["weight", w] => {
                    let (dom, val) = w.split_once(':').ok_or("weight needs a domain tag")?;
                    let dom: Domain = dom.parse()?;
                    if dom != spec.domain() {
                        return Err(format!("weight domain {dom:?} does not match problem"));
                    }
                    weight = Some(dom.parse_elem(val).ok_or(format!("bad weight `{val}`"))?);
                }
                ["witness", n] => {
                    let n: usize = n.parse().map_err(|_| "bad witness length")?;
                    let mut w = vec![usize::MAX; n];
                    for _ in 0..n {
                        let l = lines.next().ok_or("witness truncated")?;
                        let (v, c) = l.trim().split_once(' ').ok_or("bad witness line")?;
                        let v: usize = v.parse().map_err(|_| "bad vertex")?;
                        let c = spec
                            .color_index(c.trim())
                            .ok_or(format!("unknown colour `{c}`"))?;
                        *w.get_mut(v.wrapping_sub(1)).ok_or("vertex out of range")? = c;
                    }
                    witness = Some(w);
                }
                ["stat", name, val] => {
                    let bad = || format!("bad stat `{line}`");
                    match *name {
                        "snec_d" => stats.snec_d = val.parse().map_err(|_| bad())?,
                        "snec_dq" => stats.snec_dq = val.parse().map_err(|_| bad())?,
                        "max_pool" => stats.max_pool = val.parse().map_err(|_| bad())?,
                        "max_list" => stats.max_list = val.parse().map_err(|_| bad())?,
                        "reductions" => stats.reductions = val.parse().map_err(|_| bad())?,
                        "keys" => stats.keys = val.parse().map_err(|_| bad())?,
                        _ => {}
                    }
                }
                _ => return Err(format!("unexpected line `{line}`")),
            }
        }
        Ok(Self {
            status: status.ok_or("missing status")?,
            domain: spec.domain(),
            weight: weight.ok_or("missing weight")?,
            witness,
            stats,
        })
    }
}

pub fn solve(spec: &ProblemSpec, g: &Graph, t: &DecompTree) -> Result<SolveResult, SolveError> {
    solve_with(spec, g, t, &SolverConfig::default())
}

/// Outer classes that can occur at each node, or `None` for "all of the
/// family's tuples" (used when the product is smaller than the realised set).
type OutSets = Vec<FxIndexSet<TupleClass>>;

fn all_tuples(fam_len: usize, q: usize) -> FxIndexSet<TupleClass> {
    let mut out = FxIndexSet::default();
    let total = fam_len.pow(q as u32);
    for mut i in 0..total {
        let mut t = TupleClass::empty(q);
        for j in 0..q {
            t.0[j] = NecClassId((i % fam_len) as u32);
            i /= fam_len;
        }
        out.insert(t);
    }
    out
}

/// Inner tuple classes of every partition of `T_v` (bottom-up), then the
/// outer classes reachable from the root (top-down).
fn realizable_outer(
    spec: &ProblemSpec,
    t: &DecompTree,
    families: &Families,
    unions: &mut [Option<NodeUnions<'_>>],
    cap: usize,
) -> Result<OutSets, SolveError> {
    let q = spec.q();
    let order = t.postorder();
    let mut inn: Vec<FxIndexSet<TupleClass>> = vec![FxIndexSet::default(); t.len()];
    for &v in &order {
        match t.children(v) {
            None => {
                let u = t.leaf_vertex(v).expect("leaf");
                let c = families.inner(v).classify(&VertexSet::singleton(u));
                for j in (0..q).filter(|&j| spec.is_allowed(u, j)) {
                    let mut r = TupleClass::empty(q);
                    r.0[j] = c;
                    inn[v].insert(r);
                }
            }
            Some([a, b]) => {
                let memo = unions[v].as_mut().expect("internal node");
                let mut set = FxIndexSet::default();
                for ra in &inn[a] {
                    for rb in &inn[b] {
                        set.insert(memo.inner.tuple(ra, rb));
                    }
                }
                if set.len() > cap {
                    return Err(SolveError::Budget {
                        node: v,
                        what: "inner classes",
                        count: set.len(),
                        cap,
                    });
                }
                inn[v] = set;
            }
        }
    }
    let mut out: OutSets = vec![FxIndexSet::default(); t.len()];
    out[t.root()].insert(TupleClass::empty(q));
    for &v in order.iter().rev() {
        let Some([a, b]) = t.children(v) else {
            continue;
        };
        for (child, sib, is_a) in [(a, b, true), (b, a, false)] {
            let fam_len = families.outer(child).len();
            let full = (fam_len as u128).saturating_pow(q as u32);
            let product = (inn[sib].len() as u128) * (out[v].len() as u128);
            let set = if full <= product {
                all_tuples(fam_len, q)
            } else {
                let memo = unions[v].as_mut().expect("internal node");
                let m = if is_a {
                    &mut memo.a_out
                } else {
                    &mut memo.b_out
                };
                let mut set = FxIndexSet::default();
                for rs in &inn[sib] {
                    for ro in &out[v] {
                        set.insert(m.tuple(rs, ro));
                    }
                }
                set
            };
            if set.len() > cap {
                return Err(SolveError::Budget {
                    node: child,
                    what: "outer classes",
                    count: set.len(),
                    cap,
                });
            }
            out[child] = set;
        }
    }
    Ok(out)
}

pub fn solve_with(
    spec: &ProblemSpec,
    g: &Graph,
    t: &DecompTree,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let n = g.n();
    if t.n_vertices() != n {
        return Err(SolveError::Structure {
            tree: t.n_vertices(),
            graph: n,
        });
    }
    if let Some(&v) = spec
        .allowed_colors()
        .keys()
        .chain(spec.weight_overrides().keys())
        .find(|&&v| v >= n)
    {
        return Err(SolveError::VertexOutOfRange(v));
    }
    let q = spec.q();
    let dom = spec.domain();
    let families = Families::build(g, t, spec.d());
    let snec = snec_stats(&families, q);
    let mode = SizeMode::new(&spec.sizes, n);
    debug!("snec_d = {}, size mode {:?}", snec.snec_d, mode);

    let mut unions: Vec<Option<NodeUnions<'_>>> = (0..t.len())
        .map(|v| {
            t.children(v)
                .map(|[a, b]| NodeUnions::new(&families, v, a, b))
        })
        .collect();
    let outs = realizable_outer(spec, t, &families, &mut unions, cfg.budget_keys)?;

    let max_pool = AtomicUsize::new(0);
    let max_list = AtomicUsize::new(0);
    let reductions = AtomicUsize::new(0);
    let mut keys_total = 0usize;
    let invert = cfg.fault == Some(Fault::InvertReductionOrder);
    let stream = (spec.connectivity().is_empty() && cfg.observer.is_none()).then_some(invert);

    let mut tables: HashMap<NodeId, Table> = HashMap::new();
    for v in t.postorder() {
        let pools: Table = match t.children(v) {
            None => init_leaf(spec, t, &families, &mode, v, &outs[v]),
            Some([a, b]) => {
                let ta = tables.remove(&a).expect("child table");
                let tb = tables.remove(&b).expect("child table");
                let memo = unions[v].as_mut().expect("internal node");
                join_pools(
                    &dom,
                    &mode,
                    memo,
                    t.inner(v).len(),
                    n,
                    &ta,
                    &tb,
                    &outs[v],
                    cfg.budget_keys,
                    cfg.budget_pool,
                    stream,
                )
                .map_err(|e| match e {
                    JoinOverflow::Keys(c) => SolveError::Budget {
                        node: v,
                        what: "table keys",
                        count: c,
                        cap: cfg.budget_keys,
                    },
                    JoinOverflow::Pool(c) => SolveError::Budget {
                        node: v,
                        what: "pool candidates",
                        count: c,
                        cap: cfg.budget_pool,
                    },
                })?
            }
        };
        let outer = families.outer(v);
        let mut columns = ColumnCache::new();
        for c in spec.connectivity() {
            for key in pools.keys() {
                if let Some(rc) = outer.tuple_class_c(&key.r_out, c) {
                    if rc != NecClassId::EMPTY && !columns.contains_key(&rc) {
                        columns.insert(rc, connectivity_columns(outer, rc));
                    }
                }
            }
        }
        let ctx = ReduceCtx {
            g,
            spec,
            outer,
            columns: &columns,
            invert,
        };
        let entries: Vec<(TableKey, Vec<Candidate>)> = pools.into_iter().collect();
        let reduced: Vec<(TableKey, Vec<Candidate>)> = entries
            .into_par_iter()
            .map(|(key, pool)| {
                reductions.fetch_add(1, Ordering::Relaxed);
                if stream.is_some() && pool.len() <= 1 {
                    // already reduced while joining
                    max_pool.fetch_max(pool.len(), Ordering::Relaxed);
                    return (key, pool);
                }
                let kept = reduce(&ctx, &key.r_out, &pool);
                max_pool.fetch_max(pool.len(), Ordering::Relaxed);
                if let Some(obs) = &cfg.observer {
                    obs.on_reduce(&ReduceEvent {
                        node: v,
                        key: &key,
                        pool: &pool,
                        reduced: &kept,
                    });
                }
                (key, kept)
            })
            .collect();
        let table: Table = reduced.into_iter().filter(|(_, l)| !l.is_empty()).collect();
        let longest = table.values().map(Vec::len).max().unwrap_or(0);
        max_list.fetch_max(longest, Ordering::Relaxed);
        keys_total += table.len();
        if cfg.check_invariants {
            check_table(spec, g, t, &families, &mode, v, &table)?;
        }
        tables.insert(v, table);
    }
    let root_table = tables.remove(&t.root()).expect("root table");

    let mut best: Option<(Weight, &Partition)> = None;
    for (key, list) in &root_table {
        if !mode.admits(&key.sizes) {
            continue;
        }
        for cand in list {
            let connected = spec
                .connectivity()
                .iter()
                .all(|c| is_connected(g, &cand.x.union_of(c)));
            if !connected {
                continue;
            }
            if best.is_none_or(|(w, _)| dom.lt(cand.weight, w)) {
                best = Some((cand.weight, &cand.x));
            }
        }
    }
    let stats = SolveStats {
        snec_d: snec.snec_d,
        snec_dq: snec.snec_dq,
        max_pool: max_pool.into_inner(),
        max_list: max_list.into_inner(),
        reductions: reductions.into_inner(),
        keys: keys_total,
    };
    info!(
        "solved {}: {} keys, max pool {}, max list {}",
        spec.name, stats.keys, stats.max_pool, stats.max_list
    );
    let result = match best {
        Some((w, x)) if !w.is_error() => SolveResult {
            status: Status::Feasible,
            domain: dom,
            weight: w,
            witness: Some(
                (0..n)
                    .map(|v| x.color_of(v).expect("root covers V"))
                    .collect(),
            ),
            stats,
        },
        _ => SolveResult {
            status: Status::Infeasible,
            domain: dom,
            weight: Weight::Error,
            witness: None,
            stats,
        },
    };
    Ok(result)
}

fn check_table(
    spec: &ProblemSpec,
    g: &Graph,
    t: &DecompTree,
    families: &Families,
    mode: &SizeMode,
    v: NodeId,
    table: &Table,
) -> Result<(), SolveError> {
    let fail = |msg: String| Err(SolveError::Invariant { node: v, msg });
    let inner = families.inner(v);
    for (key, list) in table {
        for cand in list {
            if inner.classify_tuple(cand.x.parts()) != key.r {
                return fail(format!("{:?} does not reclassify to {:?}", cand.x, key.r));
            }
            if mode.of_partition(&cand.x) != key.sizes {
                return fail(format!("{:?} has sizes other than {:?}", cand.x, key.sizes));
            }
            if !is_valid(spec, g, t, families, v, &cand.x, &key.r_out) {
                return fail(format!("{:?} invalid against {:?}", cand.x, key.r_out));
            }
            let w = weight_of(spec, g, families, v, &cand.x, &key.r_out);
            if w != cand.weight {
                return fail(format!(
                    "{:?} cached weight {:?} but recomputed {:?}",
                    cand.x, cand.weight, w
                ));
            }
        }
    }
    Ok(())
}
