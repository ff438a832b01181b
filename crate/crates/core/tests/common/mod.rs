#![allow(dead_code)]

use mimsolve_core::decomp::{caterpillar_from_order, DecompTree};
use mimsolve_core::dp::{solve_with, SolveResult, SolverConfig};
use mimsolve_core::gen::{gnp, random_order};
use mimsolve_core::graph::Graph;
use mimsolve_core::oracle::{brute_solve, evaluate_coloring};
use mimsolve_core::problems::{catalog, CatalogParams, ProblemSpec};
use rand::Rng;

pub const PROBLEMS: &[(&str, &str)] = &[
    ("mis", ""),
    ("dominating-set", ""),
    ("connected-dominating-set", ""),
    ("equitable", "q=2"),
    ("equitable", "q=3"),
    ("k-roman", "k=1"),
    ("k-roman", "k=2"),
    ("k-roman", "k=3"),
    ("cfon-star", "k=2"),
    ("cfon-star", "k=3"),
    ("b-coloring", "k=2"),
];

pub fn spec(name: &str, params: &str) -> ProblemSpec {
    catalog(name, &params.parse::<CatalogParams>().unwrap()).unwrap()
}

pub fn random_instance<R: Rng>(rng: &mut R, n_lo: usize, n_hi: usize) -> (Graph, DecompTree) {
    let n = rng.gen_range(n_lo..=n_hi);
    let p = rng.gen_range(0.15..0.7);
    let g = gnp(n, p, rng);
    let t = caterpillar_from_order(&g, &random_order(n, rng)).unwrap();
    (g, t)
}

/// Solves and compares against the oracle; `Err` describes a mismatch.
pub fn compare(
    spec: &ProblemSpec,
    g: &Graph,
    t: &DecompTree,
    cfg: &SolverConfig,
) -> Result<SolveResult, String> {
    let res = solve_with(spec, g, t, cfg).map_err(|e| format!("solver error: {e}"))?;
    let want = brute_solve(spec, g).map_err(|e| format!("oracle error: {e}"))?;
    if res.weight != want.weight {
        return Err(format!(
            "weight {:?}, oracle {:?}\n{}",
            res.weight,
            want.weight,
            g.to_text()
        ));
    }
    match &res.witness {
        Some(w) => match evaluate_coloring(spec, g, w) {
            Some(x) if x == res.weight => {}
            other => return Err(format!("witness {w:?} evaluates to {other:?}")),
        },
        None if want.feasible => return Err("feasible but no witness".into()),
        None => {}
    }
    Ok(res)
}
