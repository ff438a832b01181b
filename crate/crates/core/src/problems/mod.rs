//! Problem definitions: colours, a d-stable check function, a d-stable weight
//! function over a weight domain, size constraints and connectivity
//! constraints.
//!
//! Check and weight functions are stored as dense tables indexed by the
//! vertex colour and the vector of neighbour counts per colour, each capped
//! at `d`. Because the table is only defined on capped vectors, d-stability
//! holds by construction and the solver may cap counts freely.

mod catalog;
mod domain;
mod file;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use catalog::{catalog, catalog_names, CatalogParams};
pub use domain::{validate_domain_laws, Domain, LawReport, LawViolation, Weight, WeightDomain};
pub use file::{
    load_problem_file, load_problem_file_with_budget, problem_to_text, DEFAULT_ROW_BUDGET,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("colour index {0} out of range")]
    ColorOutOfRange(usize),
    #[error("count vector has length {got}, expected {expected}")]
    CountArity { got: usize, expected: usize },
    #[error("count {count} exceeds d = {d}")]
    CountAboveD { count: usize, d: usize },
    #[error("table needs {rows} rows, budget is {budget}")]
    TableTooLarge { rows: u128, budget: usize },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no {table} row for colour {color} counts {counts:?} and no default")]
    MissingRow {
        table: &'static str,
        color: String,
        counts: Vec<usize>,
    },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("bad parameters for `{name}`: {msg}")]
    BadParams { name: String, msg: String },
}

/// Admissible colour-class sizes `𝒦`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeConstraint {
    /// Every size tuple is admissible.
    All,
    /// An explicit list of q-tuples summing to `n`.
    Explicit(BTreeSet<Vec<usize>>),
    /// Every class has size `⌊n/q⌋` or `⌈n/q⌉`.
    Balanced,
    /// Class `j` has at least `min[j]` vertices.
    AtLeast(Vec<usize>),
}

impl SizeConstraint {
    pub fn is_all(&self) -> bool {
        matches!(self, SizeConstraint::All)
    }

    /// Whether a complete size tuple for a graph on `n` vertices is in `𝒦`.
    pub fn admits(&self, sizes: &[usize], n: usize) -> bool {
        if sizes.iter().sum::<usize>() != n {
            return false;
        }
        match self {
            SizeConstraint::All => true,
            SizeConstraint::Explicit(set) => set.contains(sizes),
            SizeConstraint::Balanced => {
                let q = sizes.len();
                let (lo, hi) = (n / q, n.div_ceil(q));
                sizes.iter().all(|&k| k == lo || k == hi)
            }
            SizeConstraint::AtLeast(min) => sizes.iter().zip(min).all(|(k, m)| k >= m),
        }
    }

    /// Whether a partial size tuple with `remaining` vertices still to colour
    /// can be completed to a tuple in `𝒦`. Never rejects a completable tuple.
    pub fn admits_partial(&self, sizes: &[usize], remaining: usize, n: usize) -> bool {
        match self {
            SizeConstraint::All => true,
            SizeConstraint::Explicit(set) => set.iter().any(|k| {
                k.iter().zip(sizes).all(|(kk, s)| s <= kk)
                    && k.iter().zip(sizes).map(|(kk, s)| kk - s).sum::<usize>() == remaining
            }),
            SizeConstraint::Balanced => {
                let q = sizes.len();
                let (lo, hi) = (n / q, n.div_ceil(q));
                sizes.iter().all(|&s| s <= hi)
                    && sizes.iter().map(|&s| lo.saturating_sub(s)).sum::<usize>() <= remaining
            }
            SizeConstraint::AtLeast(min) => {
                sizes
                    .iter()
                    .zip(min)
                    .map(|(s, m)| m.saturating_sub(*s))
                    .sum::<usize>()
                    <= remaining
            }
        }
    }

    /// The members of `𝒦` for `q` colours and `n` vertices, when finite
    /// enumeration is reasonable (explicit and balanced constraints).
    pub fn explicit_tuples(&self, q: usize, n: usize) -> Option<BTreeSet<Vec<usize>>> {
        match self {
            SizeConstraint::Explicit(set) => Some(set.clone()),
            SizeConstraint::Balanced => {
                let (lo, hi) = (n / q, n.div_ceil(q));
                let big = n - lo * q;
                let mut out = BTreeSet::new();
                if lo == hi {
                    out.insert(vec![lo; q]);
                    return Some(out);
                }
                // choose which `big` classes get the larger size
                for mask in 0u64..(1 << q) {
                    if mask.count_ones() as usize == big {
                        out.insert(
                            (0..q)
                                .map(|j| if mask & (1 << j) != 0 { hi } else { lo })
                                .collect(),
                        );
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SizeConstraint::All => "all".into(),
            SizeConstraint::Balanced => "balanced".into(),
            SizeConstraint::Explicit(set) => format!("explicit({} tuples)", set.len()),
            SizeConstraint::AtLeast(m) => format!(
                "min({})",
                m.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }
}

/// A d-stable locally checkable problem with size and connectivity
/// constraints.
#[derive(Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    q: usize,
    d: usize,
    colors: Vec<String>,
    domain: Domain,
    check: Vec<bool>,
    weight: Vec<Weight>,
    allowed: BTreeMap<usize, u64>,
    weight_overrides: BTreeMap<usize, Vec<Weight>>,
    pub sizes: SizeConstraint,
    connectivity: Vec<Vec<usize>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("d", &self.d)
            .field("colors", &self.colors)
            .field("domain", &self.domain)
            .field("sizes", &self.sizes)
            .field("connectivity", &self.connectivity)
            .finish_non_exhaustive()
    }
}

pub(crate) fn table_rows(q: usize, d: usize) -> u128 {
    (q as u128).saturating_mul((d as u128 + 1).saturating_pow(q as u32))
}

/// Iterates all count vectors in `{0..=d}^q`, first coordinate fastest.
pub(crate) fn count_vectors(q: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (d + 1).pow(q as u32);
    (0..total).map(move |mut i| {
        (0..q)
            .map(|_| {
                let k = i % (d + 1);
                i /= d + 1;
                k
            })
            .collect()
    })
}

impl ProblemSpec {
    /// Tabulates `check` and `weight` over every colour and capped count
    /// vector.
    pub fn from_fns(
        name: &str,
        colors: Vec<String>,
        d: usize,
        domain: Domain,
        mut check: impl FnMut(usize, &[usize]) -> bool,
        mut weight: impl FnMut(usize, &[usize]) -> Weight,
    ) -> Result<Self, ProblemError> {
        let q = colors.len();
        Self::check_shape(q, d, DEFAULT_ROW_BUDGET)?;
        let mut c = Vec::with_capacity(q * (d + 1).pow(q as u32));
        let mut w = Vec::with_capacity(c.capacity());
        for a in 0..q {
            for k in count_vectors(q, d) {
                c.push(check(a, &k));
                w.push(weight(a, &k));
            }
        }
        Ok(Self {
            name: name.to_string(),
            q,
            d,
            colors,
            domain,
            check: c,
            weight: w,
            allowed: BTreeMap::new(),
            weight_overrides: BTreeMap::new(),
            sizes: SizeConstraint::All,
            connectivity: Vec::new(),
        })
    }

    pub(crate) fn check_shape(q: usize, d: usize, budget: usize) -> Result<(), ProblemError> {
        if q == 0 || q > 32 {
            return Err(ProblemError::Invalid(format!("q = {q} must be in 1..=32")));
        }
        if d == 0 || d > 100 {
            return Err(ProblemError::Invalid(format!("d = {d} must be in 1..=100")));
        }
        let rows = table_rows(q, d);
        if rows > budget as u128 {
            return Err(ProblemError::TableTooLarge { rows, budget });
        }
        Ok(())
    }

    pub fn with_sizes(mut self, sizes: SizeConstraint) -> Result<Self, ProblemError> {
        match &sizes {
            SizeConstraint::Explicit(set) => {
                if let Some(bad) = set.iter().find(|k| k.len() != self.q) {
                    return Err(ProblemError::Invalid(format!(
                        "size tuple {bad:?} has wrong arity"
                    )));
                }
            }
            SizeConstraint::AtLeast(m) if m.len() != self.q => {
                return Err(ProblemError::Invalid(
                    "size lower bounds have wrong arity".into(),
                ));
            }
            _ => {}
        }
        self.sizes = sizes;
        Ok(self)
    }

    pub fn with_connectivity(mut self, sets: Vec<Vec<usize>>) -> Result<Self, ProblemError> {
        for set in &sets {
            if set.is_empty() {
                return Err(ProblemError::Invalid(
                    "empty connectivity constraint".into(),
                ));
            }
            if let Some(&a) = set.iter().find(|&&a| a >= self.q) {
                return Err(ProblemError::ColorOutOfRange(a));
            }
        }
        self.connectivity = sets
            .into_iter()
            .map(|s| s.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        Ok(self)
    }

    /// Restricts vertex `v` to the listed colours.
    pub fn allow(&mut self, v: usize, colors: &[usize]) -> Result<(), ProblemError> {
        let mut mask = 0u64;
        for &a in colors {
            if a >= self.q {
                return Err(ProblemError::ColorOutOfRange(a));
            }
            mask |= 1 << a;
        }
        self.allowed.insert(v, mask);
        Ok(())
    }

    /// Replaces the weight of vertex `v` by a per-colour constant.
    pub fn override_weights(&mut self, v: usize, weights: Vec<Weight>) -> Result<(), ProblemError> {
        if weights.len() != self.q {
            return Err(ProblemError::CountArity {
                got: weights.len(),
                expected: self.q,
            });
        }
        self.weight_overrides.insert(v, weights);
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn color_index(&self, name: &str) -> Option<usize> {
        self.colors.iter().position(|c| c == name)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// The connectivity constraints `𝒞`, as sorted colour-index lists.
    pub fn connectivity(&self) -> &[Vec<usize>] {
        &self.connectivity
    }

    pub fn allowed_colors(&self) -> &BTreeMap<usize, u64> {
        &self.allowed
    }

    pub fn weight_overrides(&self) -> &BTreeMap<usize, Vec<Weight>> {
        &self.weight_overrides
    }

    pub fn is_allowed(&self, v: usize, a: usize) -> bool {
        self.allowed.get(&v).is_none_or(|m| m & (1 << a) != 0)
    }

    fn row(&self, a: usize, k: &[u8]) -> usize {
        let base = self.d + 1;
        let mut idx = 0;
        for &c in k.iter().rev() {
            idx = idx * base + c as usize;
        }
        a * base.pow(self.q as u32) + idx
    }

    /// Table lookup on pre-capped counts; no range checks.
    #[inline]
    pub fn check_capped(&self, v: usize, a: usize, k: &[u8]) -> bool {
        self.is_allowed(v, a) && self.check[self.row(a, k)]
    }

    #[inline]
    pub fn weight_capped(&self, v: usize, a: usize, k: &[u8]) -> Weight {
        match self.weight_overrides.get(&v) {
            Some(w) => w[a],
            None => self.weight[self.row(a, k)],
        }
    }

    fn validate_counts(&self, a: usize, k: &[usize]) -> Result<Vec<u8>, ProblemError> {
        if a >= self.q {
            return Err(ProblemError::ColorOutOfRange(a));
        }
        if k.len() != self.q {
            return Err(ProblemError::CountArity {
                got: k.len(),
                expected: self.q,
            });
        }
        k.iter()
            .map(|&c| {
                if c > self.d {
                    Err(ProblemError::CountAboveD {
                        count: c,
                        d: self.d,
                    })
                } else {
                    Ok(c as u8)
                }
            })
            .collect()
    }

    /// `check(v, a, k)` for counts already capped at `d`.
    pub fn check_eval(&self, v: usize, a: usize, k: &[usize]) -> Result<bool, ProblemError> {
        let k = self.validate_counts(a, k)?;
        Ok(self.check_capped(v, a, &k))
    }

    /// `w(v, a, k)` for counts already capped at `d`.
    pub fn weight_eval(&self, v: usize, a: usize, k: &[usize]) -> Result<Weight, ProblemError> {
        let k = self.validate_counts(a, k)?;
        Ok(self.weight_capped(v, a, &k))
    }

    /// Caps raw neighbour counts at `d`.
    pub fn cap(&self, k: &[usize]) -> Vec<usize> {
        k.iter().map(|&c| c.min(self.d)).collect()
    }

    #[cfg(test)]
    pub(crate) fn check_table(&self) -> &[bool] {
        &self.check
    }

    #[cfg(test)]
    pub(crate) fn weight_table(&self) -> &[Weight] {
        &self.weight
    }

    pub fn summary(&self) -> String {
        let conn = if self.connectivity.is_empty() {
            "none".to_string()
        } else {
            self.connectivity
                .iter()
                .map(|c| {
                    let names: Vec<_> = c.iter().map(|&a| self.colors[a].as_str()).collect();
                    format!("{{{}}}", names.join(","))
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "q={} d={} domain={} sizes={} connect={} colors={}",
            self.q,
            self.d,
            self.domain.name(),
            self.sizes.describe(),
            conn,
            self.colors.join(",")
        )
    }
}

pub fn check_eval(
    spec: &ProblemSpec,
    v: usize,
    a: usize,
    k: &[usize],
) -> Result<bool, ProblemError> {
    spec.check_eval(v, a, k)
}

pub fn weight_eval(
    spec: &ProblemSpec,
    v: usize,
    a: usize,
    k: &[usize],
) -> Result<Weight, ProblemError> {
    spec.weight_eval(v, a, k)
}
