//! Built-in problems.

use std::str::FromStr;

use super::{Domain, ProblemError, ProblemSpec, SizeConstraint, Weight};

/// Parameters for parameterised catalog entries: `q` for equitable
/// colouring, `k` for the rest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CatalogParams {
    pub q: Option<usize>,
    pub k: Option<usize>,
}

impl FromStr for CatalogParams {
    type Err = String;

    /// Accepts `""`, `"3"`, `"k=3"`, `"q=2"` or `"q=2,k=3"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = CatalogParams::default();
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, val) = match part.split_once('=') {
                Some((k, v)) => (Some(k.trim()), v.trim()),
                None => (None, part),
            };
            let val: usize = val
                .parse()
                .map_err(|_| format!("bad parameter value `{val}`"))?;
            match key {
                Some("q") => p.q = Some(val),
                Some("k") => p.k = Some(val),
                None => {
                    p.k = Some(val);
                    p.q = Some(val);
                }
                Some(other) => return Err(format!("unknown parameter `{other}`")),
            }
        }
        Ok(p)
    }
}

const NAMES: &[(&str, &str)] = &[
    ("mis", "maximum independent set"),
    ("dominating-set", "minimum dominating set"),
    (
        "connected-dominating-set",
        "minimum connected dominating set",
    ),
    ("equitable", "q-equitable colouring (q=<colours>)"),
    ("k-roman", "[k]-Roman domination (k=<k>)"),
    (
        "cfon-star",
        "CFON* k-colouring, colour 0 = uncoloured (k=<k>)",
    ),
    (
        "cfcn-star",
        "CFCN* k-colouring, colour 0 = uncoloured (k=<k>)",
    ),
    ("cfon", "CFON k-colouring (k=<k>)"),
    ("cfcn", "CFCN k-colouring (k=<k>)"),
    ("b-coloring", "b-colouring with k colours (k=<k>)"),
];

/// `(name, description)` of every catalog entry.
pub fn catalog_names() -> &'static [(&'static str, &'static str)] {
    NAMES
}

fn numbered(range: impl Iterator<Item = i64>) -> Vec<String> {
    range.map(|i| i.to_string()).collect()
}

fn need(name: &str, v: Option<usize>, what: &str, min: usize) -> Result<usize, ProblemError> {
    match v {
        Some(x) if x >= min => Ok(x),
        Some(x) => Err(ProblemError::BadParams {
            name: name.into(),
            msg: format!("{what} = {x} must be at least {min}"),
        }),
        None => Err(ProblemError::BadParams {
            name: name.into(),
            msg: format!("missing {what}"),
        }),
    }
}

const S: usize = 0;
const NOT_S: usize = 1;

fn zero(_: usize, _: &[usize]) -> Weight {
    Weight::Value(0)
}

/// Builds a catalog problem.
pub fn catalog(name: &str, params: &CatalogParams) -> Result<ProblemSpec, ProblemError> {
    let set_colors = || vec!["S".to_string(), "notS".to_string()];
    let in_set = |a: usize, _: &[usize]| Weight::Value(i64::from(a == S));
    let spec = match name {
        "mis" => ProblemSpec::from_fns(
            name,
            set_colors(),
            1,
            Domain::MaxPlus,
            |a, k| a == NOT_S || k[S] == 0,
            in_set,
        )?,
        "dominating-set" => ProblemSpec::from_fns(
            name,
            set_colors(),
            1,
            Domain::MinPlus,
            |a, k| a == S || k[S] == 1,
            in_set,
        )?,
        "connected-dominating-set" => ProblemSpec::from_fns(
            name,
            set_colors(),
            1,
            Domain::MinPlus,
            |a, k| a == S || k[S] == 1,
            in_set,
        )?
        .with_connectivity(vec![vec![S]])?,
        "equitable" => {
            let q = need(name, params.q, "q", 1)?;
            ProblemSpec::from_fns(
                name,
                numbered(1..=q as i64),
                1,
                Domain::BoolMax,
                |a, k| k[a] == 0,
                zero,
            )?
            .with_sizes(SizeConstraint::Balanced)?
        }
        "k-roman" => {
            // colours 0..=k+1; vertex labelled a is fine when
            // a + Σ_j j·ℓ_j ≥ k + Σ_{j≥1} ℓ_j
            let k = need(name, params.k, "k", 1)?;
            ProblemSpec::from_fns(
                name,
                numbered(0..=k as i64 + 1),
                k,
                Domain::MinPlus,
                |a, l| {
                    let lhs = a + l.iter().enumerate().map(|(j, &c)| j * c).sum::<usize>();
                    let rhs = k + l.iter().skip(1).sum::<usize>();
                    lhs >= rhs
                },
                |a, _| Weight::Value(a as i64),
            )?
        }
        "cfon-star" | "cfcn-star" | "cfon" | "cfcn" => {
            let k = need(name, params.k, "k", 1)?;
            let star = name.ends_with("-star");
            let closed = name.starts_with("cfcn");
            // with a reserved uncoloured colour 0 the real colours are 1..=k
            let colors = if star {
                numbered(0..=k as i64)
            } else {
                numbered(1..=k as i64)
            };
            let first_real = usize::from(star);
            let q = colors.len();
            ProblemSpec::from_fns(
                name,
                colors,
                2,
                Domain::BoolMax,
                move |a, l| (first_real..q).any(|j| l[j] + usize::from(closed && a == j) == 1),
                zero,
            )?
        }
        "b-coloring" => {
            // colours -k..=-1 then 1..=k; index of ±a is (k - a) and (k + a - 1)
            let k = need(name, params.k, "k", 1)?;
            let neg = move |a: usize| k - a;
            let pos = move |a: usize| k + a - 1;
            let colors = numbered((-(k as i64)..=-1).chain(1..=k as i64));
            ProblemSpec::from_fns(
                name,
                colors,
                1,
                Domain::BoolMax,
                move |c, l| {
                    let (a, b_vertex) = if c < k {
                        (k - c, true)
                    } else {
                        (c - k + 1, false)
                    };
                    let proper = l[pos(a)] + l[neg(a)] == 0;
                    let sees_all = (1..=k)
                        .filter(|&i| i != a)
                        .all(|i| l[pos(i)] + l[neg(i)] >= 1);
                    proper && (!b_vertex || sees_all)
                },
                zero,
            )?
            .with_sizes(SizeConstraint::AtLeast(
                (0..2 * k).map(|c| usize::from(c < k)).collect(),
            ))?
        }
        _ => return Err(ProblemError::UnknownProblem(name.to_string())),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::count_vectors;

    fn p(s: &str) -> CatalogParams {
        s.parse().unwrap()
    }

    #[test]
    fn mis_model() {
        let spec = catalog("mis", &p("")).unwrap();
        assert_eq!((spec.q(), spec.d(), spec.domain()), (2, 1, Domain::MaxPlus));
        assert_eq!(spec.check_eval(0, NOT_S, &[1, 0]), Ok(true));
        assert_eq!(spec.check_eval(0, S, &[1, 0]), Ok(false));
        assert_eq!(spec.weight_eval(0, S, &[0, 1]), Ok(Weight::Value(1)));
        assert_eq!(spec.weight_eval(0, NOT_S, &[0, 1]), Ok(Weight::Value(0)));
    }

    #[test]
    fn cds_model() {
        let spec = catalog("connected-dominating-set", &p("")).unwrap();
        assert_eq!(spec.connectivity(), &[vec![S]]);
        assert_eq!(spec.check_eval(0, NOT_S, &[0, 1]), Ok(false));
        assert_eq!(spec.check_eval(0, NOT_S, &[1, 1]), Ok(true));
        assert_eq!(spec.domain(), Domain::MinPlus);
    }

    #[test]
    fn equitable_model() {
        let spec = catalog("equitable", &p("q=2")).unwrap();
        assert_eq!(spec.weight_eval(0, 1, &[1, 0]), Ok(Weight::Value(0)));
        assert_eq!(spec.check_eval(0, 1, &[1, 0]), Ok(true));
        assert_eq!(spec.check_eval(0, 1, &[0, 1]), Ok(false));
        assert_eq!(
            spec.sizes
                .explicit_tuples(2, 5)
                .unwrap()
                .into_iter()
                .collect::<Vec<_>>(),
            vec![vec![2, 3], vec![3, 2]]
        );
    }

    #[test]
    fn roman_model() {
        let spec = catalog("k-roman", &p("k=3")).unwrap();
        assert_eq!((spec.q(), spec.d()), (5, 3));
        let double = catalog("k-roman", &p("k=2")).unwrap();
        // label 0 with one neighbour labelled 3: 0 + 3 ≥ 2 + 1
        assert_eq!(double.check_eval(0, 0, &[0, 0, 0, 1]), Ok(true));
        // label 0 with one neighbour labelled 2: 0 + 2 < 2 + 1
        assert_eq!(double.check_eval(0, 0, &[0, 0, 1, 0]), Ok(false));
        assert_eq!(double.check_eval(0, 0, &[0, 0, 2, 0]), Ok(true));
        assert_eq!(
            double.weight_eval(0, 3, &[2, 0, 0, 0]),
            Ok(Weight::Value(3))
        );
    }

    #[test]
    fn conflict_free_models() {
        let spec = catalog("cfon-star", &p("k=2")).unwrap();
        assert_eq!((spec.q(), spec.d()), (3, 2));
        // only uncoloured neighbours
        assert_eq!(spec.check_eval(0, 1, &[2, 0, 0]), Ok(false));
        // colour 2 seen exactly once
        assert_eq!(spec.check_eval(0, 1, &[0, 2, 1]), Ok(true));
        let cfcn = catalog("cfcn", &p("k=2")).unwrap();
        assert_eq!(cfcn.q(), 2);
        // own colour 1 plus no neighbour of colour 1
        assert_eq!(cfcn.check_eval(0, 0, &[0, 2]), Ok(true));
        assert_eq!(cfcn.check_eval(0, 0, &[1, 2]), Ok(false));
        let cfon = catalog("cfon", &p("2")).unwrap();
        assert_eq!(cfon.check_eval(0, 0, &[0, 2]), Ok(false));
    }

    #[test]
    fn b_coloring_model() {
        let spec = catalog("b-coloring", &p("k=2")).unwrap();
        assert_eq!(spec.colors(), &["-2", "-1", "1", "2"]);
        assert_eq!(spec.sizes, SizeConstraint::AtLeast(vec![1, 1, 0, 0]));
        // colour -1 (index 1) needs a neighbour coloured ±2 and none ±1
        assert_eq!(spec.check_eval(0, 1, &[0, 0, 0, 1]), Ok(true));
        assert_eq!(spec.check_eval(0, 1, &[0, 0, 0, 0]), Ok(false));
        assert_eq!(spec.check_eval(0, 1, &[0, 0, 1, 1]), Ok(false));
        // colour 1 (index 2) only needs properness
        assert_eq!(spec.check_eval(0, 2, &[0, 0, 0, 0]), Ok(true));
        assert_eq!(spec.check_eval(0, 2, &[0, 1, 0, 0]), Ok(false));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            catalog("nope", &p("")),
            Err(ProblemError::UnknownProblem(_))
        ));
        assert!(matches!(
            catalog("k-roman", &p("")),
            Err(ProblemError::BadParams { .. })
        ));
        assert!(matches!(
            catalog("equitable", &p("q=0")),
            Err(ProblemError::BadParams { .. })
        ));
        assert!("k=x".parse::<CatalogParams>().is_err());
        assert!("z=1".parse::<CatalogParams>().is_err());
    }

    /// The defining formulas evaluated on raw, uncapped counts.
    fn raw_check(name: &str, k: usize, a: usize, l: &[usize]) -> bool {
        match name {
            "mis" => a == NOT_S || l[S] == 0,
            "dominating-set" | "connected-dominating-set" => a == S || l[S] >= 1,
            "equitable" => l[a] == 0,
            "k-roman" => {
                let lhs = a + l.iter().enumerate().map(|(j, &c)| j * c).sum::<usize>();
                lhs >= k + l.iter().skip(1).sum::<usize>()
            }
            "cfon-star" => (1..l.len()).any(|j| l[j] == 1),
            "cfcn-star" => (1..l.len()).any(|j| l[j] + usize::from(a == j) == 1),
            "cfon" => (0..l.len()).any(|j| l[j] == 1),
            "cfcn" => (0..l.len()).any(|j| l[j] + usize::from(a == j) == 1),
            "b-coloring" => {
                let idx = |c: i64| {
                    if c < 0 {
                        (k as i64 + c) as usize
                    } else {
                        k + c as usize - 1
                    }
                };
                let col = if a < k {
                    a as i64 - k as i64
                } else {
                    (a - k + 1) as i64
                };
                let m = col.abs();
                let proper = l[idx(m)] + l[idx(-m)] == 0;
                let all = (1..=k as i64)
                    .filter(|&i| i != m)
                    .all(|i| l[idx(i)] + l[idx(-i)] >= 1);
                proper && (col > 0 || all)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn tables_are_d_stable_against_raw_formulas() {
        let cases = [
            ("mis", 0),
            ("dominating-set", 0),
            ("connected-dominating-set", 0),
            ("equitable", 3),
            ("k-roman", 1),
            ("k-roman", 2),
            ("k-roman", 3),
            ("cfon-star", 2),
            ("cfcn-star", 2),
            ("cfon", 3),
            ("cfcn", 2),
            ("b-coloring", 2),
        ];
        for (name, k) in cases {
            let params = CatalogParams {
                q: Some(k),
                k: Some(k),
            };
            let spec = catalog(name, &params).unwrap();
            let q = spec.q();
            // every raw vector with entries up to d + 3
            for raw in count_vectors(q, spec.d() + 3) {
                let capped = spec.cap(&raw);
                for a in 0..q {
                    assert_eq!(
                        spec.check_eval(0, a, &capped).unwrap(),
                        raw_check(name, k, a, &raw),
                        "{name} k={k} a={a} raw={raw:?}"
                    );
                }
            }
        }
    }
}
