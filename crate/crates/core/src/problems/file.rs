//! Text format for user-defined problems.
//!
//! ```text
//! # maximum independent set
//! name mis
//! q 2
//! d 1
//! colors S notS
//! domain maxplus
//! check default 1
//! check S 1 * 0
//! weight default 0
//! weight S * * 1
//! ```
//!
//! Count entries may be `*` (any value). Later rows override earlier ones.
//! Vertex ids in `allow` and `vweight` lines are 1-based.

use std::collections::BTreeSet;

use super::{count_vectors, Domain, ProblemError, ProblemSpec, SizeConstraint, Weight};

/// Default cap on `q·(d+1)^q`.
pub const DEFAULT_ROW_BUDGET: usize = 1_000_000;

fn perr(line: usize, msg: impl Into<String>) -> ProblemError {
    ProblemError::Parse {
        line,
        msg: msg.into(),
    }
}

struct Header {
    name: String,
    q: Option<usize>,
    d: Option<usize>,
    colors: Option<Vec<String>>,
    domain: Option<Domain>,
}

/// Parses a problem file with the default row budget.
pub fn load_problem_file(text: &str) -> Result<ProblemSpec, ProblemError> {
    load_problem_file_with_budget(text, DEFAULT_ROW_BUDGET)
}

pub fn load_problem_file_with_budget(
    text: &str,
    budget: usize,
) -> Result<ProblemSpec, ProblemError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            (
                i + 1,
                l.split('#')
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, t)| !t.is_empty())
        .collect();

    let mut h = Header {
        name: "custom".into(),
        q: None,
        d: None,
        colors: None,
        domain: None,
    };
    let num = |line: usize, s: &str| {
        s.parse::<usize>()
            .map_err(|_| perr(line, format!("expected a number, got `{s}`")))
    };
    for (line, t) in &lines {
        let line = *line;
        match t[0] {
            "name" => h.name = t[1..].join(" "),
            "q" => h.q = Some(num(line, t.get(1).copied().unwrap_or(""))?),
            "d" => h.d = Some(num(line, t.get(1).copied().unwrap_or(""))?),
            "colors" => h.colors = Some(t[1..].iter().map(|s| s.to_string()).collect()),
            "domain" => {
                h.domain = Some(
                    t.get(1)
                        .copied()
                        .unwrap_or("")
                        .parse()
                        .map_err(|e: String| perr(line, e))?,
                )
            }
            _ => {}
        }
    }
    let d = h.d.ok_or_else(|| perr(0, "missing `d`"))?;
    let domain = h.domain.ok_or_else(|| perr(0, "missing `domain`"))?;
    let colors = match (h.colors, h.q) {
        (Some(c), Some(q)) if c.len() != q => {
            return Err(perr(
                0,
                format!("`colors` lists {} names but q = {q}", c.len()),
            ))
        }
        (Some(c), _) => c,
        (None, Some(q)) => (1..=q).map(|i| i.to_string()).collect(),
        (None, None) => return Err(perr(0, "missing `q` or `colors`")),
    };
    let q = colors.len();
    if colors.iter().collect::<BTreeSet<_>>().len() != q {
        return Err(perr(0, "duplicate colour names"));
    }
    ProblemSpec::check_shape(q, d, budget)?;
    let per_color = (d + 1).pow(q as u32);
    let rows = q * per_color;

    let color = |line: usize, s: &str| -> Result<usize, ProblemError> {
        colors
            .iter()
            .position(|c| c == s)
            .ok_or_else(|| perr(line, format!("unknown colour `{s}`")))
    };
    // count pattern: None = wildcard
    let pattern = |line: usize, toks: &[&str]| -> Result<Vec<Option<usize>>, ProblemError> {
        if toks.len() != q {
            return Err(perr(
                line,
                format!("expected {q} counts, got {}", toks.len()),
            ));
        }
        toks.iter()
            .map(|&s| {
                if s == "*" {
                    return Ok(None);
                }
                let k = num(line, s)?;
                if k > d {
                    return Err(perr(line, format!("count {k} exceeds d = {d}")));
                }
                Ok(Some(k))
            })
            .collect()
    };
    let matching = |a: usize, pat: &[Option<usize>]| -> Vec<usize> {
        if pat.iter().all(Option::is_some) {
            let idx = pat
                .iter()
                .rev()
                .fold(0, |acc, k| acc * (d + 1) + k.unwrap());
            return vec![a * per_color + idx];
        }
        count_vectors(q, d)
            .enumerate()
            .filter(|(_, k)| pat.iter().zip(k).all(|(p, k)| p.is_none_or(|p| p == *k)))
            .map(|(i, _)| a * per_color + i)
            .collect()
    };

    let mut check: Vec<Option<bool>> = vec![None; rows];
    let mut weight: Vec<Option<Weight>> = vec![None; rows];
    let mut check_default = None;
    let mut weight_default = None;
    let mut allows = Vec::new();
    let mut vweights = Vec::new();
    let mut sizes = SizeConstraint::All;
    let mut explicit = BTreeSet::new();
    let mut connect = Vec::new();

    for (line, t) in &lines {
        let line = *line;
        match t[0] {
            "name" | "q" | "d" | "colors" | "domain" => {}
            "check" | "weight" => {
                let is_check = t[0] == "check";
                let parse_val = |s: &str| -> Result<(Option<bool>, Option<Weight>), ProblemError> {
                    if is_check {
                        match s {
                            "0" => Ok((Some(false), None)),
                            "1" => Ok((Some(true), None)),
                            _ => Err(perr(line, format!("check value must be 0 or 1, got `{s}`"))),
                        }
                    } else {
                        let w = domain.parse_elem(s).ok_or_else(|| {
                            perr(line, format!("bad {} element `{s}`", domain.name()))
                        })?;
                        Ok((None, Some(w)))
                    }
                };
                if t.get(1) == Some(&"default") {
                    if t.len() != 3 {
                        return Err(perr(line, "expected `<table> default <value>`"));
                    }
                    let (c, w) = parse_val(t[2])?;
                    if is_check {
                        check_default = c;
                    } else {
                        weight_default = w;
                    }
                    continue;
                }
                if t.len() != q + 3 {
                    return Err(perr(
                        line,
                        format!("expected colour, {q} counts and a value"),
                    ));
                }
                let a = color(line, t[1])?;
                let pat = pattern(line, &t[2..2 + q])?;
                let (c, w) = parse_val(t[2 + q])?;
                for i in matching(a, &pat) {
                    if is_check {
                        check[i] = c;
                    } else {
                        weight[i] = w;
                    }
                }
            }
            "allow" => {
                let v = vertex(line, t.get(1))?;
                let cs = t[2..]
                    .iter()
                    .map(|s| color(line, s))
                    .collect::<Result<Vec<_>, _>>()?;
                allows.push((v, cs));
            }
            "vweight" => {
                let v = vertex(line, t.get(1))?;
                if t.len() != q + 2 {
                    return Err(perr(line, format!("expected {q} weights")));
                }
                let ws = t[2..]
                    .iter()
                    .map(|s| {
                        domain
                            .parse_elem(s)
                            .ok_or_else(|| perr(line, format!("bad weight `{s}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                vweights.push((v, ws));
            }
            "sizes" => {
                sizes = match t.get(1).copied() {
                    Some("all") => SizeConstraint::All,
                    Some("balanced") => SizeConstraint::Balanced,
                    Some("min") => {
                        if t.len() != q + 2 {
                            return Err(perr(line, format!("expected {q} lower bounds")));
                        }
                        SizeConstraint::AtLeast(
                            t[2..]
                                .iter()
                                .map(|s| num(line, s))
                                .collect::<Result<_, _>>()?,
                        )
                    }
                    other => {
                        return Err(perr(
                            line,
                            format!("unknown sizes `{}`", other.unwrap_or("")),
                        ))
                    }
                }
            }
            "size" => {
                if t.len() != q + 1 {
                    return Err(perr(line, format!("expected {q} sizes")));
                }
                explicit.insert(
                    t[1..]
                        .iter()
                        .map(|s| num(line, s))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            "connect" => {
                let cs = t[1..]
                    .iter()
                    .map(|s| color(line, s))
                    .collect::<Result<Vec<_>, _>>()?;
                if cs.is_empty() {
                    return Err(perr(line, "empty connectivity constraint"));
                }
                connect.push(cs);
            }
            other => return Err(perr(line, format!("unknown directive `{other}`"))),
        }
    }
    if !explicit.is_empty() {
        sizes = SizeConstraint::Explicit(explicit);
    }

    let missing = |table: &'static str, i: usize| {
        let a = i / per_color;
        ProblemError::MissingRow {
            table,
            color: colors[a].clone(),
            counts: count_vectors(q, d).nth(i % per_color).unwrap_or_default(),
        }
    };
    let check = check
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.or(check_default).ok_or_else(|| missing("check", i)))
        .collect::<Result<Vec<_>, _>>()?;
    let weight = weight
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.or(weight_default).ok_or_else(|| missing("weight", i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut spec = ProblemSpec::from_fns(
        &h.name,
        colors.clone(),
        d,
        domain,
        |_, _| false,
        |_, _| Weight::Error,
    )?;
    spec.check = check;
    spec.weight = weight;
    for (v, cs) in allows {
        spec.allow(v, &cs)?;
    }
    for (v, ws) in vweights {
        spec.override_weights(v, ws)?;
    }
    spec.with_sizes(sizes)?.with_connectivity(connect)
}

fn vertex(line: usize, tok: Option<&&str>) -> Result<usize, ProblemError> {
    let s = tok.ok_or_else(|| perr(line, "missing vertex id"))?;
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(perr(line, format!("bad vertex id `{s}` (1-based)"))),
    }
}

/// Writes `spec` in the file format, one explicit row per table entry.
pub fn problem_to_text(spec: &ProblemSpec) -> String {
    let dom = spec.domain;
    let mut out = String::new();
    let push = |out: &mut String, s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    push(&mut out, format!("name {}", spec.name));
    push(&mut out, format!("q {}", spec.q));
    push(&mut out, format!("d {}", spec.d));
    push(&mut out, format!("colors {}", spec.colors.join(" ")));
    push(&mut out, format!("domain {}", dom.name()));
    let per_color = (spec.d + 1).pow(spec.q as u32);
    for a in 0..spec.q {
        for (i, k) in count_vectors(spec.q, spec.d).enumerate() {
            let ks = k
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let row = a * per_color + i;
            push(
                &mut out,
                format!(
                    "check {} {ks} {}",
                    spec.colors[a],
                    u8::from(spec.check[row])
                ),
            );
            push(
                &mut out,
                format!(
                    "weight {} {ks} {}",
                    spec.colors[a],
                    dom.format_elem(spec.weight[row])
                ),
            );
        }
    }
    for (&v, &mask) in &spec.allowed {
        let names: Vec<_> = (0..spec.q)
            .filter(|a| mask & (1 << a) != 0)
            .map(|a| spec.colors[a].as_str())
            .collect();
        push(&mut out, format!("allow {} {}", v + 1, names.join(" ")));
    }
    for (&v, ws) in &spec.weight_overrides {
        let ws: Vec<_> = ws.iter().map(|&w| dom.format_elem(w)).collect();
        push(&mut out, format!("vweight {} {}", v + 1, ws.join(" ")));
    }
    let join = |v: &[usize]| {
        v.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    };
    match &spec.sizes {
        SizeConstraint::All => push(&mut out, "sizes all".into()),
        SizeConstraint::Balanced => push(&mut out, "sizes balanced".into()),
        SizeConstraint::AtLeast(m) => push(&mut out, format!("sizes min {}", join(m))),
        SizeConstraint::Explicit(set) => {
            for k in set {
                push(&mut out, format!("size {}", join(k)));
            }
        }
    }
    for c in &spec.connectivity {
        let names: Vec<_> = c.iter().map(|&a| spec.colors[a].as_str()).collect();
        push(&mut out, format!("connect {}", names.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{catalog, CatalogParams};

    const MIS: &str = "\
name mis
q 2
d 1
colors S notS
domain maxplus
check default 1
check S 1 * 0
weight default 0
weight S * * 1
";

    #[test]
    fn mis_file_matches_catalog_tables() {
        let file = load_problem_file(MIS).unwrap();
        let cat = catalog("mis", &CatalogParams::default()).unwrap();
        assert_eq!(file.check_table(), cat.check_table());
        assert_eq!(file.weight_table(), cat.weight_table());
        assert_eq!(file.domain(), Domain::MaxPlus);
    }

    #[test]
    fn small_table_accepted() {
        let text =
            "q 1\nd 2\ndomain boolmax\ncheck 1 0 1\ncheck 1 1 1\ncheck 1 2 0\nweight default 0\n";
        let spec = load_problem_file(text).unwrap();
        assert_eq!(spec.check_eval(0, 0, &[2]), Ok(false));
        assert_eq!(spec.check_eval(0, 0, &[1]), Ok(true));
    }

    #[test]
    fn missing_row_is_reported() {
        let text = "colors 0 1\nd 2\ndomain minplus\ncheck 0 * * 1\ncheck 1 0 * 1\ncheck 1 1 * 1\ncheck 1 2 1 1\ncheck 1 2 2 1\nweight default 0\n";
        let err = load_problem_file(text).unwrap_err();
        assert_eq!(
            err,
            ProblemError::MissingRow {
                table: "check",
                color: "1".into(),
                counts: vec![2, 0]
            }
        );
    }

    #[test]
    fn budget_enforced() {
        let text = "q 3\nd 9\ndomain minplus\ncheck default 1\nweight default 0\n";
        assert!(matches!(
            load_problem_file_with_budget(text, 100),
            Err(ProblemError::TableTooLarge {
                rows: 3000,
                budget: 100
            })
        ));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = "q 2\nd 1\ndomain minplus\ncheck default 1\nweight default 0\ncheck 3 0 0 1\n";
        assert!(matches!(
            load_problem_file(text),
            Err(ProblemError::Parse { line: 6, .. })
        ));
        let text = "q 2\nd 1\ndomain minplus\nbogus\n";
        assert!(matches!(
            load_problem_file(text),
            Err(ProblemError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn round_trip_catalog() {
        for (name, p) in [
            ("connected-dominating-set", ""),
            ("b-coloring", "k=2"),
            ("k-roman", "k=2"),
        ] {
            let mut spec = catalog(name, &p.parse().unwrap()).unwrap();
            spec.allow(2, &[0]).unwrap();
            let mut ws = vec![Weight::Value(0); spec.q()];
            ws[0] = Weight::Error;
            spec.override_weights(1, ws).unwrap();
            let back = load_problem_file(&problem_to_text(&spec)).unwrap();
            assert_eq!(back, spec, "{name}");
        }
    }
}
