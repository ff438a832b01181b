//! Weight sets: totally ordered commutative monoids whose maximum element
//! `Error` is absorbing and whose combination respects the order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// An element of one of the built-in weight domains.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    Value(i64),
    /// The maximum element: `+∞` in min-plus, `-∞` in max-plus, `1` in
    /// bool-max.
    Error,
}

impl Weight {
    pub fn is_error(self) -> bool {
        matches!(self, Weight::Error)
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Value(v) => write!(f, "{v}"),
            Weight::Error => write!(f, "Error"),
        }
    }
}

/// The algebra a solver needs from a weight set.
pub trait WeightDomain {
    type Elem: Copy + PartialEq + fmt::Debug;

    /// `a ⪯ b`.
    fn le(&self, a: Self::Elem, b: Self::Elem) -> bool;
    fn combine(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neutral(&self) -> Self::Elem;
    fn error(&self) -> Self::Elem;

    fn lt(&self, a: Self::Elem, b: Self::Elem) -> bool {
        self.le(a, b) && !self.le(b, a)
    }

    fn cmp(&self, a: Self::Elem, b: Self::Elem) -> Ordering {
        match (self.le(a, b), self.le(b, a)) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            _ => Ordering::Greater,
        }
    }

    /// Minimum by `⪯`, keeping `a` on ties.
    fn min(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        if self.le(a, b) {
            a
        } else {
            b
        }
    }
}

/// The built-in weight sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `(ℕ ∪ {+∞}, ≤, +)`.
    MinPlus,
    /// `(ℕ ∪ {−∞}, ≥, +)`: minimizing in this order maximizes the value.
    MaxPlus,
    /// `({0, 1}, ≤, max)` with `1 = Error`.
    BoolMax,
}

impl WeightDomain for Domain {
    type Elem = Weight;

    fn le(&self, a: Weight, b: Weight) -> bool {
        match (a, b) {
            (_, Weight::Error) => true,
            (Weight::Error, _) => false,
            (Weight::Value(x), Weight::Value(y)) => match self {
                Domain::MinPlus | Domain::BoolMax => x <= y,
                Domain::MaxPlus => x >= y,
            },
        }
    }

    fn combine(&self, a: Weight, b: Weight) -> Weight {
        match (a, b) {
            (Weight::Error, _) | (_, Weight::Error) => Weight::Error,
            (Weight::Value(x), Weight::Value(y)) => match self {
                Domain::MinPlus | Domain::MaxPlus => Weight::Value(x.saturating_add(y)),
                Domain::BoolMax => Weight::Value(x.max(y)),
            },
        }
    }

    fn neutral(&self) -> Weight {
        Weight::Value(0)
    }

    fn error(&self) -> Weight {
        Weight::Error
    }
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::MinPlus => "minplus",
            Domain::MaxPlus => "maxplus",
            Domain::BoolMax => "boolmax",
        }
    }

    /// Reads an element: an integer, or the domain's spelling of `Error`
    /// (`inf`, `-inf`, `1` respectively; `error` is accepted everywhere).
    pub fn parse_elem(self, s: &str) -> Option<Weight> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("error") {
            return Some(Weight::Error);
        }
        match self {
            Domain::MinPlus if s == "inf" || s == "+inf" => Some(Weight::Error),
            Domain::MaxPlus if s == "-inf" => Some(Weight::Error),
            Domain::BoolMax => match s {
                "0" => Some(Weight::Value(0)),
                "1" => Some(Weight::Error),
                _ => None,
            },
            _ => {
                let v: i64 = s.parse().ok()?;
                (v >= 0).then_some(Weight::Value(v))
            }
        }
    }

    pub fn format_elem(self, w: Weight) -> String {
        match (self, w) {
            (_, Weight::Value(v)) => v.to_string(),
            (Domain::MinPlus, Weight::Error) => "inf".into(),
            (Domain::MaxPlus, Weight::Error) => "-inf".into(),
            (Domain::BoolMax, Weight::Error) => "1".into(),
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minplus" => Ok(Domain::MinPlus),
            "maxplus" => Ok(Domain::MaxPlus),
            "boolmax" => Ok(Domain::BoolMax),
            _ => Err(format!(
                "unknown domain `{s}` (expected minplus|maxplus|boolmax)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawViolation {
    pub law: &'static str,
    pub detail: String,
}

/// Outcome of [`validate_domain_laws`]; empty means every law held.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, law: &str) -> bool {
        self.violations.iter().any(|v| v.law == law)
    }
}

/// Checks the weight-set laws on every pair and triple drawn from `sample`.
/// Records the first counterexample per law.
pub fn validate_domain_laws<D: WeightDomain>(dom: &D, sample: &[D::Elem]) -> LawReport {
    let mut report = LawReport::default();
    let mut fail = |law: &'static str, detail: String| {
        if !report.violations.iter().any(|v| v.law == law) {
            report.violations.push(LawViolation { law, detail });
        }
    };
    let e = dom.error();
    let z = dom.neutral();
    for &a in sample {
        if dom.combine(a, z) != a || dom.combine(z, a) != a {
            fail("neutral", format!("{a:?} ⊕ neutral ≠ {a:?}"));
        }
        if dom.combine(a, e) != e || dom.combine(e, a) != e {
            fail("absorbing", format!("{a:?} ⊕ Error ≠ Error"));
        }
        if !dom.le(a, e) {
            fail("error-maximum", format!("{a:?} is not ⪯ Error"));
        }
        if !dom.le(a, a) {
            fail("reflexive", format!("{a:?}"));
        }
        for &b in sample {
            if dom.combine(a, b) != dom.combine(b, a) {
                fail("commutative", format!("{a:?}, {b:?}"));
            }
            if !dom.le(a, b) && !dom.le(b, a) {
                fail("total", format!("{a:?}, {b:?} incomparable"));
            }
            if dom.le(a, b) && dom.le(b, a) && a != b {
                fail("antisymmetric", format!("{a:?}, {b:?}"));
            }
            for &c in sample {
                if dom.combine(dom.combine(a, b), c) != dom.combine(a, dom.combine(b, c)) {
                    fail("associative", format!("{a:?}, {b:?}, {c:?}"));
                }
                if dom.le(a, b) && dom.le(b, c) && !dom.le(a, c) {
                    fail("transitive", format!("{a:?}, {b:?}, {c:?}"));
                }
                if dom.le(a, b) && !dom.le(dom.combine(a, c), dom.combine(b, c)) {
                    fail(
                        "monotone",
                        format!("{a:?} ⪯ {b:?} but {a:?}⊕{c:?} ⋠ {b:?}⊕{c:?}"),
                    );
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minplus_laws() {
        let s = [0, 1, 5].map(Weight::Value);
        let mut sample = s.to_vec();
        sample.push(Weight::Error);
        assert!(validate_domain_laws(&Domain::MinPlus, &sample).passed());
    }

    #[test]
    fn maxplus_laws_and_order() {
        let sample = [Weight::Error, Weight::Value(0), Weight::Value(3)];
        assert!(validate_domain_laws(&Domain::MaxPlus, &sample).passed());
        assert!(Domain::MaxPlus.le(Weight::Value(3), Weight::Value(0)));
        assert_eq!(
            Domain::MaxPlus.combine(Weight::Value(3), Weight::Error),
            Weight::Error
        );
    }

    #[test]
    fn boolmax_laws() {
        let sample = [Weight::Value(0), Weight::Error];
        assert!(validate_domain_laws(&Domain::BoolMax, &sample).passed());
        assert_eq!(Domain::BoolMax.parse_elem("1"), Some(Weight::Error));
        assert_eq!(Domain::BoolMax.format_elem(Weight::Error), "1");
    }

    /// Naturals under ≤ with `a ⊕ b = |a − b|`: commutative but not monotone
    /// (0 ≤ 1 while |0 − 3| = 3 > 2 = |1 − 3|).
    struct AbsDiff;

    impl WeightDomain for AbsDiff {
        type Elem = Option<u32>;
        fn le(&self, a: Option<u32>, b: Option<u32>) -> bool {
            match (a, b) {
                (_, None) => true,
                (None, _) => false,
                (Some(x), Some(y)) => x <= y,
            }
        }
        fn combine(&self, a: Option<u32>, b: Option<u32>) -> Option<u32> {
            Some(a?.abs_diff(b?))
        }
        fn neutral(&self) -> Option<u32> {
            Some(0)
        }
        fn error(&self) -> Option<u32> {
            None
        }
    }

    #[test]
    fn broken_domain_reports_monotonicity() {
        let report = validate_domain_laws(&AbsDiff, &[Some(0), Some(1), Some(3), None]);
        assert!(!report.passed());
        assert!(report.violates("monotone"), "{report:?}");
        assert!(!report.violates("commutative"));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(Domain::MinPlus.parse_elem("inf"), Some(Weight::Error));
        assert_eq!(Domain::MaxPlus.parse_elem("-inf"), Some(Weight::Error));
        assert_eq!(Domain::MinPlus.parse_elem("7"), Some(Weight::Value(7)));
        assert_eq!(Domain::MinPlus.parse_elem("-7"), None);
        assert_eq!(Domain::BoolMax.parse_elem("2"), None);
        assert_eq!("maxplus".parse::<Domain>(), Ok(Domain::MaxPlus));
        assert!("plus".parse::<Domain>().is_err());
    }
}
