//! Dense matrices over GF(2) and minimum-weight row bases.

use crate::problems::WeightDomain;

const WORD: usize = 64;

/// A row-major bit matrix. Every row has `width` columns.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    width: usize,
    rows: Vec<Vec<u64>>,
}

impl std::fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows.len(), self.width)?;
        for r in 0..self.rows.len() {
            let s: String = (0..self.width)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

fn words(width: usize) -> usize {
    width.div_ceil(WORD)
}

impl F2Matrix {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn zeros(rows: usize, width: usize) -> Self {
        Self {
            width,
            rows: vec![vec![0; words(width)]; rows],
        }
    }

    /// Builds a matrix from rows of booleans.
    pub fn from_bools(width: usize, rows: &[Vec<bool>]) -> Self {
        let mut m = Self::new(width);
        for r in rows {
            m.push_bools(r);
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn push_bools(&mut self, row: &[bool]) {
        assert_eq!(row.len(), self.width, "row width mismatch");
        let mut bits = vec![0u64; words(self.width)];
        for (c, _) in row.iter().enumerate().filter(|(_, &b)| b) {
            bits[c / WORD] |= 1 << (c % WORD);
        }
        self.rows.push(bits);
    }

    /// Appends a row given as packed words (bits past `width` must be zero).
    pub fn push_words(&mut self, bits: Vec<u64>) {
        assert_eq!(bits.len(), words(self.width), "row width mismatch");
        self.rows.push(bits);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let bit = 1 << (c % WORD);
        if v {
            self.rows[r][c / WORD] |= bit;
        } else {
            self.rows[r][c / WORD] &= !bit;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.rows[r]
    }

    /// `self · other` over GF(2).
    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.width, other.height(), "dimension mismatch");
        let mut out = F2Matrix::zeros(self.height(), other.width);
        for (r, row) in self.rows.iter().enumerate() {
            for k in 0..self.width {
                if row[k / WORD] >> (k % WORD) & 1 == 1 {
                    for (o, x) in out.rows[r].iter_mut().zip(&other.rows[k]) {
                        *o ^= x;
                    }
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.width);
        self.rows.iter().filter(|r| basis.insert(r)).count()
    }
}

/// Incremental XOR basis keyed by lowest set bit.
struct EchelonBasis {
    pivots: Vec<Option<Vec<u64>>>,
}

impl EchelonBasis {
    fn new(width: usize) -> Self {
        Self {
            pivots: vec![None; width],
        }
    }

    /// Adds `row` if it is independent of the rows added so far.
    fn insert(&mut self, row: &[u64]) -> bool {
        let mut x = row.to_vec();
        let mut w = 0;
        while w < x.len() {
            if x[w] == 0 {
                w += 1;
                continue;
            }
            let p = w * WORD + x[w].trailing_zeros() as usize;
            match &self.pivots[p] {
                Some(b) => {
                    for (xi, bi) in x.iter_mut().zip(b).skip(w) {
                        *xi ^= bi;
                    }
                }
                None => {
                    self.pivots[p] = Some(x);
                    return true;
                }
            }
        }
        false
    }
}

/// Indices of a minimum-weight basis of the row space, in selection order.
///
/// Rows are stably sorted by weight (ties keep input order) and kept
/// greedily while independent of those already kept. Zero rows are never
/// kept.
pub fn min_weight_basis<D: WeightDomain>(dom: &D, m: &F2Matrix, weights: &[D::Elem]) -> Vec<usize> {
    assert_eq!(weights.len(), m.height(), "one weight per row");
    let mut order: Vec<usize> = (0..m.height()).collect();
    order.sort_by(|&a, &b| dom.cmp(weights[a], weights[b]));
    let mut basis = EchelonBasis::new(m.width());
    order
        .into_iter()
        .filter(|&r| basis.insert(m.row_words(r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Domain, Weight};
    use proptest::prelude::*;

    fn w(xs: &[i64]) -> Vec<Weight> {
        xs.iter().map(|&x| Weight::Value(x)).collect()
    }

    #[test]
    fn basis_examples() {
        let m = F2Matrix::from_bools(2, &[vec![true, false], vec![false, true], vec![true, true]]);
        assert_eq!(
            min_weight_basis(&Domain::MinPlus, &m, &w(&[1, 2, 3])),
            vec![0, 1]
        );
        let m = F2Matrix::from_bools(2, &[vec![true, true], vec![true, true]]);
        assert_eq!(min_weight_basis(&Domain::MinPlus, &m, &w(&[4, 1])), vec![1]);
        let m = F2Matrix::from_bools(3, &[vec![false; 3], vec![false; 3]]);
        assert!(min_weight_basis(&Domain::MinPlus, &m, &w(&[0, 0])).is_empty());
    }

    #[test]
    fn error_rows_come_last_but_stay() {
        let m = F2Matrix::from_bools(2, &[vec![true, false], vec![false, true], vec![true, true]]);
        let ws = vec![Weight::Error, Weight::Value(1), Weight::Value(2)];
        assert_eq!(min_weight_basis(&Domain::MinPlus, &m, &ws), vec![1, 2]);
        let ws = vec![Weight::Error, Weight::Value(1), Weight::Error];
        assert_eq!(min_weight_basis(&Domain::MinPlus, &m, &ws), vec![1, 0]);
    }

    #[test]
    fn maxplus_prefers_large() {
        let m = F2Matrix::from_bools(1, &[vec![true], vec![true]]);
        assert_eq!(min_weight_basis(&Domain::MaxPlus, &m, &w(&[1, 5])), vec![1]);
    }

    #[test]
    fn multiply_small() {
        let a = F2Matrix::from_bools(2, &[vec![true, true], vec![false, true]]);
        let b = F2Matrix::from_bools(2, &[vec![true, false], vec![true, true]]);
        let c = a.mul(&b);
        assert_eq!(
            c,
            F2Matrix::from_bools(2, &[vec![false, true], vec![true, true]])
        );
    }

    fn brute_rank(rows: &[Vec<bool>], width: usize) -> usize {
        // size of the span, as a power of two
        let mut span = std::collections::HashSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut v = vec![false; width];
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (a, b) in v.iter_mut().zip(r) {
                        *a ^= b;
                    }
                }
            }
            span.insert(v);
        }
        span.len().trailing_zeros() as usize
    }

    proptest! {
        #[test]
        fn basis_is_minimum_and_spanning(
            rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 70), 1..9),
            ws in prop::collection::vec(0i64..6, 9),
        ) {
            let m = F2Matrix::from_bools(70, &rows);
            let ws = w(&ws[..rows.len()]);
            let basis = min_weight_basis(&Domain::MinPlus, &m, &ws);
            let r = brute_rank(&rows, 70);
            prop_assert_eq!(basis.len(), r);
            prop_assert_eq!(m.rank(), r);
            // exhaustive minimum over independent subsets of size r
            let total = |idx: &[usize]| idx.iter().map(|&i| match ws[i] { Weight::Value(v) => v, _ => 0 }).sum::<i64>();
            let mut best = i64::MAX;
            for mask in 0u32..(1 << rows.len()) {
                let idx: Vec<usize> = (0..rows.len()).filter(|i| mask >> i & 1 == 1).collect();
                if idx.len() == r {
                    let sub: Vec<Vec<bool>> = idx.iter().map(|&i| rows[i].clone()).collect();
                    if brute_rank(&sub, 70) == r {
                        best = best.min(total(&idx));
                    }
                }
            }
            prop_assert_eq!(total(&basis), best);
        }
    }
}
