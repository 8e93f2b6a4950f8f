//! Exact sparse row reduction over the rationals.
//!
//! Rows are kept with their pivot (smallest column) normalized to 1. Callers
//! pick the column numbering, so columns that should become pivots go first.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::Q;

/// A sparse vector keyed by column index.
pub type SparseVec = BTreeMap<usize, Q>;

/// An echelon basis of a row space.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<Vec<(usize, Q)>>,
    pivots: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    /// Pivot columns in insertion order.
    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r[0].0)
    }

    /// Reduces `v` against every pivot, leaving only non-pivot columns.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).find(|(c, _)| self.pivots.contains_key(c)).map(|(c, x)| (*c, x.clone()));
            let Some((col, coef)) = next else { break };
            let row = &self.rows[self.pivots[&col]];
            for (c, x) in row {
                let e = v.entry(*c).or_insert_with(Q::zero);
                *e -= &coef * x;
                if e.is_zero() {
                    v.remove(c);
                }
            }
            cursor = col + 1;
        }
        v
    }

    /// Adds `v` to the row space. Returns `true` if the rank grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        let Some((&pivot, lead)) = r.iter().next() else {
            return false;
        };
        let inv = Q::one() / lead;
        let row: Vec<(usize, Q)> = r.iter().map(|(c, x)| (*c, x * &inv)).collect();
        self.pivots.insert(pivot, self.rows.len());
        self.rows.push(row);
        true
    }
}

/// Rank of a list of sparse vectors.
pub fn rank(vectors: &[SparseVec]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(x: i64) -> Q {
        Q::from_integer(BigInt::from(x))
    }

    fn sv(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|&(c, x)| (c, q(x))).collect()
    }

    #[test]
    fn reduce_and_rank() {
        let mut e = Echelon::new();
        assert!(e.insert(&sv(&[(0, 2), (2, 2)])));
        assert!(e.insert(&sv(&[(1, 1), (2, -1)])));
        assert!(!e.insert(&sv(&[(0, 1), (1, 1)])));
        assert_eq!(e.rank(), 2);
        let r = e.reduce(&sv(&[(0, 1), (1, 1)]));
        assert!(r.is_empty());
        let r = e.reduce(&sv(&[(0, 3)]));
        assert_eq!(r, sv(&[(2, -3)]));
        assert_eq!(rank(&[sv(&[(0, 1)]), sv(&[(0, 2)]), sv(&[(3, 1)])]), 2);
    }
}
