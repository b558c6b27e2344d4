//! Exact sparse linear algebra over the rational functions in `q`.
//!
//! Boundary matrices are assembled column by column (each column is the
//! image of one chain-basis vector), so matrices are stored in
//! column-major sparse form.  Ranks, kernels, and membership tests all go
//! through [`Span`], an incremental echelon basis that tracks how each
//! echelon row was combined from the inserted generators; the tracked
//! combinations are what produce kernel vectors and coordinates.

use crate::scalar::RatFunc;
use std::collections::BTreeMap;

/// A sparse vector with entries indexed by `usize`; zero entries are never
/// stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseVec {
    entries: BTreeMap<usize, RatFunc>,
}

impl SparseVec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::zero();
        v.set(i, RatFunc::one());
        v
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, RatFunc)>) -> Self {
        let mut v = Self::zero();
        for (i, c) in entries {
            v.add(i, c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Option<&RatFunc> {
        self.entries.get(&i)
    }

    pub fn set(&mut self, i: usize, c: RatFunc) {
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn add(&mut self, i: usize, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let new = match self.entries.get(&i) {
            Some(old) => old + &c,
            None => c,
        };
        self.set(i, new);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &RatFunc)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    /// Smallest occupied index.
    pub fn leading(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &RatFunc, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (i, v) in &other.entries {
            self.add(*i, v * c);
        }
    }

    /// Total display complexity of the entries; used to pick cheap pivots.
    pub fn complexity(&self) -> usize {
        self.entries.values().map(RatFunc::complexity).sum()
    }
}

/// A sparse `rows x cols` matrix stored as columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![SparseVec::zero(); cols],
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVec>) -> Self {
        debug_assert!(columns
            .iter()
            .all(|c| c.iter().all(|(i, _)| i < rows)));
        SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.columns[j]
    }

    pub fn columns(&self) -> impl Iterator<Item = &SparseVec> {
        self.columns.iter()
    }

    pub fn set(&mut self, i: usize, j: usize, c: RatFunc) {
        debug_assert!(i < self.rows && j < self.cols);
        self.columns[j].set(i, c);
    }

    pub fn add(&mut self, i: usize, j: usize, c: RatFunc) {
        debug_assert!(i < self.rows && j < self.cols);
        self.columns[j].add(i, c);
    }

    pub fn get(&self, i: usize, j: usize) -> RatFunc {
        self.columns[j]
            .get(i)
            .cloned()
            .unwrap_or_else(RatFunc::zero)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVec::nnz).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = SparseMatrix::zero(self.cols, self.rows);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, c) in col.iter() {
                t.set(j, i, c.clone());
            }
        }
        t
    }

    /// Matrix-vector product `self * v`.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero();
        for (j, c) in v.iter() {
            out.add_scaled(c, &self.columns[j]);
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cols, other.rows);
        let columns = other.columns.iter().map(|c| self.apply(c)).collect();
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            columns,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVec::is_zero)
    }

    pub fn rank(&self) -> usize {
        let mut span = Span::new();
        for col in &self.columns {
            span.insert(col.clone());
        }
        span.rank()
    }

    /// A basis of `{ v : self * v = 0 }`, one sparse vector per basis
    /// element, expressed in column coordinates.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let mut span = Span::new();
        let mut kernel = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            if let Some(relation) = span.insert_tracked(col.clone(), SparseVec::unit(j)) {
                kernel.push(relation);
            }
        }
        kernel
    }

    /// Serialize as `{"rows": r, "cols": c, "entries": [[i, j, coeff], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            for (i, c) in col.iter() {
                entries.push(serde_json::json!([i, j, c.to_string()]));
            }
        }
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": entries,
        })
    }
}

/// An incremental echelon basis for a family of sparse vectors.
///
/// Every stored row has its pivot entry scaled to 1 and carries the
/// combination of original inserted generators that produced it, so a
/// vector that reduces to zero yields an explicit linear relation.
#[derive(Clone, Debug, Default)]
pub struct Span {
    /// `(pivot index, echelon vector, combination)` sorted by pivot.
    rows: Vec<(usize, SparseVec, SparseVec)>,
    inserted: usize,
}

impl Span {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of generators inserted so far (combination coordinates refer
    /// to these, in insertion order).
    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Reduce `v` against the echelon rows; returns the residual and the
    /// combination of stored rows that was subtracted, in original
    /// generator coordinates.
    fn reduce(&self, mut v: SparseVec) -> (SparseVec, SparseVec) {
        let mut used = SparseVec::zero();
        for (pivot, row, combo) in &self.rows {
            if let Some(c) = v.get(*pivot) {
                let c = c.clone();
                let neg = -&c;
                v.add_scaled(&neg, row);
                used.add_scaled(&c, combo);
            }
        }
        (v, used)
    }

    /// Insert a vector; returns `true` if it enlarged the span.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let tag = SparseVec::unit(self.inserted);
        self.insert_tracked(v, tag).is_none()
    }

    /// Insert a vector carrying an explicit tag in outside coordinates.
    /// Returns `Some(relation)` when the vector was already in the span:
    /// the relation is `tag - (combination of earlier tags)`, i.e. a
    /// dependency among the inserted generators (a kernel vector when the
    /// tags are unit vectors).
    pub fn insert_tracked(&mut self, v: SparseVec, tag: SparseVec) -> Option<SparseVec> {
        self.inserted += 1;
        let (mut residual, used) = self.reduce(v);
        if residual.is_zero() {
            let mut relation = tag;
            relation.add_scaled(&-&RatFunc::one(), &used);
            return Some(relation);
        }
        let pivot = residual.leading().expect("nonzero residual has a pivot");
        let lead = residual.get(pivot).expect("pivot entry").clone();
        let inv = lead.inv().expect("pivot entry is nonzero");
        residual = residual.scale(&inv);
        let mut combo = tag;
        combo.add_scaled(&-&RatFunc::one(), &used);
        combo = combo.scale(&inv);
        let at = self
            .rows
            .partition_point(|(p, _, _)| *p < pivot);
        self.rows.insert(at, (pivot, residual, combo));
        None
    }

    /// Whether `v` lies in the span.
    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).0.is_zero()
    }

    /// Express `v` as a combination of the inserted generators, if it lies
    /// in the span.
    pub fn coordinates(&self, v: &SparseVec) -> Option<SparseVec> {
        let (residual, used) = self.reduce(v.clone());
        if residual.is_zero() {
            Some(used)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn rf(s: &str) -> RatFunc {
        RatFunc::from_str(s).unwrap()
    }

    fn vec_of(entries: &[(usize, &str)]) -> SparseVec {
        SparseVec::from_entries(entries.iter().map(|(i, s)| (*i, rf(s))))
    }

    #[test]
    fn rank_detects_proportional_columns() {
        // [[1, q], [q, q^2]] has rank 1.
        let m = SparseMatrix::from_columns(
            2,
            vec![vec_of(&[(0, "1"), (1, "q")]), vec_of(&[(0, "q"), (1, "q^2")])],
        );
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_vectors_annihilate_the_matrix() {
        let m = SparseMatrix::from_columns(1, vec![vec_of(&[(0, "1")]), vec_of(&[(0, "q")])]);
        let kernel = m.kernel_basis();
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0], vec_of(&[(0, "-q"), (1, "1")]));
        assert!(m.apply(&kernel[0]).is_zero());
    }

    #[test]
    fn span_membership_and_coordinates() {
        let mut span = Span::new();
        let g0 = vec_of(&[(0, "1"), (1, "1")]);
        let g1 = vec_of(&[(1, "q")]);
        assert!(span.insert(g0.clone()));
        assert!(span.insert(g1.clone()));
        let target = vec_of(&[(0, "2"), (1, "2+q^2")]);
        let coords = span.coordinates(&target).unwrap();
        // target = 2*g0 + q*g1
        assert_eq!(coords, vec_of(&[(0, "2"), (1, "q")]));
        let mut rebuilt = SparseVec::zero();
        rebuilt.add_scaled(coords.get(0).unwrap(), &g0);
        rebuilt.add_scaled(coords.get(1).unwrap(), &g1);
        assert_eq!(rebuilt, target);
        assert!(!span.contains(&vec_of(&[(2, "1")])));
    }

    #[test]
    fn compose_and_apply_agree() {
        let a = SparseMatrix::from_columns(
            2,
            vec![vec_of(&[(0, "1")]), vec_of(&[(0, "q"), (1, "1")])],
        );
        let b = SparseMatrix::from_columns(
            2,
            vec![vec_of(&[(0, "1"), (1, "1")]), vec_of(&[(1, "q^2")])],
        );
        let ab = a.compose(&b);
        for j in 0..b.cols() {
            assert_eq!(ab.column(j), &a.apply(b.column(j)));
        }
        assert_eq!(ab.get(0, 0), rf("1+q"));
    }

    #[test]
    fn transpose_round_trips() {
        let m = SparseMatrix::from_columns(
            3,
            vec![vec_of(&[(0, "1"), (2, "q")]), vec_of(&[(1, "-1")])],
        );
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().get(0, 2), rf("q"));
    }

    #[test]
    fn json_shape() {
        let m = SparseMatrix::from_columns(2, vec![vec_of(&[(1, "q")]), SparseVec::zero()]);
        let v = m.to_json();
        assert_eq!(v["rows"], 2);
        assert_eq!(v["cols"], 2);
        assert_eq!(v["entries"][0][2], "q");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_ratfunc() -> impl Strategy<Value = RatFunc> {
            prop_oneof![
                (-3i64..4).prop_map(|n| rf(&n.to_string())),
                (-2i64..3, 0u32..3).prop_map(|(n, k)| {
                    &rf(&n.to_string()) * &RatFunc::q_power(i64::from(k))
                }),
            ]
        }

        fn arb_matrix() -> impl Strategy<Value = SparseMatrix> {
            (1usize..5, 1usize..5)
                .prop_flat_map(|(r, c)| {
                    proptest::collection::vec(
                        proptest::collection::vec(arb_ratfunc(), r),
                        c,
                    )
                    .prop_map(move |cols| {
                        let columns = cols
                            .into_iter()
                            .map(|col| {
                                SparseVec::from_entries(
                                    col.into_iter().enumerate().map(|(i, v)| (i, v)),
                                )
                            })
                            .collect();
                        SparseMatrix::from_columns(r, columns)
                    })
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // Row rank equals column rank; the two computations take
            // completely different elimination paths.
            #[test]
            fn rank_is_transpose_invariant(m in arb_matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn kernel_dimension_complements_rank(m in arb_matrix()) {
                let kernel = m.kernel_basis();
                prop_assert_eq!(kernel.len() + m.rank(), m.cols());
                for v in &kernel {
                    prop_assert!(m.apply(v).is_zero());
                }
            }
        }
    }
}
