//! Packed vectors and matrices over F_2, with a deterministic echelon.
//!
//! Pivots are always taken on the lowest set column index.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; (len + WORD - 1) / WORD] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    /// Parse a string of `0`/`1` characters, index 0 first.
    pub fn from_bits(s: &str) -> Self {
        let bits: Vec<bool> = s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "index {} out of range {}", i, self.len);
        let m = 1u64 << (i % WORD);
        if b {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {} out of range {}", i, self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn add_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set index at or after `from`.
    pub fn first_set_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / WORD;
        let mut w = self.words[wi] & (!0u64 << (from % WORD));
        loop {
            if w != 0 {
                return Some(wi * WORD + w.trailing_zeros() as usize);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    pub fn first_set(&self) -> Option<usize> {
        self.first_set_from(0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + t)
                }
            })
        })
    }

    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }

    /// Append `other` after `self`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut v = BitVector::zeros(self.len + other.len);
        for i in self.ones() {
            v.set(i, true);
        }
        for i in other.ones() {
            v.set(self.len + i, true);
        }
        v
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Dense matrix stored as rows. As a linear map it sends a column vector of
/// length `cols` to one of length `rows`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { cols, rows: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix { cols: n, rows: (0..n).map(|i| BitVector::unit(n, i)).collect() }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("row length differs from column count".into()));
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn from_columns(rows: usize, cols: &[BitVector]) -> Result<Self> {
        let mut m = BitMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch("column length differs from row count".into()));
            }
            for i in c.ones() {
                m.rows[i].set(j, true);
            }
        }
        Ok(m)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.rows[i].set(j, b)
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_indices(self.rows.len(), (0..self.rows.len()).filter(|&i| self.rows[i].get(j)))
    }

    pub fn columns(&self) -> Vec<BitVector> {
        self.transpose().rows
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    pub fn apply(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok(BitVector::from_indices(self.rows.len(), (0..self.rows.len()).filter(|&i| self.rows[i].dot(v))))
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows.len() {
            return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", self.rows.len(), self.cols, other.rows.len(), other.cols)));
        }
        let mut out = BitMatrix::zeros(self.rows.len(), other.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for k in r.ones() {
                out.rows[i].add_assign(&other.rows[k]);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.cols);
        for r in &self.rows {
            e.insert(r.clone());
        }
        e.rank()
    }
}

/// Incremental row echelon with optional bookkeeping of how each row was
/// formed from the inserted vectors.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    rows: Vec<BitVector>,
    tags: Vec<BitVector>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
    tagged: bool,
}

impl Echelon {
    pub fn new(len: usize) -> Self {
        Echelon { len, rows: vec![], tags: vec![], pivots: vec![], pivot_row: vec![None; len], tagged: false }
    }

    pub fn with_tags(len: usize) -> Self {
        let mut e = Self::new(len);
        e.tagged = true;
        e
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_row[col].is_some()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn tags(&self) -> &[BitVector] {
        &self.tags
    }

    fn reduce_inner(&self, v: &mut BitVector, mut tag: Option<&mut BitVector>) {
        assert_eq!(v.len(), self.len, "length mismatch");
        let mut pos = 0;
        while let Some(p) = v.first_set_from(pos) {
            if let Some(r) = self.pivot_row[p] {
                v.add_assign(&self.rows[r]);
                if let Some(t) = tag.as_deref_mut() {
                    t.add_assign(&self.tags[r]);
                }
            }
            pos = p + 1;
        }
    }

    /// Reduce `v` to a vector with no entries in pivot columns.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        self.reduce_inner(&mut v, None);
        v
    }

    /// Reduce `v` and report the combination of row tags used.
    pub fn reduce_tagged(&self, v: &BitVector, tag_len: usize) -> (BitVector, BitVector) {
        let mut v = v.clone();
        let mut t = BitVector::zeros(tag_len);
        self.reduce_inner(&mut v, Some(&mut t));
        (v, t)
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Insert a vector; returns its new pivot, or `None` if it was dependent.
    pub fn insert(&mut self, v: BitVector) -> Option<usize> {
        let mut v = v;
        self.reduce_inner(&mut v, None);
        self.push_reduced(v, BitVector::zeros(0))
    }

    /// Insert with a tag. On dependence the reduced tag, a relation among
    /// inserted tags, is returned as `Err`.
    pub fn insert_tagged(&mut self, v: BitVector, tag: BitVector) -> std::result::Result<usize, BitVector> {
        debug_assert!(self.tagged);
        let mut v = v;
        let mut tag = tag;
        self.reduce_inner(&mut v, Some(&mut tag));
        match self.push_reduced(v, tag.clone()) {
            Some(p) => Ok(p),
            None => Err(tag),
        }
    }

    fn push_reduced(&mut self, v: BitVector, tag: BitVector) -> Option<usize> {
        let p = v.first_set()?;
        self.pivot_row[p] = Some(self.rows.len());
        self.pivots.push(p);
        self.rows.push(v);
        self.tags.push(tag);
        Some(p)
    }

    /// Bring to reduced form: rows sorted by pivot, each pivot column zero in
    /// every other row.
    pub fn into_reduced(mut self) -> Echelon {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        for idx in (0..order.len()).rev() {
            let i = order[idx];
            let mut row = self.rows[i].clone();
            let mut tag = self.tags[i].clone();
            let mut pos = self.pivots[i] + 1;
            while let Some(q) = row.first_set_from(pos) {
                if let Some(r) = self.pivot_row[q] {
                    row.add_assign(&self.rows[r]);
                    if self.tagged {
                        tag.add_assign(&self.tags[r]);
                    }
                }
                pos = q + 1;
            }
            self.rows[i] = row;
            self.tags[i] = tag;
        }
        let rows: Vec<BitVector> = order.iter().map(|&i| self.rows[i].clone()).collect();
        let tags: Vec<BitVector> = order.iter().map(|&i| self.tags[i].clone()).collect();
        let pivots: Vec<usize> = order.iter().map(|&i| self.pivots[i]).collect();
        let mut pivot_row = vec![None; self.len];
        for (k, &p) in pivots.iter().enumerate() {
            pivot_row[p] = Some(k);
        }
        Echelon { len: self.len, rows, tags, pivots, pivot_row, tagged: self.tagged }
    }
}

/// C(a, b) mod 2, zero outside 0 <= b <= a.
pub fn binom_mod2(a: i64, b: i64) -> bool {
    if a < 0 || b < 0 || b > a {
        return false;
    }
    (a & b) == b
}

/// Rank and a reduced basis of the kernel of `m` acting on column vectors.
pub fn rank_and_kernel(m: &BitMatrix) -> (usize, Vec<BitVector>) {
    let n = m.num_cols();
    let mut e = Echelon::with_tags(m.num_rows());
    let mut kernel = Echelon::new(n);
    for (j, c) in m.columns().into_iter().enumerate() {
        if let Err(rel) = e.insert_tagged(c, BitVector::unit(n, j)) {
            kernel.insert(rel);
        }
    }
    let rank = e.rank();
    (rank, reduced_basis(kernel))
}

/// Rows of the reduced echelon form, sorted by pivot.
pub fn reduced_basis(e: Echelon) -> Vec<BitVector> {
    e.into_reduced().rows
}

/// Coordinates `x` with `m x = target`, where the columns of `m` span.
pub fn solve_in_span(m: &BitMatrix, target: &BitVector) -> Result<BitVector> {
    if target.len() != m.num_rows() {
        return Err(Error::DimensionMismatch(format!("target of length {} for {} rows", target.len(), m.num_rows())));
    }
    let n = m.num_cols();
    let mut e = Echelon::with_tags(m.num_rows());
    for (j, c) in m.columns().into_iter().enumerate() {
        let _ = e.insert_tagged(c, BitVector::unit(n, j));
    }
    let (res, tag) = e.reduce_tagged(target, n);
    if res.is_zero() {
        Ok(tag)
    } else {
        Err(Error::NotInSpan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert!(binom_mod2(5, 1));
        assert!(!binom_mod2(5, 2));
        assert!(binom_mod2(7, 3));
        assert!(!binom_mod2(-1, 0));
        assert!(!binom_mod2(3, 5));
        assert!(binom_mod2(0, 0));
    }

    #[test]
    fn kernel_of_cycle_matrix() {
        let m = BitMatrix::from_rows(3, vec![BitVector::from_bits("110"), BitVector::from_bits("011"), BitVector::from_bits("101")]).unwrap();
        let (r, k) = rank_and_kernel(&m);
        assert_eq!(r, 2);
        assert_eq!(k, vec![BitVector::from_bits("111")]);
        assert_eq!(rank_and_kernel(&BitMatrix::zeros(2, 2)).1.len(), 2);
    }

    #[test]
    fn solve_examples() {
        let id = BitMatrix::identity(3);
        assert_eq!(solve_in_span(&id, &BitVector::unit(3, 2)).unwrap(), BitVector::unit(3, 2));
        let m = BitMatrix::from_columns(3, &[BitVector::from_bits("110"), BitVector::from_bits("011")]).unwrap();
        assert_eq!(solve_in_span(&m, &BitVector::from_bits("101")).unwrap(), BitVector::from_bits("11"));
        let m = BitMatrix::from_columns(3, &[BitVector::from_bits("100")]).unwrap();
        assert!(matches!(solve_in_span(&m, &BitVector::from_bits("010")), Err(Error::NotInSpan)));
    }

    #[test]
    fn first_set_across_words() {
        let v = BitVector::from_indices(200, [3, 70, 150]);
        assert_eq!(v.first_set(), Some(3));
        assert_eq!(v.first_set_from(4), Some(70));
        assert_eq!(v.first_set_from(71), Some(150));
        assert_eq!(v.first_set_from(151), None);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![3, 70, 150]);
    }

    fn arb_matrix() -> impl Strategy<Value = BitMatrix> {
        (1usize..12, 1usize..80).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(any::<bool>(), c), r).prop_map(move |rows| {
                let rows = rows.into_iter().map(|bits| BitVector::from_indices(c, bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i))).collect();
                BitMatrix::from_rows(c, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix()) {
            let (r, k) = rank_and_kernel(&m);
            prop_assert_eq!(r + k.len(), m.num_cols());
            prop_assert_eq!(r, m.rank());
            prop_assert_eq!(r, m.transpose().rank());
            for v in &k {
                prop_assert!(m.apply(v).unwrap().is_zero());
            }
        }

        #[test]
        fn solve_round_trip(m in arb_matrix(), seed in any::<u64>()) {
            let x = BitVector::from_indices(m.num_cols(), (0..m.num_cols()).filter(|i| (seed >> (i % 64)) & 1 == 1));
            let y = m.apply(&x).unwrap();
            let sol = solve_in_span(&m, &y).unwrap();
            prop_assert_eq!(m.apply(&sol).unwrap(), y);
        }

        #[test]
        fn binomial_matches_integer(a in 0i64..200, b in 0i64..200) {
            let mut acc = num_bigint::BigUint::from(u32::from(b <= a));
            for i in 0..b.min(a - b).max(0) {
                acc = acc * (a - i) as u64 / (i + 1) as u64;
            }
            prop_assert_eq!(binom_mod2(a, b), &acc % 2u32 == 1u32.into());
        }
    }
}
