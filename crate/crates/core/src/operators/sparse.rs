use rayon::prelude::*;


use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Compressed sparse row matrix.
///
/// Canonical form: columns strictly increasing within each row and no stored
/// zeros, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<S> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal((0..n).map(|_| S::one()).collect())
    }

    pub fn from_diagonal(diag: Vec<S>) -> Self {
        let n = diag.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, d) in diag.into_iter().enumerate() {
            if !d.is_zero() {
                col_idx.push(i);
                values.push(d);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: n,
            cols: n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds from unordered triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, S)>,
    ) -> Result<Self> {
        let mut counts = vec![0usize; rows + 1];
        for &(r, c, _) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::SpaceMismatch(format!(
                    "entry ({r},{c}) outside {rows}x{cols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut slots: Vec<Option<(usize, S)>> = (0..triplets.len()).map(|_| None).collect();
        for (r, c, v) in triplets {
            slots[next[r]] = Some((c, v));
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..rows {
            let mut row: Vec<(usize, S)> = slots[counts[r]..counts[r + 1]]
                .iter_mut()
                .map(|s| s.take().expect("each slot filled once"))
                .collect();
            row.sort_by_key(|e| e.0);
            push_combined(&mut col_idx, &mut values, row);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &S)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(&self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&S> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|i| &self.values[span.start + i])
    }

    /// Entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &S)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values: Vec<Option<S>> = (0..self.nnz()).map(|_| None).collect();
        for (r, c, v) in self.triplets() {
            col_idx[next[c]] = r;
            values[next[c]] = Some(v.clone());
            next[c] += 1;
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_ptr: counts,
            col_idx,
            values: values.into_iter().map(|v| v.expect("filled")).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip_rows(&self, other: &Self, negate: bool) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.rows {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                let (c, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                        a.next();
                        (ca, va.clone())
                    }
                    (Some(&(ca, va)), None) => {
                        a.next();
                        (ca, va.clone())
                    }
                    (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                        let v = if negate {
                            va.clone() - vb.clone()
                        } else {
                            va.clone() + vb.clone()
                        };
                        a.next();
                        b.next();
                        (ca, v)
                    }
                    (_, Some(&(cb, vb))) => {
                        b.next();
                        (cb, if negate { -vb.clone() } else { vb.clone() })
                    }
                };
                if !v.is_zero() {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_rows(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_rows(other, true)
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.clone() * s.clone();
        }
        out.prune();
        out
    }

    /// Rescales row `r` by `d[r]` (left multiplication by a diagonal).
    pub fn scale_rows(&self, d: &[S]) -> Self {
        let mut out = self.clone();
        for (r, dr) in d.iter().enumerate().take(self.rows) {
            for i in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.values[i] = dr.clone() * out.values[i].clone();
            }
        }
        out.prune();
        out
    }

    /// Rescales column `c` by `d[c]` (right multiplication by a diagonal).
    pub fn scale_cols(&self, d: &[S]) -> Self {
        let mut out = self.clone();
        for i in 0..out.values.len() {
            out.values[i] = out.values[i].clone() * d[out.col_idx[i]].clone();
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| !v.is_zero()) {
            return;
        }
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.rows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                if !self.values[i].is_zero() {
                    col_idx.push(self.col_idx[i]);
                    values.push(self.values[i].clone());
                }
            }
            row_ptr.push(col_idx.len());
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::SpaceMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc: Vec<Option<S>> = (0..other.cols).map(|_| None).collect();
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    let p = a.clone() * b.clone();
                    match &mut acc[c] {
                        Some(v) => *v += p,
                        slot @ None => {
                            *slot = Some(p);
                            touched.push(c);
                        }
                    }
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c].take().expect("touched entry present");
                if !v.is_zero() {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::SpaceMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r).fold(S::zero(), |mut acc, (c, v)| {
                    acc += v.clone() * x[c].clone();
                    acc
                })
            })
            .collect())
    }

    /// `xᵀ · self`.
    pub fn vecmat(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.rows {
            return Err(Error::SpaceMismatch(format!(
                "vector of length {} for {} rows",
                x.len(),
                self.rows
            )));
        }
        let mut out: Vec<S> = (0..self.cols).map(|_| S::zero()).collect();
        for (r, c, v) in self.triplets() {
            out[c] += x[r].clone() * v.clone();
        }
        Ok(out)
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).cloned().unwrap_or_else(S::zero))
            .collect()
    }

    /// Largest entry magnitude; zero iff the matrix is zero.
    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> SparseMatrix<T> {
        let mut out = SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(&mut f).collect(),
        };
        out.prune();
        out
    }
}

fn push_combined<S: Scalar>(col_idx: &mut Vec<usize>, values: &mut Vec<S>, row: Vec<(usize, S)>) {
    let start = values.len();
    for (c, v) in row {
        if col_idx.len() > start && *col_idx.last().expect("nonempty") == c {
            *values.last_mut().expect("nonempty") += v;
        } else {
            if values.len() > start && values.last().is_some_and(|x| x.is_zero()) {
                values.pop();
                col_idx.pop();
            }
            col_idx.push(c);
            values.push(v);
        }
    }
    if values.len() > start && values.last().is_some_and(|x| x.is_zero()) {
        values.pop();
        col_idx.pop();
    }
}

impl SparseMatrix<f64> {
    /// `y = A x`, rows split across threads; each row is summed in storage
    /// order so the result does not depend on the thread count.
    pub fn par_matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        const CHUNK: usize = 4096;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, out)| {
            let base = ci * CHUNK;
            for (i, yi) in out.iter_mut().enumerate() {
                let r = base + i;
                let span = self.row_ptr[r]..self.row_ptr[r + 1];
                let mut acc = 0.0;
                for (c, v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                    acc += v * x[*c];
                }
                *yi = acc;
            }
        });
    }

    pub fn par_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.par_matvec_into(x, &mut y);
        y
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0f64; self.cols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            sums[*c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = *v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, t: &[(usize, usize, f64)]) -> SparseMatrix<f64> {
        SparseMatrix::from_triplets(rows, cols, t.to_vec()).unwrap()
    }

    #[test]
    fn triplets_are_combined_and_zeros_dropped() {
        let a = m(2, 2, &[(1, 0, 2.0), (0, 1, 1.0), (1, 0, -2.0), (0, 1, 0.5)]);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), Some(&1.5));
        assert_eq!(a.get(1, 0), None);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matmul_matches_dense() {
        let a = m(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let b = m(3, 2, &[(0, 1, 4.0), (1, 0, 5.0), (2, 1, 6.0)]);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_dense(), a.to_dense() * b.to_dense());
        assert!(b.matmul(&b).is_err());
    }

    fn dense_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            (
                Just(r),
                Just(c),
                proptest::collection::vec((0..r, 0..c, -4i32..5), 0..12)
                    .prop_map(|v| v.into_iter().map(|(a, b, x)| (a, b, x as f64)).collect()),
            )
        })
    }

    proptest! {
        #[test]
        fn transpose_is_involutive((r, c, t) in dense_strategy()) {
            let a = m(r, c, &t);
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            prop_assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        }

        #[test]
        fn add_sub_match_dense((r, c, t) in dense_strategy(), (_, _, u) in dense_strategy()) {
            let a = m(r, c, &t);
            let u: Vec<_> = u.into_iter().filter(|&(i, j, _)| i < r && j < c).collect();
            let b = m(r, c, &u);
            prop_assert_eq!(a.add(&b).unwrap().to_dense(), a.to_dense() + b.to_dense());
            prop_assert_eq!(a.sub(&b).unwrap().to_dense(), a.to_dense() - b.to_dense());
            prop_assert!(a.sub(&a).unwrap().is_zero());
        }

        #[test]
        fn matvec_paths_agree((r, c, t) in dense_strategy(), x in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let a = m(r, c, &t);
            let x = &x[..c];
            let y = a.matvec(x).unwrap();
            prop_assert_eq!(&y, &a.par_matvec(x));
            prop_assert_eq!(a.transpose().vecmat(x).unwrap(), y);
        }
    }
}
