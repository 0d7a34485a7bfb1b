//! Compressed sparse row operators over complex numbers.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// CSR matrix with sorted, duplicate-free column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_matrix(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn diagonal_matrix(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Sums duplicate `(row, col)` entries; the result is independent of input order.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(Error::DimensionMismatch(format!(
                "triplet ({r}, {c}) outside a {rows}x{cols} operator"
            )));
        }
        // Sorting by (row, col, re, im) makes the accumulation order canonical.
        triplets.sort_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then(a.2.re.total_cmp(&b.2.re))
                .then(a.2.im.total_cmp(&b.2.im))
        });
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds directly from CSR arrays. Column indices must be sorted and unique per row.
    pub(crate) fn from_csr(rows: usize, cols: usize, indptr: Vec<usize>, indices: Vec<usize>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(indptr.len(), rows + 1);
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indptr
            .windows(2)
            .all(|w| indices[w[0]..w[1]].windows(2).all(|p| p[0] < p[1])));
        debug_assert!(indices.iter().all(|&c| c < cols));
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
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

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => Complex64::default(),
        }
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.indptr == other.indptr && self.indices == other.indices
    }

    /// `y = A x`
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            *yr = acc;
        }
    }

    /// `y = Aᵀ x` (no conjugation).
    pub fn apply_transpose(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|v| *v = Complex64::default());
        for (r, &xr) in x.iter().enumerate() {
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p]] += self.values[p] * xr;
            }
        }
    }

    /// `y = Aᴴ x`
    pub fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|v| *v = Complex64::default());
        for (r, &xr) in x.iter().enumerate() {
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p]] += self.values[p].conj() * xr;
            }
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.rows];
        self.apply(x, &mut y);
        y
    }

    pub fn mul_vec_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.cols];
        self.apply_adjoint(x, &mut y);
        y
    }

    pub fn mul_vec_transpose(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.cols];
        self.apply_transpose(x, &mut y);
        y
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ sₖ·Aₖ` over operators of equal shape.
    pub fn linear_combination(terms: &[(Complex64, &SparseOperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?
            .1;
        let (rows, cols) = (first.rows, first.cols);
        if terms.iter().any(|(_, a)| a.rows != rows || a.cols != cols) {
            return Err(Error::DimensionMismatch("linear combination of differently shaped operators".into()));
        }
        if terms.iter().all(|(_, a)| a.same_pattern(first)) {
            let mut out = first.scaled(Complex64::default());
            for (s, a) in terms {
                for (o, v) in out.values.iter_mut().zip(&a.values) {
                    *o += s * v;
                }
            }
            return Ok(out);
        }
        let mut triplets = Vec::with_capacity(terms.iter().map(|(_, a)| a.nnz()).sum());
        for (s, a) in terms {
            for r in 0..rows {
                let (idx, vals) = a.row(r);
                triplets.extend(idx.iter().zip(vals).map(|(&c, &v)| (r, c, s * v)));
            }
        }
        Self::from_triplets(rows, cols, triplets)
    }

    /// Square operator with the flagged rows and columns replaced by identity
    /// rows and columns.
    pub(crate) fn pin_dofs(&self, pinned: &[bool]) -> Self {
        assert_eq!(self.rows, self.cols);
        assert_eq!(pinned.len(), self.rows);
        let mut out = self.clone();
        for r in 0..self.rows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[p];
                if pinned[r] || pinned[c] {
                    out.values[p] = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                }
            }
        }
        out
    }

    /// Copy with the flagged rows set to zero (pattern kept).
    pub(crate) fn zero_rows(&self, rows: &[bool]) -> Self {
        assert_eq!(rows.len(), self.rows);
        let mut out = self.clone();
        for r in (0..self.rows).filter(|&r| rows[r]) {
            out.values[self.indptr[r]..self.indptr[r + 1]].fill(Complex64::default());
        }
        out
    }

    /// Sparse product `A·B` (row-by-row accumulation, sorted output).
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![Complex64::default(); other.cols];
        let mut marker = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            for p in self.indptr[r]..self.indptr[r + 1] {
                let (a, k) = (self.values[p], self.indices[p]);
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let c = other.indices[q];
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = Complex64::default();
                        touched.push(c);
                    }
                    acc[c] += a * other.values[q];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                values.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        Ok(Self::from_csr(self.rows, other.cols, indptr, indices, values))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = self.transpose();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![Complex64::default(); self.nnz()];
        for r in 0..self.rows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[p];
                indices[next[c]] = r;
                values[next[c]] = self.values[p];
                next[c] += 1;
            }
        }
        Self::from_csr(self.cols, self.rows, counts, indices, values)
    }

    /// Keeps the listed rows (in order) and remaps columns through `col_map`
    /// (`None` drops the column).
    pub fn select(&self, row_sel: &[usize], col_map: &[Option<usize>], new_cols: usize) -> Self {
        assert_eq!(col_map.len(), self.cols);
        let mut indptr = Vec::with_capacity(row_sel.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in row_sel {
            let (idx, vals) = self.row(r);
            let mut row: Vec<(usize, Complex64)> = idx
                .iter()
                .zip(vals)
                .filter_map(|(&c, &v)| col_map[c].map(|nc| (nc, v)))
                .collect();
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self::from_csr(row_sel.len(), new_cols, indptr, indices, values)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|r| self.get(r, r)).collect()
    }

    /// Squared 2-norm of every column.
    pub fn column_norms_sqr(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&c, v) in self.indices.iter().zip(&self.values) {
            out[c] += v.norm_sqr();
        }
        out
    }

    /// Block-diagonal operator `diag(A₁, …, A_J)`.
    pub fn block_diagonal(blocks: &[&SparseOperator]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut col_off = 0;
        for b in blocks {
            for r in 0..b.rows {
                let (idx, vals) = b.row(r);
                indices.extend(idx.iter().map(|c| c + col_off));
                values.extend_from_slice(vals);
                indptr.push(indices.len());
            }
            col_off += b.cols;
        }
        Self::from_csr(rows, cols, indptr, indices, values)
    }

    /// Vertical stack `[A₁; …; A_J]` of operators with equal column counts.
    pub fn vstack(blocks: &[&SparseOperator]) -> Result<Self> {
        let cols = blocks.first().map(|b| b.cols).unwrap_or(0);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack of operators with different column counts".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for b in blocks {
            for r in 0..b.rows {
                let (idx, vals) = b.row(r);
                indices.extend_from_slice(idx);
                values.extend_from_slice(vals);
                indptr.push(indices.len());
            }
        }
        Ok(Self::from_csr(rows, cols, indptr, indices, values))
    }

    /// Debug dump: one `row col re im` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (c, v) in idx.iter().zip(vals) {
                writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::default(); self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> SparseOperator {
        SparseOperator::from_triplets(
            3,
            4,
            vec![(2, 3, c(1.0, 1.0)), (0, 1, c(2.0, 0.0)), (0, 1, c(0.5, -1.0)), (1, 0, c(-3.0, 0.0)), (2, 0, c(0.0, 4.0))],
        )
        .unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let a = sample();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 1), c(2.5, -1.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn out_of_bounds_triplet_is_rejected() {
        assert!(SparseOperator::from_triplets(2, 2, vec![(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn products_agree_with_dense() {
        let a = sample();
        let d = a.to_dense();
        let x = vec![c(1.0, 2.0), c(-1.0, 0.5), c(0.0, 1.0), c(3.0, 0.0)];
        let y = a.mul_vec(&x);
        for r in 0..3 {
            let want: Complex64 = (0..4).map(|k| d[r][k] * x[k]).sum();
            assert!((y[r] - want).norm() < 1e-14);
        }
        let z = vec![c(1.0, -1.0), c(2.0, 0.0), c(0.0, 3.0)];
        let yt = a.mul_vec_transpose(&z);
        let yh = a.mul_vec_adjoint(&z);
        for k in 0..4 {
            let t: Complex64 = (0..3).map(|r| d[r][k] * z[r]).sum();
            let h: Complex64 = (0..3).map(|r| d[r][k].conj() * z[r]).sum();
            assert!((yt[k] - t).norm() < 1e-14);
            assert!((yh[k] - h).norm() < 1e-14);
        }
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().mul_vec(&z), yt);
    }

    #[test]
    fn matmul_agrees_with_dense() {
        let a = sample();
        let at = a.transpose();
        let p = a.matmul(&at).unwrap();
        let d = a.to_dense();
        for r in 0..3 {
            for s in 0..3 {
                let want: Complex64 = (0..4).map(|k| d[r][k] * d[s][k]).sum();
                assert!((p.get(r, s) - want).norm() < 1e-14);
            }
        }
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn block_structure() {
        let a = sample();
        let bd = SparseOperator::block_diagonal(&[&a, &a]);
        assert_eq!((bd.rows(), bd.cols()), (6, 8));
        assert_eq!(bd.get(5, 7), a.get(2, 3));
        assert_eq!(bd.get(2, 7), c(0.0, 0.0));
        let vs = SparseOperator::vstack(&[&a, &a]).unwrap();
        assert_eq!(vs.get(3, 1), a.get(0, 1));
        let lc = SparseOperator::linear_combination(&[(c(2.0, 0.0), &a), (c(-1.0, 0.0), &a)]).unwrap();
        assert_eq!(lc, a);
    }
}
