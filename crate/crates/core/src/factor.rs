//! Sparse symmetric factorizations: `LDLᵀ` of real symmetric nodal operators
//! under a geometric nested-dissection ordering, and Cholesky of small
//! Hermitian positive definite systems under an approximate minimum degree
//! ordering.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::linalg::cholesky::llt::factor::LltRegularization;
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, LdltRef, LltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, MatMut, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Leaf size (in nodes) below which boxes are numbered lexicographically.
const LEAF_NODES: usize = 32;

/// Node ordering with separators last: recursive bisection of the lattice by
/// single-node planes normal to the longest axis.
pub(crate) fn nested_dissection(dims: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.iter().product());
    dissect([0, 0, 0], dims, dims, &mut out);
    out
}

fn push_box(lo: [usize; 3], hi: [usize; 3], dims: [usize; 3], out: &mut Vec<usize>) {
    for k in lo[2]..hi[2] {
        for j in lo[1]..hi[1] {
            for i in lo[0]..hi[0] {
                out.push(i + dims[0] * (j + dims[1] * k));
            }
        }
    }
}

fn dissect(lo: [usize; 3], hi: [usize; 3], dims: [usize; 3], out: &mut Vec<usize>) {
    let ext = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let axis = (0..3).max_by_key(|&a| (ext[a], a)).unwrap();
    if ext.iter().product::<usize>() <= LEAF_NODES || ext[axis] < 3 {
        push_box(lo, hi, dims, out);
        return;
    }
    let mid = lo[axis] + ext[axis] / 2;
    let mut left_hi = hi;
    left_hi[axis] = mid;
    let mut right_lo = lo;
    right_lo[axis] = mid + 1;
    dissect(lo, left_hi, dims, out);
    dissect(right_lo, hi, dims, out);
    let mut sep_lo = lo;
    sep_lo[axis] = mid;
    let mut sep_hi = hi;
    sep_hi[axis] = mid + 1;
    push_box(sep_lo, sep_hi, dims, out);
}

/// `LDLᵀ` factor of the real part of a symmetric nodal operator.
pub(crate) struct RealLdlt {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    n: usize,
}

impl RealLdlt {
    /// Factors `Re(op)`; `op` must be structurally and numerically symmetric
    /// and use `comps` interleaved unknowns per lattice node.
    pub(crate) fn new(op: &SparseOperator, dims: [usize; 3], comps: usize) -> Result<Self> {
        let n = op.rows();
        if op.cols() != n || n != comps * dims.iter().product::<usize>() {
            return Err(Error::DimensionMismatch("operator does not match the node lattice".into()));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0usize);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..n {
            let (idx, v) = op.row(r);
            let start = idx.partition_point(|&c| c < r);
            row_idx.extend_from_slice(&idx[start..]);
            vals.extend(v[start..].iter().map(|z| z.re));
            col_ptr.push(row_idx.len());
        }
        let symbolic_a = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        let lower = SparseColMat::new(symbolic_a, vals);

        let fwd: Vec<usize> = nested_dissection(dims)
            .into_iter()
            .flat_map(|node| (0..comps).map(move |c| comps * node + c))
            .collect();
        let mut inv = vec![0usize; n];
        for (new, &old) in fwd.iter().enumerate() {
            inv[old] = new;
        }
        let perm = PermRef::new_checked(&fwd, &inv, n);
        let symbolic = factorize_symbolic_cholesky(
            lower.symbolic(),
            Side::Lower,
            SymmetricOrdering::Custom(perm),
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| Error::Singular(format!("symbolic factorization failed: {e:?}")))?;
        let mut values = vec![0.0f64; symbolic.len_val()];
        let par = Par::Seq;
        {
            let mut mem = MemBuffer::new(symbolic.factorize_numeric_ldlt_scratch::<f64>(par, Default::default()));
            symbolic
                .factorize_numeric_ldlt(
                    &mut values,
                    lower.as_ref(),
                    Side::Lower,
                    LdltRegularization::default(),
                    par,
                    MemStack::new(&mut mem),
                    Default::default(),
                )
                .map_err(|e| Error::Singular(format!("LDLT factorization failed: {e:?}")))?;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("LDLT factor has non-finite entries".into()));
        }
        Ok(Self { symbolic, values, n })
    }

    /// Solves `Re(op)·x = b` for a complex right-hand side, in place.
    pub(crate) fn solve(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        let mut rhs = faer::Mat::<f64>::zeros(self.n, 2);
        for (i, v) in b.iter().enumerate() {
            rhs[(i, 0)] = v.re;
            rhs[(i, 1)] = v.im;
        }
        let ldlt = LdltRef::new(&self.symbolic, &self.values);
        let par = Par::Seq;
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(2, par));
        let view: MatMut<'_, f64> = rhs.as_mut();
        ldlt.solve_in_place_with_conj(Conj::No, view, par, MemStack::new(&mut mem));
        for (i, v) in b.iter_mut().enumerate() {
            *v = Complex64::new(rhs[(i, 0)], rhs[(i, 1)]);
        }
    }
}

/// Lower triangle of a Hermitian CSR operator as CSC arrays:
/// column `r` holds `conj(H[r][c]) = H[c][r]` for `c ≥ r`.
fn hermitian_lower(op: &SparseOperator) -> (Vec<usize>, Vec<usize>, Vec<Complex64>) {
    let n = op.rows();
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0usize);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    for r in 0..n {
        let (idx, v) = op.row(r);
        let start = idx.partition_point(|&c| c < r);
        row_idx.extend_from_slice(&idx[start..]);
        vals.extend(v[start..].iter().map(|z| z.conj()));
        col_ptr.push(row_idx.len());
    }
    (col_ptr, row_idx, vals)
}

/// Symbolic Cholesky analysis of a Hermitian sparsity pattern, reusable for
/// every operator with the same pattern.
pub(crate) struct HermitianPattern {
    symbolic: SymbolicCholesky<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl HermitianPattern {
    pub(crate) fn new(op: &SparseOperator) -> Result<Self> {
        let n = op.rows();
        if op.cols() != n {
            return Err(Error::DimensionMismatch("Hermitian factorization needs a square operator".into()));
        }
        let (col_ptr, row_idx, _) = hermitian_lower(op);
        let structure = SymbolicSparseColMat::new_checked(n, n, col_ptr.clone(), None, row_idx.clone());
        let symbolic = factorize_symbolic_cholesky(
            structure.as_ref(),
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| Error::Singular(format!("symbolic factorization failed: {e:?}")))?;
        Ok(Self {
            symbolic,
            col_ptr,
            row_idx,
        })
    }

    /// True when `op` has exactly the analysed pattern.
    pub(crate) fn matches(&self, op: &SparseOperator) -> bool {
        let n = op.rows();
        if op.cols() != n || self.col_ptr.len() != n + 1 {
            return false;
        }
        let mut p = 0;
        for r in 0..n {
            let idx = op.row(r).0;
            let upper = &idx[idx.partition_point(|&c| c < r)..];
            if self.col_ptr[r] != p || &self.row_idx[p..p + upper.len()] != upper {
                return false;
            }
            p += upper.len();
        }
        self.col_ptr[n] == p
    }

    /// Numeric Cholesky factor `LLᴴ` of `op`, which must match this pattern.
    pub(crate) fn factor<'a>(&'a self, op: &SparseOperator) -> Result<HermitianFactor<'a>> {
        if !self.matches(op) {
            return Err(Error::DimensionMismatch("operator pattern differs from the analysed pattern".into()));
        }
        let n = op.rows();
        let (_, _, vals) = hermitian_lower(op);
        let structure = SymbolicSparseColMat::new_checked(n, n, self.col_ptr.clone(), None, self.row_idx.clone());
        let lower = SparseColMat::new(structure, vals);
        let scale = (0..n).map(|r| op.get(r, r).re.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut values = vec![Complex64::default(); self.symbolic.len_val()];
        let par = Par::Seq;
        let mut mem = MemBuffer::new(self.symbolic.factorize_numeric_llt_scratch::<Complex64>(par, Default::default()));
        self.symbolic
            .factorize_numeric_llt(
                &mut values,
                lower.as_ref(),
                Side::Lower,
                LltRegularization {
                    dynamic_regularization_delta: 1e-13 * scale,
                    dynamic_regularization_epsilon: 1e-14 * scale,
                },
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| Error::Singular(format!("Cholesky factorization failed: {e:?}")))?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Singular("Cholesky factor has non-finite entries".into()));
        }
        Ok(HermitianFactor {
            pattern: self,
            values,
        })
    }
}

/// Numeric `LLᴴ` factor tied to its [`HermitianPattern`].
pub(crate) struct HermitianFactor<'a> {
    pattern: &'a HermitianPattern,
    values: Vec<Complex64>,
}

impl HermitianFactor<'_> {
    /// Solves `H x = b` in place.
    pub(crate) fn solve(&self, b: &mut [Complex64]) {
        let n = self.pattern.col_ptr.len() - 1;
        assert_eq!(b.len(), n);
        let mut rhs = faer::Mat::<Complex64>::from_fn(n, 1, |i, _| b[i]);
        let llt = LltRef::new(&self.pattern.symbolic, &self.values);
        let par = Par::Seq;
        let mut mem = MemBuffer::new(self.pattern.symbolic.solve_in_place_scratch::<Complex64>(1, par));
        llt.solve_in_place_with_conj(Conj::No, rhs.as_mut(), par, MemStack::new(&mut mem));
        for (i, v) in b.iter_mut().enumerate() {
            *v = rhs[(i, 0)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissection_is_a_permutation() {
        for dims in [[2, 2, 2], [5, 3, 7], [9, 9, 9], [2, 11, 3]] {
            let mut order = nested_dissection(dims);
            assert_eq!(order.len(), dims.iter().product::<usize>());
            order.sort_unstable();
            assert!(order.iter().enumerate().all(|(i, &v)| i == v));
        }
    }

    #[test]
    fn solves_a_shifted_lattice_laplacian() {
        let dims = [6, 5, 4];
        let n: usize = dims.iter().product();
        let mut trip = Vec::new();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let r = i + dims[0] * (j + dims[1] * k);
                    trip.push((r, r, Complex64::new(6.0 - 2.5, 0.7)));
                    let mut nb = |ii: usize, jj: usize, kk: usize| {
                        let c = ii + dims[0] * (jj + dims[1] * kk);
                        trip.push((r, c, Complex64::new(-1.0, 0.0)));
                    };
                    if i > 0 {
                        nb(i - 1, j, k);
                    }
                    if i + 1 < dims[0] {
                        nb(i + 1, j, k);
                    }
                    if j > 0 {
                        nb(i, j - 1, k);
                    }
                    if j + 1 < dims[1] {
                        nb(i, j + 1, k);
                    }
                    if k > 0 {
                        nb(i, j, k - 1);
                    }
                    if k + 1 < dims[2] {
                        nb(i, j, k + 1);
                    }
                }
            }
        }
        let op = SparseOperator::from_triplets(n, n, trip).unwrap();
        let f = RealLdlt::new(&op, dims, 1).unwrap();
        let want: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let real: Vec<Complex64> = op.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect();
        let mut re_op = op.clone();
        re_op.values_mut().copy_from_slice(&real);
        let mut b = re_op.mul_vec(&want);
        f.solve(&mut b);
        for (x, y) in b.iter().zip(&want) {
            assert!((x - y).norm() < 1e-9 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn hermitian_cholesky_solves_and_reuses_its_pattern() {
        let n = 30;
        let build = |shift: f64| {
            let mut trip = Vec::new();
            for i in 0..n {
                trip.push((i, i, Complex64::new(shift + i as f64 * 0.1, 0.0)));
                for j in [i + 1, i + 7] {
                    if j < n {
                        let v = Complex64::new(-0.5, 0.3 * (i as f64).cos());
                        trip.push((i, j, v));
                        trip.push((j, i, v.conj()));
                    }
                }
            }
            SparseOperator::from_triplets(n, n, trip).unwrap()
        };
        let a = build(4.0);
        let pattern = HermitianPattern::new(&a).unwrap();
        for shift in [4.0, 9.0] {
            let h = build(shift);
            assert!(pattern.matches(&h));
            let f = pattern.factor(&h).unwrap();
            let want: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64)).collect();
            let mut b = h.mul_vec(&want);
            f.solve(&mut b);
            for (x, y) in b.iter().zip(&want) {
                assert!((x - y).norm() < 1e-10 * (1.0 + y.norm()));
            }
        }
        assert!(!pattern.matches(&SparseOperator::identity(n)));
    }
}
