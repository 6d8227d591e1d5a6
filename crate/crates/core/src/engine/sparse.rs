//! Sparse complex operators over an enumerated basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::basis::BasisTag;
use crate::error::{GentileError, Result};
use crate::scalars::GentileOrder;

/// Entries below this magnitude are dropped after assembly.
pub const DROP_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A square sparse complex matrix (CSR) tagged with the basis it acts on.
#[derive(Debug, Clone)]
pub struct ComplexOperator {
    mat: CsMat<Complex64>,
    tag: BasisTag,
}

impl PartialEq for ComplexOperator {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.mat == other.mat
    }
}

impl ComplexOperator {
    /// Assembles from `(row, col, value)` triplets, summing duplicates and
    /// dropping entries below [`DROP_TOL`].
    pub fn from_triplets<I>(dim: usize, tag: BasisTag, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut tri = TriMat::new((dim, dim));
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            tri.add_triplet(r, c, v);
        }
        Self::pruned(tri.to_csr(), tag)
    }

    fn pruned(mat: CsMat<Complex64>, tag: BasisTag) -> Self {
        let (rows, cols) = mat.shape();
        debug_assert_eq!(rows, cols);
        if mat.data().iter().all(|v| v.norm() >= DROP_TOL) {
            return Self { mat, tag };
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(mat.nnz());
        let mut data = Vec::with_capacity(mat.nnz());
        indptr.push(0);
        for row in mat.outer_iterator() {
            for (c, &v) in row.iter() {
                if v.norm() >= DROP_TOL {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            mat: CsMat::new((rows, cols), indptr, indices, data),
            tag,
        }
    }

    pub fn zeros(dim: usize, tag: BasisTag) -> Self {
        Self {
            mat: CsMat::zero((dim, dim)),
            tag,
        }
    }

    pub fn identity(dim: usize, tag: BasisTag) -> Self {
        Self {
            mat: CsMat::eye(dim),
            tag,
        }
    }

    pub fn diagonal(values: &[Complex64], tag: BasisTag) -> Self {
        Self::from_triplets(values.len(), tag, values.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn real_diagonal(values: &[f64], tag: BasisTag) -> Self {
        Self::from_triplets(
            values.len(),
            tag,
            values.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat.get(row, col).copied().unwrap_or(ZERO)
    }

    /// Stored entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.mat
            .outer_iterator()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, &v)| (r, c, v)).collect::<Vec<_>>())
    }

    /// Stored entries of one row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.mat
            .outer_view(row)
            .into_iter()
            .flat_map(|v| v.iter().map(|(c, &x)| (c, x)).collect::<Vec<_>>())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut d = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    fn conformable(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(GentileError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if self.tag != other.tag {
            return Err(GentileError::BasisMismatch);
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.conformable(other)?;
        Ok(Self::pruned(&self.mat * &other.mat, self.tag))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.conformable(other)?;
        Ok(Self::pruned(&self.mat + &other.mat, self.tag))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.conformable(other)?;
        Ok(Self::pruned(&self.mat - &other.mat, self.tag))
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: Complex64, other: &Self) -> Result<Self> {
        self.conformable(other)?;
        let scaled = other.mat.map(|&v| v * s);
        Ok(Self::pruned(&self.mat + &scaled, self.tag))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::pruned(self.mat.map(|&v| v * s), self.tag)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Sum of operators on a common basis.
    pub fn sum<'a, I>(dim: usize, tag: BasisTag, ops: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ComplexOperator>,
    {
        let mut acc = Self::zeros(dim, tag);
        for op in ops {
            acc = acc.add(op)?;
        }
        Ok(acc)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let t: CsMat<Complex64> = self.mat.transpose_view().to_csr();
        Self {
            mat: t.map(|v| v.conj()),
            tag: self.tag,
        }
    }

    pub fn entrywise_conjugate(&self) -> Self {
        Self {
            mat: self.mat.map(|v| v.conj()),
            tag: self.tag,
        }
    }

    /// Real part of every stored entry in the occupation basis.
    pub fn entrywise_real(&self) -> Self {
        Self::pruned(self.mat.map(|v| Complex64::new(v.re, 0.0)), self.tag)
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let sum = &self.mat + &self.adjoint().mat;
        Self::pruned(sum.map(|&v| v * 0.5), self.tag)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// The n-bracket `[A, B]_n = AB − q·BA` with `q = e^{i2π/(n+1)}`.
    pub fn n_bracket(&self, other: &Self, order: GentileOrder) -> Result<Self> {
        self.matmul(other)?
            .add_scaled(-order.phase(), &other.matmul(self)?)
    }

    /// Largest entry magnitude (0 for the zero matrix).
    pub fn max_abs(&self) -> f64 {
        self.mat.data().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced ∞-norm: largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        self.mat
            .outer_iterator()
            .map(|row| row.iter().map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A − A†|`.
    pub fn asymmetry(&self) -> f64 {
        Self::pruned(&self.mat - &self.adjoint().mat, self.tag).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.asymmetry() < tol
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim(), "vector length mismatch");
        self.mat
            .outer_iterator()
            .map(|row| row.iter().map(|(c, &a)| a * v[c]).sum())
            .collect()
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize], tag: BasisTag) -> Self {
        let mut position = vec![usize::MAX; self.dim()];
        for (new, &old) in indices.iter().enumerate() {
            position[old] = new;
        }
        let triplets = indices.iter().enumerate().flat_map(|(new_r, &old_r)| {
            let position = &position;
            self.row(old_r).filter_map(move |(c, v)| {
                let new_c = position[c];
                (new_c != usize::MAX).then_some((new_r, new_c, v))
            })
        });
        Self::from_triplets(indices.len(), tag, triplets.collect::<Vec<_>>())
    }

    /// Largest entry coupling `indices` to their complement, in either direction.
    pub fn leakage(&self, indices: &[usize]) -> f64 {
        let mut inside = vec![false; self.dim()];
        for &i in indices {
            inside[i] = true;
        }
        self.triplets()
            .filter(|&(r, c, _)| inside[r] != inside[c])
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Subspace;

    fn tag() -> BasisTag {
        BasisTag { n: 1, nu: 1, m: 2, subspace: Subspace::Full }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn assembly_sums_and_drops() {
        let op = ComplexOperator::from_triplets(
            3,
            tag(),
            [(0, 1, c(1.0, 0.0)), (0, 1, c(0.5, 0.0)), (2, 2, c(1e-16, 0.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(1.5, 0.0));
        assert_eq!(op.get(2, 2), c(0.0, 0.0));
    }

    #[test]
    fn products_match_dense() {
        let a = ComplexOperator::from_triplets(2, tag(), [(0, 1, c(1.0, 1.0)), (1, 0, c(0.0, 2.0))]);
        let b = ComplexOperator::from_triplets(2, tag(), [(0, 0, c(3.0, 0.0)), (1, 0, c(1.0, -1.0))]);
        let prod = a.matmul(&b).unwrap();
        let dense = a.to_dense() * b.to_dense();
        assert!((prod.to_dense() - dense).camax() < 1e-15);
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = ComplexOperator::from_triplets(2, tag(), [(0, 1, c(1.0, 1.0)), (1, 1, c(0.0, 2.0))]);
        assert_eq!(a.commutator(&a).unwrap().nnz(), 0);
    }

    #[test]
    fn hermitian_part_fixes_hermitian_input() {
        let h = ComplexOperator::from_triplets(
            2,
            tag(),
            [(0, 0, c(1.0, 0.0)), (0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))],
        );
        assert!(h.is_hermitian(1e-15));
        assert_eq!(h.hermitian_part(), h);
        let a = ComplexOperator::from_triplets(2, tag(), [(0, 1, c(2.0, 0.0))]);
        assert_eq!(a.hermitian_part().get(1, 0), c(1.0, 0.0));
        assert_eq!(a.asymmetry(), 2.0);
    }

    #[test]
    fn mismatched_bases_refuse_to_combine() {
        let a = ComplexOperator::identity(2, tag());
        let mut other = tag();
        other.subspace = Subspace::SPIN;
        let b = ComplexOperator::identity(2, other);
        assert_eq!(a.matmul(&b), Err(GentileError::BasisMismatch));
        let c3 = ComplexOperator::identity(3, tag());
        assert!(matches!(a.add(&c3), Err(GentileError::DimensionMismatch { left: 2, right: 3 })));
    }

    #[test]
    fn submatrix_and_leakage() {
        let a = ComplexOperator::from_triplets(
            3,
            tag(),
            [(0, 0, c(1.0, 0.0)), (0, 2, c(5.0, 0.0)), (2, 1, c(0.0, 3.0))],
        );
        let sub = a.submatrix(&[0, 1], tag());
        assert_eq!(sub.to_dense(), DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(a.leakage(&[0, 1]), 5.0);
        assert_eq!(a.leakage(&[0, 1, 2]), 0.0);
    }

    #[test]
    fn norms() {
        let a = ComplexOperator::from_triplets(2, tag(), [(0, 0, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0))]);
        assert_eq!(a.max_abs(), 1.0);
        assert_eq!(a.max_row_sum(), 2.0);
        let v = a.apply(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(v, vec![c(2.0, 0.0), c(0.0, 0.0)]);
    }
}
