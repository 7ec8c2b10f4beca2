//! Dense complex tensors and matrices with the multilinear operations the
//! modal model needs: unfolding, mode contraction, rank-1 outer products,
//! Khatri-Rao products and Frobenius norms.
//!
//! Layout conventions (fixed, relied upon throughout the crate):
//! * tensors store entries with the *last* index varying fastest, so entry
//!   `(m_0, ..., m_{R-1})` lives at flat offset `sum_k m_k * prod_{l>k} M_l`;
//! * `unfold(dim)` orders its columns so that among the remaining dimensions
//!   the *smallest* dimension index varies fastest, which makes the CP
//!   factorization identity `Y_(r) = A_r diag(c) (A_R ⊙ ... ⊙ A_1 skipping r)^T`
//!   hold exactly for the Khatri-Rao ordering used here.

use crate::error::TensorError;
use num_complex::Complex64;

/// Dense complex tensor of arbitrary order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    sizes: Vec<usize>,
    data: Vec<Complex64>,
}

/// Dense complex matrix, stored column-major so columns (atoms, fibers) are
/// contiguous slices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    pub fn zeros(sizes: &[usize]) -> Result<Self, TensorError> {
        Self::validate_sizes(sizes)?;
        let n: usize = sizes.iter().product();
        Ok(Self {
            sizes: sizes.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn from_data(sizes: &[usize], data: Vec<Complex64>) -> Result<Self, TensorError> {
        Self::validate_sizes(sizes)?;
        let n: usize = sizes.iter().product();
        if data.len() != n {
            return Err(TensorError::DataLength {
                got: data.len(),
                expected: n,
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            data,
        })
    }

    fn validate_sizes(sizes: &[usize]) -> Result<(), TensorError> {
        if sizes.is_empty() {
            return Err(TensorError::NoDimensions);
        }
        for (dim, &m) in sizes.iter().enumerate() {
            if m == 0 {
                return Err(TensorError::ZeroLength { dim });
            }
        }
        Ok(())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn order(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Flat offset of a multi-index (0-based, last index fastest).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.sizes.len());
        let mut off = 0;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.sizes[k]);
            off = off * self.sizes[k] + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Complex64) {
        let off = self.flat_index(idx);
        self.data[off] = v;
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dimension-`dim` matricization. The result has `sizes[dim]` rows; the
    /// column index runs over the remaining dimensions with the smallest
    /// dimension index varying fastest.
    pub fn unfold(&self, dim: usize) -> Result<ComplexMatrix, TensorError> {
        let order = self.order();
        if dim >= order {
            return Err(TensorError::DimOutOfRange { dim, order });
        }
        let rows = self.sizes[dim];
        let cols = self.num_elements() / rows;
        let mut out = ComplexMatrix::zeros(rows, cols);

        // Column stride of dimension k in the unfolding (skipping `dim`),
        // smallest index fastest.
        let mut col_stride = vec![0usize; order];
        let mut acc = 1usize;
        for k in 0..order {
            if k == dim {
                continue;
            }
            col_stride[k] = acc;
            acc *= self.sizes[k];
        }

        let mut idx = vec![0usize; order];
        for &v in &self.data {
            let row = idx[dim];
            let mut col = 0usize;
            for k in 0..order {
                if k != dim {
                    col += idx[k] * col_stride[k];
                }
            }
            out.set(row, col, v);
            // increment multi-index, last dimension fastest
            for k in (0..order).rev() {
                idx[k] += 1;
                if idx[k] < self.sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Inverse of [`unfold`]: rebuild a tensor with the given sizes from its
    /// dimension-`dim` matricization.
    pub fn fold(m: &ComplexMatrix, sizes: &[usize], dim: usize) -> Result<Self, TensorError> {
        Self::validate_sizes(sizes)?;
        let order = sizes.len();
        if dim >= order {
            return Err(TensorError::DimOutOfRange { dim, order });
        }
        let total: usize = sizes.iter().product();
        if m.rows() != sizes[dim] || m.rows() * m.cols() != total {
            return Err(TensorError::ShapeMismatch {
                rows: m.rows(),
                cols: m.cols(),
                other_rows: sizes[dim],
                other_cols: total / sizes[dim],
            });
        }
        let mut out = Self::zeros(sizes)?;
        let mut col_stride = vec![0usize; order];
        let mut acc = 1usize;
        for k in 0..order {
            if k == dim {
                continue;
            }
            col_stride[k] = acc;
            acc *= sizes[k];
        }
        let mut idx = vec![0usize; order];
        for off in 0..total {
            let row = idx[dim];
            let mut col = 0usize;
            for k in 0..order {
                if k != dim {
                    col += idx[k] * col_stride[k];
                }
            }
            out.data[off] = m.get(row, col);
            for k in (0..order).rev() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Contraction of dimension `dim` with a `K x M_dim` matrix: the result
    /// replaces `M_dim` by `K` and sums `out = u * fibers`.
    pub fn contract_mode(&self, dim: usize, u: &ComplexMatrix) -> Result<Self, TensorError> {
        let order = self.order();
        if dim >= order {
            return Err(TensorError::DimOutOfRange { dim, order });
        }
        if u.cols() != self.sizes[dim] {
            return Err(TensorError::ContractionMismatch {
                got: u.cols(),
                dim,
                expected: self.sizes[dim],
            });
        }
        let unfolded = self.unfold(dim)?;
        let product = u.matmul(&unfolded)?;
        let mut new_sizes = self.sizes.clone();
        new_sizes[dim] = u.rows();
        Self::fold(&product, &new_sizes, dim)
    }

    /// Weighted outer product `c * v_0 ∘ v_1 ∘ ... ∘ v_{R-1}`.
    pub fn rank1(c: Complex64, vectors: &[Vec<Complex64>]) -> Result<Self, TensorError> {
        if vectors.is_empty() {
            return Err(TensorError::NoDimensions);
        }
        if vectors.iter().any(|v| v.is_empty()) {
            return Err(TensorError::EmptyFactor);
        }
        let sizes: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        let mut out = Self::zeros(&sizes)?;
        let order = sizes.len();
        let mut idx = vec![0usize; order];
        for off in 0..out.data.len() {
            let mut v = c;
            for k in 0..order {
                v *= vectors[k][idx[k]];
            }
            out.data[off] = v;
            for k in (0..order).rev() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Reorder dimensions: output dimension `k` is input dimension `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let order = self.order();
        let mut seen = vec![false; order];
        if perm.len() != order {
            return Err(TensorError::BadPermutation(perm.to_vec()));
        }
        for &p in perm {
            if p >= order || seen[p] {
                return Err(TensorError::BadPermutation(perm.to_vec()));
            }
            seen[p] = true;
        }
        let new_sizes: Vec<usize> = perm.iter().map(|&p| self.sizes[p]).collect();
        let mut out = Self::zeros(&new_sizes)?;
        let mut idx = vec![0usize; order];
        let mut src = vec![0usize; order];
        for off in 0..out.data.len() {
            for k in 0..order {
                src[perm[k]] = idx[k];
            }
            out.data[off] = self.get(&src);
            for k in (0..order).rev() {
                idx[k] += 1;
                if idx[k] < new_sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Contiguous slice of index `i` along dimension 0, kept as an order-R
    /// tensor with leading size 1.
    pub fn slice_dim0(&self, i: usize) -> Result<Self, TensorError> {
        if i >= self.sizes[0] {
            return Err(TensorError::DimOutOfRange {
                dim: i,
                order: self.sizes[0],
            });
        }
        let block = self.num_elements() / self.sizes[0];
        let mut sizes = self.sizes.clone();
        sizes[0] = 1;
        Self::from_data(&sizes, self.data[i * block..(i + 1) * block].to_vec())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, TensorError> {
        if self.sizes != other.sizes {
            return Err(TensorError::DataLength {
                got: other.num_elements(),
                expected: self.num_elements(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_data(&self.sizes, data)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self, TensorError> {
        let mut out = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(TensorError::DataLength {
                    got: col.len(),
                    expected: rows,
                });
            }
            out.col_mut(j).copy_from_slice(col);
        }
        Ok(out)
    }

    /// Build from a flat column-major buffer.
    pub fn from_col_major(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, TensorError> {
        if data.len() != rows * cols {
            return Err(TensorError::DataLength {
                got: data.len(),
                expected: rows * cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self, TensorError> {
        if self.cols != other.rows {
            return Err(TensorError::ShapeMismatch {
                rows: self.rows,
                cols: self.cols,
                other_rows: other.rows,
                other_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &blj) in bcol.iter().enumerate() {
                if blj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let acol = &self.data[l * self.rows..(l + 1) * self.rows];
                for (o, &a) in ocol.iter_mut().zip(acol) {
                    *o += a * blj;
                }
            }
        }
        Ok(out)
    }

    /// `self^H * other` without forming the transpose.
    pub fn hermitian_matmul(&self, other: &Self) -> Result<Self, TensorError> {
        if self.rows != other.rows {
            return Err(TensorError::ShapeMismatch {
                rows: self.rows,
                cols: self.cols,
                other_rows: other.rows,
                other_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            for i in 0..self.cols {
                let acol = self.col(i);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&a, &b) in acol.iter().zip(bcol) {
                    acc += a.conj() * b;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(TensorError::ShapeMismatch {
                rows: self.rows,
                cols: self.cols,
                other_rows: other.rows,
                other_cols: other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Self::from_col_major(self.rows, self.cols, data)
    }

    /// Keep the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for (j, &src) in idx.iter().enumerate() {
            out.col_mut(j).copy_from_slice(self.col(src));
        }
        out
    }

    /// Drop row `row`, keeping everything else.
    pub fn drop_row(&self, row: usize) -> Self {
        let mut out = Self::zeros(self.rows - 1, self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            let mut k = 0;
            for (i, &v) in src.iter().enumerate() {
                if i != row {
                    dst[k] = v;
                    k += 1;
                }
            }
        }
        out
    }
}

/// Column-wise Kronecker (Khatri-Rao) product; the second factor's index
/// varies fastest within each output column.
pub fn khatri_rao(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, TensorError> {
    if a.cols() != b.cols() {
        return Err(TensorError::ShapeMismatch {
            rows: a.rows(),
            cols: a.cols(),
            other_rows: b.rows(),
            other_cols: b.cols(),
        });
    }
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols());
    for j in 0..a.cols() {
        let (acol, bcol) = (a.col(j), b.col(j));
        let ocol = out.col_mut(j);
        for (ia, &av) in acol.iter().enumerate() {
            for (ib, &bv) in bcol.iter().enumerate() {
                ocol[ia * bcol.len() + ib] = av * bv;
            }
        }
    }
    Ok(out)
}

/// Kronecker product of two vectors, second factor's index fastest.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &av in a {
        for &bv in b {
            out.push(av * bv);
        }
    }
    out
}
