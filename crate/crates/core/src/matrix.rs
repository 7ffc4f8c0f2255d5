//! Small dense real matrices and the linear discrete-time system pair `(A, B)`.
//!
//! `DenseMatrix` stores entries row-major and rejects non-finite values at
//! construction. Factorizations (LU, SVD, Schur) are delegated to `nalgebra`;
//! everything else is plain loops, which is all desk-scale sizes need.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative threshold on `sigma_min / sigma_max` below which a square matrix
/// is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-14;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(nrows, ncols, data)
    }

    /// Column vector with the given entries.
    pub fn column(entries: &[f64]) -> Result<Self> {
        Self::new(entries.len(), 1, entries.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch("empty diagonal".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = x;
        }
        Ok(m)
    }

    /// Block-diagonal matrix assembled from square blocks.
    pub fn block_diag(blocks: &[DenseMatrix]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("no blocks".into()));
        }
        let mut n = 0;
        for b in blocks {
            if !b.is_square() {
                return Err(Error::DimensionMismatch("blocks must be square".into()));
            }
            n += b.rows;
        }
        let mut m = Self::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows;
        }
        Ok(m)
    }

    /// `size x size` Jordan block: `lambda` on the diagonal, ones above it.
    pub fn jordan_block(lambda: f64, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::DimensionMismatch("Jordan block of size 0".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = lambda;
            if i + 1 < size {
                m[(i, i + 1)] = 1.0;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let mut data = vec![0.0; nrows * ncols];
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                data[i * ncols + j] = x;
            }
        }
        Self::new(nrows, ncols, data)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `self^k` by repeated squaring; `k = 0` gives the identity.
    pub fn power(&self, k: u32) -> Result<Self> {
        self.require_square()?;
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(
                "shape mismatch in subtraction".into(),
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        self.require_square()?;
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] -= shift;
        }
        Ok(m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest elementwise absolute difference; shapes must agree.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn det(&self) -> Result<f64> {
        self.require_square()?;
        Ok(match self.rows {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => self.to_nalgebra().lu().determinant(),
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        let m = self.to_nalgebra();
        let sv = m.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smax == 0.0 || smin <= SINGULAR_RCOND * smax {
            return Err(Error::Singular);
        }
        let inv = m.lu().try_inverse().ok_or(Error::Singular)?;
        Self::from_nalgebra(&inv)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self
            .to_nalgebra()
            .singular_values()
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == 0.0))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == 0.0))
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self::new(m.nrows(), m.ncols(), data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear discrete-time system `x_{k+1} = A x_k + B u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdtSystem {
    a: DenseMatrix,
    b: DenseMatrix,
}

impl LdtSystem {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        a.require_square()?;
        if b.rows() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows but A is {}x{}",
                b.rows(),
                a.rows(),
                a.cols()
            )));
        }
        Ok(Self { a, b })
    }

    /// Single-input system with input vector `b`.
    pub fn single_input(a: DenseMatrix, b: &[f64]) -> Result<Self> {
        Self::new(a, DenseMatrix::column(b)?)
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Input dimension.
    pub fn r(&self) -> usize {
        self.b.cols()
    }

    /// The input vector of a single-input system.
    pub fn input_vector(&self) -> Result<Vec<f64>> {
        if self.r() != 1 {
            return Err(Error::MultiInputUnsupported { r: self.r() });
        }
        Ok(self.b.col(0))
    }

    /// The pair `(T A T^-1, T B)`.
    pub fn similarity(&self, t: &DenseMatrix) -> Result<Self> {
        let t_inv = t.inverse()?;
        let a = t.matmul(&self.a)?.matmul(&t_inv)?;
        let b = t.matmul(&self.b)?;
        Self::new(a, b)
    }
}
