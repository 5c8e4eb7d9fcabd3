//! Explicit frame matrices for small grids, used as a test oracle.
//!
//! The B-spline matrix is assembled directly from its definition: each 1-D
//! filter matrix is a banded Toeplitz block times the boundary-extension
//! matrix, and the d-dimensional blocks are Kronecker products of those. Rows
//! follow [`CoefficientSet::flatten`](super::CoefficientSet::flatten) order.
//! The dual-tree matrix has no closed form here and is materialized by
//! transforming unit vectors.

use super::bspline::{multi_index, subband_count, FILTERS};
use super::{analyze, FrameBackend};
use crate::error::{Error, Result};
use crate::field::ImageField;

/// Largest grid (in pixels) the oracle will materialize.
pub const ORACLE_PIXEL_LIMIT: usize = 4096;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &w) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * w;
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `A^T A`.
    pub fn gram(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.cols);
        for row in self.data.chunks_exact(self.cols) {
            for (i, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in row.iter().enumerate() {
                    out.data[i * self.cols + j] += a * b;
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest `|A_ij - I_ij|`.
    pub fn distance_from_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// Block of rows `[start, start + count)`.
    pub fn row_block(&self, start: usize, count: usize) -> DenseMatrix {
        DenseMatrix {
            rows: count,
            cols: self.cols,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }
}

/// `n x n` matrix of a 3-tap filter with half-sample symmetric extension,
/// built as `T E` with `E` the `(n+2) x n` extension and `T` the `n x (n+2)`
/// banded Toeplitz convolution.
pub fn filter_matrix_1d(taps: &[f64; 3], n: usize) -> DenseMatrix {
    let mut ext = DenseMatrix::zeros(n + 2, n);
    ext.set(0, 0, 1.0);
    for j in 1..=n {
        ext.set(j, j - 1, 1.0);
    }
    ext.set(n + 1, n - 1, 1.0);
    let mut toeplitz = DenseMatrix::zeros(n, n + 2);
    for k in 0..n {
        toeplitz.set(k, k, taps[2]);
        toeplitz.set(k, k + 1, taps[1]);
        toeplitz.set(k, k + 2, taps[0]);
    }
    toeplitz.matmul(&ext)
}

pub fn dense_frame_matrix(backend: FrameBackend, extents: &[usize]) -> Result<DenseMatrix> {
    let pixels: usize = extents.iter().product();
    if pixels > ORACLE_PIXEL_LIMIT {
        return Err(Error::OracleScaleExceeded {
            pixels,
            limit: ORACLE_PIXEL_LIMIT,
        });
    }
    if extents.is_empty() || extents.len() > 3 || extents.contains(&0) {
        return Err(Error::InvalidArgument(format!("bad extents {extents:?}")));
    }
    match backend {
        FrameBackend::BSplineFramelet => Ok(bspline_matrix(extents)),
        FrameBackend::DualTreeCwt2d { .. } => materialize(backend, extents),
    }
}

fn bspline_matrix(extents: &[usize]) -> DenseMatrix {
    let ndim = extents.len();
    let pixels: usize = extents.iter().product();
    let blocks = subband_count(ndim);
    let mut out = DenseMatrix::zeros(blocks * pixels, pixels);
    for b in 0..blocks {
        let idx = multi_index(b, ndim);
        // x-fastest vec(): axis 0 is the rightmost Kronecker factor
        let mut block = filter_matrix_1d(&FILTERS[idx[ndim - 1]], extents[ndim - 1]);
        for axis in (0..ndim - 1).rev() {
            block = block.kron(&filter_matrix_1d(&FILTERS[idx[axis]], extents[axis]));
        }
        out.data[b * pixels * pixels..(b + 1) * pixels * pixels].copy_from_slice(&block.data);
    }
    out
}

fn materialize(backend: FrameBackend, extents: &[usize]) -> Result<DenseMatrix> {
    let pixels: usize = extents.iter().product();
    let mut columns = Vec::with_capacity(pixels);
    for j in 0..pixels {
        let mut e = ImageField::zeros(extents)?;
        e.data_mut()[j] = 1.0;
        columns.push(analyze(&e, backend)?.flatten());
    }
    let rows = columns[0].len();
    let mut out = DenseMatrix::zeros(rows, pixels);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}
