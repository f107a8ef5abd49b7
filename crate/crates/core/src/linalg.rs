//! Small dense linear algebra: a row-major matrix, Householder and Givens
//! triangularization, and triangular solves.
//!
//! Everything here works on the handful of columns a regression design has
//! (at most a couple of dozen), so nothing is blocked or vectorized.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, keep.len());
        for i in 0..self.rows {
            for (dst, &src) in keep.iter().enumerate() {
                out[(i, dst)] = self[(i, src)];
            }
        }
        out
    }

    /// Largest absolute entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Upper-triangular factor R of a Householder QR of `a` (m×n, m ≥ n).
///
/// Returns the leading n×n block of R; Q is discarded. Row signs of R are
/// whatever the reflections produce, so only sign-invariant quantities
/// (RᵀR, solutions of R·b = Qᵀy) are meaningful to callers.
pub fn householder_r(a: &Matrix) -> Matrix {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "householder_r needs at least as many rows as columns");
    // Column-major working copy: reflections sweep down columns.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for k in 0..n {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        cols[k][k] = alpha;
        for x in &mut cols[k][k + 1..] {
            *x = 0.0;
        }
        for col in cols.iter_mut().skip(k + 1) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (x, vi) in col[k..].iter_mut().zip(&v) {
                *x -= f * vi;
            }
        }
    }
    let mut r = Matrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..=j {
            r[(i, j)] = col[i];
        }
    }
    r
}

/// Streams rows into an upper-triangular factor with Givens rotations.
///
/// After pushing the rows of A, `r()` satisfies RᵀR = AᵀA with a
/// nonnegative diagonal. Memory is O(n²) regardless of the row count.
#[derive(Debug, Clone)]
pub struct RowTriangularizer {
    n: usize,
    r: Vec<f64>,
}

impl RowTriangularizer {
    pub fn new(n: usize) -> Self {
        Self { n, r: vec![0.0; n * n] }
    }

    /// Rotates `row` into the factor. The slice is used as scratch.
    pub fn push_row(&mut self, row: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(row.len(), n);
        for j in 0..n {
            let b = row[j];
            if b == 0.0 {
                continue;
            }
            let a = self.r[j * n + j];
            let h = (a * a + b * b).sqrt();
            let (c, s) = (a / h, b / h);
            self.r[j * n + j] = h;
            for k in j + 1..n {
                let t = self.r[j * n + k];
                self.r[j * n + k] = c * t + s * row[k];
                row[k] = c * row[k] - s * t;
            }
        }
    }

    pub fn into_r(self) -> Matrix {
        Matrix::from_row_major(self.n, self.n, self.r)
    }
}

/// Solves R·x = b for upper-triangular R by back substitution.
pub fn solve_upper(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = r.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix (itself upper triangular).
pub fn invert_upper(r: &Matrix) -> Matrix {
    let n = r.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / r[(j, j)];
        for i in (0..j).rev() {
            let mut acc = 0.0;
            for l in i + 1..=j {
                acc += r[(i, l)] * inv[(l, j)];
            }
            inv[(i, j)] = -acc / r[(i, i)];
        }
    }
    inv
}
