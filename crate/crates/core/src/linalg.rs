//! Small dense/sparse helpers on top of `faer`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::c64;

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// `max |M − M†|`.
pub fn hermiticity_error(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// `max |M + Mᵀ|`.
pub fn antisymmetry_error(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            out = out.max((m[(i, j)] + m[(j, i)]).norm());
        }
    }
    out
}

/// `M ← (M + M†)/2`.
pub fn make_hermitian(mut m: MatMut<'_, c64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `M ← (M − Mᵀ)/2`.
pub fn make_antisymmetric(mut m: MatMut<'_, c64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = c64::new(0.0, 0.0);
        for i in 0..j {
            let avg = (m[(i, j)] - m[(j, i)]) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = -avg;
        }
    }
}

/// Entries below this magnitude are zeroed after each step so that
/// correlations far outside the light cone never decay into subnormals.
pub const FLUSH_THRESHOLD: f64 = 1e-150;

pub fn flush_tiny(m: &mut Mat<c64>) {
    for j in 0..m.ncols() {
        for z in m.col_as_slice_mut(j) {
            if z.re.abs() < FLUSH_THRESHOLD {
                z.re = 0.0;
            }
            if z.im.abs() < FLUSH_THRESHOLD {
                z.im = 0.0;
            }
        }
    }
}

/// `dst ← a · b`.
pub fn mul_into(dst: MatMut<'_, c64>, a: MatRef<'_, c64>, b: MatRef<'_, c64>) {
    matmul(dst, Accum::Replace, a, b, c64::new(1.0, 0.0), Par::Seq);
}

pub fn mul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    mul_into(out.as_mut(), a, b);
    out
}

/// A real square matrix with a handful of nonzeros per row, stored by rows
/// and by columns so both `S·X` and `X·S` cost `O(nnz · n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseReal {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseReal {
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut dense = vec![0.0; n * n];
        for (i, j, v) in entries {
            dense[i * n + j] += v;
        }
        let mut rows = vec![Vec::new(); n];
        let mut cols = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != 0.0 {
                    rows[i].push((j, v));
                    cols[j].push((i, v));
                }
            }
        }
        SparseReal { n, rows, cols }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map_or(0.0, |(_, v)| *v)
    }

    /// Nonzeros `(j, S_ij)` of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Nonzeros `(i, S_ij)` of column `j`.
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    /// `out += α S · X` (or `α S · X̄` when `conj`).
    pub fn left_mul_add(&self, x: &Mat<c64>, conj: bool, alpha: c64, out: &mut Mat<c64>) {
        for n in 0..x.ncols() {
            let xs = x.col_as_slice(n);
            let os = out.col_as_slice_mut(n);
            for (o, row) in os.iter_mut().zip(&self.rows) {
                let mut acc = c64::new(0.0, 0.0);
                for &(k, v) in row {
                    acc += if conj { xs[k].conj() } else { xs[k] } * v;
                }
                *o += alpha * acc;
            }
        }
    }

    /// `out += α X · S`.
    pub fn right_mul_add(&self, x: &Mat<c64>, alpha: c64, out: &mut Mat<c64>) {
        for (n, col) in self.cols.iter().enumerate() {
            let os = out.col_as_slice_mut(n);
            for &(k, v) in col {
                let w = alpha * v;
                for (o, xv) in os.iter_mut().zip(x.col_as_slice(k)) {
                    *o += xv * w;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        Mat::from_fn(self.n, self.n, |i, j| c64::new(self.get(i, j), 0.0))
    }
}
