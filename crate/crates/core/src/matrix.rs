//! Dense row-major matrices whose rows are data points.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// An `n_rows × n_cols` real matrix, rows are data points.
///
/// Every entry is finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    data: Array2<f64>,
}

impl DataMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if let Some(((row, col), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        // keep the standard (row-major) layout so `row_slice` is always valid
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        Ok(DataMatrix { data })
    }

    pub fn from_vec(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        let data = Array2::from_shape_vec((n_rows, n_cols), values)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Self::new(data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::RaggedRow {
                row: bad + 1,
                expected: n_cols,
                found: rows[bad].len(),
            });
        }
        let values = rows.iter().flatten().copied().collect();
        Self::from_vec(rows.len(), n_cols, values)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DataMatrix {
            data: Array2::zeros((n_rows, n_cols)),
        }
    }

    pub fn identity(n: usize) -> Self {
        DataMatrix {
            data: Array2::eye(n),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    /// Contiguous slice of row `i`.
    pub fn row_slice(&self, i: usize) -> &[f64] {
        let n_cols = self.n_cols();
        let all = self
            .data
            .as_slice()
            .expect("DataMatrix is always stored in standard layout");
        &all[i * n_cols..(i + 1) * n_cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data
            .as_slice()
            .expect("DataMatrix is always stored in standard layout")
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    /// New matrix made of the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::arg(format!(
                "row index {bad} out of range for {} rows",
                self.n_rows()
            )));
        }
        Ok(DataMatrix {
            data: self.data.select(Axis(0), indices),
        })
    }

    pub fn transpose(&self) -> Self {
        DataMatrix {
            data: self.data.t().as_standard_layout().to_owned(),
        }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &DataMatrix) -> Result<Self> {
        if self.n_cols() != other.n_rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows(),
                self.n_cols(),
                other.n_rows(),
                other.n_cols()
            )));
        }
        Self::new(self.data.dot(&other.data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &DataMatrix) -> Result<f64> {
        if self.data.dim() != other.data.dim() {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.data.dim(),
                other.data.dim()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Each row scaled to unit ℓ₂ norm; all-zero rows are left as they are.
    pub fn normalized_rows(&self) -> Self {
        let mut data = self.data.clone();
        for mut row in data.rows_mut() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v / norm);
            }
        }
        DataMatrix { data }
    }

    /// Every entry multiplied by `c` and every row shifted by `shift`.
    pub fn affine(&self, c: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.n_cols() {
            return Err(Error::Dimension(format!(
                "shift of length {} for {} columns",
                shift.len(),
                self.n_cols()
            )));
        }
        let mut data = self.data.mapv(|v| c * v);
        for mut row in data.rows_mut() {
            row.iter_mut().zip(shift).for_each(|(v, s)| *v += s);
        }
        Self::new(data)
    }
}

/// Deterministic dot product; every pursuit path evaluates functionals through this
/// so that serial, blocked and distributed runs produce identical bits.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let tail_a = chunks_a.remainder();
    let tail_b = chunks_b.remainder();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for l in 0..8 {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in tail_a.iter().zip(tail_b) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration.
pub fn largest_eigenvalue(q: &Array2<f64>, max_iter: usize, tol: f64) -> f64 {
    let k = q.nrows();
    if k == 0 {
        return 0.0;
    }
    // deterministic, non-degenerate start
    let mut v = ndarray::Array1::from_shape_fn(k, |i| 1.0 + (i as f64 + 1.0).sqrt() * 1e-3);
    let n0 = v.dot(&v).sqrt();
    v /= n0;
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = q.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotients approach from below; pad slightly so 1/L stays a safe step
    lambda.max(q.diag().iter().cloned().fold(0.0, f64::max)) * (1.0 + 1e-6)
}
