//! Non-negative least squares for the mixing weights:
//! `minimize ½‖X − W·H‖²_F subject to W ≥ 0`.
//!
//! The objective separates over the rows of `W`, so each row is solved on its own
//! with accelerated projected gradient on `½ wᵀQw − bᵀw`, where `Q = H·Hᵀ` and
//! `b = H·x`. Momentum is reset whenever an accelerated step would increase the
//! objective, which keeps the iterates monotone.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, largest_eigenvalue, DataMatrix};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;
const POWER_ITERATIONS: usize = 50;
const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    /// `n × k`, entrywise non-negative.
    pub w: DataMatrix,
    /// `‖X − W·H‖_F / ‖X‖_F` (absolute when `X = 0`).
    pub relative_residual: f64,
    /// Largest iteration count over the rows.
    pub iterations: usize,
    /// Every row reached a KKT residual at or below the tolerance.
    pub converged: bool,
    /// Rows of `H` that are identically zero; their weights carry no information.
    pub zero_archetypes: Vec<usize>,
}

/// Shared per-`H` quantities.
#[derive(Debug, Clone)]
pub(crate) struct Gram {
    pub h: DataMatrix,
    pub q: Array2<f64>,
    pub lipschitz: f64,
}

impl Gram {
    pub fn new(h: &DataMatrix) -> Self {
        let k = h.n_rows();
        let q = Array2::from_shape_fn((k, k), |(i, j)| dot(h.row_slice(i), h.row_slice(j)));
        let lipschitz = largest_eigenvalue(&q, POWER_ITERATIONS, POWER_TOL);
        Gram {
            h: h.clone(),
            q,
            lipschitz,
        }
    }

    /// `H·x`.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        (0..self.h.n_rows()).map(|j| dot(self.h.row_slice(j), x)).collect()
    }

    pub fn qv(&self, v: &[f64], out: &mut [f64]) {
        let k = v.len();
        let q = self.q.as_slice().expect("standard layout");
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&q[i * k..(i + 1) * k], v);
        }
    }
}

pub(crate) struct RowSolve {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[cfg(test)]
    pub history: Vec<f64>,
}

fn quad_value(w: &[f64], qw: &[f64], b: &[f64]) -> f64 {
    0.5 * dot(w, qw) - dot(b, w)
}

fn kkt_sup(w: &[f64], grad: &[f64]) -> f64 {
    w.iter()
        .zip(grad)
        .map(|(&wi, &gi)| wi.min(gi).abs())
        .fold(0.0, f64::max)
}

/// Solves one row: `minimize ½ wᵀQw − bᵀw, w ≥ 0`. `scale` is `½‖x‖²`, used only
/// to judge whether an objective increase is above round-off.
pub(crate) fn solve_row(gram: &Gram, b: &[f64], scale: f64, tol: f64, max_iter: usize) -> RowSolve {
    let k = b.len();
    let mut w = vec![0.0; k];
    let mut qw = vec![0.0; k];
    let mut f_w = 0.0f64;
    #[cfg(test)]
    let mut history = vec![f_w];

    let grad0: Vec<f64> = b.iter().map(|v| -v).collect();
    if gram.lipschitz <= 0.0 || kkt_sup(&w, &grad0) <= tol {
        return RowSolve {
            w,
            iterations: 0,
            converged: true,
            #[cfg(test)]
            history,
        };
    }

    let mut lip = gram.lipschitz;
    let mut y = w.clone();
    let mut qy = qw.clone();
    let mut t = 1.0f64;
    let mut w_new = vec![0.0; k];
    let mut qw_new = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;

    let step_from = |from: &[f64], q_from: &[f64], lip: f64, out: &mut [f64]| {
        for i in 0..k {
            out[i] = (from[i] - (q_from[i] - b[i]) / lip).max(0.0);
        }
    };

    while iterations < max_iter {
        iterations += 1;
        step_from(&y, &qy, lip, &mut w_new);
        gram.qv(&w_new, &mut qw_new);
        let mut f_new = quad_value(&w_new, &qw_new, b);
        let slack = 1e-13 * (f_w.abs() + scale);
        if f_new > f_w + slack {
            // momentum overshot: restart from w with a plain projected step
            t = 1.0;
            loop {
                step_from(&w, &qw, lip, &mut w_new);
                gram.qv(&w_new, &mut qw_new);
                f_new = quad_value(&w_new, &qw_new, b);
                if f_new <= f_w + slack || lip > gram.lipschitz * 1e12 {
                    break;
                }
                // Lipschitz estimate was too small
                lip *= 2.0;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..k {
            y[i] = w_new[i] + beta * (w_new[i] - w[i]);
        }
        gram.qv(&y, &mut qy);
        std::mem::swap(&mut w, &mut w_new);
        std::mem::swap(&mut qw, &mut qw_new);
        f_w = f_new;
        t = t_next;
        #[cfg(test)]
        history.push(f_w);

        let grad: Vec<f64> = qw.iter().zip(b).map(|(a, c)| a - c).collect();
        if kkt_sup(&w, &grad) <= tol {
            converged = true;
            break;
        }
    }
    RowSolve {
        w,
        iterations,
        converged,
        #[cfg(test)]
        history,
    }
}

pub fn nnls_fit(x: &DataMatrix, h: &DataMatrix, tol: f64, max_iter: usize) -> Result<NnlsSolution> {
    if h.n_rows() == 0 {
        return Err(Error::arg("H must have at least one row"));
    }
    if x.n_cols() != h.n_cols() {
        return Err(Error::Dimension(format!(
            "X has {} columns but H has {}",
            x.n_cols(),
            h.n_cols()
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::arg("tolerance must be non-negative"));
    }
    let gram = Gram::new(h);
    let k = h.n_rows();
    let solves: Vec<RowSolve> = (0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row_slice(i);
            let b = gram.rhs(row);
            solve_row(&gram, &b, 0.5 * dot(row, row), tol, max_iter)
        })
        .collect();

    let iterations = solves.iter().map(|s| s.iterations).max().unwrap_or(0);
    let converged = solves.iter().all(|s| s.converged);
    let values: Vec<f64> = solves.into_iter().flat_map(|s| s.w).collect();
    let w = DataMatrix::from_vec(x.n_rows(), k, values)?;
    let relative_residual = relative_residual(x, h, &w)?;
    let zero_archetypes = (0..k)
        .filter(|&i| h.row_slice(i).iter().all(|&v| v == 0.0))
        .collect();
    Ok(NnlsSolution {
        w,
        relative_residual,
        iterations,
        converged,
        zero_archetypes,
    })
}

/// `‖X − W·H‖_F / ‖X‖_F`, or the absolute residual when `X = 0`.
pub fn relative_residual(x: &DataMatrix, h: &DataMatrix, w: &DataMatrix) -> Result<f64> {
    let dist = x.frobenius_distance(&w.matmul(h)?)?;
    let norm = x.frobenius_norm();
    Ok(if norm > 0.0 { dist / norm } else { dist })
}

/// `½‖X − W·H‖²_F`.
pub fn objective(x: &DataMatrix, h: &DataMatrix, w: &DataMatrix) -> Result<f64> {
    let d = x.frobenius_distance(&w.matmul(h)?)?;
    Ok(0.5 * d * d)
}

/// Optimality certificate: `max |min(W, G)|` with gradient `G = (W·H − X)·Hᵀ`.
///
/// Zero exactly when `W` solves the problem.
pub fn kkt_residual(x: &DataMatrix, h: &DataMatrix, w: &DataMatrix) -> Result<f64> {
    if w.n_rows() != x.n_rows() || w.n_cols() != h.n_rows() || x.n_cols() != h.n_cols() {
        return Err(Error::Dimension(format!(
            "X {}x{}, H {}x{}, W {}x{}",
            x.n_rows(),
            x.n_cols(),
            h.n_rows(),
            h.n_cols(),
            w.n_rows(),
            w.n_cols()
        )));
    }
    let residual = &w.matmul(h)?.into_array() - x.array();
    let g = residual.dot(&h.array().t());
    Ok(w
        .array()
        .iter()
        .zip(g.iter())
        .map(|(&wi, &gi)| wi.min(gi).abs())
        .fold(0.0, f64::max))
}
