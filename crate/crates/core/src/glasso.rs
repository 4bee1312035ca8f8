//! Non-negative group lasso for choosing archetypes among candidate rows:
//!
//! ```text
//! minimize ½‖X − W·H‖²_F + λ Σᵢ ‖wᵢ‖₂   subject to W ≥ 0
//! ```
//!
//! where group `wᵢ` is column `i` of `W` (the weights every data row puts on
//! candidate `i`). The penalty is moved into the constraints with one height
//! variable per group, `(wᵢ, tᵢ) ∈ K₂ ∩ R₊`, leaving a smooth objective
//! `½‖X − W·H‖²_F + λ Σᵢ tᵢ` that accelerated projected gradient handles directly.
//! Projection onto `K₂ ∩ R₊` is the second-order-cone projection applied after
//! clipping the group coordinates (not the height) at zero.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::matrix::{dot, largest_eigenvalue, norm2, DataMatrix};
use crate::pursuit::Selection;

pub const DEFAULT_GRID_LEN: usize = 50;
pub const DEFAULT_MIN_RATIO: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 20_000;
/// Relative threshold, against the largest group norm, for calling a group active.
pub const ACTIVITY_THRESHOLD: f64 = 1e-6;
/// Objective change is measured across this many iterations.
const STALL_WINDOW: usize = 10;

/// Projects `(v, t)` onto the second-order cone `‖v‖₂ ≤ t` in place.
pub fn project_soc(v: &mut [f64], t: &mut f64) {
    let nv = norm2(v);
    if nv <= *t {
        return;
    }
    if nv <= -*t {
        v.iter_mut().for_each(|x| *x = 0.0);
        *t = 0.0;
        return;
    }
    let scale = 0.5 * (nv + *t);
    v.iter_mut().for_each(|x| *x *= scale / nv);
    *t = scale;
}

fn project_group(v: &mut [f64], t: &mut f64) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    project_soc(v, t);
}

/// Euclidean projection onto `{y : ‖y[..q−1]‖₂ ≤ y[q−1], y ≥ 0}`; the last
/// coordinate is the cone height.
pub fn project_cone_orthant(x: &[f64]) -> Result<Vec<f64>> {
    let q = x.len();
    if q < 2 {
        return Err(Error::arg(format!("cone projection needs length >= 2, got {q}")));
    }
    let mut y = x.to_vec();
    let (v, t) = y.split_at_mut(q - 1);
    project_group(v, &mut t[0]);
    Ok(y)
}

fn check_shapes(x: &DataMatrix, h: &DataMatrix) -> Result<()> {
    if x.n_cols() != h.n_cols() {
        return Err(Error::Dimension(format!(
            "X has {} columns but H has {}",
            x.n_cols(),
            h.n_cols()
        )));
    }
    if h.n_rows() == 0 {
        return Err(Error::arg("need at least one candidate row"));
    }
    Ok(())
}

/// `H·Xᵀ`, one row per candidate.
fn correlations(x: &DataMatrix, h: &DataMatrix) -> Array2<f64> {
    Array2::from_shape_fn((h.n_rows(), x.n_rows()), |(i, r)| dot(h.row_slice(i), x.row_slice(r)))
}

/// Smallest `λ` at which `W = 0` is optimal: `maxᵢ ‖(X·hᵢ)₊‖₂`.
pub fn lambda_max(x: &DataMatrix, h: &DataMatrix) -> Result<f64> {
    check_shapes(x, h)?;
    Ok(positive_part_norms(&correlations(x, h)).into_iter().fold(0.0, f64::max))
}

fn positive_part_norms(bt: &Array2<f64>) -> Vec<f64> {
    bt.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt())
        .collect()
}

/// `len` log-spaced values from `lambda_max` down to `min_ratio · lambda_max`.
pub fn lambda_grid(lambda_max: f64, len: usize, min_ratio: f64) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![lambda_max],
        _ => {
            let step = min_ratio.ln() / (len - 1) as f64;
            (0..len).map(|s| lambda_max * (step * s as f64).exp()).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupLassoProblem {
    pub x: DataMatrix,
    /// Candidate archetypes, one per row.
    pub h: DataMatrix,
    /// Strictly decreasing, positive.
    pub lambda_grid: Vec<f64>,
}

impl GroupLassoProblem {
    pub fn new(x: DataMatrix, h: DataMatrix, lambda_grid: Vec<f64>) -> Result<Self> {
        check_shapes(&x, &h)?;
        if lambda_grid.is_empty() {
            return Err(Error::arg("empty lambda grid"));
        }
        if lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::arg("lambda values must be positive and finite"));
        }
        if lambda_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::arg("lambda grid must be strictly decreasing"));
        }
        Ok(GroupLassoProblem { x, h, lambda_grid })
    }

    /// The default grid: 50 log-spaced values from `λ_max` down to `10⁻³·λ_max`.
    pub fn with_default_grid(x: DataMatrix, h: DataMatrix) -> Result<Self> {
        let lmax = lambda_max(&x, &h)?;
        if lmax <= 0.0 {
            return Err(Error::arg("lambda_max is zero: no candidate correlates positively with X"));
        }
        let grid = lambda_grid(lmax, DEFAULT_GRID_LEN, DEFAULT_MIN_RATIO);
        Self::new(x, h, grid)
    }
}

/// Solution at one `λ`.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub lambda: f64,
    /// `n × k`, entrywise non-negative.
    pub w: DataMatrix,
    /// `‖wᵢ‖₂` per group.
    pub group_norms: Vec<f64>,
    /// Groups whose norm exceeds the activity threshold, ascending.
    pub active: Vec<usize>,
    /// `½‖X − W·H‖²_F + λ Σᵢ ‖wᵢ‖₂`.
    pub objective: f64,
    /// `½‖X − W·H‖²_F`.
    pub fit: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LassoPath {
    pub points: Vec<PathPoint>,
}

impl LassoPath {
    pub fn groups(&self) -> usize {
        self.points.first().map_or(0, |p| p.group_norms.len())
    }

    /// Log-`λ` measure over which each group is active. Every grid point owns half
    /// of the log-gap to each neighbour.
    pub fn persistence(&self) -> Vec<f64> {
        let logs: Vec<f64> = self.points.iter().map(|p| p.lambda.ln()).collect();
        let s = logs.len();
        let width = |i: usize| -> f64 {
            if s == 1 {
                return 1.0;
            }
            let left = if i == 0 { 0.0 } else { logs[i - 1] - logs[i] };
            let right = if i + 1 == s { 0.0 } else { logs[i] - logs[i + 1] };
            0.5 * (left + right)
        };
        let mut out = vec![0.0; self.groups()];
        for (i, p) in self.points.iter().enumerate() {
            let wdt = width(i);
            for &g in &p.active {
                out[g] += wdt;
            }
        }
        out
    }
}

/// Accelerated projected gradient state for one problem instance.
struct Solver {
    /// `H·Hᵀ`
    q: Array2<f64>,
    /// `H·Xᵀ`, `k × n`
    bt: Array2<f64>,
    lipschitz: f64,
    half_x_sq: f64,
    lambda_max: f64,
}

struct Iterate {
    /// `Wᵀ`, one row per group.
    wt: Array2<f64>,
    t: Array1<f64>,
    /// `Q·Wᵀ`
    qwt: Array2<f64>,
}

impl Solver {
    fn new(x: &DataMatrix, h: &DataMatrix) -> Self {
        let k = h.n_rows();
        let q = Array2::from_shape_fn((k, k), |(i, j)| dot(h.row_slice(i), h.row_slice(j)));
        let lipschitz = largest_eigenvalue(&q, 50, 1e-10);
        let bt = correlations(x, h);
        let lambda_max = positive_part_norms(&bt).into_iter().fold(0.0, f64::max);
        Solver {
            q,
            bt,
            lipschitz,
            half_x_sq: 0.5 * dot(x.as_slice(), x.as_slice()),
            lambda_max,
        }
    }

    fn iterate(&self, wt: Array2<f64>, t: Array1<f64>) -> Iterate {
        let qwt = self.q.dot(&wt);
        Iterate { wt, t, qwt }
    }

    /// Smooth objective `½‖X − W·H‖² + λ Σ t` through the Gram expansion.
    fn value(&self, it: &Iterate, lambda: f64) -> f64 {
        let cross: f64 = it.wt.iter().zip(self.bt.iter()).map(|(a, b)| a * b).sum();
        let quad: f64 = it.wt.iter().zip(it.qwt.iter()).map(|(a, b)| a * b).sum();
        self.half_x_sq - cross + 0.5 * quad + lambda * it.t.sum()
    }

    /// Projected gradient step from `from` with step `1/lip`.
    fn step(&self, from: &Iterate, lambda: f64, lip: f64) -> Iterate {
        let mut wt = &from.wt - &((&from.qwt - &self.bt) / lip);
        let mut t = from.t.mapv(|ti| ti - lambda / lip);
        for (mut row, ti) in wt.axis_iter_mut(Axis(0)).zip(t.iter_mut()) {
            project_group(row.as_slice_mut().expect("standard layout"), ti);
        }
        self.iterate(wt, t)
    }

    fn solve(&self, lambda: f64, start: Array2<f64>, tol: f64, max_iter: usize) -> (Iterate, usize) {
        if lambda >= self.lambda_max {
            // zero satisfies the optimality conditions exactly; iterating could only add rounding
            let zeros = Array2::zeros(start.raw_dim());
            return (self.iterate(zeros, Array1::zeros(start.nrows())), 0);
        }
        let t0 = start.rows().into_iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let mut x = self.iterate(start, t0);
        if self.lipschitz <= 0.0 {
            return (x, 0);
        }
        let mut f_x = self.value(&x, lambda);
        let mut y = Iterate {
            wt: x.wt.clone(),
            t: x.t.clone(),
            qwt: x.qwt.clone(),
        };
        let mut lip = self.lipschitz;
        let mut t_acc = 1.0f64;
        let mut history = vec![f_x];
        let floor = 1e-13 * self.half_x_sq.max(f64::MIN_POSITIVE);
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let mut next = self.step(&y, lambda, lip);
            let mut f_next = self.value(&next, lambda);
            let slack = 1e-13 * (f_x.abs() + self.half_x_sq);
            if f_next > f_x + slack {
                t_acc = 1.0;
                loop {
                    next = self.step(&x, lambda, lip);
                    f_next = self.value(&next, lambda);
                    if f_next <= f_x + slack || lip > self.lipschitz * 1e12 {
                        break;
                    }
                    lip *= 2.0;
                }
            }
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
            let beta = (t_acc - 1.0) / t_new;
            let wt_y = &next.wt + &((&next.wt - &x.wt) * beta);
            let t_y = &next.t + &((&next.t - &x.t) * beta);
            y = self.iterate(wt_y, t_y);
            x = next;
            f_x = f_next;
            t_acc = t_new;
            history.push(f_x);
            if history.len() > STALL_WINDOW {
                let old = history[history.len() - 1 - STALL_WINDOW];
                if (old - f_x).abs() <= tol * f_x.abs().max(floor) {
                    break;
                }
            }
        }
        (x, iterations)
    }
}

fn path_point(x: &DataMatrix, h: &DataMatrix, lambda: f64, it: &Iterate, iterations: usize) -> Result<PathPoint> {
    let w = DataMatrix::new(it.wt.t().as_standard_layout().to_owned())?;
    let group_norms: Vec<f64> = it.wt.rows().into_iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let largest = group_norms.iter().cloned().fold(0.0, f64::max);
    let active = group_norms
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0 && g > ACTIVITY_THRESHOLD * largest)
        .map(|(i, _)| i)
        .collect();
    let d = x.frobenius_distance(&w.matmul(h)?)?;
    let fit = 0.5 * d * d;
    Ok(PathPoint {
        lambda,
        objective: fit + lambda * group_norms.iter().sum::<f64>(),
        fit,
        w,
        group_norms,
        active,
        iterations,
    })
}

/// Solves at a single `λ`, optionally warm-started from `warm` (`n × k`).
pub fn solve_at(
    x: &DataMatrix,
    h: &DataMatrix,
    lambda: f64,
    warm: Option<&DataMatrix>,
    tol: f64,
    max_iter: usize,
) -> Result<PathPoint> {
    check_shapes(x, h)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::arg("lambda must be finite and non-negative"));
    }
    let solver = Solver::new(x, h);
    let start = match warm {
        Some(w) if w.n_rows() == x.n_rows() && w.n_cols() == h.n_rows() => w.array().t().to_owned(),
        Some(_) => return Err(Error::Dimension("warm start has the wrong shape".into())),
        None => Array2::zeros((h.n_rows(), x.n_rows())),
    };
    let (it, iterations) = solver.solve(lambda, start, tol, max_iter);
    path_point(x, h, lambda, &it, iterations)
}

/// Regularization path over the problem's grid, each `λ` warm-started from the previous.
pub fn solve_path(prob: &GroupLassoProblem, tol: f64) -> Result<LassoPath> {
    solve_path_with(prob, tol, DEFAULT_MAX_ITER)
}

pub fn solve_path_with(prob: &GroupLassoProblem, tol: f64, max_iter: usize) -> Result<LassoPath> {
    let solver = Solver::new(&prob.x, &prob.h);
    let mut start = Array2::zeros((prob.h.n_rows(), prob.x.n_rows()));
    let mut points = Vec::with_capacity(prob.lambda_grid.len());
    for &lambda in &prob.lambda_grid {
        let (it, iterations) = solver.solve(lambda, start, tol, max_iter);
        points.push(path_point(&prob.x, &prob.h, lambda, &it, iterations)?);
        start = it.wt;
    }
    Ok(LassoPath { points })
}

/// The `k` groups active over the longest log-`λ` range. Ties go to the larger
/// group norm at the smallest `λ`, then to the lower index.
pub fn select_by_persistence(path: &LassoPath, k: usize) -> Result<Selection> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let persistence = path.persistence();
    let last_norms = path.points.last().map(|p| p.group_norms.clone()).unwrap_or_default();
    let mut order: Vec<usize> = (0..persistence.len()).collect();
    order.sort_by(|&a, &b| {
        persistence[b]
            .total_cmp(&persistence[a])
            .then(last_norms[b].total_cmp(&last_norms[a]))
            .then(a.cmp(&b))
    });
    let underfull = order.len() < k;
    order.truncate(k);
    Ok(Selection {
        indices: order,
        underfull,
    })
}
