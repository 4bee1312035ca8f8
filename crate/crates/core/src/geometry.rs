//! Geometric condition numbers of a point cloud's extreme points: normal-cone solid
//! angles, simplicial constants, the functional count they imply, and numeric
//! checks of the cap-area and angle/distance inequalities on known polytopes.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, largest_eigenvalue, norm2, sq_dist, DataMatrix};
use crate::rng::{substream, tag};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_ALPHA_TOL: f64 = 1e-12;
const MC_BLOCK: usize = 8192;

/// Monte Carlo solid angles of the normal cones at the given rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidAngles {
    pub indices: Vec<usize>,
    pub counts: Vec<u64>,
    pub samples: usize,
}

impl SolidAngles {
    pub fn omega(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.samples as f64).collect()
    }

    /// Binomial standard error per estimate.
    pub fn std_err(&self) -> Vec<f64> {
        self.omega()
            .iter()
            .map(|&w| (w * (1.0 - w) / self.samples as f64).sqrt())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.omega().iter().sum()
    }

    /// Standard error of the total, treating the estimates as independent.
    pub fn total_std_err(&self) -> f64 {
        self.std_err().iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Unique strict argmax of `z·xᵢ` over all rows, or `None` on a tie.
fn strict_argmax(x: &DataMatrix, z: &[f64]) -> Option<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    let mut tied = false;
    for i in 0..x.n_rows() {
        let v = dot(x.row_slice(i), z);
        if v > best {
            best = v;
            arg = Some(i);
            tied = false;
        } else if v == best {
            tied = true;
        }
    }
    if tied {
        None
    } else {
        arg
    }
}

/// `ω̂ᵢ` = fraction of standard normal `z` for which row `ext_indices[i]` is the strict
/// maximizer of `z·x` over every row of `x`. Ties count as misses.
pub fn estimate_solid_angles(x: &DataMatrix, ext_indices: &[usize], samples: usize, seed: u64) -> Result<SolidAngles> {
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::arg("empty matrix"));
    }
    if let Some(&bad) = ext_indices.iter().find(|&&i| i >= x.n_rows()) {
        return Err(Error::arg(format!("row index {bad} out of range for {} rows", x.n_rows())));
    }
    let blocks = samples.div_ceil(MC_BLOCK);
    let row_counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, tag::MONTE_CARLO, b as u64);
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut counts = vec![0u64; x.n_rows()];
            let mut z = vec![0.0; x.n_cols()];
            for _ in 0..len {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                if let Some(i) = strict_argmax(x, &z) {
                    counts[i] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; x.n_rows()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(s, c)| *s += c);
                a
            },
        );
    Ok(SolidAngles {
        indices: ext_indices.to_vec(),
        counts: ext_indices.iter().map(|&i| row_counts[i]).collect(),
        samples,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest point to `target` in the convex hull of the rows of `a`.
#[derive(Debug, Clone)]
pub struct HullProjection {
    /// Barycentric weights over the rows of `a`.
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
    pub distance: f64,
    /// Frank–Wolfe duality gap of `½‖target − aᵀs‖²` at `weights`.
    pub gap: f64,
    pub iterations: usize,
}

/// Accelerated projected gradient over the simplex, stopped when the Frank–Wolfe gap
/// drops below `tol`.
pub fn nearest_in_hull(target: &[f64], a: &DataMatrix, tol: f64, max_iter: usize) -> Result<HullProjection> {
    let m = a.n_rows();
    if m == 0 {
        return Err(Error::arg("empty point set"));
    }
    if a.n_cols() != target.len() {
        return Err(Error::Dimension(format!("point has {} coordinates, hull {}", target.len(), a.n_cols())));
    }
    let q = Array2::from_shape_fn((m, m), |(i, j)| dot(a.row_slice(i), a.row_slice(j)));
    let b: Vec<f64> = (0..m).map(|i| dot(a.row_slice(i), target)).collect();
    let lip = largest_eigenvalue(&q, 100, 1e-12).max(f64::MIN_POSITIVE);
    let grad = |s: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| (0..m).map(|j| q[[i, j]] * s[j]).sum::<f64>() - b[i])
            .collect()
    };
    // ½sᵀQs − bᵀs; the constant ½‖target‖² is dropped
    let value = |s: &[f64], g: &[f64]| -> f64 {
        0.5 * s.iter().zip(g).map(|(si, gi)| si * gi).sum::<f64>() - 0.5 * dot(&b, s)
    };
    let fw_gap = |s: &[f64], g: &[f64]| -> f64 {
        let smin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        dot(g, s) - smin
    };

    let mut s = vec![1.0 / m as f64; m];
    let mut g = grad(&s);
    let mut f = value(&s, &g);
    let mut y = s.clone();
    let mut t = 1.0f64;
    let mut gap = fw_gap(&s, &g);
    let mut iterations = 0;
    while gap > tol && iterations < max_iter {
        iterations += 1;
        let gy = grad(&y);
        let step: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - gi / lip).collect();
        let mut next = project_simplex(&step);
        let mut g_next = grad(&next);
        let mut f_next = value(&next, &g_next);
        if f_next > f {
            // restart from the last iterate
            t = 1.0;
            let step: Vec<f64> = s.iter().zip(&g).map(|(si, gi)| si - gi / lip).collect();
            next = project_simplex(&step);
            g_next = grad(&next);
            f_next = value(&next, &g_next);
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        y = next.iter().zip(&s).map(|(n, o)| n + beta * (n - o)).collect();
        s = next;
        g = g_next;
        f = f_next;
        t = t_new;
        gap = fw_gap(&s, &g);
    }
    let point: Vec<f64> = (0..a.n_cols())
        .map(|c| (0..m).map(|i| s[i] * a.get(i, c)).sum())
        .collect();
    Ok(HullProjection {
        distance: sq_dist(target, &point).sqrt(),
        weights: s,
        point,
        gap,
        iterations,
    })
}

/// `αᵢ`: distance from extreme point `ext_indices[i]` to the convex hull of the
/// other listed extreme points. `i` indexes into `ext_indices`.
pub fn simplicial_constant(x: &DataMatrix, ext_indices: &[usize], i: usize, tol: f64) -> Result<f64> {
    if ext_indices.len() < 2 {
        return Err(Error::arg("simplicial constant needs at least two extreme points"));
    }
    if i >= ext_indices.len() {
        return Err(Error::arg(format!("position {i} out of range for {} extreme points", ext_indices.len())));
    }
    let others: Vec<usize> = ext_indices
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &r)| r)
        .collect();
    let a = x.select_rows(&others)?;
    let target = x.select_rows(&[ext_indices[i]])?;
    Ok(nearest_in_hull(target.row_slice(0), &a, tol, 100_000)?.distance)
}

/// Functional count predicted for finding all `k` extreme points with probability
/// at least `1 − δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredM {
    pub m: usize,
    pub kappa: f64,
    pub kappa_bar: f64,
}

/// `m = ⌈κ·ln(k/δ)⌉` with `κ = 1/ln(1/maxᵢ(1 − 2ωᵢ))`.
///
/// When every `ωᵢ = ½` (a segment) one functional suffices and `m = 1`.
pub fn required_m(omega: &[f64], k: usize, delta: f64) -> Result<RequiredM> {
    if k == 0 || omega.is_empty() {
        return Err(Error::arg("need at least one extreme point"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta must lie in (0, 1), got {delta}")));
    }
    if let Some(&bad) = omega.iter().find(|&&w| !(w > 0.0 && w <= 0.5)) {
        return Err(Error::arg(format!("solid angle {bad} outside (0, 1/2]")));
    }
    let worst = omega.iter().map(|&w| 1.0 - 2.0 * w).fold(0.0, f64::max);
    if worst == 0.0 {
        return Ok(RequiredM {
            m: 1,
            kappa: 0.0,
            kappa_bar: 0.0,
        });
    }
    let kappa = 1.0 / (1.0 / worst).ln();
    let m = (kappa * (k as f64 / delta).ln()).ceil().max(1.0) as usize;
    Ok(RequiredM {
        m,
        kappa,
        kappa_bar: kappa / k as f64,
    })
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub indices: Vec<usize>,
    pub omega_hat: Vec<f64>,
    pub omega_se: Vec<f64>,
    pub alpha_hat: Vec<f64>,
    pub samples: usize,
    pub delta: f64,
    /// `None` when some `ω̂ᵢ` is zero or above one half.
    pub required: Option<RequiredM>,
}

impl GeometryReport {
    pub fn omega_total(&self) -> f64 {
        self.omega_hat.iter().sum()
    }

    pub fn omega_total_se(&self) -> f64 {
        self.omega_se.iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

pub fn geometry_report(x: &DataMatrix, ext_indices: &[usize], samples: usize, seed: u64, delta: f64) -> Result<GeometryReport> {
    let angles = estimate_solid_angles(x, ext_indices, samples, seed)?;
    let omega_hat = angles.omega();
    let alpha_hat = if ext_indices.len() >= 2 {
        (0..ext_indices.len())
            .map(|i| simplicial_constant(x, ext_indices, i, DEFAULT_ALPHA_TOL))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let required = required_m(&omega_hat, ext_indices.len(), delta).ok();
    Ok(GeometryReport {
        indices: ext_indices.to_vec(),
        omega_se: angles.std_err(),
        omega_hat,
        alpha_hat,
        samples,
        delta,
        required,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapBound {
    /// `area ≥ ½(r/2)^{p−1}` for a cap of chord radius `r`.
    Lower,
    /// `area ≤ (1 − t²)^{p/2}` for heights `t ≤ 1/√2`.
    UpperLow,
    /// `area ≤ (1/(2t))^p` for heights `t ≥ 1/√2`.
    UpperHigh,
}

#[derive(Debug, Clone)]
pub struct CapCheck {
    pub bound_kind: CapBound,
    /// Cap height; the cap is `{x ∈ S^{p−1} : ⟨x, θ⟩ ≥ t}`.
    pub height: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct CapReport {
    pub dim: usize,
    pub samples: usize,
    pub checks: Vec<CapCheck>,
}

impl CapReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Height of the cap of chord radius `r`: `1 − r²/2`.
pub fn cap_height(r: f64) -> f64 {
    1.0 - 0.5 * r * r
}

pub fn cap_lower_bound(p: usize, r: f64) -> f64 {
    0.5 * (0.5 * r).powi(p as i32 - 1)
}

pub fn cap_upper_bound(p: usize, t: f64) -> f64 {
    if t <= std::f64::consts::FRAC_1_SQRT_2 {
        (1.0 - t * t).powf(p as f64 / 2.0)
    } else {
        (0.5 / t).powi(p as i32)
    }
}

/// Normalized cap areas at every height in `heights`, estimated from one shared
/// sample of `samples` uniform points on the sphere.
pub fn estimate_cap_areas(p: usize, heights: &[f64], samples: usize, seed: u64) -> Vec<(f64, f64)> {
    // only the first coordinate of a uniform point matters
    let blocks = samples.div_ceil(MC_BLOCK);
    let firsts: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = substream(seed, tag::MONTE_CARLO, b as u64);
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut z = vec![0.0; p];
            (0..len)
                .map(|_| {
                    z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    z[0] / norm2(&z)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = samples as f64;
    heights
        .iter()
        .map(|&t| {
            let hits = firsts.iter().filter(|&&u| u >= t).count() as f64;
            let est = hits / n;
            // floor the spread at one count so that empty caps still carry uncertainty
            let spread = est.max(1.0 / n) * (1.0 - est).max(1.0 / n);
            (est, (spread / n).sqrt())
        })
        .collect()
}

/// Compares Monte Carlo cap areas with the lower bound (random chord radii in
/// `(0, 2]`) and the upper bounds (random heights in `[0, 1)`), each within 3
/// standard errors. `t = 0` and `r = 2` are always included.
pub fn check_cap_bounds(p: usize, trials: usize, samples: usize, seed: u64) -> Result<CapReport> {
    if p < 2 {
        return Err(Error::arg("cap bounds need p >= 2"));
    }
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    let mut rng = substream(seed, tag::TRIAL, p as u64);
    let mut radii = vec![2.0];
    let mut heights = vec![0.0];
    for _ in 0..trials {
        radii.push(2.0 * (1.0 - rng.gen::<f64>()));
        heights.push(rng.gen::<f64>());
    }
    let mut all: Vec<f64> = radii.iter().map(|&r| cap_height(r)).collect();
    all.extend_from_slice(&heights);
    let est = estimate_cap_areas(p, &all, samples, seed);
    let mut checks = Vec::with_capacity(all.len());
    for (j, &r) in radii.iter().enumerate() {
        let (estimate, std_err) = est[j];
        let bound = cap_lower_bound(p, r);
        checks.push(CapCheck {
            bound_kind: CapBound::Lower,
            height: cap_height(r),
            estimate,
            std_err,
            bound,
            holds: estimate + 3.0 * std_err >= bound,
        });
    }
    for (j, &t) in heights.iter().enumerate() {
        let (estimate, std_err) = est[radii.len() + j];
        let bound = cap_upper_bound(p, t);
        checks.push(CapCheck {
            bound_kind: if t <= std::f64::consts::FRAC_1_SQRT_2 {
                CapBound::UpperLow
            } else {
                CapBound::UpperHigh
            },
            height: t,
            estimate,
            std_err,
            bound,
            holds: estimate - 3.0 * std_err <= bound,
        });
    }
    Ok(CapReport { dim: p, samples, checks })
}

/// Polytope with known vertex adjacency.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub name: String,
    pub vertices: DataMatrix,
    /// Edge neighbours of each vertex.
    pub neighbors: Vec<Vec<usize>>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.vertices.n_cols()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.n_rows()
    }

    /// `k` vertices of a regular simplex in `R^{k−1}`, centred at the origin with
    /// unit circumradius.
    pub fn regular_simplex(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::arg("a simplex needs at least two vertices"));
        }
        // Helmert basis of the sum-zero hyperplane applied to e₁..e_k
        let d = k - 1;
        let mut values = vec![0.0; k * d];
        for c in 0..d {
            let len = ((c + 1) * (c + 2)) as f64;
            let a = 1.0 / len.sqrt();
            for v in 0..=c {
                values[v * d + c] = a;
            }
            values[(c + 1) * d + c] = -((c + 1) as f64) * a;
        }
        let scale = (k as f64 / (k - 1) as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(Polytope {
            name: format!("simplex{k}"),
            vertices: DataMatrix::from_vec(k, d, values)?,
            neighbors: (0..k).map(|i| (0..k).filter(|&j| j != i).collect()).collect(),
        })
    }

    /// `{0, 1}^d`.
    pub fn hypercube(d: usize) -> Result<Self> {
        if d == 0 || d > 20 {
            return Err(Error::arg("hypercube dimension must be in 1..=20"));
        }
        let n = 1usize << d;
        let values = (0..n)
            .flat_map(|v| (0..d).map(move |b| ((v >> b) & 1) as f64))
            .collect();
        Ok(Polytope {
            name: if d == 2 { "square".into() } else { format!("cube{d}") },
            vertices: DataMatrix::from_vec(n, d, values)?,
            neighbors: (0..n).map(|v| (0..d).map(|b| v ^ (1 << b)).collect()).collect(),
        })
    }

    /// Regular simplex with vertex 0 pushed out to `stretch` times its radius.
    pub fn needle(k: usize, stretch: f64) -> Result<Self> {
        if !(stretch >= 1.0 && stretch.is_finite()) {
            return Err(Error::arg("stretch must be finite and >= 1"));
        }
        let base = Self::regular_simplex(k)?;
        let mut values = base.vertices.into_array();
        values.row_mut(0).mapv_inplace(|v| v * stretch);
        Ok(Polytope {
            name: format!("needle{k}"),
            vertices: DataMatrix::new(values)?,
            neighbors: base.neighbors,
        })
    }
}

/// Distance from `point` to the affine hull of the rows of `pts`.
fn distance_to_affine_hull(point: &[f64], pts: &[&[f64]]) -> f64 {
    let origin = pts[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &pts[1..] {
        let mut d: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        for e in &basis {
            let c = dot(&d, e);
            d.iter_mut().zip(e).for_each(|(di, ei)| *di -= c * ei);
        }
        let n = norm2(&d);
        if n > 1e-12 {
            d.iter_mut().for_each(|v| *v /= n);
            basis.push(d);
        }
    }
    let mut r: Vec<f64> = point.iter().zip(origin).map(|(a, b)| a - b).collect();
    for e in &basis {
        let c = dot(&r, e);
        r.iter_mut().zip(e).for_each(|(ri, ei)| *ri -= c * ei);
    }
    norm2(&r)
}

/// Result of checking both angle/distance inequalities at one vertex.
#[derive(Debug, Clone)]
pub struct SimplicialCheck {
    pub polytope: String,
    pub vertex: usize,
    pub omega: f64,
    pub omega_se: f64,
    pub alpha: f64,
    /// Diameter of the base (hull of the neighbours).
    pub r_max: f64,
    /// Distance from the foot of `α` to the relative boundary of the base.
    pub r_min: f64,
    /// `(bound, holds)` for `α ≤ R_max·r√(1 − r²/4)/(1 − r²/2)`, `r = 2(2ω)^{1/(d−1)}`.
    pub upper_alpha: Option<(f64, bool)>,
    /// `(bound, holds)` for `ω ≤ (√(α² + r_min²)/(2 r_min))^d`.
    pub upper_omega: Option<(f64, bool)>,
    pub notes: Vec<String>,
}

/// Evaluates both inequalities at every vertex of each polytope. Vertices whose
/// neighbours do not form a simplex (more neighbours than the dimension) are skipped.
/// Monte Carlo error is allowed for with 3 standard errors in `ω̂`.
pub fn check_simplicial_bounds(polytopes: &[Polytope], samples: usize, seed: u64) -> Result<Vec<SimplicialCheck>> {
    let mut out = Vec::new();
    for (pi, poly) in polytopes.iter().enumerate() {
        let d = poly.dim();
        let all: Vec<usize> = (0..poly.n_vertices()).collect();
        let angles = estimate_solid_angles(&poly.vertices, &all, samples, seed.wrapping_add(pi as u64))?;
        let omega = angles.omega();
        let se = angles.std_err();
        for v in 0..poly.n_vertices() {
            let nb = &poly.neighbors[v];
            let mut notes = Vec::new();
            if nb.len() > d {
                notes.push("base is not a simplex; skipped".to_string());
                out.push(SimplicialCheck {
                    polytope: poly.name.clone(),
                    vertex: v,
                    omega: omega[v],
                    omega_se: se[v],
                    alpha: f64::NAN,
                    r_max: f64::NAN,
                    r_min: f64::NAN,
                    upper_alpha: None,
                    upper_omega: None,
                    notes,
                });
                continue;
            }
            let alpha = simplicial_constant(&poly.vertices, &all, v, DEFAULT_ALPHA_TOL)?;
            let base = poly.vertices.select_rows(nb)?;
            let foot = nearest_in_hull(poly.vertices.row_slice(v), &base, DEFAULT_ALPHA_TOL, 100_000)?;
            let mut r_max = 0.0f64;
            for a in 0..nb.len() {
                for b in a + 1..nb.len() {
                    r_max = r_max.max(sq_dist(base.row_slice(a), base.row_slice(b)).sqrt());
                }
            }
            let r_min = if nb.len() == 1 {
                0.0
            } else {
                (0..nb.len())
                    .map(|skip| {
                        let facet: Vec<&[f64]> = (0..nb.len()).filter(|&j| j != skip).map(|j| base.row_slice(j)).collect();
                        distance_to_affine_hull(&foot.point, &facet)
                    })
                    .fold(f64::INFINITY, f64::min)
            };

            let cone_radius = |w: f64| 2.0 * (2.0 * w).powf(1.0 / (d as f64 - 1.0));
            let upper_alpha = if d < 2 {
                notes.push("dimension 1: no cone radius".into());
                None
            } else {
                let w_hi = (omega[v] + 3.0 * se[v]).min(0.5);
                let r = cone_radius(w_hi);
                if r * r >= 2.0 {
                    notes.push(format!("cone radius {r:.4} has r^2 >= 2; alpha bound vacuous"));
                    None
                } else {
                    let bound = r_max * r * (1.0 - r * r / 4.0).sqrt() / (1.0 - r * r / 2.0);
                    Some((bound, alpha <= bound * (1.0 + 1e-9)))
                }
            };
            let upper_omega = if r_min <= 0.0 {
                notes.push("degenerate base; omega bound skipped".into());
                None
            } else if r_min * r_min / (alpha * alpha + r_min * r_min) < 0.5 - 1e-12 {
                notes.push("r_min^2/(alpha^2 + r_min^2) < 1/2; omega bound does not apply".into());
                None
            } else {
                let bound = ((alpha * alpha + r_min * r_min).sqrt() / (2.0 * r_min)).powi(d as i32);
                Some((bound, omega[v] - 3.0 * se[v] <= bound))
            };
            out.push(SimplicialCheck {
                polytope: poly.name.clone(),
                vertex: v,
                omega: omega[v],
                omega_se: se[v],
                alpha,
                r_max,
                r_min,
                upper_alpha,
                upper_omega,
                notes,
            });
        }
    }
    Ok(out)
}
