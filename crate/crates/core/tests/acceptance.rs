//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach stdout.
//! `ACCEPTANCE_ONLY=3,8` restricts the run to the listed criteria.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use archpursuit::distributed::{count_passes, distributed_weights, run_distributed, Partition};
use archpursuit::experiments::{cmd_noise, cmd_sweep, m_for_multiplier, spearman, NoiseSpec, SweepSpec};
use archpursuit::generators::{gen_noisy_pairs, gen_uniform_separable, Generator};
use archpursuit::geometry::{estimate_solid_angles, required_m, simplicial_constant, Polytope};
use archpursuit::glasso::{self, lambda_max, project_cone_orthant, select_by_persistence, solve_at, solve_path};
use archpursuit::matrix::{dot, norm2};
use archpursuit::nnls::{self, kkt_residual, nnls_fit};
use archpursuit::pursuit::{normalized_scree, pursue, PursuitConfig};
use archpursuit::rng::substream;
use archpursuit::DataMatrix;

// Criterion 1: target 0.95, binomial 2σ allowance at 200 trials.
const C1_TARGET: f64 = 0.95;
const C1_TRIALS: usize = 200;
// Criterion 2: target 0.90 with 5 percentage points of slack.
const C2_TARGET: f64 = 0.90;
const C2_SLACK: f64 = 0.05;
const C2_TRIALS: usize = 100;
// Criterion 3
const C3_DELTA: f64 = 0.05;
const C3_TRIALS: usize = 10_000;
// Criterion 4
const C4_SAMPLES: usize = 100_000;
const C4_SIGMAS: f64 = 3.0;
// Criterion 5
const C5_CLOSED_FORM_TOL: f64 = 1e-6;
const C5_GRID_TOL: f64 = 1e-3;
const C5_GRID_STEP: f64 = 1e-3;
// Criterion 6
const C6_POINTS: usize = 1000;
const C6_ORACLE_TOL: f64 = 1e-6;
const C6_CERT_TOL: f64 = 1e-9;
// Criterion 7
const C7_REL_RESIDUAL: f64 = 1e-6;
const C7_KKT: f64 = 1e-8;
const C7_MAX_ITER: usize = 5000;
// Criterion 8
const C8_PAIRS: usize = 20;
// Criterion 9
const C9_MIN_SPEARMAN: f64 = 0.95;
const C9_TRIALS: usize = 50;
// Criterion 10
const C10_REL_OBJECTIVE: f64 = 1e-4;
const C10_TRIALS: usize = 50;
const C10_MIN_RATE: f64 = 0.90;
// Criterion 11
const C11_MIN_DROP: f64 = 10.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn c1_uniform_sweep() -> Outcome {
    let spec = SweepSpec {
        ks: vec![20],
        multipliers: vec![3.0],
        trials: C1_TRIALS,
        n: 500,
        p: 1000,
        generator: Generator::Uniform,
        seed: 2024,
    };
    let cell = &cmd_sweep(&spec).expect("sweep runs").cells[0];
    let threshold = C1_TARGET - 2.0 * binomial_sigma(C1_TARGET, C1_TRIALS);
    Outcome {
        pass: cell.fraction() >= threshold,
        detail: format!("m={} recovery={:.3} ({}/{}) threshold={threshold:.3}", cell.m, cell.fraction(), cell.successes, cell.trials),
    }
}

fn c2_hilbert_sweep() -> Outcome {
    let spec = SweepSpec {
        ks: vec![20],
        multipliers: vec![12.0],
        trials: C2_TRIALS,
        n: 500,
        p: 1000,
        generator: Generator::Hilbert,
        seed: 7,
    };
    let cell = &cmd_sweep(&spec).expect("sweep runs").cells[0];
    let threshold = C2_TARGET - C2_SLACK;
    Outcome {
        pass: cell.fraction() >= threshold,
        detail: format!("m={} recovery={:.3} ({}/{}) threshold={threshold:.2}", cell.m, cell.fraction(), cell.successes, cell.trials),
    }
}

/// Square and regular simplices with their exact solid angles.
fn symmetric_polytopes() -> Vec<(String, DataMatrix, f64)> {
    let mut out = vec![("square".to_string(), Polytope::hypercube(2).unwrap().vertices, 0.25)];
    for k in [3, 5, 10] {
        out.push((format!("simplex{k}"), Polytope::regular_simplex(k).unwrap().vertices, 1.0 / k as f64));
    }
    out
}

fn c3_required_m() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let limit = C3_DELTA + 3.0 * binomial_sigma(C3_DELTA, C3_TRIALS);
    for (pi, (name, x, omega)) in symmetric_polytopes().into_iter().enumerate() {
        let k = x.n_rows();
        let m = required_m(&vec![omega; k], k, C3_DELTA).unwrap().m;
        let misses = (0..C3_TRIALS)
            .into_par_iter()
            .filter(|&t| {
                let es = pursue(&x, &PursuitConfig::new(m, ((pi as u64) << 32) | t as u64)).unwrap();
                es.indices.len() < k
            })
            .count();
        let rate = misses as f64 / C3_TRIALS as f64;
        let analytic = k as f64 * (1.0 - 2.0 * omega).powi(m as i32);
        pass &= rate <= limit;
        parts.push(format!("{name}: m={m} miss={rate:.4} bound={analytic:.4}"));
    }
    Outcome {
        pass,
        detail: format!("{} limit={limit:.4}", parts.join("; ")),
    }
}

fn c4_solid_angles() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (pi, (name, x, omega)) in symmetric_polytopes().into_iter().enumerate() {
        let all: Vec<usize> = (0..x.n_rows()).collect();
        let a = estimate_solid_angles(&x, &all, C4_SAMPLES, 100 + pi as u64).unwrap();
        let worst = a
            .omega()
            .iter()
            .zip(a.std_err())
            .map(|(w, s)| (w - omega).abs() / s)
            .fold(0.0, f64::max);
        let total_dev = (a.total() - 1.0).abs();
        let ok = worst <= C4_SIGMAS && total_dev <= C4_SIGMAS * a.total_std_err();
        pass &= ok;
        parts.push(format!("{name}: max|dev|={worst:.2}se sum={:.5}", a.total()));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Nearest distance from `target` to any segment between two of `pts`, scanning
/// each segment at a fixed parameter step. In the plane the nearest point of a
/// convex hull always lies on such a segment.
fn segment_grid_oracle(target: &[f64], pts: &[&[f64]], step: f64) -> f64 {
    let steps = (1.0 / step).round() as usize;
    let mut best = f64::INFINITY;
    for a in 0..pts.len() {
        for b in a..pts.len() {
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                let d: f64 = (0..2)
                    .map(|c| (target[c] - (t * pts[a][c] + (1.0 - t) * pts[b][c])).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
    }
    best
}

fn c5_simplicial_constant() -> Outcome {
    let basis = DataMatrix::identity(3);
    let alpha = simplicial_constant(&basis, &[0, 1, 2], 0, 1e-14).unwrap();
    let closed_dev = (alpha - 1.5f64.sqrt()).abs();
    let mut rng = substream(5, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        // 10 points on the unit circle at random angles: a convex polygon
        let mut angles: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
        angles.sort_by(|a, b| a.total_cmp(b));
        let rows: Vec<Vec<f64>> = angles.iter().map(|a| vec![a.cos(), a.sin()]).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let all: Vec<usize> = (0..10).collect();
        for i in 0..10 {
            let fast = simplicial_constant(&x, &all, i, 1e-14).unwrap();
            let others: Vec<&[f64]> = (0..10).filter(|&j| j != i).map(|j| x.row_slice(j)).collect();
            let oracle = segment_grid_oracle(x.row_slice(i), &others, C5_GRID_STEP);
            worst = worst.max((fast - oracle).abs());
        }
    }
    Outcome {
        pass: closed_dev <= C5_CLOSED_FORM_TOL && worst <= C5_GRID_TOL,
        detail: format!("basis |alpha-sqrt(3/2)|={closed_dev:.1e}; polygons max|alpha-grid|={worst:.1e}"),
    }
}

/// Second-order-cone projection through the spectral decomposition of `(v, t)`.
fn soc_spectral(v: &[f64], t: f64) -> (Vec<f64>, f64) {
    let nv = norm2(v);
    let dir: Vec<f64> = if nv > 0.0 {
        v.iter().map(|x| x / nv).collect()
    } else {
        let mut d = vec![0.0; v.len()];
        if !d.is_empty() {
            d[0] = 1.0;
        }
        d
    };
    let l1 = (t - nv).max(0.0);
    let l2 = (t + nv).max(0.0);
    let y: Vec<f64> = dir.iter().map(|d| 0.5 * (l2 - l1) * d).collect();
    (y, 0.5 * (l1 + l2))
}

/// Projection onto the cone ∩ orthant by enumerating which group coordinates are
/// zero and keeping the nearest feasible candidate.
fn cone_orthant_oracle(x: &[f64]) -> Vec<f64> {
    let q = x.len();
    let g = q - 1;
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << g) {
        let free: Vec<usize> = (0..g).filter(|&j| mask & (1 << j) == 0).collect();
        let v: Vec<f64> = free.iter().map(|&j| x[j]).collect();
        let (yv, t) = soc_spectral(&v, x[g]);
        if yv.iter().any(|&u| u < 0.0) {
            continue;
        }
        let mut y = vec![0.0; q];
        for (&j, &u) in free.iter().zip(&yv) {
            y[j] = u;
        }
        y[g] = t;
        let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best.0 {
            best = (d, y);
        }
    }
    best.1
}

/// Exhaustive search over a fine grid of the two-dimensional set.
fn q2_grid_oracle(x: &[f64]) -> Vec<f64> {
    // the set is {(v, t): 0 ≤ v ≤ t}; scan t and clamp v
    let mut best = (f64::INFINITY, vec![0.0, 0.0]);
    let hi = (x[0].abs() + x[1].abs()) * 2.0 + 1.0;
    let steps = 200_000;
    for s in 0..=steps {
        let t = hi * s as f64 / steps as f64;
        let v = x[0].clamp(0.0, t);
        let d = (x[0] - v).powi(2) + (x[1] - t).powi(2);
        if d < best.0 {
            best = (d, vec![v, t]);
        }
    }
    best.1
}

fn c6_projection() -> Outcome {
    let mut rng = substream(6, 0, 0);
    let mut oracle_dev = 0.0f64;
    let mut cert = 0.0f64;
    let mut grid_dev = 0.0f64;
    for q in [2usize, 3, 5, 10] {
        for _ in 0..C6_POINTS {
            let scale = 0.1 + 3.0 * rng.gen::<f64>();
            let x: Vec<f64> = (0..q).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            let y = project_cone_orthant(&x).unwrap();
            let o = cone_orthant_oracle(&x);
            oracle_dev = oracle_dev.max(y.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            if q == 2 {
                let gq = q2_grid_oracle(&x);
                let step = (x[0].abs() + x[1].abs()) * 2.0 + 1.0;
                // grid resolution is step/2e5; compare against that
                let dev = y.iter().zip(&gq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                grid_dev = grid_dev.max(dev / (step / 200_000.0));
            }
            // membership
            let v = &y[..q - 1];
            let t = y[q - 1];
            let member = (norm2(v) - t).max(0.0) + v.iter().map(|&u| (-u).max(0.0)).fold(0.0, f64::max);
            // residual against sampled set members
            let r: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let mut polar = 0.0f64;
            for _ in 0..50 {
                let zv: Vec<f64> = (0..q - 1).map(|_| rng.gen::<f64>()).collect();
                let mut z = zv.clone();
                z.push(norm2(&zv) + rng.gen::<f64>());
                let nz = norm2(&z);
                polar = polar.max(dot(&r, &z) / nz);
            }
            let orth = dot(&y, &r).abs();
            cert = cert.max(member).max(polar).max(orth);
        }
    }
    Outcome {
        pass: oracle_dev <= C6_ORACLE_TOL && cert <= C6_CERT_TOL && grid_dev <= 1.0,
        detail: format!(
            "max|P-oracle|={oracle_dev:.1e} max certificate violation={cert:.1e} q=2 grid dev={grid_dev:.2} cells"
        ),
    }
}

fn c7_nnls() -> Outcome {
    let mut pass = true;
    let mut worst_rel = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut worst_iter = 0;
    for (seed, k) in [(1u64, 5usize), (2, 10), (3, 20), (4, 20), (5, 40)] {
        let inst = gen_uniform_separable(500, 1000, k, seed).unwrap();
        let fit = nnls_fit(&inst.x, &inst.h, nnls::DEFAULT_TOL, C7_MAX_ITER).unwrap();
        let kkt = kkt_residual(&inst.x, &inst.h, &fit.w).unwrap();
        pass &= fit.relative_residual <= C7_REL_RESIDUAL && kkt <= C7_KKT && fit.iterations <= C7_MAX_ITER;
        worst_rel = worst_rel.max(fit.relative_residual);
        worst_kkt = worst_kkt.max(kkt);
        worst_iter = worst_iter.max(fit.iterations);
    }
    // reported for reference: the Hilbert family is too ill-conditioned for the budget
    let hil = Generator::Hilbert.generate(500, 1000, 10, 1).unwrap();
    let hfit = nnls_fit(&hil.x, &hil.h, nnls::DEFAULT_TOL, C7_MAX_ITER).unwrap();
    let hkkt = kkt_residual(&hil.x, &hil.h, &hfit.w).unwrap();
    Outcome {
        pass,
        detail: format!(
            "uniform: max rel={worst_rel:.1e} max kkt={worst_kkt:.1e} max iters={worst_iter}; \
             hilbert k=10 (not scored): rel={:.1e} kkt={hkkt:.1e} iters={}",
            hfit.relative_residual, hfit.iterations
        ),
    }
}

fn c8_distributed() -> Outcome {
    let mut rng = substream(8, 0, 0);
    let mut mismatches = 0;
    let mut bad_passes = 0;
    let mut runs = 0;
    for pair in 0..C8_PAIRS {
        let n = 1 + rng.gen_range(0..150);
        let p = 1 + rng.gen_range(0..40);
        let m = 1 + rng.gen_range(0..300);
        let seed: u64 = rng.gen();
        let x = if pair % 2 == 0 && n >= 2 && p >= 2 {
            let k = 2 + rng.gen_range(0..n.min(p) - 1);
            gen_uniform_separable(n, p, k, seed).unwrap().x
        } else {
            // Gaussian rows with some exact duplicates to exercise tie-breaking
            let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
            for i in (3..n).step_by(4) {
                rows[i] = rows[i / 2].clone();
            }
            DataMatrix::from_rows(&rows).unwrap()
        };
        let cfg = PursuitConfig::new(m, seed);
        let serial = pursue(&x, &cfg).unwrap();
        for d in [1, 2, 4, 8] {
            runs += 1;
            let part = Partition::contiguous(n, d).unwrap();
            let mut run = run_distributed(&x, &part, &cfg).unwrap();
            if run.extremes.indices != serial.indices || run.extremes.votes != serial.votes {
                mismatches += 1;
            }
            let pursuit_passes = count_passes(&run.trace);
            let h_rows: Vec<usize> = serial.indices.iter().copied().take(5).collect();
            distributed_weights(&x, &part, &h_rows, nnls::DEFAULT_TOL, 200, &mut run.trace).unwrap();
            if pursuit_passes != 1 || count_passes(&run.trace) != 2 {
                bad_passes += 1;
            }
        }
    }
    Outcome {
        pass: mismatches == 0 && bad_passes == 0,
        detail: format!("{runs} runs: {mismatches} result mismatches, {bad_passes} pass-count errors"),
    }
}

fn c9_noise_monotonicity() -> Outcome {
    let mut spec = NoiseSpec::with_defaults(20, 1000, 99);
    spec.trials = C9_TRIALS;
    let grid = cmd_noise(&spec).unwrap();
    let mut worst = f64::INFINITY;
    for &m in &spec.ms {
        let col = grid.column(m);
        let eps: Vec<f64> = col.iter().map(|c| c.0).collect();
        let res: Vec<f64> = col.iter().map(|c| c.1).collect();
        worst = worst.min(spearman(&eps, &res));
    }
    Outcome {
        pass: worst >= C9_MIN_SPEARMAN,
        detail: format!("{} m columns x {} eps, min Spearman={worst:.3}", spec.ms.len(), spec.eps.len()),
    }
}

fn c10_glasso_endpoints() -> Outcome {
    // (a) no group survives at or above lambda_max
    let mut zero_ok = true;
    for seed in 0..5 {
        let inst = gen_uniform_separable(100, 50, 6, seed).unwrap();
        let lmax = lambda_max(&inst.x, &inst.h).unwrap();
        for factor in [1.0, 1.5, 10.0] {
            let pt = solve_at(&inst.x, &inst.h, factor * lmax, None, glasso::DEFAULT_TOL, glasso::DEFAULT_MAX_ITER).unwrap();
            zero_ok &= pt.w.as_slice().iter().all(|&v| v == 0.0);
        }
    }

    // (b) smallest lambda on the default grid against the NNLS optimum, on an exact
    // instance and on a noisy one
    let exact = gen_uniform_separable(200, 200, 10, 11).unwrap();
    let noisy = gen_noisy_pairs(200, 20, 0.01, 11).unwrap();
    let mut endpoint = Vec::new();
    for (x, h) in [(exact.x.clone(), exact.h.clone()), (noisy.x.clone(), noisy.h.clone())] {
        let prob = glasso::GroupLassoProblem::with_default_grid(x.clone(), h.clone()).unwrap();
        let path = solve_path(&prob, glasso::DEFAULT_TOL).unwrap();
        let last = path.points.last().unwrap();
        let nn = nnls_fit(&x, &h, nnls::DEFAULT_TOL, nnls::DEFAULT_MAX_ITER).unwrap();
        let nobj = nnls::objective(&x, &h, &nn.w).unwrap();
        endpoint.push((last.objective, last.fit, nobj, (last.objective - nobj).abs() / nobj));
    }
    let endpoint_ok = endpoint.iter().all(|e| e.3 <= C10_REL_OBJECTIVE);
    let endpoint_text = endpoint
        .iter()
        .zip(["exact", "noisy"])
        .map(|(e, name)| format!("{name}: glasso {:.3e} (fit {:.3e}) vs nnls {:.3e}, rel gap {:.1e}", e.0, e.1, e.2, e.3))
        .collect::<Vec<_>>()
        .join(", ");

    // (c) persistence puts every true extreme above every interior candidate
    let good = (0..C10_TRIALS)
        .into_par_iter()
        .filter(|&t| {
            let inst = gen_uniform_separable(200, 200, 10, 1000 + t as u64).unwrap();
            let mut rows: Vec<usize> = (0..10).collect();
            let mut rng = substream(10, 0, t as u64);
            while rows.len() < 15 {
                let r = rng.gen_range(10..200);
                if !rows.contains(&r) {
                    rows.push(r);
                }
            }
            let h = inst.x.select_rows(&rows).unwrap();
            let prob = glasso::GroupLassoProblem::with_default_grid(inst.x.clone(), h).unwrap();
            let path = solve_path(&prob, glasso::DEFAULT_TOL).unwrap();
            let pers = path.persistence();
            let sel = select_by_persistence(&path, 10).unwrap();
            let true_min = pers[..10].iter().cloned().fold(f64::INFINITY, f64::min);
            let interior_max = pers[10..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut chosen = sel.indices.clone();
            chosen.sort_unstable();
            true_min > interior_max && chosen == (0..10).collect::<Vec<_>>()
        })
        .count();
    let rate = good as f64 / C10_TRIALS as f64;
    Outcome {
        pass: zero_ok && endpoint_ok && rate >= C10_MIN_RATE,
        detail: format!(
            "W=0 at/above lambda_max: {zero_ok}; endpoint (limit {C10_REL_OBJECTIVE:.0e}) {endpoint_text}; \
             persistence separation {good}/{C10_TRIALS}"
        ),
    }
}

fn c11_scree() -> Outcome {
    let m = m_for_multiplier(20.0, 20);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for eps in [0.0, 1e-4, 3e-4, 1e-3] {
        for seed in 0..10 {
            let inst = gen_noisy_pairs(1000, 20, eps, 500 + seed).unwrap();
            let es = pursue(&inst.x, &PursuitConfig::new(m, seed)).unwrap();
            let scree = normalized_scree(&es, inst.x.n_rows());
            let drop = if scree[20] == 0.0 { f64::INFINITY } else { scree[19] / scree[20] };
            worst = worst.min(drop);
            count += 1;
        }
    }
    Outcome {
        pass: worst >= C11_MIN_DROP,
        detail: format!("{count} instances, m={m}, min rank20/rank21 drop={worst:.1}"),
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "exact recovery, uniform", c1_uniform_sweep),
        (2, "exact recovery, hilbert", c2_hilbert_sweep),
        (3, "predicted functional count", c3_required_m),
        (4, "solid angle estimates", c4_solid_angles),
        (5, "simplicial constant", c5_simplicial_constant),
        (6, "cone-orthant projection", c6_projection),
        (7, "nnls on exact instances", c7_nnls),
        (8, "distributed equivalence", c8_distributed),
        (9, "noise monotonicity", c9_noise_monotonicity),
        (10, "group lasso endpoints", c10_glasso_endpoints),
        (11, "scree sharpness", c11_scree),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
