//! Simulation drivers and analysis workflows behind the command-line tool. Each
//! command returns plain data; the `write_*` helpers turn it into CSV.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::distributed::{count_passes, distributed_weights, run_distributed, Partition};
use crate::error::{Error, Result};
use crate::generators::{gen_noisy_pairs, Generator, NoisyPairs};
use crate::geometry::{geometry_report, GeometryReport};
use crate::glasso::{select_by_persistence, solve_path_with, GroupLassoProblem};
use crate::io::save_csv;
use crate::matrix::{sq_dist, DataMatrix};
use crate::nnls::{self, nnls_fit};
use crate::pursuit::{
    normalized_scree, pursue, pursue_adaptive, pursue_prefixes, select_top_voted, ExtremeSet, PursuitConfig,
};
use crate::rng::{derive_seed, tag};

/// `⌈c·k·ln k⌉`, at least 1.
pub fn m_for_multiplier(c: f64, k: usize) -> usize {
    let k = k as f64;
    ((c * k * k.ln()).ceil() as usize).max(1)
}

fn trial_seed(seed: u64, group: u64, trial: usize) -> u64 {
    derive_seed(seed, tag::TRIAL, (group << 32) | trial as u64)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub ks: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub trials: usize,
    pub n: usize,
    pub p: usize,
    pub generator: Generator,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if self.ks.is_empty() || self.multipliers.is_empty() {
            return Err(Error::arg("need at least one k and one multiplier"));
        }
        if let Some(k) = self.ks.iter().find(|&&k| k < 2) {
            return Err(Error::arg(format!("every k must be at least 2, got {k}")));
        }
        if self.multipliers.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::arg("multipliers must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryCell {
    pub k: usize,
    pub c: f64,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
}

impl RecoveryCell {
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryGrid {
    pub cells: Vec<RecoveryCell>,
}

impl RecoveryGrid {
    /// Smallest multiplier whose recovery fraction reaches `level` for this `k`.
    pub fn isocline(&self, k: usize, level: f64) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.k == k && c.fraction() >= level)
            .map(|c| c.c)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn ks(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.cells.iter().map(|c| c.k).collect();
        ks.dedup();
        ks
    }
}

/// Exact-recovery rate per `(k, c)`. Every trial draws a fresh instance; the runs
/// for different `c` on one instance share their leading functionals.
pub fn cmd_sweep(spec: &SweepSpec) -> Result<RecoveryGrid> {
    spec.validate()?;
    let mut cells = Vec::new();
    for (ki, &k) in spec.ks.iter().enumerate() {
        let ms: Vec<usize> = spec.multipliers.iter().map(|&c| m_for_multiplier(c, k)).collect();
        let hits: Vec<Vec<bool>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| -> Result<Vec<bool>> {
                let seed = trial_seed(spec.seed, ki as u64, t);
                let inst = spec.generator.generate(spec.n, spec.p, k, seed)?;
                let runs = pursue_prefixes(&inst.x, &PursuitConfig::new(1, seed), &ms)?;
                Ok(runs.iter().map(|es| es.indices == inst.true_extreme_indices).collect())
            })
            .collect::<Result<_>>()?;
        for (j, (&c, &m)) in spec.multipliers.iter().zip(&ms).enumerate() {
            cells.push(RecoveryCell {
                k,
                c,
                m,
                trials: spec.trials,
                successes: hits.iter().filter(|h| h[j]).count(),
            });
        }
    }
    Ok(RecoveryGrid { cells })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

pub fn write_recovery_csv(grid: &RecoveryGrid, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "c", "m", "trials", "successes", "fraction"])?;
    for c in &grid.cells {
        w.write_record([
            c.k.to_string(),
            c.c.to_string(),
            c.m.to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            c.fraction().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per `k`: the `m/k = ln k` reference line and the 95% isocline.
/// Missing isoclines are written as `nan`.
pub fn write_isocline_csv(grid: &RecoveryGrid, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "log_k", "isocline_c", "isocline_m_over_k"])?;
    for k in grid.ks() {
        let (c, mk) = match grid.isocline(k, 0.95) {
            Some(c) => (c, m_for_multiplier(c, k) as f64 / k as f64),
            None => (f64::NAN, f64::NAN),
        };
        w.write_record([k.to_string(), (k as f64).ln().to_string(), c.to_string(), mk.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// How rows are chosen from a pursuit result in the noise experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSelection {
    Vote,
    Glasso { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub k: usize,
    pub p: usize,
    pub ms: Vec<usize>,
    pub eps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Rows kept as archetypes.
    pub select: usize,
}

impl NoiseSpec {
    /// Defaults: `m ∈ {1, 2, 5, 10, 20}·k ln k`, ten `ε` log-spaced in `[1e-4, 1e-1]`,
    /// 50 trials, 20 selected rows.
    pub fn with_defaults(k: usize, p: usize, seed: u64) -> Self {
        NoiseSpec {
            k,
            p,
            ms: [1.0, 2.0, 5.0, 10.0, 20.0].iter().map(|&c| m_for_multiplier(c, k)).collect(),
            eps: log_space(1e-4, 1e-1, 10),
            trials: 50,
            seed,
            select: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.select == 0 {
            return Err(Error::arg("trials and select must be at least 1"));
        }
        if self.ms.is_empty() || self.eps.is_empty() {
            return Err(Error::arg("need at least one m and one epsilon"));
        }
        if self.ms.contains(&0) {
            return Err(Error::arg("m must be at least 1"));
        }
        Ok(())
    }
}

pub fn log_space(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..len)
            .map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (len - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCell {
    pub m: usize,
    pub eps: f64,
    pub mean_residual: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    pub cells: Vec<NoiseCell>,
}

impl NoiseGrid {
    /// Mean residuals for one `m`, in grid order of `ε`.
    pub fn column(&self, m: usize) -> Vec<(f64, f64)> {
        self.cells.iter().filter(|c| c.m == m).map(|c| (c.eps, c.mean_residual)).collect()
    }
}

fn choose_rows(inst: &NoisyPairs, es: &ExtremeSet, select: usize, how: NoiseSelection) -> Result<Vec<usize>> {
    match how {
        NoiseSelection::Vote => Ok(select_top_voted(es, select)?.indices),
        NoiseSelection::Glasso { tol, max_iter } => {
            if es.indices.len() <= select {
                return Ok(es.indices.clone());
            }
            let candidates = inst.x.select_rows(&es.indices)?;
            let prob = GroupLassoProblem::with_default_grid(inst.x.clone(), candidates)?;
            let path = solve_path_with(&prob, tol, max_iter)?;
            let sel = select_by_persistence(&path, select)?;
            Ok(sel.indices.into_iter().map(|g| es.indices[g]).collect())
        }
    }
}

/// `‖X − W̃·H̃‖_F / n` with `H̃ = X[rows]` and `W̃` from non-negative least squares.
pub fn selection_residual(x: &DataMatrix, rows: &[usize]) -> Result<f64> {
    let h = x.select_rows(rows)?;
    let fit = nnls_fit(x, &h, nnls::DEFAULT_TOL, nnls::DEFAULT_MAX_ITER)?;
    Ok(x.frobenius_distance(&fit.w.matmul(&h)?)? / x.n_rows() as f64)
}

fn noise_grid(spec: &NoiseSpec, how: NoiseSelection) -> Result<NoiseGrid> {
    spec.validate()?;
    // residual[t][e][j]
    let per_trial: Vec<Vec<Vec<f64>>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<Vec<f64>>> {
            let seed = trial_seed(spec.seed, 0, t);
            spec.eps
                .iter()
                .map(|&eps| {
                    let inst = gen_noisy_pairs(spec.p, spec.k, eps, seed)?;
                    let runs = pursue_prefixes(&inst.x, &PursuitConfig::new(1, seed), &spec.ms)?;
                    runs.iter()
                        .map(|es| selection_residual(&inst.x, &choose_rows(&inst, es, spec.select, how)?))
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (j, &m) in spec.ms.iter().enumerate() {
        for (e, &eps) in spec.eps.iter().enumerate() {
            let mean = per_trial.iter().map(|r| r[e][j]).sum::<f64>() / spec.trials as f64;
            cells.push(NoiseCell {
                m,
                eps,
                mean_residual: mean,
                trials: spec.trials,
            });
        }
    }
    Ok(NoiseGrid { cells })
}

/// Mean residual per `(m, ε)` with the most-voted rows as archetypes.
pub fn cmd_noise(spec: &NoiseSpec) -> Result<NoiseGrid> {
    noise_grid(spec, NoiseSelection::Vote)
}

/// As [`cmd_noise`], choosing archetypes among the pursued rows by group-lasso persistence.
pub fn cmd_glasso_noise(spec: &NoiseSpec, tol: f64, max_iter: usize) -> Result<NoiseGrid> {
    noise_grid(spec, NoiseSelection::Glasso { tol, max_iter })
}

pub fn write_noise_csv(grid: &NoiseGrid, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["m", "eps", "mean_residual", "log10_residual", "trials"])?;
    for c in &grid.cells {
        w.write_record([
            c.m.to_string(),
            c.eps.to_string(),
            c.mean_residual.to_string(),
            c.mean_residual.log10().to_string(),
            c.trials.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Spearman rank correlation; tied values share their average rank.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &o in &order[i..=j] {
                r[o] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Sorted normalized vote fractions, one row per repeat; repeat `r` uses its own
/// functionals.
pub fn cmd_scree(x: &DataMatrix, m: usize, repeats: usize, seed: u64) -> Result<DataMatrix> {
    if repeats == 0 {
        return Err(Error::arg("repeats must be at least 1"));
    }
    let rows = (0..repeats)
        .map(|r| {
            let es = pursue(x, &PursuitConfig::new(m, trial_seed(seed, 0, r)))?;
            Ok(normalized_scree(&es, x.n_rows()))
        })
        .collect::<Result<Vec<_>>>()?;
    DataMatrix::from_rows(&rows)
}

/// Nearest archetype row for every row of `x`; ties go to the lowest archetype row index.
pub fn cmd_classify(x: &DataMatrix, archetypes: &[usize]) -> Result<Vec<usize>> {
    if archetypes.is_empty() {
        return Err(Error::arg("need at least one archetype"));
    }
    if let Some(&bad) = archetypes.iter().find(|&&a| a >= x.n_rows()) {
        return Err(Error::arg(format!("archetype row {bad} out of range for {} rows", x.n_rows())));
    }
    let mut sorted = archetypes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, sorted[0]);
            for &a in &sorted {
                let d = sq_dist(x.row_slice(i), x.row_slice(a));
                if d < best.0 {
                    best = (d, a);
                }
            }
            best.1
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectRule {
    Vote,
    Glasso,
}

impl std::str::FromStr for SelectRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(SelectRule::Vote),
            "glasso" => Ok(SelectRule::Glasso),
            other => Err(Error::arg(format!("unknown selection rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorizeOptions {
    /// Functional count, or the batch size when `adaptive`.
    pub m: usize,
    pub adaptive: bool,
    pub patience: usize,
    pub select: SelectRule,
    /// Archetypes to keep; `None` keeps every row found (vote rule only).
    pub k: Option<usize>,
    pub workers: usize,
    pub normalize: bool,
    pub seed: u64,
    pub glasso_tol: f64,
    pub glasso_max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct FactorizeResult {
    /// Archetype rows, in selection order.
    pub indices: Vec<usize>,
    pub w: DataMatrix,
    pub extremes: ExtremeSet,
    pub residual: f64,
    pub relative_residual: f64,
    pub passes: usize,
    pub seconds: f64,
    /// Bytes each worker sent to the coordinator.
    pub worker_bytes: Vec<usize>,
}

/// Pursuit, selection and weights in one go. Fixed-`m` runs go through the
/// row-partitioned simulation with `workers` workers; adaptive runs are serial.
pub fn cmd_factorize(x: &DataMatrix, opts: &FactorizeOptions) -> Result<FactorizeResult> {
    let start = Instant::now();
    let cfg = PursuitConfig::new(opts.m, opts.seed)
        .with_batch(opts.m)
        .with_normalize_rows(opts.normalize);
    if opts.workers == 0 {
        return Err(Error::arg("workers must be at least 1"));
    }
    if opts.k == Some(0) {
        return Err(Error::arg("k must be at least 1"));
    }
    let part = Partition::contiguous(x.n_rows(), opts.workers)?;
    let (extremes, mut trace, pursuit_passes) = if opts.adaptive {
        let es = pursue_adaptive(x, &cfg, opts.patience)?;
        let rounds = es.rounds;
        (es, Default::default(), rounds)
    } else {
        let run = run_distributed(x, &part, &cfg)?;
        let passes = count_passes(&run.trace);
        (run.extremes, run.trace, passes)
    };
    let indices = match (opts.select, opts.k) {
        (SelectRule::Vote, Some(k)) => select_top_voted(&extremes, k)?.indices,
        (SelectRule::Vote, None) => extremes.indices.clone(),
        (SelectRule::Glasso, None) => return Err(Error::arg("group-lasso selection needs k")),
        (SelectRule::Glasso, Some(k)) => {
            if extremes.indices.len() <= k {
                extremes.indices.clone()
            } else {
                let candidates = x.select_rows(&extremes.indices)?;
                let prob = GroupLassoProblem::with_default_grid(x.clone(), candidates)?;
                let path = solve_path_with(&prob, opts.glasso_tol, opts.glasso_max_iter)?;
                select_by_persistence(&path, k)?
                    .indices
                    .into_iter()
                    .map(|g| extremes.indices[g])
                    .collect()
            }
        }
    };
    let before = trace.sweeps.len();
    let fit = distributed_weights(x, &part, &indices, nnls::DEFAULT_TOL, nnls::DEFAULT_MAX_ITER, &mut trace)?;
    let weight_trace = crate::distributed::ExecutionTrace {
        sweeps: trace.sweeps[before..].to_vec(),
        messages: Vec::new(),
    };
    let passes = pursuit_passes + count_passes(&weight_trace);
    let h = x.select_rows(&indices)?;
    let residual = x.frobenius_distance(&fit.w.matmul(&h)?)?;
    Ok(FactorizeResult {
        worker_bytes: (0..opts.workers).map(|d| trace.bytes_from(d)).collect(),
        indices,
        relative_residual: fit.relative_residual,
        w: fit.w,
        extremes,
        residual,
        passes,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Writes `indices.csv`, `W.csv`, `summary.csv` and, for more than one worker,
/// `comm.csv` into `dir`.
pub fn write_factorization(res: &FactorizeResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let idx: Vec<Vec<f64>> = res.indices.iter().map(|&i| vec![i as f64]).collect();
    let idx = if idx.is_empty() { DataMatrix::zeros(0, 1) } else { DataMatrix::from_rows(&idx)? };
    save_csv(&idx, dir.join("indices.csv"))?;
    save_csv(&res.w, dir.join("W.csv"))?;
    let path = dir.join("summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["residual", "relative_residual", "passes", "seconds", "functionals", "rounds", "k"])?;
    w.write_record([
        res.residual.to_string(),
        res.relative_residual.to_string(),
        res.passes.to_string(),
        res.seconds.to_string(),
        res.extremes.functionals.to_string(),
        res.extremes.rounds.to_string(),
        res.indices.len().to_string(),
    ])?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    if res.worker_bytes.len() > 1 {
        let path = dir.join("comm.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["worker", "bytes"])?;
        for (d, b) in res.worker_bytes.iter().enumerate() {
            w.write_record([d.to_string(), b.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Geometry diagnostics at the given rows, or at the rows found by adaptive
/// pursuit when `ext` is `None`.
pub fn cmd_diagnose(
    x: &DataMatrix,
    ext: Option<&[usize]>,
    samples: usize,
    seed: u64,
    delta: f64,
) -> Result<GeometryReport> {
    let found;
    let ext = match ext {
        Some(e) => e,
        None => {
            found = pursue_adaptive(x, &PursuitConfig::new(1000, seed), 2)?.indices;
            &found
        }
    };
    geometry_report(x, ext, samples, seed, delta)
}

pub fn write_geometry_csv(report: &GeometryReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["index", "omega", "omega_se", "alpha"])?;
    for (j, &i) in report.indices.iter().enumerate() {
        let alpha = report.alpha_hat.get(j).copied().unwrap_or(f64::NAN);
        w.write_record([
            i.to_string(),
            report.omega_hat[j].to_string(),
            report.omega_se[j].to_string(),
            alpha.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn geometry_summary_json(report: &GeometryReport) -> serde_json::Value {
    let finite = |v: f64| if v.is_finite() { serde_json::json!(v) } else { serde_json::Value::Null };
    serde_json::json!({
        "extreme_points": report.indices.len(),
        "samples": report.samples,
        "omega_total": report.omega_total(),
        "omega_total_se": report.omega_total_se(),
        "delta": report.delta,
        "kappa": report.required.map(|r| finite(r.kappa)),
        "kappa_bar": report.required.map(|r| finite(r.kappa_bar)),
        "m_required": report.required.map(|r| r.m),
    })
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(f).map_err(|e| Error::io(path, e))
}

pub fn write_labels_csv(labels: &[usize], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["row", "label"])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_uniform_separable;

    #[test]
    fn multiplier_rounding() {
        assert_eq!(m_for_multiplier(3.0, 20), 180);
        assert_eq!(m_for_multiplier(12.0, 20), 719);
        assert_eq!(m_for_multiplier(1.0, 1), 1);
    }

    #[test]
    fn sweep_is_monotone_in_c() {
        let spec = SweepSpec {
            ks: vec![5],
            multipliers: vec![0.2, 0.5, 1.0, 3.0],
            trials: 20,
            n: 40,
            p: 30,
            generator: Generator::Uniform,
            seed: 1,
        };
        let grid = cmd_sweep(&spec).unwrap();
        for pair in grid.cells.windows(2) {
            assert!(pair[1].successes >= pair[0].successes);
        }
        assert_eq!(grid.cells.last().unwrap().fraction(), 1.0);
        let iso = grid.isocline(5, 0.95).unwrap();
        assert!(grid.cells.iter().filter(|c| c.c < iso).all(|c| c.fraction() < 0.95));
    }

    #[test]
    fn sweep_rejects_small_k() {
        let spec = SweepSpec {
            ks: vec![1],
            multipliers: vec![1.0],
            trials: 1,
            n: 10,
            p: 10,
            generator: Generator::Uniform,
            seed: 0,
        };
        assert!(cmd_sweep(&spec).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_ties_go_low() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![-1.0], vec![3.0], vec![4.0]]).unwrap();
        let labels = cmd_classify(&x, &[5, 1, 4]).unwrap();
        assert_eq!(labels[1], 1);
        assert_eq!(labels[4], 4);
        assert_eq!(labels[5], 5);
        let x = DataMatrix::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![-1.0], vec![0.0], vec![1.0]]).unwrap();
        // row 0 is equidistant from rows 3 and 5
        assert_eq!(cmd_classify(&x, &[5, 3]).unwrap()[0], 3);
        assert!(cmd_classify(&x, &[]).is_err());
    }

    #[test]
    fn scree_single_row() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let s = cmd_scree(&x, 10, 3, 0).unwrap();
        assert_eq!(s.n_rows(), 3);
        assert_eq!(s.n_cols(), 1);
        assert!(s.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn factorize_exact_instance() {
        let inst = gen_uniform_separable(60, 25, 4, 2).unwrap();
        let opts = FactorizeOptions {
            m: 200,
            adaptive: false,
            patience: 2,
            select: SelectRule::Vote,
            k: Some(4),
            workers: 3,
            normalize: false,
            seed: 9,
            glasso_tol: 1e-8,
            glasso_max_iter: 5000,
        };
        let res = cmd_factorize(&inst.x, &opts).unwrap();
        let mut idx = res.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(res.relative_residual <= 1e-6);
        assert_eq!(res.passes, 2);
        assert!(res.worker_bytes.iter().all(|&b| b == 200 * 32));
    }
}
