//! In-process simulation of row-partitioned pursuit.
//!
//! Every worker regenerates the same functionals from the shared seed, sweeps its
//! local rows once, and sends one summary per functional (max value and index, min
//! value and index) to the coordinator. Summaries travel as encoded byte messages
//! so the communication volume can be inspected. The coordinator never touches
//! data rows. Fitting the weights afterwards is a second local sweep on every
//! worker, since the least-squares problem separates over rows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::nnls::{nnls_fit, relative_residual, NnlsSolution};
use crate::pursuit::{sweep_rows, Extremum, ExtremeSet, FunctionalExtrema, Functionals, PursuitConfig};

/// Bytes per functional in a worker summary: two `f64` values and two `u64` indices.
pub const SUMMARY_ENTRY_BYTES: usize = 32;

/// Assignment of global row indices to workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n_rows: usize,
    assignment: Vec<Vec<usize>>,
}

impl Partition {
    /// `workers` contiguous blocks whose sizes differ by at most one.
    pub fn contiguous(n_rows: usize, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::arg("need at least one worker"));
        }
        let base = n_rows / workers;
        let extra = n_rows % workers;
        let mut start = 0;
        let assignment = (0..workers)
            .map(|d| {
                let len = base + usize::from(d < extra);
                let rows = (start..start + len).collect();
                start += len;
                rows
            })
            .collect();
        Ok(Partition { n_rows, assignment })
    }

    /// Checks that the blocks are disjoint and cover `0..n_rows`.
    pub fn from_assignment(n_rows: usize, assignment: Vec<Vec<usize>>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::arg("need at least one worker"));
        }
        let mut owner = vec![None; n_rows];
        for (d, rows) in assignment.iter().enumerate() {
            for &i in rows {
                match owner.get_mut(i) {
                    None => return Err(Error::arg(format!("worker {d} holds row {i}, outside 0..{n_rows}"))),
                    Some(Some(prev)) => {
                        return Err(Error::arg(format!("row {i} assigned to workers {prev} and {d}")))
                    }
                    Some(slot) => *slot = Some(d),
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::arg(format!("row {i} is not assigned to any worker")));
        }
        Ok(Partition { n_rows, assignment })
    }

    pub fn workers(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn rows_of(&self, worker: usize) -> &[usize] {
        &self.assignment[worker]
    }
}

/// Per-functional extrema over one worker's rows, with global row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSummary {
    pub worker: usize,
    /// Empty when the worker holds no rows.
    pub entries: Vec<FunctionalExtrema>,
}

impl WorkerSummary {
    /// Little-endian `(max value, max index, min value, min index)` per functional.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.entries.len() * SUMMARY_ENTRY_BYTES);
        for fe in &self.entries {
            out.extend_from_slice(&fe.max.value.to_le_bytes());
            out.extend_from_slice(&(fe.max.index as u64).to_le_bytes());
            out.extend_from_slice(&fe.min.value.to_le_bytes());
            out.extend_from_slice(&(fe.min.index as u64).to_le_bytes());
        }
        out
    }

    pub fn decode(worker: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() % SUMMARY_ENTRY_BYTES != 0 {
            return Err(Error::Format(format!(
                "summary from worker {worker} has {} bytes, not a multiple of {SUMMARY_ENTRY_BYTES}",
                bytes.len()
            )));
        }
        let word = |c: &[u8], i: usize| -> [u8; 8] { c[i * 8..(i + 1) * 8].try_into().unwrap() };
        let entries = bytes
            .chunks_exact(SUMMARY_ENTRY_BYTES)
            .map(|c| FunctionalExtrema {
                max: Extremum {
                    value: f64::from_le_bytes(word(c, 0)),
                    index: u64::from_le_bytes(word(c, 1)) as usize,
                },
                min: Extremum {
                    value: f64::from_le_bytes(word(c, 2)),
                    index: u64::from_le_bytes(word(c, 3)) as usize,
                },
            })
            .collect();
        Ok(WorkerSummary { worker, entries })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Pursuit,
    Weights,
}

/// One worker's sweep over its local rows during one phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRecord {
    pub worker: usize,
    pub phase: Phase,
    pub local_rows: usize,
    pub rows_read: usize,
}

/// A message sent from a worker to the coordinator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: usize,
    pub round: usize,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub sweeps: Vec<SweepRecord>,
    pub messages: Vec<Message>,
}

impl ExecutionTrace {
    pub fn bytes_from(&self, worker: usize) -> usize {
        self.messages
            .iter()
            .filter(|m| m.from == worker)
            .map(|m| m.payload.len())
            .sum()
    }
}

/// Number of full passes over the data recorded in `trace`.
///
/// A phase counts as many passes as the largest number of times any non-empty
/// worker read its local rows during that phase.
pub fn count_passes(trace: &ExecutionTrace) -> usize {
    let mut phases: Vec<Phase> = trace.sweeps.iter().map(|s| s.phase).collect();
    phases.sort();
    phases.dedup();
    phases
        .into_iter()
        .map(|phase| {
            trace
                .sweeps
                .iter()
                .filter(|s| s.phase == phase && s.local_rows > 0)
                .map(|s| s.rows_read.div_ceil(s.local_rows))
                .max()
                .unwrap_or(0)
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub extremes: ExtremeSet,
    pub trace: ExecutionTrace,
}

/// Row-partitioned pursuit; the result equals [`crate::pursuit::pursue`] exactly.
pub fn run_distributed(x: &DataMatrix, part: &Partition, cfg: &PursuitConfig) -> Result<DistributedRun> {
    cfg.validate()?;
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::arg("cannot pursue extreme points of an empty matrix"));
    }
    if part.n_rows() != x.n_rows() {
        return Err(Error::arg(format!(
            "partition covers {} rows but X has {}",
            part.n_rows(),
            x.n_rows()
        )));
    }
    let x = if cfg.normalize_rows {
        std::borrow::Cow::Owned(x.normalized_rows())
    } else {
        std::borrow::Cow::Borrowed(x)
    };
    let x = x.as_ref();

    // each worker: regenerate functionals from the shared seed, sweep local rows once
    let outputs: Vec<(Message, SweepRecord)> = (0..part.workers())
        .into_par_iter()
        .map(|d| {
            let local = part.rows_of(d);
            let mut rows_read = 0;
            let entries = if local.is_empty() {
                Vec::new()
            } else {
                let g = Functionals::generate(cfg.seed, 0, cfg.m, x.n_cols());
                let rows = local.iter().map(|&i| {
                    rows_read += 1;
                    (i, x.row_slice(i))
                });
                sweep_rows(rows, &g)
                    .into_iter()
                    .map(|fe| fe.expect("worker has rows"))
                    .collect()
            };
            let summary = WorkerSummary { worker: d, entries };
            let message = Message {
                from: d,
                round: 0,
                payload: summary.encode(),
            };
            let record = SweepRecord {
                worker: d,
                phase: Phase::Pursuit,
                local_rows: local.len(),
                rows_read,
            };
            (message, record)
        })
        .collect();

    let mut trace = ExecutionTrace::default();
    let mut merged: Option<Vec<FunctionalExtrema>> = None;
    for (message, record) in outputs {
        let summary = WorkerSummary::decode(message.from, &message.payload)?;
        if !summary.entries.is_empty() {
            merged = Some(match merged {
                None => summary.entries,
                Some(acc) => acc.into_iter().zip(summary.entries).map(|(a, b)| a.merge(b)).collect(),
            });
        }
        trace.messages.push(message);
        trace.sweeps.push(record);
    }
    let merged = merged.expect("some worker holds rows");
    Ok(DistributedRun {
        extremes: ExtremeSet::from_extrema(&merged),
        trace,
    })
}

/// Fits `W ≥ 0` for `X ≈ W·X[h_rows]`, each worker solving for its own rows.
///
/// Appends one weights-phase sweep per worker to `trace`.
pub fn distributed_weights(
    x: &DataMatrix,
    part: &Partition,
    h_rows: &[usize],
    tol: f64,
    max_iter: usize,
    trace: &mut ExecutionTrace,
) -> Result<NnlsSolution> {
    if h_rows.is_empty() {
        return Err(Error::arg("need at least one archetype row"));
    }
    if part.n_rows() != x.n_rows() {
        return Err(Error::arg(format!(
            "partition covers {} rows but X has {}",
            part.n_rows(),
            x.n_rows()
        )));
    }
    // archetype rows are broadcast from their owners; k rows, not a pass
    let h = x.select_rows(h_rows)?;
    let k = h.n_rows();
    let locals: Vec<Result<(Option<NnlsSolution>, SweepRecord)>> = (0..part.workers())
        .into_par_iter()
        .map(|d| {
            let local = part.rows_of(d);
            let record = SweepRecord {
                worker: d,
                phase: Phase::Weights,
                local_rows: local.len(),
                rows_read: local.len(),
            };
            if local.is_empty() {
                return Ok((None, record));
            }
            let xd = x.select_rows(local)?;
            let sol = nnls_fit(&xd, &h, tol, max_iter).map_err(|e| Error::Worker {
                worker: d,
                source: Box::new(e),
            })?;
            Ok((Some(sol), record))
        })
        .collect();

    let mut values = vec![0.0; x.n_rows() * k];
    let mut iterations = 0;
    let mut converged = true;
    let mut zero_archetypes = Vec::new();
    for (d, local) in locals.into_iter().enumerate() {
        let (sol, record) = local?;
        trace.sweeps.push(record);
        if let Some(sol) = sol {
            for (r, &i) in part.rows_of(d).iter().enumerate() {
                values[i * k..(i + 1) * k].copy_from_slice(sol.w.row_slice(r));
            }
            iterations = iterations.max(sol.iterations);
            converged &= sol.converged;
            zero_archetypes = sol.zero_archetypes;
        }
    }
    let w = DataMatrix::from_vec(x.n_rows(), k, values)?;
    let relative_residual = relative_residual(x, &h, &w)?;
    Ok(NnlsSolution {
        w,
        relative_residual,
        iterations,
        converged,
        zero_archetypes,
    })
}
