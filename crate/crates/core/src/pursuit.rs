//! Extreme-point identification by maximizing and minimizing random linear
//! functionals over the rows of a data matrix.
//!
//! Functional `j` of a run with seed `s` is the standard Gaussian vector on stream
//! `j` of the counter-based generator keyed by `s` (see [`crate::rng`]). Every code
//! path, serial, blocked, parallel or distributed, evaluates `⟨x_i, g_j⟩` with the
//! same kernel and breaks ties toward the lowest row index, so all of them agree
//! bit for bit.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};
use crate::rng::{derive_seed, tag, StreamKey};

/// Rows per block in the evaluation kernel.
const ROW_BLOCK: usize = 64;
/// Functionals materialized at once.
const FUNCTIONAL_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PursuitConfig {
    /// Number of random functionals (per round in the adaptive algorithm).
    pub m: usize,
    pub seed: u64,
    /// Functionals per round for [`pursue_adaptive`].
    pub batch: usize,
    /// Scale each row to unit ℓ₂ norm before pursuit.
    pub normalize_rows: bool,
}

impl PursuitConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        PursuitConfig {
            m,
            seed,
            batch: m,
            normalize_rows: false,
        }
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_normalize_rows(mut self, normalize: bool) -> Self {
        self.normalize_rows = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::arg("m must be at least 1"));
        }
        if self.batch == 0 {
            return Err(Error::arg("batch must be at least 1"));
        }
        Ok(())
    }
}

/// A block of consecutive functionals `start..start + count`, stored row-wise.
#[derive(Debug, Clone)]
pub struct Functionals {
    p: usize,
    start: usize,
    values: Vec<f64>,
}

impl Functionals {
    /// Regenerates functionals `start..start + count` of dimension `p` for `seed`.
    pub fn generate(seed: u64, start: usize, count: usize, p: usize) -> Self {
        let key_seed = derive_seed(seed, tag::FUNCTIONAL, 0);
        let mut values = vec![0.0; count * p];
        if p > 0 {
            for (j, g) in values.chunks_exact_mut(p).enumerate() {
                StreamKey::new(key_seed, (start + j) as u64).fill_gaussian(g);
            }
        }
        Functionals { p, start, values }
    }

    pub fn len(&self) -> usize {
        if self.p == 0 {
            0
        } else {
            self.values.len() / self.p
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn get(&self, j: usize) -> &[f64] {
        &self.values[j * self.p..(j + 1) * self.p]
    }
}

/// A row attaining an extreme value of one functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub index: usize,
}

/// Maximizer and minimizer of one functional over some set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalExtrema {
    pub max: Extremum,
    pub min: Extremum,
}

impl FunctionalExtrema {
    fn single(value: f64, index: usize) -> Self {
        let e = Extremum { value, index };
        FunctionalExtrema { max: e, min: e }
    }

    fn offer(&mut self, value: f64, index: usize) {
        if value > self.max.value || (value == self.max.value && index < self.max.index) {
            self.max = Extremum { value, index };
        }
        if value < self.min.value || (value == self.min.value && index < self.min.index) {
            self.min = Extremum { value, index };
        }
    }

    /// Combines extrema over two disjoint row sets; larger (smaller) value wins,
    /// equal values go to the lower row index. Associative and commutative.
    pub fn merge(self, other: Self) -> Self {
        let mut out = self;
        out.offer(other.max.value, other.max.index);
        out.offer(other.min.value, other.min.index);
        out
    }
}

/// Merges two partial results functional by functional.
pub fn merge_partials(
    a: Vec<Option<FunctionalExtrema>>,
    b: Vec<Option<FunctionalExtrema>>,
) -> Vec<Option<FunctionalExtrema>> {
    debug_assert_eq!(a.len(), b.len());
    a.into_iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some(x.merge(y)),
            (x, None) => x,
            (None, y) => y,
        })
        .collect()
}

/// Evaluates every functional on the given rows in one sweep over the rows.
///
/// `rows` yields `(global_index, row)`; each row is read exactly once. Returns
/// `None` for every functional when no rows are given.
pub fn sweep_rows<'a, I>(rows: I, g: &Functionals) -> Vec<Option<FunctionalExtrema>>
where
    I: IntoIterator<Item = (usize, &'a [f64])>,
{
    let m = g.len();
    let mut acc: Vec<Option<FunctionalExtrema>> = vec![None; m];
    let mut block: Vec<(usize, &[f64])> = Vec::with_capacity(ROW_BLOCK);
    let flush = |block: &mut Vec<(usize, &[f64])>, acc: &mut Vec<Option<FunctionalExtrema>>| {
        for (j, slot) in acc.iter_mut().enumerate() {
            let gj = g.get(j);
            for &(idx, row) in block.iter() {
                let v = dot(row, gj);
                match slot {
                    Some(fe) => fe.offer(v, idx),
                    None => *slot = Some(FunctionalExtrema::single(v, idx)),
                }
            }
        }
        block.clear();
    };
    for (idx, row) in rows {
        debug_assert_eq!(row.len(), g.dim());
        block.push((idx, row));
        if block.len() == ROW_BLOCK {
            flush(&mut block, &mut acc);
        }
    }
    if !block.is_empty() {
        flush(&mut block, &mut acc);
    }
    acc
}

/// Extrema of functionals `start..start + count` over all rows of `x`.
///
/// Parallel over row blocks; the result does not depend on the schedule.
pub fn functional_extrema(x: &DataMatrix, seed: u64, start: usize, count: usize) -> Vec<FunctionalExtrema> {
    let n = x.n_rows();
    assert!(n > 0, "functional_extrema needs at least one row");
    let mut out = Vec::with_capacity(count);
    let mut done = 0;
    while done < count {
        let chunk = (count - done).min(FUNCTIONAL_CHUNK);
        let g = Functionals::generate(seed, start + done, chunk, x.n_cols());
        let blocks: Vec<usize> = (0..n).step_by(ROW_BLOCK).collect();
        let partial = blocks
            .into_par_iter()
            .map(|b| {
                let end = (b + ROW_BLOCK).min(n);
                sweep_rows((b..end).map(|i| (i, x.row_slice(i))), &g)
            })
            .reduce(|| vec![None; chunk], merge_partials);
        out.extend(partial.into_iter().map(|fe| fe.expect("at least one row")));
        done += chunk;
    }
    out
}

/// Union of the rows found by a run, with how often each was found.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtremeSet {
    /// Distinct row indices, ascending.
    pub indices: Vec<usize>,
    /// Row index → number of max plus min hits.
    pub votes: BTreeMap<usize, u64>,
    /// Functionals evaluated.
    pub functionals: usize,
    /// Rounds run (1 for the fixed-`m` algorithm).
    pub rounds: usize,
}

impl ExtremeSet {
    pub fn from_extrema(extrema: &[FunctionalExtrema]) -> Self {
        let mut es = ExtremeSet {
            rounds: 1,
            ..Default::default()
        };
        es.add(extrema);
        es
    }

    /// Tallies more functionals; returns how many rows were new.
    fn add(&mut self, extrema: &[FunctionalExtrema]) -> usize {
        let before = self.votes.len();
        for fe in extrema {
            *self.votes.entry(fe.max.index).or_default() += 1;
            *self.votes.entry(fe.min.index).or_default() += 1;
        }
        self.functionals += extrema.len();
        self.indices = self.votes.keys().copied().collect();
        self.votes.len() - before
    }

    pub fn total_votes(&self) -> u64 {
        self.votes.values().sum()
    }

    pub fn votes_for(&self, i: usize) -> u64 {
        self.votes.get(&i).copied().unwrap_or(0)
    }

    /// `votes / (2·functionals)`, an estimate of the row's normal-cone solid angle.
    pub fn vote_fraction(&self, i: usize) -> f64 {
        if self.functionals == 0 {
            return 0.0;
        }
        self.votes_for(i) as f64 / (2 * self.functionals) as f64
    }

    pub fn contains(&self, i: usize) -> bool {
        self.votes.contains_key(&i)
    }

    pub fn as_set(&self) -> BTreeSet<usize> {
        self.indices.iter().copied().collect()
    }
}

fn prepared<'a>(x: &'a DataMatrix, cfg: &PursuitConfig) -> Result<std::borrow::Cow<'a, DataMatrix>> {
    cfg.validate()?;
    if x.n_rows() == 0 {
        return Err(Error::arg("cannot pursue extreme points of an empty matrix"));
    }
    if x.n_cols() == 0 {
        return Err(Error::arg("cannot pursue extreme points of zero-dimensional rows"));
    }
    Ok(if cfg.normalize_rows {
        std::borrow::Cow::Owned(x.normalized_rows())
    } else {
        std::borrow::Cow::Borrowed(x)
    })
}

/// Fixed-`m` pursuit: one max and one min per functional.
pub fn pursue(x: &DataMatrix, cfg: &PursuitConfig) -> Result<ExtremeSet> {
    let x = prepared(x, cfg)?;
    Ok(ExtremeSet::from_extrema(&functional_extrema(&x, cfg.seed, 0, cfg.m)))
}

/// Results of [`pursue`] for several `m` from one evaluation of the largest.
///
/// Functional `j` is the same for every `m`, so the run with `m` functionals is
/// exactly the first `m` functionals of the longest run.
pub fn pursue_prefixes(x: &DataMatrix, cfg: &PursuitConfig, ms: &[usize]) -> Result<Vec<ExtremeSet>> {
    let longest = ms.iter().copied().max().unwrap_or(0);
    let x = prepared(x, &PursuitConfig { m: longest.max(1), ..*cfg })?;
    if ms.contains(&0) {
        return Err(Error::arg("m must be at least 1"));
    }
    let extrema = functional_extrema(&x, cfg.seed, 0, longest);
    Ok(ms.iter().map(|&m| ExtremeSet::from_extrema(&extrema[..m])).collect())
}

/// Adaptive pursuit: rounds of `cfg.batch` fresh functionals until
/// `rounds_patience` consecutive rounds find no new row.
///
/// Votes from every round, including the final empty ones, are tallied.
pub fn pursue_adaptive(x: &DataMatrix, cfg: &PursuitConfig, rounds_patience: usize) -> Result<ExtremeSet> {
    if rounds_patience == 0 {
        return Err(Error::arg("rounds_patience must be at least 1"));
    }
    let x = prepared(x, cfg)?;
    let mut es = ExtremeSet::default();
    let mut quiet = 0;
    let mut round = 0;
    while quiet < rounds_patience {
        let extrema = functional_extrema(&x, cfg.seed, round * cfg.batch, cfg.batch);
        let new = es.add(&extrema);
        round += 1;
        // the first round always finds something, so it never counts as quiet
        quiet = if new == 0 { quiet + 1 } else { 0 };
    }
    es.rounds = round;
    Ok(es)
}

/// Upper confidence bound, at level `1 − alpha`, on the total solid angle of the
/// extreme points still missing after a round of `batch` functionals found nothing.
pub fn posterior_missed_mass(batch: usize, alpha: f64) -> Result<f64> {
    if batch == 0 {
        return Err(Error::arg("batch must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok((1.0 / alpha).ln() / (2.0 * batch as f64))
}

/// Indices chosen by a selection rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    /// Fewer candidates than requested were available.
    pub underfull: bool,
}

/// The `k` most-voted rows, most votes first, ties to the lower index.
pub fn select_top_voted(es: &ExtremeSet, k: usize) -> Result<Selection> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let mut ranked: Vec<(usize, u64)> = es.votes.iter().map(|(&i, &v)| (i, v)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let underfull = ranked.len() < k;
    Ok(Selection {
        indices: ranked.into_iter().take(k).map(|(i, _)| i).collect(),
        underfull,
    })
}

/// Vote counts sorted in decreasing order and divided by the largest.
pub fn normalized_scree(es: &ExtremeSet, n_rows: usize) -> Vec<f64> {
    let mut counts: Vec<u64> = (0..n_rows).map(|i| es.votes_for(i)).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let top = counts.first().copied().unwrap_or(0);
    counts
        .into_iter()
        .map(|c| if top == 0 { 0.0 } else { c as f64 / top as f64 })
        .collect()
}
