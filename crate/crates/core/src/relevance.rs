//! Per-point relevance scores and their normalization into weights.
//!
//! Four score families are supported:
//!
//! * [`RelevanceKind::AbsMagnitude`] scores `|y_i|^p`
//! * [`RelevanceKind::AbsDifference`] scores `|y_i - y_{i-1}|^p` with `y_0 = 0`
//! * [`RelevanceKind::ThresholdDifference`] scores `H(|y_i - y_{i-1}| - beta)^p`, where
//!   `H` is the Heaviside step with `H(0) = 0`
//! * [`RelevanceKind::QueryShape`] scores `||q - y_{i-g..=i+g}||^(-2p)` for a query
//!   of odd length `2g + 1`
//!
//! Query windows that run off either end of the series are clipped, and the
//! query is clipped to the same positions. Distances are floored at
//! [`MIN_QUERY_DISTANCE`] so an exact match scores finitely.

use std::collections::VecDeque;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{read_column, TimeSeries};

/// Floor applied to query distances before inversion.
pub const MIN_QUERY_DISTANCE: f64 = 1e-8;

const MAX_EXPONENT: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryShape {
    values: Vec<f64>,
}

impl QueryShape {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::InvalidQueryLength(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// `m` samples of `sin(i * pi / half_period)`, `i = 1..=m`.
    pub fn sine(len: usize, half_period: f64) -> Result<Self> {
        let values = (1..=len)
            .map(|i| (i as f64 * std::f64::consts::PI / half_period).sin())
            .collect();
        Self::new(values)
    }

    /// Loads a one-column CSV, one real per line.
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let values = read_column(BufReader::new(file), &path.display().to_string())?;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `gamma = (m - 1) / 2`.
    pub fn half_width(&self) -> usize {
        (self.values.len() - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelevanceKind {
    AbsMagnitude,
    AbsDifference,
    ThresholdDifference {
        beta: f64,
    },
    QueryShape {
        query: QueryShape,
        /// Rescale the query to each window's sample mean and standard
        /// deviation (`sigma * q + mu`) before measuring distance.
        normalize_window: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceSpec {
    kind: RelevanceKind,
    p: u32,
}

impl RelevanceSpec {
    pub fn new(kind: RelevanceKind, p: u32) -> Result<Self> {
        if !(1..=MAX_EXPONENT).contains(&p) {
            return Err(Error::InvalidExponent(p));
        }
        if let RelevanceKind::ThresholdDifference { beta } = kind {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidBeta(beta));
            }
        }
        Ok(Self { kind, p })
    }

    pub fn kind(&self) -> &RelevanceKind {
        &self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of future samples needed before a point can be scored.
    pub fn lookahead(&self) -> usize {
        match &self.kind {
            RelevanceKind::QueryShape { query, .. } => query.half_width(),
            _ => 0,
        }
    }
}

/// Scores every point of `series`.
pub fn score(series: &TimeSeries, spec: &RelevanceSpec) -> Result<Vec<f64>> {
    let y = series.values();
    let p = spec.p as i32;
    let scores = match &spec.kind {
        RelevanceKind::AbsMagnitude => y.iter().map(|v| v.abs().powi(p)).collect(),
        RelevanceKind::AbsDifference => differences(y)
            .map(|d| d.abs().powi(p))
            .collect(),
        RelevanceKind::ThresholdDifference { beta } => differences(y)
            .map(|d| step(d.abs() - beta))
            .collect(),
        RelevanceKind::QueryShape {
            query,
            normalize_window,
        } => {
            if query.len() > y.len() {
                return Err(Error::QueryTooLong {
                    query: query.len(),
                    series: y.len(),
                });
            }
            (0..y.len())
                .map(|i| query_score(y, 0, i, query, *normalize_window, spec.p))
                .collect()
        }
    };
    Ok(scores)
}

fn differences(y: &[f64]) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(0.0)
        .chain(y.iter().copied())
        .zip(y.iter().copied())
        .map(|(prev, cur)| cur - prev)
}

/// Heaviside step raised to any positive power; `H(0) = 0`.
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Query score centred on global index `center`, where `buf[k]` holds global
/// index `offset + k` and the buffer ends at the last known sample.
fn query_score(
    buf: &[f64],
    offset: usize,
    center: usize,
    query: &QueryShape,
    normalize_window: bool,
    p: u32,
) -> f64 {
    let gamma = query.half_width();
    let end = offset + buf.len() - 1;
    let lo = center.saturating_sub(gamma);
    let hi = (center + gamma).min(end);
    let window = &buf[lo - offset..=hi - offset];
    let q_lo = lo + gamma - center;
    let q = &query.values[q_lo..q_lo + window.len()];

    let (mu, sigma) = if normalize_window {
        mean_std(window)
    } else {
        (0.0, 1.0)
    };
    let dist2: f64 = q
        .iter()
        .zip(window)
        .map(|(qv, yv)| {
            let d = sigma * qv + mu - yv;
            d * d
        })
        .sum();
    inverse_square_power(dist2.sqrt().max(MIN_QUERY_DISTANCE), p)
}

/// `d^(-2p)` by repeated multiplication.
fn inverse_square_power(d: f64, p: u32) -> f64 {
    let square = d * d;
    let mut acc = 1.0;
    for _ in 0..p {
        acc *= square;
    }
    1.0 / acc
}

/// Score of a window that matches the query exactly.
pub fn peak_query_score(p: u32) -> f64 {
    inverse_square_power(MIN_QUERY_DISTANCE, p)
}

/// Sample mean and standard deviation; a zero or undefined spread maps to 1.
fn mean_std(window: &[f64]) -> (f64, f64) {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    if window.len() < 2 {
        return (mean, 1.0);
    }
    let var = window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

/// Incremental scorer for streams.
///
/// Difference and magnitude scores are emitted as soon as a sample arrives.
/// Query scores lag by the query half-width; [`StreamingScorer::finish`]
/// flushes the tail with clipped windows. The output is identical to
/// [`score`] on the full series.
#[derive(Debug, Clone)]
pub struct StreamingScorer {
    spec: RelevanceSpec,
    prev: f64,
    /// Recent `(x, y)` samples; front is global index `offset`.
    buffer: VecDeque<(f64, f64)>,
    offset: usize,
    next_center: usize,
    seen: usize,
}

impl StreamingScorer {
    pub fn new(spec: RelevanceSpec) -> Self {
        Self {
            spec,
            prev: 0.0,
            buffer: VecDeque::new(),
            offset: 0,
            next_center: 0,
            seen: 0,
        }
    }

    pub fn spec(&self) -> &RelevanceSpec {
        &self.spec
    }

    /// Feeds one sample; returns every `(timestamp, score)` that became ready.
    pub fn push(&mut self, x: f64, y: f64) -> Vec<(f64, f64)> {
        self.seen += 1;
        let p = self.spec.p as i32;
        match &self.spec.kind {
            RelevanceKind::AbsMagnitude => vec![(x, y.abs().powi(p))],
            RelevanceKind::AbsDifference => {
                let d = y - self.prev;
                self.prev = y;
                vec![(x, d.abs().powi(p))]
            }
            RelevanceKind::ThresholdDifference { beta } => {
                let d = y - self.prev;
                self.prev = y;
                vec![(x, step(d.abs() - beta))]
            }
            RelevanceKind::QueryShape { .. } => {
                self.buffer.push_back((x, y));
                let gamma = self.spec.lookahead();
                let mut ready = Vec::new();
                while self.next_center + gamma < self.seen {
                    ready.push(self.emit_query(self.next_center));
                    self.next_center += 1;
                }
                self.trim();
                ready
            }
        }
    }

    /// Flushes samples still waiting for look-ahead.
    pub fn finish(&mut self) -> Result<Vec<(f64, f64)>> {
        let RelevanceKind::QueryShape { query, .. } = &self.spec.kind else {
            return Ok(Vec::new());
        };
        if query.len() > self.seen {
            return Err(Error::QueryTooLong {
                query: query.len(),
                series: self.seen,
            });
        }
        let mut ready = Vec::new();
        while self.next_center < self.seen {
            ready.push(self.emit_query(self.next_center));
            self.next_center += 1;
        }
        Ok(ready)
    }

    fn emit_query(&self, center: usize) -> (f64, f64) {
        let RelevanceKind::QueryShape {
            query,
            normalize_window,
        } = &self.spec.kind
        else {
            unreachable!("query emission on a non-query scorer");
        };
        let values: Vec<f64> = self.buffer.iter().map(|&(_, y)| y).collect();
        let x = self.buffer[center - self.offset].0;
        let phi = query_score(
            &values,
            self.offset,
            center,
            query,
            *normalize_window,
            self.spec.p,
        );
        (x, phi)
    }

    fn trim(&mut self) {
        let gamma = self.spec.lookahead();
        let keep_from = self.next_center.saturating_sub(gamma);
        while self.offset < keep_from {
            self.buffer.pop_front();
            self.offset += 1;
        }
    }
}

/// Scores normalized into a distribution over the timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceProfile {
    scores: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
    uniform_fallback: bool,
}

impl RelevanceProfile {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// `w_i = phi_i / sum(phi)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Running weight totals; the last entry is exactly 1 and the sequence
    /// never decreases.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Sum of the raw scores.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Set when every score was zero and uniform weights were substituted.
    pub fn uniform_fallback(&self) -> bool {
        self.uniform_fallback
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Normalizes nonnegative scores into weights.
///
/// All-zero input yields uniform weights with
/// [`RelevanceProfile::uniform_fallback`] set.
pub fn normalize_weights(scores: Vec<f64>) -> Result<RelevanceProfile> {
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some((index, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidScore { index, value });
    }

    let n = scores.len();
    let mut acc = CompensatedSum::default();
    let mut running = Vec::with_capacity(n);
    for &s in &scores {
        acc.add(s);
        running.push(acc.value());
    }
    let total = acc.value();

    if !(total > 0.0) {
        let weights = vec![1.0 / n as f64; n];
        let mut cumulative: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        cumulative[n - 1] = 1.0;
        return Ok(RelevanceProfile {
            scores,
            weights,
            cumulative,
            total,
            uniform_fallback: true,
        });
    }

    let weights = scores.iter().map(|s| s / total).collect();
    let mut cumulative = Vec::with_capacity(n);
    let mut floor = 0.0_f64;
    for r in running {
        floor = floor.max((r / total).min(1.0));
        cumulative.push(floor);
    }
    cumulative[n - 1] = 1.0;
    Ok(RelevanceProfile {
        scores,
        weights,
        cumulative,
        total,
        uniform_fallback: false,
    })
}

/// Scores a series and normalizes the result.
pub fn profile(series: &TimeSeries, spec: &RelevanceSpec) -> Result<RelevanceProfile> {
    normalize_weights(score(series, spec)?)
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
