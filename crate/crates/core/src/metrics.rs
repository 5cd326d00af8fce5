//! Evaluation quantities: compression ratios, the relative squared
//! reconstruction error over labeled intervals, and the two error-bound checks.
//!
//! The relative squared error is
//! `(1/|J|) * sum_J |S - y|^2 / sum_J |y|`, with a squared numerator over an
//! absolute-value denominator. This makes the metric scale dependent; it is
//! reported alongside the plain mean squared error.
//!
//! Infinite values (no stored point in scope, or an all-zero denominator) are
//! written to JSON as `null` with a matching `*_unbounded` flag.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruct::snap_index;
use crate::series::Records;
use crate::transport::Segmentation;
use crate::TimeSeries;

/// `n / n'`, infinite when nothing is stored.
pub fn compression_ratio(points_in: usize, points_stored: usize) -> f64 {
    if points_stored == 0 {
        return f64::INFINITY;
    }
    points_in as f64 / points_stored as f64
}

/// Relative squared error over aligned slices of original and reconstructed
/// values.
///
/// Infinite when the original values are all zero but the reconstruction is
/// not.
pub fn relative_squared_error(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::LengthMismatch {
            timestamps: original.len(),
            values: reconstructed.len(),
        });
    }
    if original.is_empty() {
        return Err(Error::EmptySeries);
    }
    let squared: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(y, s)| (s - y) * (s - y))
        .sum();
    let magnitude: f64 = original.iter().map(|y| y.abs()).sum();
    if squared == 0.0 {
        return Ok(0.0);
    }
    if magnitude == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(squared / magnitude / original.len() as f64)
}

pub fn mean_squared_error(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::LengthMismatch {
            timestamps: original.len(),
            values: reconstructed.len(),
        });
    }
    if original.is_empty() {
        return Err(Error::EmptySeries);
    }
    let squared: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(y, s)| (s - y) * (s - y))
        .sum();
    Ok(squared / original.len() as f64)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Event,
    NonEvent,
}

impl LabelKind {
    fn parse(raw: &str) -> Option<Self> {
        match raw.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "event" => Some(Self::Event),
            "nonevent" => Some(Self::NonEvent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalLabel {
    pub start: f64,
    pub end: f64,
    pub kind: LabelKind,
    pub name: String,
}

/// Checks `start < end` and that no two labels overlap.
pub fn validate_labels(labels: &[IntervalLabel]) -> Result<()> {
    for label in labels {
        if !(label.start < label.end) {
            return Err(Error::InvalidLabel(format!(
                "`{}` has start {} not before end {}",
                label.name, label.start, label.end
            )));
        }
    }
    let mut order: Vec<&IntervalLabel> = labels.iter().collect();
    order.sort_by(|a, b| a.start.total_cmp(&b.start));
    for pair in order.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::OverlappingLabels {
                first: pair[0].name.clone(),
                second: pair[1].name.clone(),
            });
        }
    }
    Ok(())
}

/// Reads `start,end,kind,name` records. A non-numeric first record is taken
/// as a header.
pub fn read_labels(reader: impl Read, origin: &str) -> Result<Vec<IntervalLabel>> {
    let mut labels = Vec::new();
    for (position, record) in Records::new(reader, origin).enumerate() {
        let record = record?;
        let first = record.fields.first().map(String::as_str).unwrap_or("");
        if position == 0 && first.parse::<f64>().is_err() {
            continue;
        }
        let start = record.real(0)?;
        let end = record.real(1)?;
        let raw_kind = record
            .fields
            .get(2)
            .ok_or_else(|| record.error("expected a kind column"))?;
        let kind = LabelKind::parse(raw_kind).ok_or_else(|| {
            record.error(format!("unknown label kind `{raw_kind}`, expected event or non-event"))
        })?;
        let name = record
            .fields
            .get(3)
            .cloned()
            .unwrap_or_else(|| format!("line{}", record.line));
        labels.push(IntervalLabel {
            start,
            end,
            kind,
            name,
        });
    }
    validate_labels(&labels)?;
    Ok(labels)
}

pub fn read_labels_path(path: impl AsRef<Path>) -> Result<Vec<IntervalLabel>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels(file, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeMetrics {
    pub points: usize,
    pub stored: usize,
    pub compression_ratio: Option<f64>,
    pub compression_ratio_unbounded: bool,
    pub relative_squared_error: Option<f64>,
    pub relative_squared_error_unbounded: bool,
    pub mse: f64,
}

impl ScopeMetrics {
    fn new(original: &[f64], reconstructed: &[f64], stored: usize) -> Result<Self> {
        let cr = compression_ratio(original.len(), stored);
        let rse = relative_squared_error(original, reconstructed)?;
        Ok(Self {
            points: original.len(),
            stored,
            compression_ratio: finite(cr),
            compression_ratio_unbounded: !cr.is_finite(),
            relative_squared_error: finite(rse),
            relative_squared_error_unbounded: !rse.is_finite(),
            mse: mean_squared_error(original, reconstructed)?,
        })
    }

    /// Compression ratio with the unbounded case as infinity.
    pub fn ratio(&self) -> f64 {
        self.compression_ratio.unwrap_or(f64::INFINITY)
    }

    /// Relative squared error with the unbounded case as infinity.
    pub fn error(&self) -> f64 {
        self.relative_squared_error.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub name: String,
    pub kind: LabelKind,
    pub start: f64,
    pub end: f64,
    #[serde(flatten)]
    pub metrics: ScopeMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    /// Largest observed error.
    pub max_error: f64,
    /// Smallest `bound - error` over all checked items.
    pub worst_margin: f64,
    /// Largest `error / bound`; zero when every error is zero.
    pub max_ratio: f64,
    pub checked: usize,
    pub violations: usize,
    pub pass: bool,
}

impl BoundCheck {
    fn from_pairs(name: &str, pairs: impl Iterator<Item = (f64, f64)>, strict: bool) -> Self {
        let mut check = BoundCheck {
            name: name.to_string(),
            max_error: 0.0,
            worst_margin: f64::INFINITY,
            max_ratio: 0.0,
            checked: 0,
            violations: 0,
            pass: true,
        };
        for (error, bound) in pairs {
            check.checked += 1;
            check.max_error = check.max_error.max(error);
            check.worst_margin = check.worst_margin.min(bound - error);
            if error > 0.0 {
                check.max_ratio = check.max_ratio.max(error / bound);
            }
            let violated = if strict { error >= bound } else { error > bound };
            if violated {
                check.violations += 1;
            }
        }
        if check.checked == 0 {
            check.worst_margin = 0.0;
        }
        check.pass = check.violations == 0;
        check
    }
}

/// Checks `max |phi_rec - phi| < sum(phi) / n'`.
pub fn relevance_bound_check(
    scores: &[f64],
    reconstructed_scores: &[f64],
    n_prime: usize,
) -> Result<BoundCheck> {
    let error = crate::reconstruct::relevance_error(scores, reconstructed_scores)?;
    let bound = scores.iter().sum::<f64>() / n_prime as f64;
    let mut check = BoundCheck::from_pairs(
        "relevance_error",
        error.differences.iter().map(|&d| (d, bound)),
        true,
    );
    // an exact reconstruction of a silent series meets the bound trivially
    if bound == 0.0 && error.max == 0.0 {
        check.violations = 0;
        check.pass = true;
    }
    Ok(check)
}

/// Per-point streaming errors `|x_s - x_b|`, their bounds
/// `4 alpha |x_{k_{j+1}}|`, and errors normalized by `|x_{k_{j+1}}|`.
pub fn streaming_errors(
    streamed: &[f64],
    batch: &Segmentation,
    timestamps: &[f64],
    alpha: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    if streamed.len() != batch.points.len() {
        return Err(Error::InvalidSegmentCount {
            n_prime: streamed.len(),
            n: batch.points.len(),
        });
    }
    Ok(streamed
        .iter()
        .zip(&batch.points)
        .enumerate()
        .map(|(j, (s, b))| {
            let scale = batch.next_boundary(j, timestamps).abs();
            let error = (s - b).abs();
            let normalized = if scale > 0.0 { error / scale } else { error };
            (error, 4.0 * alpha * scale, normalized)
        })
        .collect())
}

/// Absolute slack granted to the streaming bound so that an exact (`alpha = 0`)
/// run is not failed by summation-order rounding.
pub const STREAMING_SLACK: f64 = 1e-9;

pub fn streaming_bound_check(
    streamed: &[f64],
    batch: &Segmentation,
    timestamps: &[f64],
    alpha: f64,
) -> Result<BoundCheck> {
    let errors = streaming_errors(streamed, batch, timestamps, alpha)?;
    Ok(BoundCheck::from_pairs(
        "streaming_error",
        errors
            .iter()
            .zip(&batch.points)
            .map(|(&(e, bound, _), b)| (e, bound + STREAMING_SLACK * b.abs().max(1.0))),
        false,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub global: ScopeMetrics,
    pub intervals: Vec<IntervalReport>,
    pub bounds: Vec<BoundCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Global and per-interval metrics for a reconstruction.
///
/// A stored point counts towards an interval when its snapped timestamp lies
/// in `[start, end]`. Labels that cover no sample are skipped with a warning.
pub fn evaluate(
    series: &TimeSeries,
    points: &[f64],
    reconstructed: &[f64],
    labels: &[IntervalLabel],
) -> Result<EvalReport> {
    validate_labels(labels)?;
    let x = series.timestamps();
    let y = series.values();
    let stored: Vec<f64> = points.iter().map(|&p| x[snap_index(x, p)]).collect();
    let global = ScopeMetrics::new(y, reconstructed, points.len())?;

    let mut intervals = Vec::new();
    let mut warnings = Vec::new();
    for label in labels {
        let lo = x.partition_point(|&t| t < label.start);
        let hi = x.partition_point(|&t| t <= label.end);
        if lo >= hi {
            warnings.push(format!(
                "label `{}` [{}, {}] covers no samples; skipped",
                label.name, label.start, label.end
            ));
            continue;
        }
        let count = stored
            .iter()
            .filter(|&&t| t >= label.start && t <= label.end)
            .count();
        intervals.push(IntervalReport {
            name: label.name.clone(),
            kind: label.kind,
            start: label.start,
            end: label.end,
            metrics: ScopeMetrics::new(&y[lo..hi], &reconstructed[lo..hi], count)?,
        });
    }
    Ok(EvalReport {
        global,
        intervals,
        bounds: Vec::new(),
        seed: None,
        warnings,
    })
}
