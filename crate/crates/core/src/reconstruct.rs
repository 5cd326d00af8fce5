//! Piecewise aggregate approximations rebuilt from segmentation points.
//!
//! Segmentation points are first snapped to sample timestamps. Together with
//! the first and last sample they form the knots `s_0 <= s_1 <= ... <= s_{n'+1}`
//! of the reconstruction. Three kinds are supported:
//!
//! * constant: each segment takes the mean of `y[s_l..=s_{l+1}]`
//! * linear: straight line from `(x_{s_l}, y_{s_l})` to `(x_{s_{l+1}}, y_{s_{l+1}})`
//! * regression: least-squares line through the samples the segment owns
//!
//! A sample belongs to segment `l` when `s_l <= i < s_{l+1}`; the last sample
//! belongs to the last segment. Consecutive segments share their boundary
//! knot, so the linear kind is continuous.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{fmt_real, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionKind {
    PiecewiseConstant,
    PiecewiseLinear,
    PiecewiseRegression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub kind: ReconstructionKind,
    /// `S(x_i)` for every sample.
    pub sampled: Vec<f64>,
    /// Distinct knot indices, anchors included.
    pub knots: Vec<usize>,
}

impl Reconstruction {
    /// Distinct stored samples, including the two boundary anchors.
    pub fn stored_point_count(&self) -> usize {
        self.knots.len()
    }

    /// Writes `timestamp,original,reconstructed` rows under a `#` header.
    pub fn write_csv(&self, series: &TimeSeries, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# timestamp,original,reconstructed")?;
        for ((x, y), s) in series.iter().zip(&self.sampled) {
            writeln!(out, "{},{},{}", fmt_real(x), fmt_real(y), fmt_real(*s))?;
        }
        Ok(())
    }
}

/// Index of the sample nearest to `point`; ties go to the later sample.
pub fn snap_index(timestamps: &[f64], point: f64) -> usize {
    let after = timestamps.partition_point(|&x| x < point);
    if after == 0 {
        return 0;
    }
    if after == timestamps.len() {
        return timestamps.len() - 1;
    }
    let before = after - 1;
    if point - timestamps[before] < timestamps[after] - point {
        before
    } else {
        after
    }
}

/// Moves every point onto its nearest sample timestamp.
pub fn snap_points(timestamps: &[f64], points: &[f64]) -> Vec<f64> {
    points
        .iter()
        .map(|&p| timestamps[snap_index(timestamps, p)])
        .collect()
}

fn aligned_index(timestamps: &[f64], point: f64) -> Result<usize> {
    let i = timestamps.partition_point(|&x| x < point);
    match timestamps.get(i) {
        Some(&x) if x == point => Ok(i),
        _ => Err(Error::UnalignedPoint { point }),
    }
}

/// Builds the reconstruction for segmentation `points`, which must already
/// sit on sample timestamps (see [`snap_points`]).
pub fn reconstruct(
    series: &TimeSeries,
    points: &[f64],
    kind: ReconstructionKind,
) -> Result<Reconstruction> {
    let x = series.timestamps();
    let y = series.values();
    let n = series.len();

    let mut knots = Vec::with_capacity(points.len() + 2);
    knots.push(0);
    for &p in points {
        knots.push(aligned_index(x, p)?);
    }
    knots.push(n - 1);
    knots.sort_unstable();
    knots.dedup();

    if knots.len() == 1 {
        return Ok(Reconstruction {
            kind,
            sampled: y.to_vec(),
            knots,
        });
    }

    let mut sampled = vec![0.0; n];
    let segments = knots.len() - 1;
    for (l, pair) in knots.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let owned_end = if l + 1 == segments { b + 1 } else { b };
        match kind {
            ReconstructionKind::PiecewiseConstant => {
                let mean = y[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
                sampled[a..owned_end].fill(mean);
            }
            ReconstructionKind::PiecewiseLinear => {
                let slope = (y[b] - y[a]) / (x[b] - x[a]);
                for i in a..owned_end {
                    sampled[i] = if i == b { y[b] } else { y[a] + (x[i] - x[a]) * slope };
                }
            }
            ReconstructionKind::PiecewiseRegression => {
                let (intercept, slope) = least_squares(&x[a..owned_end], &y[a..owned_end]);
                for i in a..owned_end {
                    sampled[i] = intercept + slope * x[i];
                }
            }
        }
    }
    Ok(Reconstruction {
        kind,
        sampled,
        knots,
    })
}

/// Ordinary least-squares line `y = intercept + slope * x`; a single sample
/// gives a flat line through it.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Pointwise relevance differences between an original and a reconstructed
/// series.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceError {
    pub differences: Vec<f64>,
    pub max: f64,
}

/// `|phi~_i - phi_i|` for every point, plus the maximum.
///
/// Both score vectors must come from the same relevance rule over the same
/// timestamps.
pub fn relevance_error(original: &[f64], reconstructed: &[f64]) -> Result<RelevanceError> {
    if original.len() != reconstructed.len() {
        return Err(Error::LengthMismatch {
            timestamps: original.len(),
            values: reconstructed.len(),
        });
    }
    let differences: Vec<f64> = original
        .iter()
        .zip(reconstructed)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max = differences.iter().copied().fold(0.0, f64::max);
    Ok(RelevanceError { differences, max })
}

/// Mean squared difference between a series and its reconstruction.
pub fn mean_squared_error(series: &TimeSeries, recon: &Reconstruction) -> f64 {
    let y = series.values();
    y.iter()
        .zip(&recon.sampled)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y.len() as f64
}
