//! Streaming-versus-batch benchmark.
//!
//! A series is fed point by point into a [`Synopsis`]. At every checkpoint the
//! synopsis is queried and the batch segmentation is recomputed on the full
//! history with the synopsis's current `n'`. Each checkpoint records the
//! normalized segmentation error, the wall time of both paths, and the ratio
//! of their reconstruction errors.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{streaming_errors, STREAMING_SLACK};
use crate::reconstruct::{mean_squared_error, reconstruct, snap_points, ReconstructionKind};
use crate::relevance::{profile, score, RelevanceKind, RelevanceSpec};
use crate::synopsis::Synopsis;
use crate::transport::segment;
use crate::TimeSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub spec: RelevanceSpec,
    pub init_n: usize,
    pub init_n_prime: usize,
    pub alpha: f64,
    pub checkpoint_every: usize,
    pub reconstruction: ReconstructionKind,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            spec: RelevanceSpec::new(RelevanceKind::AbsMagnitude, 2).expect("valid exponent"),
            init_n: 1000,
            init_n_prime: 500,
            alpha: 0.2,
            checkpoint_every: 5000,
            reconstruction: ReconstructionKind::PiecewiseLinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub n_prime: usize,
    pub synopsis_len: usize,
    /// Mean of `|x_s - x_b| / |x_{k_{j+1}}|` over the segmentation points.
    pub mean_normalized_error: f64,
    pub max_normalized_error: f64,
    /// Largest `|x_s - x_b| / (4 alpha |x_{k_{j+1}}|)`.
    pub max_bound_ratio: f64,
    pub violations: usize,
    /// Updates since the previous checkpoint plus one query.
    pub synopsis_secs: f64,
    /// Scoring, coupling and transform over the full history.
    pub batch_secs: f64,
    pub mse_synopsis: f64,
    pub mse_batch: f64,
    pub mse_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub n: usize,
    pub final_n_prime: usize,
    pub final_synopsis_len: usize,
    pub growths: usize,
    pub checkpoints: usize,
    pub max_normalized_error: f64,
    pub violations: usize,
    pub min_mse_ratio: f64,
    pub max_mse_ratio: f64,
    pub total_secs: f64,
}

pub struct BenchRun {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
    pub synopsis: Synopsis,
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

/// Runs the benchmark. `on_row` sees each checkpoint as it is produced.
///
/// The relevance rule must be pointwise (no query window), since scores are
/// computed from each point alone as it arrives.
pub fn run(
    series: &TimeSeries,
    config: &BenchConfig,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<BenchRun> {
    let started = Instant::now();
    let init_n = config.init_n.clamp(1, series.len());
    let x = series.timestamps();
    let prefix = series.prefix(init_n).expect("prefix within range");
    let init_scores = score(&prefix, &config.spec)?;
    let mut synopsis = Synopsis::new(
        &x[..init_n],
        &init_scores,
        config.init_n_prime.clamp(1, init_n),
        config.alpha,
    )?;
    let all_scores = score(series, &config.spec)?;

    let every = config.checkpoint_every.max(1);
    let mut rows = Vec::new();
    let mut growths = 0;
    let mut pending = Duration::ZERO;
    for i in init_n..series.len() {
        let t = Instant::now();
        if synopsis.observe(x[i], all_scores[i])? {
            growths += 1;
        }
        pending += t.elapsed();
        let seen = i + 1;
        if seen % every != 0 && seen != series.len() {
            continue;
        }

        let t = Instant::now();
        let estimate = synopsis.query()?;
        let synopsis_secs = (pending + t.elapsed()).as_secs_f64();
        pending = Duration::ZERO;

        let history = series.prefix(seen).expect("prefix within range");
        let t = Instant::now();
        let batch_profile = profile(&history, &config.spec)?;
        let batch = segment(&batch_profile, history.timestamps(), estimate.n_prime, false)?;
        let batch_secs = t.elapsed().as_secs_f64();

        let errors = streaming_errors(&estimate.points, &batch, history.timestamps(), config.alpha)?;
        let mut sum = 0.0;
        let mut max_norm: f64 = 0.0;
        let mut max_bound: f64 = 0.0;
        let mut violations = 0;
        for (&(error, bound, normalized), b) in errors.iter().zip(&batch.points) {
            sum += normalized;
            max_norm = max_norm.max(normalized);
            if error > 0.0 {
                max_bound = max_bound.max(error / bound);
            }
            if error > bound + STREAMING_SLACK * b.abs().max(1.0) {
                violations += 1;
            }
        }

        let recon_s = reconstruct(
            &history,
            &snap_points(history.timestamps(), &estimate.points),
            config.reconstruction,
        )?;
        let recon_b = reconstruct(
            &history,
            &snap_points(history.timestamps(), &batch.points),
            config.reconstruction,
        )?;
        let mse_synopsis = mean_squared_error(&history, &recon_s);
        let mse_batch = mean_squared_error(&history, &recon_b);

        let row = BenchRow {
            n: seen,
            n_prime: estimate.n_prime,
            synopsis_len: synopsis.len(),
            mean_normalized_error: sum / errors.len() as f64,
            max_normalized_error: max_norm,
            max_bound_ratio: max_bound,
            violations,
            synopsis_secs,
            batch_secs,
            mse_synopsis,
            mse_batch,
            mse_ratio: ratio(mse_synopsis, mse_batch),
        };
        on_row(&row);
        rows.push(row);
    }

    let summary = BenchSummary {
        n: series.len(),
        final_n_prime: synopsis.n_prime(),
        final_synopsis_len: synopsis.len(),
        growths,
        checkpoints: rows.len(),
        max_normalized_error: rows.iter().map(|r| r.max_normalized_error).fold(0.0, f64::max),
        violations: rows.iter().map(|r| r.violations).sum(),
        min_mse_ratio: rows.iter().map(|r| r.mse_ratio).fold(f64::INFINITY, f64::min),
        max_mse_ratio: rows.iter().map(|r| r.mse_ratio).fold(f64::NEG_INFINITY, f64::max),
        total_secs: started.elapsed().as_secs_f64(),
    };
    Ok(BenchRun {
        rows,
        summary,
        synopsis,
    })
}

pub const CSV_HEADER: &str = "n,n_prime,synopsis_len,mean_normalized_error,max_normalized_error,max_bound_ratio,violations,synopsis_secs,batch_secs,mse_synopsis,mse_batch,mse_ratio";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        use crate::series::fmt_real;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.n_prime,
            self.synopsis_len,
            fmt_real(self.mean_normalized_error),
            fmt_real(self.max_normalized_error),
            fmt_real(self.max_bound_ratio),
            self.violations,
            fmt_real(self.synopsis_secs),
            fmt_real(self.batch_secs),
            fmt_real(self.mse_synopsis),
            fmt_real(self.mse_batch),
            fmt_real(self.mse_ratio),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::sin_cubed;

    #[test]
    fn exact_when_alpha_is_zero() {
        let series = sin_cubed(3000);
        let config = BenchConfig {
            init_n: 200,
            init_n_prime: 50,
            alpha: 0.0,
            checkpoint_every: 500,
            ..BenchConfig::default()
        };
        let run = run(&series, &config, |_| {}).unwrap();
        assert_eq!(run.rows.len(), 6);
        assert_eq!(run.rows.last().unwrap().n, 3000);
        for row in &run.rows {
            assert!(row.max_normalized_error < 1e-12, "{row:?}");
            assert_eq!(row.violations, 0);
            assert!((row.mse_ratio - 1.0).abs() < 1e-9);
        }
        assert_eq!(run.summary.final_n_prime, run.synopsis.n_prime());
    }
}
