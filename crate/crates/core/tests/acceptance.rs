//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr,
//! bypassing output capture, and then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relcomp::bench::{self, BenchConfig, BenchRun};
use relcomp::cli::{default_query, DEFAULT_EVAL_RATIO};
use relcomp::metrics::{evaluate, LabelKind};
use relcomp::reconstruct::{reconstruct, snap_points, ReconstructionKind};
use relcomp::relevance::{normalize_weights, profile, score, RelevanceKind, RelevanceSpec};
use relcomp::sim::{event_stream, sin_cubed, EventStreamConfig};
use relcomp::synopsis::Synopsis;
use relcomp::transport::{optimal_coupling, segment, segmentation_points};
use relcomp::TimeSeries;

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    // straight to the handle so the line shows even when output is captured
    let _ = writeln!(std::io::stderr().lock(), "[{tag}] {id}. {name}: {detail}");
}

fn increasing_timestamps(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = rng.gen_range(-5.0..5.0);
    (0..n)
        .map(|_| {
            x += rng.gen_range(0.1..2.0);
            x
        })
        .collect()
}

/// Nonnegative scores with a share of exact zeros and occasional spikes.
fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0..=1 => 0.0,
            2 => rng.gen_range(10.0..100.0),
            _ => rng.gen_range(0.0..1.0),
        })
        .collect()
}

#[test]
fn criterion_1_coupling_marginals_and_sparsity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut worst_row: f64 = 0.0;
    let mut worst_col: f64 = 0.0;
    let mut sparse_violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=200);
        let n_prime = rng.gen_range(1..=n.min(50));
        let profile = normalize_weights(random_scores(&mut rng, n)).unwrap();
        let c = optimal_coupling(&profile, n_prime).unwrap();
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n_prime];
        for e in c.entries() {
            rows[e.source] += e.mass;
            cols[e.target] += e.mass;
        }
        for (r, w) in rows.iter().zip(profile.weights()) {
            worst_row = worst_row.max((r - w).abs());
        }
        for col in &cols {
            worst_col = worst_col.max((col - 1.0 / n_prime as f64).abs());
        }
        if c.entries().len() > n + n_prime + 1 {
            sparse_violations += 1;
        }
    }
    let elapsed = started.elapsed();
    let pass = worst_row <= 1e-12
        && worst_col <= 1e-12
        && sparse_violations == 0
        && elapsed < Duration::from_secs(5);
    verdict(
        1,
        "coupling correctness",
        pass,
        format!(
            "max row error {worst_row:.2e}, max column error {worst_col:.2e}, \
             {sparse_violations} sparsity violations, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

/// Minimum transport cost over every coupling whose masses are multiples of
/// `1 / total`, with the targets recomputed from each coupling.
fn brute_force_min_cost(units: &[usize], columns: usize, per_column: usize, x: &[f64]) -> f64 {
    let total = (columns * per_column) as f64;
    let mut table = vec![vec![0usize; columns]; units.len()];
    let mut remaining = vec![per_column; columns];
    let mut best = f64::INFINITY;

    fn cost(table: &[Vec<usize>], x: &[f64], total: f64, columns: usize) -> f64 {
        let mut sum = 0.0;
        for j in 0..columns {
            let target: f64 = table
                .iter()
                .zip(x)
                .map(|(row, xi)| row[j] as f64 / total * columns as f64 * xi)
                .sum();
            for (row, xi) in table.iter().zip(x) {
                let m = row[j] as f64 / total;
                sum += m * (xi - target) * (xi - target);
            }
        }
        sum
    }

    #[allow(clippy::too_many_arguments)]
    fn fill(
        i: usize,
        j: usize,
        left: usize,
        units: &[usize],
        table: &mut Vec<Vec<usize>>,
        remaining: &mut Vec<usize>,
        x: &[f64],
        total: f64,
        best: &mut f64,
    ) {
        let columns = remaining.len();
        if i == units.len() {
            *best = best.min(cost(table, x, total, columns));
            return;
        }
        if j + 1 == columns {
            if left <= remaining[j] {
                table[i][j] = left;
                remaining[j] -= left;
                let next = units.get(i + 1).copied().unwrap_or(0);
                fill(i + 1, 0, next, units, table, remaining, x, total, best);
                remaining[j] += left;
                table[i][j] = 0;
            }
            return;
        }
        for take in 0..=left.min(remaining[j]) {
            table[i][j] = take;
            remaining[j] -= take;
            fill(i, j + 1, left - take, units, table, remaining, x, total, best);
            remaining[j] += take;
        }
        table[i][j] = 0;
    }

    fill(0, 0, units[0], units, &mut table, &mut remaining, x, total, &mut best);
    best
}

#[test]
fn brute_force_oracle_on_worked_example() {
    // weights (0, 3/7, 3/7, 1/7) on a grid of 1/14 with two columns of 7 units
    let best = brute_force_min_cost(&[0, 6, 6, 2], 2, 7, &[1.0, 2.0, 3.0, 4.0]);
    assert!((best - 8.0 / 49.0).abs() < 1e-12, "{best}");
}

#[test]
fn criterion_2_optimality_against_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let started = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let n_prime = rng.gen_range(1..=n.min(4));
        let per_column = (12 / n_prime).max(1);
        let total = n_prime * per_column;
        // random composition of `total` into n nonnegative parts
        let mut cuts: Vec<usize> = (0..n - 1).map(|_| rng.gen_range(0..=total)).collect();
        cuts.sort_unstable();
        let mut units = Vec::with_capacity(n);
        let mut prev = 0;
        for c in cuts.iter().chain(std::iter::once(&total)) {
            units.push(c - prev);
            prev = *c;
        }
        let x = increasing_timestamps(&mut rng, n);

        let profile = normalize_weights(units.iter().map(|&u| u as f64).collect()).unwrap();
        let coupling = optimal_coupling(&profile, n_prime).unwrap();
        let mut sums = vec![0.0; n_prime];
        for e in coupling.entries() {
            sums[e.target] += e.mass * x[e.source];
        }
        let targets: Vec<f64> = sums.iter().map(|s| s * n_prime as f64).collect();
        let nw_cost: f64 = coupling
            .entries()
            .iter()
            .map(|e| e.mass * (x[e.source] - targets[e.target]).powi(2))
            .sum();

        let best = brute_force_min_cost(&units, n_prime, per_column, &x);
        worst_gap = worst_gap.max(nw_cost - best);
    }
    let elapsed = started.elapsed();
    let pass = worst_gap <= 1e-9 && elapsed < Duration::from_secs(30);
    verdict(
        2,
        "optimality oracle",
        pass,
        format!("largest excess over brute force {worst_gap:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_points_inside_guaranteed_intervals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let started = Instant::now();
    let mut outside = 0;
    let mut raw_outside = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=200);
        let n_prime = rng.gen_range(1..=n.min(50));
        let x = increasing_timestamps(&mut rng, n);
        let profile = normalize_weights(random_scores(&mut rng, n)).unwrap();
        let coupling = optimal_coupling(&profile, n_prime).unwrap();
        let seg = segmentation_points(&coupling, &x, false).unwrap();

        let mut raw = vec![0.0; n_prime];
        for e in coupling.entries() {
            raw[e.target] += e.mass * n_prime as f64 * x[e.source];
        }
        for (j, &(lo, hi)) in seg.intervals.iter().enumerate() {
            let p = seg.points[j];
            if p < lo || p > hi {
                outside += 1;
            }
            let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
            if raw[j] < lo - slack || raw[j] > hi + slack {
                raw_outside += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = outside == 0 && raw_outside == 0 && elapsed < Duration::from_secs(5);
    verdict(
        3,
        "interval guarantee",
        pass,
        format!(
            "{outside} points outside, {raw_outside} unclamped transforms outside by more than \
             1e-12 relative, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

/// Sum of three random sinusoids with periods of at least 20 samples plus an
/// offset.
fn smooth_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let offset = rng.gen_range(-1.0..1.0);
    let waves: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.1..1.0),
                rng.gen_range(20.0..200.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    (0..n)
        .map(|i| {
            offset
                + waves
                    .iter()
                    .map(|(a, period, phase)| a * (std::f64::consts::TAU * i as f64 / period + phase).sin())
                    .sum::<f64>()
        })
        .collect()
}

#[test]
fn criterion_4_relevance_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let started = Instant::now();
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(10..=500);
        let n_prime = rng.gen_range(1..=(n / 4).max(1));
        let p = rng.gen_range(1..=3);
        let spec = RelevanceSpec::new(RelevanceKind::AbsMagnitude, p).unwrap();
        let series = TimeSeries::indexed(smooth_series(&mut rng, n)).unwrap();
        let prof = profile(&series, &spec).unwrap();
        let seg = segment(&prof, series.timestamps(), n_prime, false).unwrap();
        let recon = reconstruct(
            &series,
            &snap_points(series.timestamps(), &seg.points),
            ReconstructionKind::PiecewiseLinear,
        )
        .unwrap();
        let rebuilt = TimeSeries::indexed(recon.sampled).unwrap();
        let phi = prof.scores();
        let phi_rec = score(&rebuilt, &spec).unwrap();
        let bound = phi.iter().sum::<f64>() / n_prime as f64;
        let max = phi
            .iter()
            .zip(&phi_rec)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if max > 0.0 {
            worst_ratio = worst_ratio.max(max / bound);
        }
        if max >= bound && max > 0.0 {
            violations += 1;
        }
    }
    let elapsed = started.elapsed();
    let pass = violations == 0 && elapsed < Duration::from_secs(30);
    verdict(
        4,
        "relevance-error bound",
        pass,
        format!(
            "{violations} violations, largest error / bound {worst_ratio:.3}, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_exact_streaming_at_zero_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checkpoints = 0;
    for stream in 0..50 {
        let n = 2000;
        let x = increasing_timestamps(&mut rng, n);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let kind = if stream % 2 == 0 {
            RelevanceKind::AbsDifference
        } else {
            RelevanceKind::AbsMagnitude
        };
        let spec = RelevanceSpec::new(kind, rng.gen_range(1..=2)).unwrap();
        let series = TimeSeries::new(x.clone(), y).unwrap();
        let phi = score(&series, &spec).unwrap();

        let init = 100;
        let mut synopsis = Synopsis::new(&x[..init], &phi[..init], rng.gen_range(1..=20), 0.0).unwrap();
        for i in init..n {
            synopsis.observe(x[i], phi[i]).unwrap();
            if (i + 1) % 100 != 0 {
                continue;
            }
            checkpoints += 1;
            let estimate = synopsis.query().unwrap();
            let history = normalize_weights(phi[..=i].to_vec()).unwrap();
            let batch = segment(&history, &x[..=i], estimate.n_prime, false).unwrap();
            for (a, b) in estimate.points.iter().zip(&batch.points) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(60);
    verdict(
        5,
        "streaming exactness at alpha = 0",
        pass,
        format!("{checkpoints} checkpoints, max |streamed - batch| {worst:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_6_streaming_error_bound() {
    let started = Instant::now();
    let config = BenchConfig {
        checkpoint_every: 500,
        ..BenchConfig::default()
    };
    let run = bench::run(&sin_cubed(50_000), &config, |_| {}).unwrap();
    let elapsed = started.elapsed();
    let pass = run.summary.violations == 0 && elapsed < Duration::from_secs(120);
    let worst_ratio = run.rows.iter().map(|r| r.max_bound_ratio).fold(0.0, f64::max);
    verdict(
        6,
        "streaming error bound",
        pass,
        format!(
            "{} checkpoints, {} violations, largest error / bound {worst_ratio:.4}, \
             max normalized error {:.4} (limit 0.8), {elapsed:.2?}",
            run.summary.checkpoints, run.summary.violations, run.summary.max_normalized_error
        ),
    );
    assert!(pass);
}

/// The full-length benchmark, shared by the reproduction and speedup
/// criteria.
fn full_run() -> &'static (BenchRun, Duration) {
    static RUN: OnceLock<(BenchRun, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let started = Instant::now();
        let run = bench::run(&sin_cubed(500_000), &BenchConfig::default(), |_| {}).unwrap();
        (run, started.elapsed())
    })
}

#[test]
fn criterion_7_benchmark_reproduction() {
    let (run, elapsed) = full_run();
    let final_n_prime = run.summary.final_n_prime as f64;
    let count_ok = (final_n_prime - 984.0).abs() <= 0.1 * 984.0;
    let ratio_ok = run.summary.min_mse_ratio >= 0.8 && run.summary.max_mse_ratio <= 1.25;
    let time_ok = *elapsed < Duration::from_secs(600);
    let pass = count_ok && ratio_ok && time_ok;
    verdict(
        7,
        "benchmark reproduction",
        pass,
        format!(
            "final n' {} (target 984 +/- 10%: {}), reconstruction-error ratio in [{:.3}, {:.3}] \
             (target [0.8, 1.25]: {}), {elapsed:.2?}",
            run.summary.final_n_prime,
            if count_ok { "ok" } else { "missed" },
            run.summary.min_mse_ratio,
            run.summary.max_mse_ratio,
            if ratio_ok { "ok" } else { "missed" },
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_streaming_speedup() {
    let (run, _) = full_run();
    let late: Vec<_> = run.rows.iter().filter(|r| r.n >= 100_000).collect();
    let synopsis: f64 = late.iter().map(|r| r.synopsis_secs).sum();
    let batch: f64 = late.iter().map(|r| r.batch_secs).sum();
    let speedup = batch / synopsis;
    let pass = !late.is_empty() && speedup >= 10.0;
    verdict(
        8,
        "streaming speedup",
        pass,
        format!(
            "over {} checkpoints past 1e5 points: batch {batch:.3} s, synopsis {synopsis:.3} s, \
             speedup {speedup:.3}x (target >= 10x)",
            late.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_event_ordering() {
    let stream = event_stream(&EventStreamConfig::default(), 1);
    let spec = RelevanceSpec::new(
        RelevanceKind::QueryShape {
            query: default_query().unwrap(),
            normalize_window: false,
        },
        1,
    )
    .unwrap();
    let n_prime = (stream.series.len() as f64 / DEFAULT_EVAL_RATIO).floor() as usize;
    let prof = profile(&stream.series, &spec).unwrap();
    let seg = segment(&prof, stream.series.timestamps(), n_prime, false).unwrap();
    let recon = reconstruct(
        &stream.series,
        &snap_points(stream.series.timestamps(), &seg.points),
        ReconstructionKind::PiecewiseLinear,
    )
    .unwrap();
    let report = evaluate(&stream.series, &seg.points, &recon.sampled, &stream.labels).unwrap();

    let (events, background): (Vec<_>, Vec<_>) = report
        .intervals
        .iter()
        .partition(|r| r.kind == LabelKind::Event);
    let max_event_ratio = events.iter().map(|r| r.metrics.ratio()).fold(0.0, f64::max);
    let min_background_ratio = background
        .iter()
        .map(|r| r.metrics.ratio())
        .fold(f64::INFINITY, f64::min);
    let max_event_error = events.iter().map(|r| r.metrics.error()).fold(0.0, f64::max);
    let min_background_error = background
        .iter()
        .map(|r| r.metrics.error())
        .fold(f64::INFINITY, f64::min);

    let pass = events.len() == 5
        && !background.is_empty()
        && max_event_ratio < min_background_ratio
        && max_event_error < 0.1
        && min_background_error > max_event_error;
    verdict(
        9,
        "event ordering",
        pass,
        format!(
            "seed {}: event C_R <= {max_event_ratio:.2} < background C_R >= \
             {min_background_ratio:.2}; event error <= {max_event_error:.2e} < background error \
             >= {min_background_error:.2e}",
            stream.seed
        ),
    );
    assert!(pass);
}
