//! Compresses a generated event stream and compares how events and
//! background intervals fare.

use relcomp::cli::default_query;
use relcomp::metrics::{evaluate, LabelKind};
use relcomp::reconstruct::{reconstruct, snap_points, ReconstructionKind};
use relcomp::relevance::{profile, RelevanceKind, RelevanceSpec};
use relcomp::sim::{event_stream, EventStreamConfig};
use relcomp::transport::segment;

pub fn main() -> relcomp::Result<()> {
    let stream = event_stream(&EventStreamConfig::default(), 1);
    let series = &stream.series;
    let spec = RelevanceSpec::new(
        RelevanceKind::QueryShape {
            query: default_query()?,
            normalize_window: false,
        },
        1,
    )?;
    let seg = segment(&profile(series, &spec)?, series.timestamps(), series.len() / 5, false)?;
    let recon = reconstruct(
        series,
        &snap_points(series.timestamps(), &seg.points),
        ReconstructionKind::PiecewiseLinear,
    )?;
    let report = evaluate(series, &seg.points, &recon.sampled, &stream.labels)?;
    for r in &report.intervals {
        let kind = if r.kind == LabelKind::Event { "event" } else { "background" };
        println!(
            "{:<12} {kind:<10} C_R {:>7.2}  error {:.2e}",
            r.name,
            r.metrics.ratio(),
            r.metrics.error()
        );
    }
    Ok(())
}
