//! Rebuilds one segmentation with each reconstruction kind and prints the
//! mean squared error of each.

use relcomp::reconstruct::{mean_squared_error, reconstruct, snap_points, ReconstructionKind};
use relcomp::relevance::{profile, RelevanceKind, RelevanceSpec};
use relcomp::transport::segment;
use relcomp::TimeSeries;

pub fn main() -> relcomp::Result<()> {
    let values: Vec<f64> = (0..1000)
        .map(|i| (i as f64 / 40.0).sin() + 0.3 * (i as f64 / 7.0).sin())
        .collect();
    let series = TimeSeries::indexed(values)?;
    let spec = RelevanceSpec::new(RelevanceKind::AbsDifference, 1)?;
    let seg = segment(&profile(&series, &spec)?, series.timestamps(), 100, false)?;
    let knots = snap_points(series.timestamps(), &seg.points);

    for kind in [
        ReconstructionKind::PiecewiseConstant,
        ReconstructionKind::PiecewiseLinear,
        ReconstructionKind::PiecewiseRegression,
    ] {
        let recon = reconstruct(&series, &knots, kind)?;
        println!(
            "{kind:?}: {} stored points, mse {:.3e}",
            recon.stored_point_count(),
            mean_squared_error(&series, &recon)
        );
    }
    Ok(())
}
