//! Segments a short series with the difference relevance and prints each
//! point with the stored timestamps that bracket it.

use relcomp::relevance::{profile, RelevanceKind, RelevanceSpec};
use relcomp::transport::{optimal_coupling, segment};
use relcomp::TimeSeries;

pub fn main() -> relcomp::Result<()> {
    let values = vec![0.0, 0.1, 0.0, 2.5, -1.8, 0.2, 0.1, 0.0, 0.1, 3.0, 0.0, 0.1];
    let series = TimeSeries::indexed(values)?;
    let spec = RelevanceSpec::new(RelevanceKind::AbsDifference, 1)?;
    let prof = profile(&series, &spec)?;

    let coupling = optimal_coupling(&prof, 4)?;
    println!("coupling has {} nonzero entries", coupling.entries().len());

    let seg = segment(&prof, series.timestamps(), 4, false)?;
    for (j, (p, (lo, hi))) in seg.points.iter().zip(&seg.intervals).enumerate() {
        println!("point {}: {p:.4} in [{lo}, {hi}]", j + 1);
    }
    Ok(())
}
