//! Scores a noisy series against a sine template; windows that look like the
//! template get most of the mass and therefore most of the points.

use relcomp::relevance::{profile, QueryShape, RelevanceKind, RelevanceSpec};
use relcomp::transport::segment;
use relcomp::TimeSeries;

pub fn main() -> relcomp::Result<()> {
    let values: Vec<f64> = (0..400)
        .map(|i| {
            let burst = if (150..250).contains(&i) {
                (i as f64 * std::f64::consts::PI / 25.0).sin()
            } else {
                0.0
            };
            burst + 0.05 * ((i * 37 % 11) as f64 - 5.0) / 5.0
        })
        .collect();
    let series = TimeSeries::indexed(values)?;
    let spec = RelevanceSpec::new(
        RelevanceKind::QueryShape {
            query: QueryShape::sine(51, 25.0)?,
            normalize_window: false,
        },
        1,
    )?;
    let prof = profile(&series, &spec)?;
    let seg = segment(&prof, series.timestamps(), 40, false)?;
    let inside = seg.points.iter().filter(|&&p| (150.0..250.0).contains(&p)).count();
    println!("{inside} of 40 points fall inside the burst at [150, 250)");
    Ok(())
}
