//! Feeds a long stream through a synopsis and compares the streamed
//! segmentation against the batch one at the end.

use relcomp::metrics::streaming_errors;
use relcomp::relevance::{profile, score, RelevanceKind, RelevanceSpec};
use relcomp::sim::sin_cubed;
use relcomp::synopsis::Synopsis;
use relcomp::transport::segment;

pub fn main() -> relcomp::Result<()> {
    let series = sin_cubed(50_000);
    let spec = RelevanceSpec::new(RelevanceKind::AbsMagnitude, 2)?;
    let scores = score(&series, &spec)?;
    let x = series.timestamps();
    let alpha = 0.2;

    let mut synopsis = Synopsis::new(&x[..500], &scores[..500], 100, alpha)?;
    let mut growths = 0;
    for i in 500..series.len() {
        if synopsis.observe(x[i], scores[i])? {
            growths += 1;
        }
    }
    let estimate = synopsis.query()?;
    println!(
        "n' grew {growths} times to {}; {} triples for {} points",
        estimate.n_prime,
        synopsis.len(),
        synopsis.n_seen()
    );

    let batch = segment(&profile(&series, &spec)?, x, estimate.n_prime, false)?;
    let worst = streaming_errors(&estimate.points, &batch, x, alpha)?
        .into_iter()
        .map(|(error, bound, _)| error / bound)
        .fold(0.0, f64::max);
    println!("largest error relative to its bound: {worst:.4}");
    Ok(())
}
