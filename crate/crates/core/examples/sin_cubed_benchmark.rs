//! A scaled-down run of the streaming benchmark on the cubed sine.

use relcomp::bench::{run, BenchConfig};
use relcomp::sim::sin_cubed;

pub fn main() -> relcomp::Result<()> {
    let series = sin_cubed(60_000);
    let config = BenchConfig {
        checkpoint_every: 10_000,
        ..BenchConfig::default()
    };
    let result = run(&series, &config, |row| {
        println!(
            "n {:>6}  n' {:>6}  triples {:>6}  max err/bound {:.3}  mse ratio {:.3}",
            row.n, row.n_prime, row.synopsis_len, row.max_bound_ratio, row.mse_ratio
        );
    })?;
    println!(
        "{} growths, {} violations, {:.2} s",
        result.summary.growths, result.summary.violations, result.summary.total_secs
    );
    Ok(())
}
