//! Synthetic series: the cubed-sine stream and a labeled stream of sinusoid
//! events buried in noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::metrics::{IntervalLabel, LabelKind};
use crate::TimeSeries;

/// `y_i = sin^3(200 pi i / len)` at `x_i = i`, `i = 1..=len`: one hundred
/// periods regardless of length.
pub fn sin_cubed(len: usize) -> TimeSeries {
    let values = (1..=len)
        .map(|i| (i as f64 * std::f64::consts::PI * 200.0 / len as f64).sin().powi(3))
        .collect();
    TimeSeries::indexed(values).expect("nonempty finite series")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStreamConfig {
    pub sample_rate: f64,
    pub events: usize,
    pub event_secs: f64,
    pub gap_secs: f64,
    /// Sinusoid period in samples.
    pub period: f64,
    pub amplitude: f64,
    pub noise_sd: f64,
    /// Probability that a background sample carries an outlier.
    pub outlier_rate: f64,
    pub outlier_sd: f64,
}

impl Default for EventStreamConfig {
    fn default() -> Self {
        Self {
            sample_rate: 80.0,
            events: 5,
            event_secs: 2.0,
            gap_secs: 2.0,
            period: 50.0,
            amplitude: 1.0,
            noise_sd: 0.2,
            outlier_rate: 0.002,
            outlier_sd: 0.5,
        }
    }
}

pub struct LabeledStream {
    pub series: TimeSeries,
    pub labels: Vec<IntervalLabel>,
    pub seed: u64,
}

/// Alternating background and event segments, starting and ending with
/// background. Each segment gets its own label; labels end at the segment's
/// last sample so they never overlap.
pub fn event_stream(config: &EventStreamConfig, seed: u64) -> LabeledStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, config.noise_sd).expect("valid noise deviation");
    let outlier = Normal::new(0.0, config.outlier_sd).expect("valid outlier deviation");
    let event_len = (config.event_secs * config.sample_rate).round() as usize;
    let gap_len = (config.gap_secs * config.sample_rate).round() as usize;

    let mut values = Vec::new();
    let mut spans = Vec::new();
    for k in 0..=config.events {
        let start = values.len();
        for _ in 0..gap_len {
            let mut y = noise.sample(&mut rng);
            if rng.gen::<f64>() < config.outlier_rate {
                y += outlier.sample(&mut rng);
            }
            values.push(y);
        }
        spans.push((start, values.len(), LabelKind::NonEvent, format!("background{}", k + 1)));
        if k == config.events {
            break;
        }
        let start = values.len();
        let phase = rng.gen::<f64>() * config.period;
        for i in 0..event_len {
            let angle = 2.0 * std::f64::consts::PI * (i as f64 + phase) / config.period;
            values.push(config.amplitude * angle.sin() + noise.sample(&mut rng));
        }
        spans.push((start, values.len(), LabelKind::Event, format!("event{}", k + 1)));
    }

    let timestamps: Vec<f64> = (0..values.len()).map(|i| i as f64 / config.sample_rate).collect();
    let labels = spans
        .into_iter()
        .filter(|(a, b, _, _)| b > a)
        .map(|(a, b, kind, name)| IntervalLabel {
            start: timestamps[a],
            end: timestamps[b - 1],
            kind,
            name,
        })
        .collect();
    let series = TimeSeries::new(timestamps, values).expect("generated series is valid");
    LabeledStream {
        series,
        labels,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_cubed_has_expected_shape() {
        let s = sin_cubed(1000);
        assert_eq!(s.len(), 1000);
        assert_eq!(s.timestamps()[0], 1.0);
        assert!((s.values()[1] - (0.4 * std::f64::consts::PI).sin().powi(3)).abs() < 1e-15);
        assert!(s.values().iter().all(|y| y.abs() <= 1.0));
    }

    #[test]
    fn event_stream_is_deterministic_and_labeled() {
        let config = EventStreamConfig::default();
        let a = event_stream(&config, 7);
        let b = event_stream(&config, 7);
        assert_eq!(a.series, b.series);
        assert_eq!(a.labels.len(), 11);
        assert_eq!(a.series.len(), 11 * 160);
        crate::metrics::validate_labels(&a.labels).unwrap();
        let events = a.labels.iter().filter(|l| l.kind == LabelKind::Event).count();
        assert_eq!(events, 5);
        assert_ne!(event_stream(&config, 8).series, a.series);
    }
}
