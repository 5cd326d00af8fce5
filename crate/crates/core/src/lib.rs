//! Relevance-aware compression of time-series.
//!
//! A series is scored point by point with a [`relevance`] rule, the scores are
//! normalized into a discrete distribution over the timestamps, and the
//! optimal 1-D transport plan onto `n'` equal-mass targets yields `n'`
//! segmentation points ([`transport`]). Segments between those points are
//! rebuilt with piecewise aggregate approximations ([`reconstruct`]).
//!
//! For unbounded streams the [`synopsis`] module keeps a pruned summary of
//! `(timestamp, mass, mass * timestamp)` triples from which approximate
//! segmentation points can be queried at any time, with the number of points
//! growing as relevance mass accumulates.
//!
//! ```
//! use relcomp::{relevance, transport, TimeSeries};
//!
//! let series = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.0, 3.0, 0.0, 1.0]).unwrap();
//! let spec = relevance::RelevanceSpec::new(relevance::RelevanceKind::AbsDifference, 1).unwrap();
//! let profile = relevance::profile(&series, &spec).unwrap();
//! let coupling = transport::optimal_coupling(&profile, 2).unwrap();
//! let seg = transport::segmentation_points(&coupling, series.timestamps(), false).unwrap();
//! assert!((seg.points[0] - 15.0 / 7.0).abs() < 1e-12);
//! assert!((seg.points[1] - 23.0 / 7.0).abs() < 1e-12);
//! ```

// NaN-rejecting checks are written as `!(x >= 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
mod error;
pub mod metrics;
pub mod reconstruct;
pub mod relevance;
pub mod series;
pub mod sim;
pub mod synopsis;
pub mod transport;

pub use error::{Error, Result};
pub use series::TimeSeries;
