//! Optimal 1-D coupling between weighted timestamps and `n'` equal-mass
//! targets, and the segmentation points it induces.
//!
//! The coupling is built by the north-west-corner rule, walking from the last
//! timestamp and the last target towards the first. On sorted 1-D supports
//! this plan is optimal for the squared-distance transport cost. Residual
//! masses are read off the running weight totals of the
//! [`RelevanceProfile`] instead of being decremented step by step, so the
//! marginals do not drift on long series.
//!
//! Segmentation point `j` is `n' * sum_i eta_ij * x_i`. It always lies in
//! `[x_{k_{j-1}}, x_{k_j}]` where `k_u` is the first index whose running
//! weight reaches `u / n'`.

use crate::error::{Error, Result};
use crate::relevance::RelevanceProfile;

/// Mass moved from timestamp `source` to target `target` (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEntry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Sparse transport plan, sorted by source then target.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    entries: Vec<CouplingEntry>,
    n: usize,
    n_prime: usize,
    /// `k_0..=k_{n'}` as 0-based indices.
    boundaries: Vec<usize>,
}

impl Coupling {
    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_prime(&self) -> usize {
        self.n_prime
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for e in &self.entries {
            sums[e.source] += e.mass;
        }
        sums
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_prime];
        for e in &self.entries {
            sums[e.target] += e.mass;
        }
        sums
    }

    /// `sum eta_ij (x_i - xt_j)^2` for the given target locations.
    pub fn cost(&self, timestamps: &[f64], targets: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass * (timestamps[e.source] - targets[e.target]).powi(2))
            .sum()
    }
}

/// Boundary of target `j` on the cumulative mass axis.
fn target_edge(j: usize, n_prime: usize) -> f64 {
    if j == n_prime {
        1.0
    } else {
        j as f64 / n_prime as f64
    }
}

fn check_count(n: usize, n_prime: usize) -> Result<()> {
    if n_prime == 0 || n_prime > n {
        return Err(Error::InvalidSegmentCount { n_prime, n });
    }
    Ok(())
}

/// North-west-corner coupling of `profile` onto `n_prime` targets of mass `1/n'`.
///
/// Zero-mass transfers are omitted. When a row and a target are exhausted at
/// the same time the row is consumed first.
pub fn optimal_coupling(profile: &RelevanceProfile, n_prime: usize) -> Result<Coupling> {
    let n = profile.len();
    check_count(n, n_prime)?;
    let cum = profile.cumulative();
    let below = |i: usize| if i == 0 { 0.0 } else { cum[i - 1] };

    let mut entries = Vec::with_capacity(n + n_prime);
    // 1-based cursors as in the textbook formulation
    let (mut i, mut j) = (n, n_prime);
    while i > 0 && j > 0 {
        let top = cum[i - 1].min(target_edge(j, n_prime));
        let row_floor = below(i - 1);
        let col_floor = target_edge(j - 1, n_prime);
        let (mass, row_exhausted) = if row_floor >= col_floor {
            (top - row_floor, true)
        } else {
            (top - col_floor, false)
        };
        if mass > 0.0 {
            entries.push(CouplingEntry {
                source: i - 1,
                target: j - 1,
                mass,
            });
        }
        if row_exhausted {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    entries.reverse();

    Ok(Coupling {
        entries,
        n,
        n_prime,
        boundaries: boundary_indices(cum, n_prime),
    })
}

/// `k_u = min { l : W_l >= u/n' }` for `u = 0..=n'`, with `k_0` pinned to the
/// first index.
fn boundary_indices(cum: &[f64], n_prime: usize) -> Vec<usize> {
    let n = cum.len();
    let mut ks = Vec::with_capacity(n_prime + 1);
    ks.push(0);
    for u in 1..=n_prime {
        let t = target_edge(u, n_prime);
        let k = cum.partition_point(|&c| c < t).min(n - 1);
        ks.push(k);
    }
    ks
}

/// Index pairs `(k_{j-1}, k_j)` bracketing each segmentation point.
pub fn guaranteed_interval_indices(
    profile: &RelevanceProfile,
    n_prime: usize,
) -> Result<Vec<(usize, usize)>> {
    check_count(profile.len(), n_prime)?;
    let ks = boundary_indices(profile.cumulative(), n_prime);
    Ok(ks.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Timestamp intervals `[x_{k_{j-1}}, x_{k_j}]` containing each segmentation point.
pub fn guaranteed_intervals(
    profile: &RelevanceProfile,
    n_prime: usize,
    timestamps: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if timestamps.len() != profile.len() {
        return Err(Error::CouplingMismatch {
            coupling: profile.len(),
            timestamps: timestamps.len(),
        });
    }
    Ok(guaranteed_interval_indices(profile, n_prime)?
        .into_iter()
        .map(|(a, b)| (timestamps[a], timestamps[b]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub points: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
    /// `k_0..=k_{n'}` as 0-based indices into the timestamps.
    pub source_indices: Vec<usize>,
    /// Points were rounded up to integers.
    pub integerized: bool,
}

impl Segmentation {
    pub fn n_prime(&self) -> usize {
        self.points.len()
    }

    /// `x_{k_{j+1}}` for 0-based `j`, with `x_n` past the last target.
    pub fn next_boundary(&self, j: usize, timestamps: &[f64]) -> f64 {
        match self.source_indices.get(j + 2) {
            Some(&k) => timestamps[k],
            None => timestamps[timestamps.len() - 1],
        }
    }
}

/// Applies the transform `xt_j = n' * sum_i eta_ij * x_i`.
///
/// With `integerize` each point is rounded up to the next integer.
pub fn segmentation_points(
    coupling: &Coupling,
    timestamps: &[f64],
    integerize: bool,
) -> Result<Segmentation> {
    if timestamps.len() != coupling.n {
        return Err(Error::CouplingMismatch {
            coupling: coupling.n,
            timestamps: timestamps.len(),
        });
    }
    // per target: mass-weighted timestamp sum, total mass, entry count, source
    let mut acc = vec![(0.0, 0.0, 0usize, 0usize); coupling.n_prime];
    for e in &coupling.entries {
        let a = &mut acc[e.target];
        a.0 += e.mass * timestamps[e.source];
        a.1 += e.mass;
        a.2 += 1;
        a.3 = e.source;
    }
    let intervals: Vec<(f64, f64)> = coupling
        .boundaries
        .windows(2)
        .map(|w| (timestamps[w[0]], timestamps[w[1]]))
        .collect();
    // dividing by the realized column mass instead of multiplying by n' keeps
    // each point a convex combination of its support
    let points = acc
        .iter()
        .zip(&intervals)
        .map(|(&(sum, mass, count, source), &(lo, hi))| {
            let x = match count {
                0 => lo,
                1 => timestamps[source],
                _ => (sum / mass).clamp(lo, hi),
            };
            if integerize {
                x.ceil()
            } else {
                x
            }
        })
        .collect();
    Ok(Segmentation {
        points,
        intervals,
        source_indices: coupling.boundaries.clone(),
        integerized: integerize,
    })
}

/// Coupling and segmentation in one call.
pub fn segment(
    profile: &RelevanceProfile,
    timestamps: &[f64],
    n_prime: usize,
    integerize: bool,
) -> Result<Segmentation> {
    let coupling = optimal_coupling(profile, n_prime)?;
    segmentation_points(&coupling, timestamps, integerize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relevance::normalize_weights;
    use proptest::prelude::*;

    fn profile(w: &[f64]) -> RelevanceProfile {
        normalize_weights(w.to_vec()).unwrap()
    }

    fn assert_entries(c: &Coupling, expect: &[(usize, usize, f64)]) {
        assert_eq!(c.entries().len(), expect.len(), "{:?}", c.entries());
        for (e, &(i, j, m)) in c.entries().iter().zip(expect) {
            assert_eq!((e.source, e.target), (i, j));
            assert!((e.mass - m).abs() < 1e-15, "{e:?} vs {m}");
        }
    }

    #[test]
    fn single_target_takes_everything() {
        let c = optimal_coupling(&profile(&[1.0, 1.0]), 1).unwrap();
        assert_entries(&c, &[(0, 0, 0.5), (1, 0, 0.5)]);
    }

    #[test]
    fn equal_resolution_is_identity() {
        let c = optimal_coupling(&profile(&[1.0; 4]), 4).unwrap();
        assert_entries(&c, &[(0, 0, 0.25), (1, 1, 0.25), (2, 2, 0.25), (3, 3, 0.25)]);
    }

    #[test]
    fn worked_example_coupling() {
        // hand trace, walking from (4, 2): 1/7 -> (4,2); 5/14 -> (3,2);
        // 1/14 -> (3,1); 3/7 -> (2,1); row 1 carries no mass
        let c = optimal_coupling(&profile(&[0.0, 3.0, 3.0, 1.0]), 2).unwrap();
        assert_entries(
            &c,
            &[
                (1, 0, 3.0 / 7.0),
                (2, 0, 1.0 / 14.0),
                (2, 1, 5.0 / 14.0),
                (3, 1, 1.0 / 7.0),
            ],
        );
        let x = [1.0, 2.0, 3.0, 4.0];
        let seg = segmentation_points(&c, &x, false).unwrap();
        assert!((seg.points[0] - 15.0 / 7.0).abs() < 1e-14);
        assert!((seg.points[1] - 23.0 / 7.0).abs() < 1e-14);
        assert_eq!(seg.intervals, vec![(1.0, 3.0), (3.0, 4.0)]);

        let seg = segmentation_points(&c, &x, true).unwrap();
        assert_eq!(seg.points, vec![3.0, 4.0]);
        assert!(seg.integerized);
    }

    #[test]
    fn uniform_full_resolution_reproduces_timestamps() {
        let x = [0.5, 1.25, 7.0, 7.5, 100.0];
        let seg = segment(&profile(&[2.0; 5]), &x, 5, false).unwrap();
        assert_eq!(seg.points, x);
    }

    #[test]
    fn interval_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let iv = guaranteed_intervals(&profile(&[0.0, 3.0, 3.0, 1.0]), 2, &x).unwrap();
        assert_eq!(iv, vec![(1.0, 3.0), (3.0, 4.0)]);
        let iv = guaranteed_intervals(&profile(&[1.0; 4]), 2, &x).unwrap();
        assert_eq!(iv, vec![(1.0, 2.0), (2.0, 4.0)]);
        let iv = guaranteed_intervals(&profile(&[0.3, 0.0, 5.0, 0.1]), 1, &x).unwrap();
        assert_eq!(iv, vec![(1.0, 4.0)]);
    }

    #[test]
    fn segment_count_is_checked() {
        let p = profile(&[1.0, 2.0]);
        assert!(matches!(
            optimal_coupling(&p, 0),
            Err(Error::InvalidSegmentCount { .. })
        ));
        assert!(matches!(
            optimal_coupling(&p, 3),
            Err(Error::InvalidSegmentCount { .. })
        ));
        let c = optimal_coupling(&p, 1).unwrap();
        assert!(matches!(
            segmentation_points(&c, &[1.0], false),
            Err(Error::CouplingMismatch { .. })
        ));
    }

    #[test]
    fn trailing_zero_weights_stay_out_of_coupling() {
        let c = optimal_coupling(&profile(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]), 2).unwrap();
        assert_entries(&c, &[(2, 0, 0.5), (3, 1, 0.5)]);
        assert_eq!(c.boundaries(), &[0, 2, 3]);
    }

    #[test]
    fn all_zero_scores_use_uniform_weights() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let seg = segment(&profile(&[0.0; 4]), &x, 2, false).unwrap();
        assert_eq!(seg.points, vec![1.5, 3.5]);
    }

    proptest! {
        #[test]
        fn marginals_sparsity_and_staircase(
            w in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 1..120),
            frac in 0.0f64..1.0,
        ) {
            let n = w.len();
            let n_prime = 1 + ((n - 1) as f64 * frac) as usize;
            let p = profile(&w);
            let c = optimal_coupling(&p, n_prime).unwrap();
            for (r, w) in c.row_sums().iter().zip(p.weights()) {
                prop_assert!((r - w).abs() < 1e-12);
            }
            for col in c.column_sums() {
                prop_assert!((col - 1.0 / n_prime as f64).abs() < 1e-12);
            }
            prop_assert!(c.entries().len() <= n + n_prime + 1);
            let staircase = c.entries().windows(2).all(|e| {
                (e[0].source, e[0].target) < (e[1].source, e[1].target)
                    && e[0].target <= e[1].target
            });
            prop_assert!(staircase);
            prop_assert!(c.entries().iter().all(|e| e.mass > 0.0));
        }

        #[test]
        fn points_sorted_and_bracketed(
            w in prop::collection::vec(0.0f64..10.0, 1..60),
            gaps in prop::collection::vec(0.01f64..5.0, 60),
            frac in 0.0f64..1.0,
        ) {
            let n = w.len();
            let n_prime = 1 + ((n - 1) as f64 * frac) as usize;
            let x: Vec<f64> = gaps[..n].iter().scan(0.0, |acc, g| { *acc += g; Some(*acc) }).collect();
            let seg = segment(&profile(&w), &x, n_prime, false).unwrap();
            prop_assert!(seg.points.windows(2).all(|p| p[0] <= p[1]));
            for (pt, (lo, hi)) in seg.points.iter().zip(&seg.intervals) {
                prop_assert!(lo <= pt && pt <= hi);
            }
        }
    }
}
