//! Streaming approximation of the optimal-transport segmentation points.
//!
//! The synopsis is an ordered list of triples `(x, phi, xi)`: a stored
//! timestamp, the relevance mass of every point folded into it, and the
//! mass-weighted sum of those points' timestamps. Pruning folds runs of
//! low-mass triples together, leaving at most an `eps` fraction of the total
//! mass in any merged triple, with `eps = alpha / n'`.
//!
//! New relevance mass is tracked in `delta_z`. Once it reaches `z / n'`,
//! where `z` is the mass recorded at the previous growth, `n'` increases by
//! one and the synopsis is pruned with the smaller `eps`.
//!
//! Queries locate, for each target `j`, the triples where the running mass
//! crosses `(j-1) T / n'` and `j T / n'` (`T` the current total mass) and
//! interpolate the transport transform across them. With `alpha = 0` nothing
//! is ever merged and the query reproduces the batch transform. Otherwise each
//! point lies within `4 alpha x_{k_{j+1}}` of the batch value.
//!
//! Storage is a slot vector in timestamp order with tombstones and links, plus
//! a min-heap of adjacent interior pairs keyed by combined mass. A prune only
//! touches runs of neighbours whose pair mass is within the threshold, so it
//! costs time proportional to the triples it removes rather than to `L`.
//!
//! A synopsis has a single writer. Clone it to query a snapshot from another
//! thread.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relevance::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    /// Latest timestamp folded into the triple.
    pub x: f64,
    /// Relevance mass.
    pub phi: f64,
    /// Sum of `phi_l * x_l` over the folded points.
    pub xi: f64,
    /// Number of stream points folded into the triple.
    pub count: u64,
}

impl Triple {
    fn point(x: f64, phi: f64) -> Self {
        Self {
            x,
            phi,
            xi: phi * x,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationEstimate {
    pub points: Vec<f64>,
    /// Stored timestamps approximating `(x_{k_{j-1}}, x_{k_j})`.
    pub interval_ends: Vec<(f64, f64)>,
    pub n_prime: usize,
}

const NIL: usize = usize::MAX;

/// Two adjacent interior slots and their combined mass when pushed.
#[derive(Debug, Clone, Copy)]
struct Pair {
    sum: f64,
    left: usize,
    right: usize,
}

impl Ord for Pair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sum
            .total_cmp(&other.sum)
            .then(self.right.cmp(&other.right))
    }
}

impl PartialOrd for Pair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Pair {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pair {}

#[derive(Debug, Clone)]
pub struct Synopsis {
    // slot 0 is the first triple and is never merged away
    slots: Vec<Triple>,
    alive: Vec<bool>,
    prev: Vec<usize>,
    next: Vec<usize>,
    tail: usize,
    live: usize,
    pairs: BinaryHeap<Reverse<Pair>>,
    n: u64,
    n_prime: usize,
    z: f64,
    delta_z: f64,
    alpha: f64,
    epsilon: f64,
}

impl PartialEq for Synopsis {
    fn eq(&self, other: &Self) -> bool {
        self.to_snapshot() == other.to_snapshot()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

impl Synopsis {
    /// Starts a synopsis from an observed prefix, one triple per point.
    pub fn new(timestamps: &[f64], scores: &[f64], n_prime: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if timestamps.len() != scores.len() {
            return Err(Error::LengthMismatch {
                timestamps: timestamps.len(),
                values: scores.len(),
            });
        }
        if timestamps.is_empty() {
            return Err(Error::EmptySeries);
        }
        if n_prime == 0 || n_prime > timestamps.len() {
            return Err(Error::InvalidSegmentCount {
                n_prime,
                n: timestamps.len(),
            });
        }
        if let Some(index) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotone { index: index + 1 });
        }
        if let Some((index, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidScore { index, value });
        }
        let triples = timestamps
            .iter()
            .zip(scores)
            .map(|(&x, &phi)| Triple::point(x, phi))
            .collect();
        let mut z = CompensatedSum::default();
        scores.iter().for_each(|&s| z.add(s));
        Ok(Self::from_parts(
            triples,
            timestamps.len() as u64,
            n_prime,
            z.value(),
            0.0,
            alpha,
            alpha / n_prime as f64,
        ))
    }

    fn from_parts(
        triples: Vec<Triple>,
        n: u64,
        n_prime: usize,
        z: f64,
        delta_z: f64,
        alpha: f64,
        epsilon: f64,
    ) -> Self {
        let len = triples.len();
        let mut s = Self {
            slots: triples,
            alive: vec![true; len],
            prev: (0..len).map(|i| i.wrapping_sub(1)).collect(),
            next: (1..=len).map(|i| if i == len { NIL } else { i }).collect(),
            tail: len - 1,
            live: len,
            pairs: BinaryHeap::new(),
            n,
            n_prime,
            z,
            delta_z,
            alpha,
            epsilon,
        };
        s.rebuild_pairs();
        s
    }

    /// Live triples in timestamp order.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out = Vec::with_capacity(self.live);
        let mut i = 0;
        while i != NIL {
            out.push(self.slots[i]);
            i = self.next[i];
        }
        out
    }

    /// Number of triples `L`.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Points observed so far.
    pub fn n_seen(&self) -> u64 {
        self.n
    }

    pub fn n_prime(&self) -> usize {
        self.n_prime
    }

    /// Mass recorded at the last growth step.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Mass accumulated since the last growth step.
    pub fn delta_z(&self) -> f64 {
        self.delta_z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        Some(self.slots[self.tail].x)
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        self.triples().iter().for_each(|t| acc.add(t.phi));
        acc.value()
    }

    pub fn total_xi(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        self.triples().iter().for_each(|t| acc.add(t.xi));
        acc.value()
    }

    /// Adds one scored point. Returns `true` when `n'` grew.
    ///
    /// The new mass is added to `delta_z` before the growth test, and the
    /// prune triggered by growth runs before the point is appended.
    pub fn observe(&mut self, x: f64, phi: f64) -> Result<bool> {
        if let Some(last) = self.last_timestamp() {
            if !(x > last) {
                return Err(Error::OutOfOrder { last, got: x });
            }
        }
        if !x.is_finite() {
            return Err(Error::NonFinite {
                index: self.n as usize,
            });
        }
        if !(phi.is_finite() && phi >= 0.0) {
            return Err(Error::InvalidScore {
                index: self.n as usize,
                value: phi,
            });
        }

        self.delta_z += phi;
        // a zero-mass history would otherwise grow on every silent point
        let grew = self.delta_z > 0.0 && self.delta_z >= self.z / self.n_prime as f64;
        if grew {
            self.n_prime += 1;
            self.epsilon = self.alpha / self.n_prime as f64;
            self.z += self.delta_z;
            self.delta_z = 0.0;
            self.prune();
        }
        self.append(Triple::point(x, phi));
        self.n += 1;
        if self.slots.len() > 2 * self.live + 64 || self.pairs.len() > 4 * self.live + 64 {
            self.compact();
        }
        Ok(grew)
    }

    fn append(&mut self, t: Triple) {
        let s = self.slots.len();
        let old = self.tail;
        self.slots.push(t);
        self.alive.push(true);
        self.prev.push(old);
        self.next.push(NIL);
        self.next[old] = s;
        self.tail = s;
        self.live += 1;
        // the old tail just became interior
        if old != 0 && self.prev[old] != 0 {
            self.push_pair(self.prev[old], old);
        }
    }

    fn push_pair(&mut self, left: usize, right: usize) {
        let sum = self.slots[left].phi + self.slots[right].phi;
        self.pairs.push(Reverse(Pair { sum, left, right }));
    }

    fn pair_is_current(&self, p: &Pair) -> bool {
        p.left != 0
            && p.right != self.tail
            && self.alive[p.left]
            && self.alive[p.right]
            && self.next[p.left] == p.right
            && (self.slots[p.left].phi + self.slots[p.right].phi).to_bits() == p.sum.to_bits()
    }

    fn rebuild_pairs(&mut self) {
        self.pairs.clear();
        let mut left = self.next[0];
        while left != NIL && self.next[left] != NIL && self.next[left] != self.tail {
            let right = self.next[left];
            self.push_pair(left, right);
            left = right;
        }
    }

    fn compact(&mut self) {
        let triples = self.triples();
        *self = Self::from_parts(
            triples,
            self.n,
            self.n_prime,
            self.z,
            self.delta_z,
            self.alpha,
            self.epsilon,
        );
    }

    /// Folds low-mass runs of interior triples.
    ///
    /// Scanning from the second-to-last triple down to the third, a triple
    /// with mass at most `eps * T` is merged with the longest run of
    /// predecessors (never the first triple) whose combined mass stays within
    /// `eps * T`. The merged triple keeps the latest timestamp. `T` is the
    /// mass observed so far, `z + delta_z`.
    pub fn prune(&mut self) {
        if self.epsilon == 0.0 {
            return;
        }
        self.prune_below(self.epsilon * (self.z + self.delta_z));
    }

    // Two neighbours whose combined mass exceeds the threshold can never end
    // up in one merged triple, so the right-to-left scan only acts inside runs
    // of pairs within the threshold. Those runs are found through the heap and
    // each is scanned from its right end exactly as a full pass would.
    fn prune_below(&mut self, threshold: f64) {
        if self.live <= 3 {
            return;
        }
        let mut rights = Vec::new();
        while let Some(&Reverse(pair)) = self.pairs.peek() {
            if !(pair.sum <= threshold) {
                break;
            }
            self.pairs.pop();
            if self.pair_is_current(&pair) {
                rights.push(pair.right);
            }
        }
        rights.sort_unstable_by(|a, b| b.cmp(a));
        rights.dedup();

        // slot order is timestamp order, so runs are visited right to left
        let mut floor = NIL;
        for &end in &rights {
            if end >= floor {
                continue;
            }
            let mut j = end;
            loop {
                let mut leftmost = j;
                loop {
                    let p = self.prev[j];
                    if p == 0 || !(self.slots[j].phi + self.slots[p].phi <= threshold) {
                        break;
                    }
                    let absorbed = self.slots[p];
                    let merged = &mut self.slots[j];
                    merged.phi += absorbed.phi;
                    merged.xi += absorbed.xi;
                    merged.count += absorbed.count;
                    let pp = self.prev[p];
                    self.next[pp] = j;
                    self.prev[j] = pp;
                    self.alive[p] = false;
                    self.live -= 1;
                    leftmost = p;
                }
                floor = leftmost;
                if self.next[j] != self.tail {
                    self.push_pair(j, self.next[j]);
                }
                let before = self.prev[j];
                if before == 0 {
                    break;
                }
                self.push_pair(before, j);
                // the run continues while the next pair to the left qualifies
                if !(self.slots[leftmost].phi + self.slots[before].phi <= threshold) {
                    break;
                }
                j = before;
            }
        }
    }

    /// Approximate segmentation points for the current `n'`.
    pub fn query(&self) -> Result<SegmentationEstimate> {
        if self.live == 0 {
            return Err(Error::EmptySynopsis);
        }
        let first = self.slots[0].x;
        let last = self.slots[self.tail].x;
        let n_prime = self.n_prime;

        let mut acc = CompensatedSum::default();
        let mut i = 0;
        while i != NIL {
            acc.add(self.slots[i].phi);
            i = self.next[i];
        }
        let total = acc.value();

        if !(total > 0.0) {
            let step = (last - first) / n_prime as f64;
            let points = (0..n_prime)
                .map(|j| first + (j as f64 + 0.5) * step)
                .collect();
            return Ok(SegmentationEstimate {
                points,
                interval_ends: vec![(first, last); n_prime],
                n_prime,
            });
        }

        let share = total / n_prime as f64;
        let target = |j: usize| {
            if j == n_prime {
                total
            } else {
                j as f64 * share
            }
        };

        // each interval starts at the triple where the previous one ended, so
        // one walk over the list serves every target
        let mut acc = CompensatedSum::default();
        acc.add(self.slots[0].phi);
        let mut upper = 0;
        let mut running = acc.value();
        let mut points = Vec::with_capacity(n_prime);
        let mut interval_ends = Vec::with_capacity(n_prime);
        for j in 1..=n_prime {
            let lo_target = target(j - 1);
            let hi_target = target(j);
            while self.next[upper] != NIL && running < lo_target {
                upper = self.next[upper];
                acc.add(self.slots[upper].phi);
                running = acc.value();
            }
            let lower = upper;
            let lower_running = running;
            let mut inner = 0.0;
            while self.next[upper] != NIL && running < hi_target {
                upper = self.next[upper];
                acc.add(self.slots[upper].phi);
                running = acc.value();
                inner += self.slots[upper].xi;
            }
            let e1 = self.slots[lower].x * (lower_running - lo_target);
            let e2 = self.slots[upper].x * (running - hi_target);
            let point = ((inner + e1 - e2) / share).clamp(first, last);
            points.push(point);
            interval_ends.push((self.slots[lower].x, self.slots[upper].x));
        }
        // rounding at tiny masses can produce micro-inversions
        for k in 1..points.len() {
            if points[k] < points[k - 1] {
                points[k] = points[k - 1];
            }
        }
        Ok(SegmentationEstimate {
            points,
            interval_ends,
            n_prime,
        })
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            version: SNAPSHOT_VERSION,
            n: self.n,
            n_prime: self.n_prime,
            z: self.z,
            delta_z: self.delta_z,
            alpha: self.alpha,
            epsilon: self.epsilon,
            triples: self.triples(),
        }
    }

    pub fn from_snapshot(snapshot: Snapshot) -> Result<Self> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion(snapshot.version));
        }
        check_alpha(snapshot.alpha)?;
        let invalid = |msg: &str| Err(Error::InvalidSnapshot(msg.to_string()));
        if snapshot.triples.is_empty() {
            return invalid("no triples");
        }
        if snapshot.n_prime == 0 {
            return invalid("n_prime must be positive");
        }
        if snapshot.triples.windows(2).any(|w| w[0].x >= w[1].x) {
            return invalid("triple timestamps must increase");
        }
        let folded: u64 = snapshot.triples.iter().map(|t| t.count).sum();
        if folded != snapshot.n {
            return invalid("triple counts do not add up to n");
        }
        if snapshot
            .triples
            .iter()
            .any(|t| !(t.phi >= 0.0 && t.phi.is_finite() && t.xi.is_finite() && t.x.is_finite()))
        {
            return invalid("triple values must be finite with nonnegative mass");
        }
        Ok(Self::from_parts(
            snapshot.triples,
            snapshot.n,
            snapshot.n_prime,
            snapshot.z,
            snapshot.delta_z,
            snapshot.alpha,
            snapshot.epsilon,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_snapshot())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub const SNAPSHOT_VERSION: u32 = 1;

/// Serialized synopsis state. Floats round-trip exactly through the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub n: u64,
    pub n_prime: usize,
    pub z: f64,
    pub delta_z: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub triples: Vec<Triple>,
}
