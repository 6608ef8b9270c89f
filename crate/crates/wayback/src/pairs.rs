use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Timestamp;

/// Target gaps between the two versions of a pair, in days.
pub const GAP_BUCKETS: [u32; 7] = [7, 15, 30, 60, 120, 240, 360];
/// Relative tolerance around each target gap.
pub const GAP_TOLERANCE: f64 = 0.1;
pub const DEFAULT_MAX_PAIRS: usize = 1000;

const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionPairSpec {
    pub url: String,
    pub t1: Timestamp,
    pub t2: Timestamp,
    /// Target gap the pair was selected for.
    pub gap_days: u32,
}

impl VersionPairSpec {
    pub fn actual_gap_days(&self) -> f64 {
        self.t1.days_until(self.t2)
    }

    /// `t1 < t2` and the actual gap is within tolerance of the target.
    pub fn within_tolerance(&self) -> bool {
        self.t1 < self.t2 && within(seconds(self.t1, self.t2), self.gap_days)
    }
}

fn seconds(a: Timestamp, b: Timestamp) -> i64 {
    (b.datetime() - a.datetime()).num_seconds()
}

/// Bounds of the gaps accepted for `days`, in seconds.
fn window(days: u32) -> (i64, i64) {
    let target = days as i64 * DAY;
    let slack = (target as f64 * GAP_TOLERANCE).round() as i64;
    (target - slack, target + slack)
}

fn within(gap_seconds: i64, days: u32) -> bool {
    let (lo, hi) = window(days);
    (lo..=hi).contains(&gap_seconds)
}

/// Enumerates every pair of timestamps whose gap matches a bucket and keeps
/// a uniform sample of at most `max_pairs`, ordered by `(t1, t2)`. A pair
/// matching several buckets is assigned the smallest one.
pub fn build_pairs(
    url: &str,
    timestamps: &[Timestamp],
    buckets: &[u32],
    max_pairs: usize,
    seed: u64,
) -> Vec<VersionPairSpec> {
    let mut ts = timestamps.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let mut buckets: Vec<u32> = buckets.iter().copied().filter(|b| *b > 0).collect();
    buckets.sort_unstable();
    buckets.dedup();

    // Runs of consecutive partners: (first, bucket, start, end) with the
    // second timestamps in ts[start..end].
    let mut runs: Vec<(usize, u32, usize, usize)> = Vec::new();
    let mut total = 0usize;
    for (i, &t) in ts.iter().enumerate() {
        let mut floor = i + 1;
        for &b in &buckets {
            let (lo, hi) = window(b);
            let start = floor + ts[floor..].partition_point(|u| seconds(t, *u) < lo);
            let end = start + ts[start..].partition_point(|u| seconds(t, *u) <= hi);
            if end > start {
                runs.push((i, b, start, end));
                total += end - start;
                floor = end;
            }
        }
    }

    let spec = |k: usize, runs: &[(usize, u32, usize, usize)], offsets: &[usize]| {
        let r = offsets.partition_point(|o| *o <= k) - 1;
        let (i, b, start, _) = runs[r];
        VersionPairSpec {
            url: url.to_owned(),
            t1: ts[i],
            t2: ts[start + (k - offsets[r])],
            gap_days: b,
        }
    };
    let mut offsets = Vec::with_capacity(runs.len());
    let mut acc = 0;
    for &(_, _, start, end) in &runs {
        offsets.push(acc);
        acc += end - start;
    }
    let mut picked: Vec<usize> = if total <= max_pairs {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, total, max_pairs).into_vec()
    };
    picked.sort_unstable();
    let mut out: Vec<VersionPairSpec> = picked.into_iter().map(|k| spec(k, &runs, &offsets)).collect();
    out.sort_by_key(|p| (p.t1, p.t2));
    out
}
