//! Summary statistics over caption tracks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CaptionTrack;

/// Percentile points reported for lengths and durations.
pub const PERCENTILES: [f64; 5] = [0.0, 10.0, 50.0, 90.0, 100.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no captions to summarize")]
    EmptyInput,
}

/// One video's track with the metadata the statistics group by.
#[derive(Debug, Clone, Copy)]
pub struct StatsInput<'a> {
    pub signer_id: u8,
    pub article_id: &'a str,
    pub track: &'a CaptionTrack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackStats {
    pub n_signers: usize,
    /// Distinct (signer, article) pairs.
    pub n_discourses: usize,
    pub n_sentences: usize,
    pub length_percentiles_chars: [usize; 5],
    pub duration_percentiles_s: [f64; 5],
    /// Total caption duration in hours.
    pub hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub overall: TrackStats,
    pub by_signer: BTreeMap<u8, TrackStats>,
}

/// Nearest-rank percentile of an ascending slice: the value at 1-based rank
/// `ceil(p/100 * n)`, with rank 1 for `p = 0`.
pub fn percentile_nearest_rank<T: Copy>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn summarize(inputs: &[&StatsInput<'_>]) -> Result<TrackStats, StatsError> {
    let mut lengths = Vec::new();
    let mut durations = Vec::new();
    for input in inputs {
        for cap in input.track.captions() {
            lengths.push(cap.char_len());
            durations.push(cap.duration());
        }
    }
    if lengths.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    lengths.sort_unstable();
    durations.sort_by(f64::total_cmp);
    let signers: BTreeSet<u8> = inputs.iter().map(|i| i.signer_id).collect();
    let discourses: BTreeSet<(u8, &str)> = inputs.iter().map(|i| (i.signer_id, i.article_id)).collect();
    // Summing the sorted values keeps the total independent of input order.
    let total_s: f64 = durations.iter().sum();
    Ok(TrackStats {
        n_signers: signers.len(),
        n_discourses: discourses.len(),
        n_sentences: lengths.len(),
        length_percentiles_chars: PERCENTILES.map(|p| percentile_nearest_rank(&lengths, p)),
        duration_percentiles_s: PERCENTILES.map(|p| percentile_nearest_rank(&durations, p)),
        hours: total_s / 3600.0,
    })
}

/// Statistics for every signer and for the whole input.
pub fn compute_stats(inputs: &[StatsInput<'_>]) -> Result<StatsTable, StatsError> {
    let all: Vec<&StatsInput<'_>> = inputs.iter().collect();
    let overall = summarize(&all)?;
    let mut groups: BTreeMap<u8, Vec<&StatsInput<'_>>> = BTreeMap::new();
    for input in inputs {
        groups.entry(input.signer_id).or_default().push(input);
    }
    let mut by_signer = BTreeMap::new();
    for (signer, group) in groups {
        match summarize(&group) {
            Ok(stats) => {
                by_signer.insert(signer, stats);
            }
            Err(StatsError::EmptyInput) => {}
        }
    }
    Ok(StatsTable { overall, by_signer })
}
