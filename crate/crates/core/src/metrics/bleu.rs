//! Corpus BLEU compatible with the standard scorer's `intl` setup.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize_intl;
use super::MetricError;
use crate::par::Execution;

pub const MAX_ORDER: usize = 4;

/// Stand-in for `log(0)` so that a zero precision drives the score to 0.
const LOG_ZERO: f64 = -9_999_999_999.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    None,
    /// Halve the pseudo-count for each successive zero-match order.
    Exp,
    /// Replace zero matches by this pseudo-count.
    Floor(f64),
}

impl Smoothing {
    fn name(&self) -> String {
        match self {
            Smoothing::None => "none".into(),
            Smoothing::Exp => "exp".into(),
            Smoothing::Floor(v) => format!("floor[{v}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub lowercase: bool,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self {
            lowercase: false,
            smoothing: Smoothing::None,
        }
    }
}

impl BleuConfig {
    pub fn signature(&self) -> String {
        format!(
            "nrefs:1|case:{}|eff:no|tok:intl|smooth:{}|version:signtrack-{}",
            if self.lowercase { "lc" } else { "mixed" },
            self.smoothing.name(),
            env!("CARGO_PKG_VERSION")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    pub score: f64,
    /// Clipped n-gram precisions in percent, orders 1 to 4.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub signature: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SegmentStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
}

impl std::ops::Add for SegmentStats {
    type Output = SegmentStats;

    fn add(mut self, o: SegmentStats) -> SegmentStats {
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
        for n in 0..MAX_ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self
    }
}

fn ngram_counts(tokens: &[String]) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for n in 1..=MAX_ORDER {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram statistics for one hypothesis/reference pair.
pub fn segment_stats(hyp: &str, reference: &str, cfg: &BleuConfig) -> SegmentStats {
    let prep = |s: &str| {
        let toks = tokenize_intl(s);
        if cfg.lowercase {
            toks.into_iter().map(|t| t.to_lowercase()).collect()
        } else {
            toks
        }
    };
    let (h, r) = (prep(hyp), prep(reference));
    let ref_counts = ngram_counts(&r);
    let mut stats = SegmentStats {
        hyp_len: h.len(),
        ref_len: r.len(),
        ..SegmentStats::default()
    };
    for (gram, count) in ngram_counts(&h) {
        let n = gram.len() - 1;
        stats.totals[n] += count;
        stats.matches[n] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
    }
    stats
}

/// Turns summed statistics into a score.
pub fn score_from_stats(stats: &SegmentStats, cfg: &BleuConfig) -> BleuReport {
    let mut report = BleuReport {
        score: 0.0,
        precisions: [0.0; MAX_ORDER],
        brevity_penalty: 0.0,
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
        matches: stats.matches,
        totals: stats.totals,
        signature: cfg.signature(),
    };
    if stats.matches.iter().all(|&m| m == 0) {
        return report;
    }
    let mut exp_divisor = 1.0;
    for n in 0..MAX_ORDER {
        let total = stats.totals[n] as f64;
        if stats.totals[n] == 0 {
            break;
        }
        report.precisions[n] = if stats.matches[n] > 0 {
            100.0 * stats.matches[n] as f64 / total
        } else {
            match cfg.smoothing {
                Smoothing::None => 0.0,
                Smoothing::Exp => {
                    exp_divisor *= 2.0;
                    100.0 / (exp_divisor * total)
                }
                Smoothing::Floor(v) => 100.0 * v / total,
            }
        };
    }
    report.brevity_penalty = if stats.hyp_len >= stats.ref_len {
        1.0
    } else if stats.hyp_len == 0 {
        0.0
    } else {
        (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
    };
    let log_sum: f64 = report
        .precisions
        .iter()
        .map(|&p| if p == 0.0 { LOG_ZERO } else { (p / 100.0).ln() })
        .sum();
    // Averaging logs of fractions rather than percentages keeps a perfect
    // match at exactly 100.
    report.score = 100.0 * report.brevity_penalty * (log_sum / MAX_ORDER as f64).exp();
    report
}

pub fn corpus_bleu_with<H: AsRef<str> + Sync, R: AsRef<str> + Sync>(
    hyps: &[H],
    refs: &[R],
    cfg: &BleuConfig,
    exec: Execution,
) -> Result<BleuReport, MetricError> {
    if hyps.len() != refs.len() {
        return Err(MetricError::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    // Integer statistics, so the reduction order does not matter.
    let per_segment = exec.map_range(hyps.len(), |i| segment_stats(hyps[i].as_ref(), refs[i].as_ref(), cfg));
    let total = per_segment.into_iter().fold(SegmentStats::default(), |a, b| a + b);
    Ok(score_from_stats(&total, cfg))
}

/// Corpus BLEU: case-sensitive, `intl` tokenization, no smoothing.
pub fn corpus_bleu<H: AsRef<str> + Sync, R: AsRef<str> + Sync>(hyps: &[H], refs: &[R]) -> Result<BleuReport, MetricError> {
    corpus_bleu_with(hyps, refs, &BleuConfig::default(), Execution::default())
}
