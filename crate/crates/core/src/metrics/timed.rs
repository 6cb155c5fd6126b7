//! Timed BLEU: a timed hypothesis is resliced onto the reference caption
//! spans by giving every hypothesis character a time, then scored with
//! corpus BLEU against the reference texts.

use serde::{Deserialize, Serialize};

use super::bleu::{corpus_bleu_with, BleuConfig, BleuReport};
use super::MetricError;
use crate::captions::{Caption, CaptionTrack};
use crate::grammar::normalize_whitespace;
use crate::par::Execution;

/// Midpoint time of each character: `start + (i + 0.5) * duration / k`.
pub fn char_times(caption: &Caption) -> Vec<f64> {
    let k = caption.text.chars().count();
    let step = caption.duration() / k as f64;
    (0..k).map(|i| caption.span.start_s + (i as f64 + 0.5) * step).collect()
}

fn segment_of(refs: &[Caption], t: f64) -> Option<usize> {
    // Last reference starting at or before t.
    let idx = refs.partition_point(|r| r.span.start_s <= t);
    let j = idx.checked_sub(1)?;
    (t < refs[j].span.end_s).then_some(j)
}

/// One hypothesis string per reference caption. Characters timed inside
/// `[ref.start, ref.end)` go to that reference; characters outside every
/// reference are dropped. Text from different hypothesis captions is
/// space-separated, and whitespace is normalized at the end.
pub fn reslice_by_reference(hyp: &[Caption], refs: &[Caption]) -> Vec<String> {
    let mut segments = vec![String::new(); refs.len()];
    let mut last_source: Vec<Option<usize>> = vec![None; refs.len()];
    for (h_idx, cap) in hyp.iter().enumerate() {
        for (ch, t) in cap.text.chars().zip(char_times(cap)) {
            let Some(j) = segment_of(refs, t) else { continue };
            if last_source[j].is_some_and(|prev| prev != h_idx) {
                segments[j].push(' ');
            }
            last_source[j] = Some(h_idx);
            segments[j].push(ch);
        }
    }
    segments.iter().map(|s| normalize_whitespace(s)).collect()
}

pub fn timed_bleu_with(hyp: &CaptionTrack, reference: &CaptionTrack, cfg: &BleuConfig, exec: Execution) -> Result<BleuReport, MetricError> {
    let resliced = reslice_by_reference(hyp.captions(), reference.captions());
    corpus_bleu_with(&resliced, &reference.texts(), cfg, exec)
}

pub fn timed_bleu(hyp: &CaptionTrack, reference: &CaptionTrack) -> Result<BleuReport, MetricError> {
    timed_bleu_with(hyp, reference, &BleuConfig::default(), Execution::default())
}

/// Timed BLEU over many videos: segments from every pair are pooled into
/// one corpus.
pub fn corpus_timed_bleu(pairs: &[(&CaptionTrack, &CaptionTrack)], cfg: &BleuConfig, exec: Execution) -> Result<BleuReport, MetricError> {
    let resliced = exec.map_slice(pairs, |(h, r)| reslice_by_reference(h.captions(), r.captions()));
    let hyps: Vec<String> = resliced.into_iter().flatten().collect();
    let refs: Vec<&str> = pairs.iter().flat_map(|(_, r)| r.texts()).collect();
    corpus_bleu_with(&hyps, &refs, cfg, exec)
}

/// One line of the resliced-segment export consumed by external scorers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReslicedSegment {
    pub segment_id: String,
    pub hyp_text: String,
    pub ref_text: String,
}

pub fn export_resliced(video_id: &str, hyp: &CaptionTrack, reference: &CaptionTrack) -> Vec<ReslicedSegment> {
    reslice_by_reference(hyp.captions(), reference.captions())
        .into_iter()
        .zip(reference.captions())
        .map(|(h, r)| ReslicedSegment {
            segment_id: format!("{video_id}:{}", r.index),
            hyp_text: h,
            ref_text: r.text.clone(),
        })
        .collect()
}
