//! Translation and alignment scoring.

mod alignment;
mod bleu;
mod timed;
mod tokenize;

pub use alignment::{
    frame_accuracy, frame_accuracy_corpus, frame_labels, length_scaling_align, AlignmentReport, VideoAlignment,
    DEFAULT_EVAL_FPS,
};
pub use bleu::{corpus_bleu, corpus_bleu_with, score_from_stats, segment_stats, BleuConfig, BleuReport, SegmentStats, Smoothing};
pub use timed::{char_times, corpus_timed_bleu, export_resliced, reslice_by_reference, timed_bleu, timed_bleu_with, ReslicedSegment};
pub use tokenize::tokenize_intl;

use crate::captions::CaptionError;
use crate::time::SpanError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("predicted track lasts {pred} s but reference lasts {reference} s")]
    DurationMismatch { pred: f64, reference: f64 },
    #[error("no caption text to align")]
    EmptyTexts,
    #[error(transparent)]
    Caption(#[from] CaptionError),
}

impl From<SpanError> for MetricError {
    fn from(e: SpanError) -> Self {
        MetricError::Caption(e.into())
    }
}
