//! Control-token grammar for the multitask mixture.
//!
//! Control tokens are plain text of the form `<|...|>`:
//!
//! | token                 | meaning                                        |
//! |-----------------------|------------------------------------------------|
//! | `<|align|>`           | caption alignment task                         |
//! | `<|translate|>`       | translation task                               |
//! | `<|timed|>`           | translation target carries timestamps          |
//! | `<|untimed|>`         | translation target is plain text               |
//! | `<|breaks:given|>`    | alignment input lists one caption per line     |
//! | `<|breaks:predict|>`  | alignment input is space-joined                |
//! | `<|overflow|>`        | captions to align may run past the clip        |
//! | `<|subset|>`          | captions to align are a prefix of the clip's   |
//! | `<|avgdur:S.S|>`      | mean caption duration of the source video      |
//! | `<|left:S.S|>`        | end of the caption crossing the clip start     |
//! | `<|prev|>`/`<|next|>` | context caption text                           |
//! | `<|S.S|>`             | clip-relative timestamp                        |
//!
//! A timed track renders as one caption per line:
//! `<|6.0|><|13.9|> hello world`.

mod context;
mod example;
mod input;
mod task;
mod timed;

pub use context::{truncate_context, truncate_context_prefix, UnitTokenizer, WhitespaceTokenizer, DEFAULT_CONTEXT_BUDGET};
pub use example::{draw_task, render_example, synthesize_examples, ExampleRecord, ExampleRenderer, FeatureRef, ModelExample};
pub use input::{parse_input_header, render_alignment_input, render_translation_input, InputHeader};
pub use task::{
    sample_task, sample_task_choices, BreakMode, ContextMode, MixtureWeights, SpanMode, TaskChoices, TaskDescriptor,
    Timing,
};
pub use timed::{parse_timed_track, render_timed_track, LineDiagnostic, LineErrorKind, ParsedTrack, TimestampGrammar};

use crate::time::TimeSpan;

pub const TAG_ALIGN: &str = "<|align|>";
pub const TAG_TRANSLATE: &str = "<|translate|>";
pub const TAG_TIMED: &str = "<|timed|>";
pub const TAG_UNTIMED: &str = "<|untimed|>";
pub const TAG_BREAKS_GIVEN: &str = "<|breaks:given|>";
pub const TAG_BREAKS_PREDICT: &str = "<|breaks:predict|>";
pub const TAG_OVERFLOW: &str = "<|overflow|>";
pub const TAG_SUBSET: &str = "<|subset|>";
pub const TAG_PREV: &str = "<|prev|>";
pub const TAG_NEXT: &str = "<|next|>";

pub(crate) fn avgdur_token(value: &str) -> String {
    format!("<|avgdur:{value}|>")
}

pub(crate) fn left_token(value: &str) -> String {
    format!("<|left:{value}|>")
}

/// Collapses all whitespace runs (including newlines) to single spaces.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrammarError {
    #[error("caption {index} {span} lies outside the window starting at {origin_s} of length {max_s}")]
    CaptionOutsideWindow { index: usize, span: TimeSpan, origin_s: f64, max_s: f64 },
    #[error("clip has no feature frames")]
    EmptyClip,
    #[error("clip {clip} is not inside chunk {chunk}")]
    ClipOutsideChunk { clip: TimeSpan, chunk: TimeSpan },
    #[error("example invalid: {0}")]
    Invalid(String),
}
