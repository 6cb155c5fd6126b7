//! Chunked autoregressive decoding of whole videos through a pluggable
//! translator.
//!
//! A video is processed in windows of at most `window_s` seconds. In each
//! window the translator sees the window's features plus the text accepted
//! so far, and its timed output is parsed. Only captions that start after
//! the head margin and end before the tail margin are kept; the next window
//! then starts `head_margin_s` before the end of the last kept caption, so
//! the following caption is seen with left context and lands inside the
//! acceptance region. A window that keeps nothing moves on by
//! `fallback_stride_s`. The first window has no head margin and the final
//! window no tail margin.

mod mock;
mod subprocess;

pub use mock::{EmptyTranslator, JitterOracle, OracleTranslator, StutterTranslator};
pub use subprocess::{SubprocessTranslator, TranslateRequest, TranslateResponse};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::captions::{Caption, CaptionError, CaptionTrack, FeatureSlice, FeatureTrack};
use crate::grammar::{
    parse_timed_track, render_alignment_input, render_translation_input, truncate_context, BreakMode, LineErrorKind,
    SpanMode, Timing, TimestampGrammar, UnitTokenizer, WhitespaceTokenizer, DEFAULT_CONTEXT_BUDGET,
};
use crate::time::{quantize, TimeSpan, TIME_EPS};

/// The model, as seen by the driver. Calls must not depend on earlier calls.
pub trait TranslatorPort: Send + Sync {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError>;
}

impl<T: TranslatorPort + ?Sized> TranslatorPort for Box<T> {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError> {
        (**self).translate(features, input_text)
    }
}

impl<T: TranslatorPort + ?Sized> TranslatorPort for &T {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError> {
        (**self).translate(features, input_text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct TranslatorError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub window_s: f64,
    pub head_margin_s: f64,
    pub tail_margin_s: f64,
    pub fallback_stride_s: f64,
    /// Prior-text budget in whitespace-separated units.
    pub context_budget: usize,
    /// Hard cap on windows per video. `None` allows two windows per second
    /// of video, plus two.
    pub max_windows: Option<usize>,
    /// Mean caption duration passed as `<|avgdur:S.S|>`, if known.
    pub avgdur_s: Option<f64>,
    /// Alignment stops when the normalized edit distance between a window's
    /// accepted lines and the captions they claim to align exceeds this.
    pub decoherence_threshold: f64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            window_s: 34.0,
            head_margin_s: 4.0,
            tail_margin_s: 10.0,
            fallback_stride_s: 20.0,
            context_budget: DEFAULT_CONTEXT_BUDGET,
            max_windows: None,
            avgdur_s: None,
            decoherence_threshold: 0.5,
        }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        let bad = |m: &str| Err(DriverError::InvalidConfig(m.to_owned()));
        if !(self.window_s > 0.0) {
            return bad("window_s must be positive");
        }
        if self.head_margin_s < 0.0 || self.tail_margin_s < 0.0 {
            return bad("margins must be non-negative");
        }
        if self.head_margin_s + self.tail_margin_s >= self.window_s {
            return bad("head + tail margins must be shorter than the window");
        }
        if !(self.fallback_stride_s > 0.0) {
            return bad("fallback_stride_s must be positive");
        }
        if !(0.0..=1.0).contains(&self.decoherence_threshold) {
            return bad("decoherence_threshold must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn window_cap(&self, duration_s: f64) -> usize {
        self.max_windows
            .unwrap_or_else(|| 2 * duration_s.max(0.0).ceil() as usize + 2)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DriverError {
    #[error("translator failed in window {window_index} {window}: {source}")]
    TranslatorFailure {
        window_index: usize,
        window: TimeSpan,
        source: TranslatorError,
    },
    #[error("no progress after {windows} windows (last window started at {last_start_s:.1} s)")]
    LivelockGuardTripped { windows: usize, last_start_s: f64 },
    #[error("window {window_index} {window}: output diverged from the input captions (edit distance {distance:.2})")]
    DecoherenceDetected {
        window_index: usize,
        window: TimeSpan,
        distance: f64,
        /// Captions aligned before the divergence.
        partial: Box<CaptionTrack>,
        /// Indices of captions never aligned.
        unconsumed: Vec<usize>,
    },
    #[error("clip of {clip_s:.1} s exceeds the {window_s:.1} s window")]
    ClipTooLong { clip_s: f64, window_s: f64 },
    #[error("invalid driver config: {0}")]
    InvalidConfig(String),
    #[error("video duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error(transparent)]
    Caption(#[from] CaptionError),
}

/// Frames of one video plus what the driver needs to cut and label them.
#[derive(Debug, Clone, Copy)]
pub struct VideoInput<'a> {
    pub features: &'a FeatureTrack,
    pub duration_s: f64,
    /// Reported to translators that read frames from disk.
    pub feature_file: Option<&'a Path>,
}

impl<'a> VideoInput<'a> {
    pub fn new(features: &'a FeatureTrack) -> Self {
        Self {
            features,
            duration_s: features.duration_s(),
            feature_file: None,
        }
    }

    pub fn with_duration(self, duration_s: f64) -> Self {
        Self { duration_s, ..self }
    }

    pub fn with_feature_file(self, path: &'a Path) -> Self {
        Self {
            feature_file: Some(path),
            ..self
        }
    }

    fn slice(&self, span: TimeSpan) -> FeatureSlice {
        let mut slice = self.features.slice_clamped(span);
        slice.span = span;
        slice.source = self.feature_file.map(Path::to_path_buf);
        slice
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Malformed(LineErrorKind),
    /// Starts inside the head margin.
    BeforeHead,
    /// Ends inside the tail margin.
    AfterTail,
    /// Starts before the end of an already accepted caption.
    OverlapsAccepted,
    /// An earlier line of the same window was rejected, so this one cannot
    /// be matched to its caption.
    AfterRejectedLine,
    /// More alignment lines than remaining captions.
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub text: String,
    /// Absolute span, when the line parsed.
    pub span: Option<TimeSpan>,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvanceReason {
    AfterAccepted,
    BeforeRejected,
    FallbackStride,
    VideoEnd,
    AllCaptionsAligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub index: usize,
    pub span: TimeSpan,
    /// Absolute region accepted captions had to fit in.
    pub acceptance: TimeSpan,
    pub input_text: String,
    pub raw_output: String,
    pub accepted: Vec<Caption>,
    pub rejected: Vec<RejectedLine>,
    pub advance: AdvanceReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub windows: Vec<WindowRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentOutcome {
    pub track: CaptionTrack,
    /// Indices of captions that were never placed.
    pub unconsumed: Vec<usize>,
    pub trace: DecodeTrace,
}

struct Window {
    index: usize,
    span: TimeSpan,
    acceptance: TimeSpan,
    is_final: bool,
}

/// Window position bookkeeping shared by the translation and alignment
/// loops.
struct Windower<'a> {
    cfg: &'a DriverConfig,
    quantum_s: f64,
    duration_s: f64,
    cap: usize,
    start_s: f64,
    index: usize,
}

impl<'a> Windower<'a> {
    fn new(cfg: &'a DriverConfig, grammar: &TimestampGrammar, duration_s: f64) -> Result<Self, DriverError> {
        cfg.validate()?;
        if !(duration_s > 0.0) {
            return Err(DriverError::NonPositiveDuration(duration_s));
        }
        Ok(Self {
            cfg,
            quantum_s: grammar.quantum_s,
            duration_s,
            cap: cfg.window_cap(duration_s),
            start_s: 0.0,
            index: 0,
        })
    }

    fn current(&self) -> Result<Window, DriverError> {
        if self.index >= self.cap {
            return Err(DriverError::LivelockGuardTripped {
                windows: self.index,
                last_start_s: self.start_s,
            });
        }
        let end = (self.start_s + self.cfg.window_s).min(self.duration_s);
        let is_final = self.start_s + self.cfg.window_s >= self.duration_s - TIME_EPS;
        let lo = if self.index == 0 { self.start_s } else { self.start_s + self.cfg.head_margin_s };
        let hi = if is_final { end } else { end - self.cfg.tail_margin_s };
        Ok(Window {
            index: self.index,
            span: TimeSpan { start_s: self.start_s, end_s: end },
            acceptance: TimeSpan {
                start_s: lo,
                end_s: hi.max(lo),
            },
            is_final,
        })
    }

    /// Moves to the next window. `anchor_s` is where the next caption to
    /// present is expected to start.
    fn advance(&mut self, anchor_s: Option<f64>, reason: AdvanceReason) -> AdvanceReason {
        let candidate = anchor_s.map(|a| quantize(a - self.cfg.head_margin_s, self.quantum_s));
        let (next, reason) = match candidate {
            Some(c) if c > self.start_s + TIME_EPS => (c, reason),
            _ => (
                quantize(self.start_s + self.cfg.fallback_stride_s, self.quantum_s),
                AdvanceReason::FallbackStride,
            ),
        };
        self.start_s = next;
        self.index += 1;
        reason
    }
}

/// Sorts parsed lines against the acceptance region and the accepted
/// history.
fn timing_verdict(span: &TimeSpan, window: &Window, last_end_s: f64) -> Option<RejectReason> {
    if span.start_s < last_end_s - TIME_EPS {
        Some(RejectReason::OverlapsAccepted)
    } else if span.start_s < window.acceptance.start_s - TIME_EPS {
        Some(RejectReason::BeforeHead)
    } else if span.end_s > window.acceptance.end_s + TIME_EPS {
        Some(RejectReason::AfterTail)
    } else {
        None
    }
}

/// Where the next window should pick up, given this window's outcome.
fn next_anchor(accepted: &[Caption], first_rejected_start: Option<f64>, window: &Window) -> (Option<f64>, AdvanceReason) {
    let rejected = first_rejected_start.filter(|&s| s < window.acceptance.end_s - TIME_EPS);
    match (accepted.last(), rejected) {
        (Some(last), Some(r)) if r < last.span.end_s => (Some(r), AdvanceReason::BeforeRejected),
        (Some(last), _) => (Some(last.span.end_s), AdvanceReason::AfterAccepted),
        (None, Some(r)) => (Some(r), AdvanceReason::BeforeRejected),
        (None, None) => (None, AdvanceReason::FallbackStride),
    }
}

/// Parses timed output in absolute time, snapping boundaries to the
/// absolute quantum grid.
fn parse_window(raw: &str, window: &Window, grammar: &TimestampGrammar) -> crate::grammar::ParsedTrack {
    let mut parsed = parse_timed_track(raw, window.span.start_s, &grammar.with_max(window.span.duration()));
    for c in &mut parsed.captions {
        c.span.start_s = quantize(c.span.start_s, grammar.quantum_s);
        c.span.end_s = quantize(c.span.end_s, grammar.quantum_s).min(window.span.end_s).max(c.span.start_s);
    }
    parsed
}

fn parse_failures(diagnostics: &[crate::grammar::LineDiagnostic]) -> impl Iterator<Item = RejectedLine> + '_ {
    diagnostics.iter().map(|d| RejectedLine {
        text: d.text.clone(),
        span: None,
        reason: RejectReason::Malformed(d.kind),
    })
}

fn call(
    translator: &dyn TranslatorPort,
    video: &VideoInput,
    window: &Window,
    input: &str,
) -> Result<String, DriverError> {
    translator
        .translate(&video.slice(window.span), input)
        .map_err(|source| DriverError::TranslatorFailure {
            window_index: window.index,
            window: window.span,
            source,
        })
}

/// Timed translation of a whole video. Accepted captions are returned in
/// absolute time; the trace records every window.
pub fn run_timed_translation(
    video: &VideoInput,
    translator: &dyn TranslatorPort,
    cfg: &DriverConfig,
    grammar: &TimestampGrammar,
) -> Result<(CaptionTrack, DecodeTrace), DriverError> {
    let mut windower = Windower::new(cfg, grammar, video.duration_s)?;
    let tokenizer = WhitespaceTokenizer;
    let mut accepted_all: Vec<Caption> = Vec::new();
    let mut trace = DecodeTrace::default();

    loop {
        let window = windower.current()?;
        let prior: Vec<&str> = accepted_all.iter().map(|c| c.text.as_str()).collect();
        let context = truncate_context(&prior, cfg.context_budget, &tokenizer);
        let input = render_translation_input(Timing::Timed, cfg.avgdur_s, Some(&context), None, grammar);
        let raw = call(translator, video, &window, &input)?;

        let parsed = parse_window(&raw, &window, grammar);
        let mut rejected: Vec<RejectedLine> = parse_failures(&parsed.diagnostics).collect();
        let mut accepted = Vec::new();
        let mut first_rejected_start = None;
        let mut last_end = accepted_all.last().map_or(0.0, |c| c.span.end_s);
        for cap in parsed.captions {
            match timing_verdict(&cap.span, &window, last_end) {
                None => {
                    last_end = cap.span.end_s;
                    accepted.push(cap);
                }
                Some(reason) => {
                    if reason != RejectReason::OverlapsAccepted && first_rejected_start.is_none() {
                        first_rejected_start = Some(cap.span.start_s);
                    }
                    rejected.push(RejectedLine {
                        text: cap.text,
                        span: Some(cap.span),
                        reason,
                    });
                }
            }
        }

        let advance = if window.is_final {
            AdvanceReason::VideoEnd
        } else {
            let (anchor, reason) = next_anchor(&accepted, first_rejected_start, &window);
            windower.advance(anchor, reason)
        };
        accepted_all.extend(accepted.iter().cloned());
        trace.windows.push(WindowRecord {
            index: window.index,
            span: window.span,
            acceptance: window.acceptance,
            input_text: input,
            raw_output: raw,
            accepted,
            rejected,
            advance,
        });
        if window.is_final {
            break;
        }
    }
    Ok((CaptionTrack::new(accepted_all, video.duration_s)?, trace))
}

/// Untimed discourse translation: the timed loop drives the windows, and
/// the accepted texts are joined with single spaces.
pub fn run_untimed_discourse(
    video: &VideoInput,
    translator: &dyn TranslatorPort,
    cfg: &DriverConfig,
    grammar: &TimestampGrammar,
) -> Result<(String, DecodeTrace), DriverError> {
    let (track, trace) = run_timed_translation(video, translator, cfg, grammar)?;
    Ok((track.texts().join(" "), trace))
}

/// One untimed call on a single clip, optionally conditioned on earlier
/// text. The output is returned as produced.
pub fn run_sentence_level(
    video: &VideoInput,
    clip: TimeSpan,
    prior_context: Option<&str>,
    translator: &dyn TranslatorPort,
    cfg: &DriverConfig,
    grammar: &TimestampGrammar,
) -> Result<String, DriverError> {
    cfg.validate()?;
    if clip.duration() > cfg.window_s + TIME_EPS {
        return Err(DriverError::ClipTooLong {
            clip_s: clip.duration(),
            window_s: cfg.window_s,
        });
    }
    let context = prior_context.map(|c| truncate_context(&[c], cfg.context_budget, &WhitespaceTokenizer));
    let input = render_translation_input(Timing::Untimed, cfg.avgdur_s, context.as_deref(), None, grammar);
    let window = Window {
        index: 0,
        span: clip,
        acceptance: clip,
        is_final: true,
    };
    call(translator, video, &window, &input)
}

/// How many of `texts` fit the budget, always at least one.
fn captions_within_budget(texts: &[&str], budget: usize, tokenizer: &dyn UnitTokenizer) -> usize {
    let mut used = 0;
    let mut n = 0;
    for t in texts {
        used += tokenizer.count(t);
        if n > 0 && used > budget {
            break;
        }
        n += 1;
    }
    n
}

/// Aligns known caption texts to the video, consuming them in order.
pub fn run_alignment<S: AsRef<str>>(
    video: &VideoInput,
    caption_texts: &[S],
    translator: &dyn TranslatorPort,
    cfg: &DriverConfig,
    grammar: &TimestampGrammar,
) -> Result<AlignmentOutcome, DriverError> {
    let texts: Vec<&str> = caption_texts.iter().map(|t| t.as_ref().trim()).collect();
    let mut windower = Windower::new(cfg, grammar, video.duration_s)?;
    let tokenizer = WhitespaceTokenizer;
    let mut aligned: Vec<Caption> = Vec::new();
    let mut trace = DecodeTrace::default();

    while aligned.len() < texts.len() {
        let window = windower.current()?;
        let k = aligned.len();
        let last_end = aligned.last().map(|c| c.span.end_s);
        let left = last_end.map_or(0.0, |e| (e - window.span.start_s).clamp(0.0, window.span.duration()));
        let m = captions_within_budget(&texts[k..], cfg.context_budget, &tokenizer);
        let input = render_alignment_input(
            BreakMode::InputSpecifies,
            cfg.avgdur_s,
            SpanMode::Overflow,
            left,
            &texts[k..k + m],
            grammar,
        );
        let raw = call(translator, video, &window, &input)?;

        let parsed = parse_window(&raw, &window, grammar);
        let mut rejected: Vec<RejectedLine> = parse_failures(&parsed.diagnostics).collect();
        let mut accepted: Vec<Caption> = Vec::new();
        let mut claimed: Vec<&str> = Vec::new();
        let mut first_rejected_start = None;
        let mut prev_end = last_end.unwrap_or(0.0);
        let mut blocked = false;
        for (i, line) in parsed.captions.into_iter().enumerate() {
            let verdict = if i >= m {
                Some(RejectReason::Unmatched)
            } else if blocked {
                Some(RejectReason::AfterRejectedLine)
            } else {
                timing_verdict(&line.span, &window, prev_end)
            };
            match verdict {
                None => {
                    prev_end = line.span.end_s;
                    claimed.push(texts[k + i]);
                    accepted.push(Caption {
                        span: line.span,
                        text: line.text,
                        index: k + i,
                    });
                }
                Some(reason) => {
                    if !blocked && first_rejected_start.is_none() {
                        first_rejected_start = Some(line.span.start_s);
                    }
                    blocked = true;
                    rejected.push(RejectedLine {
                        text: line.text,
                        span: Some(line.span),
                        reason,
                    });
                }
            }
        }

        if !accepted.is_empty() {
            let produced: Vec<&str> = accepted.iter().map(|c| c.text.as_str()).collect();
            let distance = 1.0 - strsim::normalized_levenshtein(&produced.join(" "), &claimed.join(" "));
            if distance > cfg.decoherence_threshold {
                return Err(DriverError::DecoherenceDetected {
                    window_index: window.index,
                    window: window.span,
                    distance,
                    partial: Box::new(CaptionTrack::new(aligned, video.duration_s)?),
                    unconsumed: (k..texts.len()).collect(),
                });
            }
        }
        // The output track carries the given texts, not the model's copies.
        for cap in &mut accepted {
            cap.text = texts[cap.index].to_owned();
        }

        let done = aligned.len() + accepted.len() == texts.len();
        let advance = if done {
            AdvanceReason::AllCaptionsAligned
        } else if window.is_final {
            AdvanceReason::VideoEnd
        } else {
            let (anchor, reason) = next_anchor(&accepted, first_rejected_start, &window);
            windower.advance(anchor, reason)
        };
        aligned.extend(accepted.iter().cloned());
        trace.windows.push(WindowRecord {
            index: window.index,
            span: window.span,
            acceptance: window.acceptance,
            input_text: input,
            raw_output: raw,
            accepted,
            rejected,
            advance,
        });
        if window.is_final {
            break;
        }
    }
    let unconsumed = (aligned.len()..texts.len()).collect();
    Ok(AlignmentOutcome {
        track: CaptionTrack::new(aligned, video.duration_s)?,
        unconsumed,
        trace,
    })
}

#[cfg(test)]
mod tests;
