use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::context::{truncate_context, truncate_context_prefix, UnitTokenizer, WhitespaceTokenizer, DEFAULT_CONTEXT_BUDGET};
use super::input::{render_alignment_input, render_translation_input};
use super::task::{sample_task_choices, ContextMode, MixtureWeights, SpanMode, TaskDescriptor, Timing};
use super::timed::{parse_timed_track, render_timed_track, TimestampGrammar};
use super::*;
use crate::captions::{classify_window_captions, Caption, FeatureSlice};
use crate::chunker::{sample_clip, schedule_slot, ChunkRecord, ClipSpec, SamplerConfig};
use crate::par::Execution;
use crate::rng::keyed_rng;
use crate::time::{TimeSpan, TIME_EPS};

/// A rendered training pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExample {
    pub input_text: String,
    pub target_text: String,
    pub feature_slice: FeatureSlice,
    pub clip: ClipSpec,
    /// Absolute clip span in the source video.
    pub clip_span: TimeSpan,
    pub descriptor: TaskDescriptor,
    /// Target lines (0-based) whose end time was clamped to the clip end
    /// because the caption runs past it.
    pub clamped_lines: Vec<usize>,
}

/// Text following the `<|prev|>` marker, if the input has one.
pub(crate) fn prior_context(input: &str) -> Option<&str> {
    input
        .lines()
        .find_map(|l| l.strip_prefix(TAG_PREV))
        .map(str::trim)
}

fn clip_features(chunk: &ChunkRecord, span: TimeSpan) -> Result<FeatureSlice, GrammarError> {
    let feats = chunk.features.as_ref().ok_or(GrammarError::EmptyClip)?;
    let fps = feats.fps as f64;
    let abs_first = (span.start_s * fps + 1e-9).floor() as usize;
    let abs_last = (span.end_s * fps + 1e-9).floor() as usize;
    let available = feats.n_frames();
    let first = abs_first.saturating_sub(feats.start_frame).min(available);
    let last = abs_last.saturating_sub(feats.start_frame).min(available);
    if last <= first {
        return Err(GrammarError::EmptyClip);
    }
    Ok(FeatureSlice {
        span,
        start_frame: feats.start_frame + first,
        fps: feats.fps,
        dim: feats.dim,
        data: feats.data[first * feats.dim..last * feats.dim].to_vec(),
        source: feats.source.clone(),
    })
}

fn texts(caps: &[Caption]) -> Vec<String> {
    caps.iter().map(|c| normalize_whitespace(&c.text)).collect()
}

/// Renders examples with a fixed grammar, context budget and tokenizer.
pub struct ExampleRenderer {
    pub grammar: TimestampGrammar,
    pub budget: usize,
    pub tokenizer: Box<dyn UnitTokenizer>,
}

impl Default for ExampleRenderer {
    fn default() -> Self {
        Self {
            grammar: TimestampGrammar::default(),
            budget: DEFAULT_CONTEXT_BUDGET,
            tokenizer: Box::new(WhitespaceTokenizer),
        }
    }
}

impl ExampleRenderer {
    pub fn new(grammar: TimestampGrammar) -> Self {
        Self {
            grammar,
            ..Self::default()
        }
    }

    /// Builds the (input, target) pair for one clip. `rng` is only used for
    /// the prefix length of alignment-subset examples.
    pub fn render<R: Rng + ?Sized>(
        &self,
        chunk: &ChunkRecord,
        clip: &ClipSpec,
        desc: &TaskDescriptor,
        rng: &mut R,
    ) -> Result<ModelExample, GrammarError> {
        let span = clip.absolute_span(chunk);
        if !chunk.span.contains_span(&span) {
            return Err(GrammarError::ClipOutsideChunk { clip: span, chunk: chunk.span });
        }
        let feature_slice = clip_features(chunk, span)?;
        let n = self.grammar.max_s;
        let window = classify_window_captions(&chunk.context_track(), span, n);
        let clip_len = span.duration();
        let grammar = self.grammar.with_max(clip_len.min(n));
        let avgdur = chunk.mean_caption_duration_s.unwrap_or(0.0);

        let mut clamped_lines = Vec::new();
        let (input_text, target_text) = match *desc {
            TaskDescriptor::Translation {
                timing,
                duration_conditioning,
                context,
            } => {
                let prev = matches!(context, ContextMode::Prev | ContextMode::PrevAndNext)
                    .then(|| truncate_context(&texts(&window.prev), self.budget, self.tokenizer.as_ref()));
                let next = (context == ContextMode::PrevAndNext)
                    .then(|| truncate_context_prefix(&texts(&window.next), self.budget, self.tokenizer.as_ref()));
                let input = render_translation_input(
                    timing,
                    duration_conditioning.then_some(avgdur),
                    prev.as_deref(),
                    next.as_deref(),
                    &grammar,
                );
                let target = match timing {
                    Timing::Timed => render_timed_track(&window.curr, span.start_s, &grammar)?,
                    Timing::Untimed => texts(&window.curr).join(" "),
                };
                (input, target)
            }
            TaskDescriptor::Alignment {
                breaks,
                duration_conditioning,
                span_mode,
            } => {
                let (to_align, targets): (Vec<Caption>, Vec<Caption>) = match span_mode {
                    SpanMode::Overflow => {
                        let mut input: Vec<Caption> = window
                            .curr
                            .iter()
                            .chain(&window.crossing_right)
                            .chain(&window.next)
                            .cloned()
                            .collect();
                        input.sort_by_key(|c| c.index);
                        input.dedup_by_key(|c| c.index);
                        let mut targets: Vec<Caption> = window.curr.iter().chain(&window.crossing_right).cloned().collect();
                        targets.sort_by_key(|c| c.index);
                        for (line, cap) in targets.iter_mut().enumerate() {
                            if cap.span.end_s > span.end_s + TIME_EPS {
                                cap.span.end_s = span.end_s;
                                clamped_lines.push(line);
                            }
                        }
                        (input, targets)
                    }
                    SpanMode::Subset => {
                        let k = if window.curr.is_empty() {
                            0
                        } else {
                            rng.gen_range(1..=window.curr.len())
                        };
                        let prefix = window.curr[..k].to_vec();
                        (prefix.clone(), prefix)
                    }
                };
                let left = window
                    .left_edge_end_s
                    .map_or(0.0, |e| (e - span.start_s).clamp(0.0, clip_len));
                let input = render_alignment_input(
                    breaks,
                    duration_conditioning.then_some(avgdur),
                    span_mode,
                    left,
                    &texts(&to_align),
                    &grammar,
                );
                let target = render_timed_track(&targets, span.start_s, &grammar)?;
                (input, target)
            }
        };

        Ok(ModelExample {
            input_text,
            target_text,
            feature_slice,
            clip: clip.clone(),
            clip_span: span,
            descriptor: *desc,
            clamped_lines,
        })
    }
}

/// The task for draw `draw_index` of `chunk`, plus the stream it came from
/// (the renderer takes further draws from it).
pub fn draw_task(seed: u64, chunk: &ChunkRecord, draw_index: u64, weights: &MixtureWeights) -> (TaskDescriptor, ChaCha8Rng) {
    let mut rng = keyed_rng(seed, &format!("task:{}", chunk.video_id), chunk.chunk_index, draw_index);
    let desc = sample_task_choices(&mut rng, weights).descriptor();
    (desc, rng)
}

/// Renders `count` examples round-robin over `records`. Clip `k` comes from
/// [`schedule_slot`]; its task is drawn from a stream keyed like the clip's
/// but under the video id `task:{video_id}`, so the two never share draws.
pub fn synthesize_examples(
    records: &[ChunkRecord],
    cfg: &SamplerConfig,
    weights: &MixtureWeights,
    renderer: &ExampleRenderer,
    count: usize,
    exec: Execution,
) -> Vec<Result<ModelExample, GrammarError>> {
    if records.is_empty() {
        return Vec::new();
    }
    exec.map_range(count, |k| {
        let (r, draw) = schedule_slot(k, records.len());
        let chunk = &records[r];
        let clip = sample_clip(chunk, cfg, draw);
        let (desc, mut rng) = draw_task(cfg.seed, chunk, draw, weights);
        renderer.render(chunk, &clip, &desc, &mut rng)
    })
}

/// [`ExampleRenderer::render`] with the default budget and tokenizer.
pub fn render_example<R: Rng + ?Sized>(
    chunk: &ChunkRecord,
    clip: &ClipSpec,
    desc: &TaskDescriptor,
    grammar: &TimestampGrammar,
    rng: &mut R,
) -> Result<ModelExample, GrammarError> {
    ExampleRenderer::new(*grammar).render(chunk, clip, desc, rng)
}

impl ModelExample {
    /// Checks the invariants a consumer of the training file can rely on.
    pub fn validate(&self, grammar: &TimestampGrammar, budget: usize, tokenizer: &dyn UnitTokenizer) -> Result<(), GrammarError> {
        let invalid = |m: String| Err(GrammarError::Invalid(m));
        if let Some(prev) = prior_context(&self.input_text) {
            let units = tokenizer.count(prev);
            if units > budget {
                return invalid(format!("prior context has {units} units, budget {budget}"));
            }
        }
        let max_frames = (grammar.max_s * self.feature_slice.fps as f64).ceil() as usize + 1;
        if self.feature_slice.n_frames() == 0 || self.feature_slice.n_frames() > max_frames {
            return invalid(format!("{} feature frames", self.feature_slice.n_frames()));
        }
        let timed_target = match self.descriptor {
            TaskDescriptor::Alignment { .. } => true,
            TaskDescriptor::Translation { timing, .. } => timing == Timing::Timed,
        };
        if timed_target {
            let parsed = parse_timed_track(
                &self.target_text,
                self.clip_span.start_s,
                &grammar.with_max(self.clip_span.duration().min(grammar.max_s)),
            );
            if let Some(d) = parsed.diagnostics.first() {
                return invalid(format!("target line {} rejected: {:?}", d.line, d.kind));
            }
        }
        Ok(())
    }

    /// The line-delimited training record for this example.
    pub fn to_record(&self, feature_file: Option<&str>) -> ExampleRecord {
        let start_frame = self.feature_slice.start_frame;
        ExampleRecord {
            input_text: self.input_text.clone(),
            target_text: self.target_text.clone(),
            feature_ref: FeatureRef {
                file: feature_file
                    .map(str::to_owned)
                    .or_else(|| self.feature_slice.source.as_ref().map(|p| p.display().to_string()))
                    .unwrap_or_default(),
                frame_range: [start_frame, start_frame + self.feature_slice.n_frames()],
            },
            video_id: self.clip.video_id.clone(),
            chunk_index: self.clip.chunk_index,
            clip_span: self.clip_span,
            descriptor: self.descriptor,
        }
    }
}

/// Where an example's frames live. `frame_range` is in absolute video frames;
/// subtract the chunk file's first frame to index into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRef {
    pub file: String,
    pub frame_range: [usize; 2],
}

/// One line of a training file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub input_text: String,
    pub target_text: String,
    pub feature_ref: FeatureRef,
    pub video_id: String,
    pub chunk_index: usize,
    pub clip_span: TimeSpan,
    pub descriptor: TaskDescriptor,
}
