//! `translate` and `align`: run the chunked driver over every video.

use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use signtrack::captions::{CaptionTrack, VideoRecord};
use signtrack::driver::{
    run_alignment, run_sentence_level, run_timed_translation, run_untimed_discourse, DecodeTrace, DriverConfig,
    DriverError, VideoInput, WindowRecord,
};
use signtrack::grammar::TimestampGrammar;
use signtrack::metrics::length_scaling_align;
use signtrack::par::Execution;
use signtrack::TimeSpan;

use crate::config::RunConfig;
use crate::exit::{data_msg, CmdResult};
use crate::io::{check_file_safe_ids, features_or_clock, write_jsonl, write_track_set, HypLine};
use crate::translator::TranslatorPool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Each reference caption's clip on its own.
    Sentence,
    /// Each caption's clip with the preceding reference captions as context.
    ContextSentence,
    /// Whole videos, timed captions out.
    DiscourseTimed,
    /// Whole videos, one untimed text per video.
    DiscourseUntimed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Chunked alignment through the translator.
    Model,
    /// Caption durations proportional to character counts.
    LengthScaling,
}

/// Time range the length-scaling baseline spreads captions over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingSpan {
    /// From the first caption's start to the last caption's end.
    Captions,
    /// The whole video.
    Video,
}

#[derive(Debug, Clone, Serialize)]
struct Diagnostic {
    video_id: String,
    severity: &'static str,
    message: String,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    video_id: &'a str,
    #[serde(flatten)]
    window: &'a WindowRecord,
}

fn trace_lines<'a>(results: &'a [(&'a VideoRecord, Option<DecodeTrace>)]) -> Vec<TraceLine<'a>> {
    results
        .iter()
        .filter_map(|(v, t)| t.as_ref().map(|t| (v, t)))
        .flat_map(|(v, t)| {
            t.windows.iter().map(|w| TraceLine {
                video_id: &v.entry.video_id,
                window: w,
            })
        })
        .collect()
}

enum Output {
    Track(CaptionTrack),
    Lines(Vec<HypLine>),
}

struct VideoResult {
    output: Option<Output>,
    trace: Option<DecodeTrace>,
    diagnostics: Vec<Diagnostic>,
}

fn error_result(video: &VideoRecord, message: String) -> VideoResult {
    VideoResult {
        output: None,
        trace: None,
        diagnostics: vec![Diagnostic {
            video_id: video.entry.video_id.clone(),
            severity: "error",
            message,
        }],
    }
}

pub struct Decoder<'a> {
    pub pool: &'a TranslatorPool,
    pub cfg: &'a DriverConfig,
    pub grammar: &'a TimestampGrammar,
}

impl Decoder<'_> {
    fn translate(&self, video: &VideoRecord, mode: Mode) -> VideoResult {
        let features = match features_or_clock(video) {
            Ok(f) => f,
            Err(e) => return error_result(video, e.to_string()),
        };
        let mut input = VideoInput::new(&features).with_duration(video.track.video_duration_s());
        if let Some(p) = &video.feature_path {
            input = input.with_feature_file(p);
        }
        let translator = self.pool.for_video(&video.track);
        let id = &video.entry.video_id;
        let result = match mode {
            Mode::DiscourseTimed => run_timed_translation(&input, translator.as_ref(), self.cfg, self.grammar)
                .map(|(track, trace)| (Output::Track(track), Some(trace))),
            Mode::DiscourseUntimed => run_untimed_discourse(&input, translator.as_ref(), self.cfg, self.grammar).map(
                |(text, trace)| {
                    let line = HypLine {
                        video_id: id.clone(),
                        caption_index: None,
                        text,
                    };
                    (Output::Lines(vec![line]), Some(trace))
                },
            ),
            Mode::Sentence | Mode::ContextSentence => {
                let mut lines = Vec::with_capacity(video.track.len());
                let mut warnings = Vec::new();
                let mut err = None;
                let texts = video.track.texts();
                for (i, cap) in video.track.captions().iter().enumerate() {
                    // Captions longer than the window are cut to its length.
                    let end = cap.span.end_s.min(cap.span.start_s + self.cfg.window_s);
                    if end < cap.span.end_s {
                        warnings.push(format!(
                            "caption {i} is {:.1} s long; translated its first {:.1} s",
                            cap.span.duration(),
                            self.cfg.window_s
                        ));
                    }
                    let clip = TimeSpan::new(cap.span.start_s, end).expect("caption spans are valid");
                    let prior = (mode == Mode::ContextSentence && i > 0)
                        .then(|| texts[..i].join(" "));
                    match run_sentence_level(&input, clip, prior.as_deref(), translator.as_ref(), self.cfg, self.grammar) {
                        Ok(text) => lines.push(HypLine {
                            video_id: id.clone(),
                            caption_index: Some(i),
                            text,
                        }),
                        Err(e) => {
                            err = Some(e);
                            break;
                        }
                    }
                }
                let diagnostics = warnings
                    .into_iter()
                    .map(|message| Diagnostic {
                        video_id: id.clone(),
                        severity: "warning",
                        message,
                    })
                    .collect();
                return match err {
                    Some(e) => {
                        let mut r = error_result(video, e.to_string());
                        r.diagnostics.splice(0..0, diagnostics);
                        r
                    }
                    None => VideoResult {
                        output: Some(Output::Lines(lines)),
                        trace: None,
                        diagnostics,
                    },
                };
            }
        };
        match result {
            Ok((output, trace)) => VideoResult {
                output: Some(output),
                trace,
                diagnostics: Vec::new(),
            },
            Err(e) => error_result(video, e.to_string()),
        }
    }

    fn align_model(&self, video: &VideoRecord) -> VideoResult {
        let features = match features_or_clock(video) {
            Ok(f) => f,
            Err(e) => return error_result(video, e.to_string()),
        };
        let mut input = VideoInput::new(&features).with_duration(video.track.video_duration_s());
        if let Some(p) = &video.feature_path {
            input = input.with_feature_file(p);
        }
        let translator = self.pool.for_video(&video.track);
        let id = video.entry.video_id.clone();
        match run_alignment(&input, &video.track.texts(), translator.as_ref(), self.cfg, self.grammar) {
            Ok(outcome) => {
                let diagnostics = if outcome.unconsumed.is_empty() {
                    Vec::new()
                } else {
                    vec![Diagnostic {
                        video_id: id,
                        severity: "warning",
                        message: format!("{} caption(s) were never placed", outcome.unconsumed.len()),
                    }]
                };
                VideoResult {
                    output: Some(Output::Track(outcome.track)),
                    trace: Some(outcome.trace),
                    diagnostics,
                }
            }
            Err(e @ DriverError::DecoherenceDetected { .. }) => {
                let message = e.to_string();
                let DriverError::DecoherenceDetected { partial, unconsumed, .. } = e else {
                    unreachable!()
                };
                VideoResult {
                    output: Some(Output::Track(*partial)),
                    trace: None,
                    diagnostics: vec![Diagnostic {
                        video_id: id,
                        severity: "warning",
                        message: format!("{message}; kept the captions before it, {} left unplaced", unconsumed.len()),
                    }],
                }
            }
            Err(e) => error_result(video, e.to_string()),
        }
    }
}

fn align_length_scaling(video: &VideoRecord, span_mode: ScalingSpan) -> VideoResult {
    let track = &video.track;
    let duration = track.video_duration_s();
    let caps = track.captions();
    let span = match (span_mode, caps.first(), caps.last()) {
        (_, None, _) | (_, _, None) => {
            return VideoResult {
                output: Some(Output::Track(CaptionTrack::empty(duration))),
                trace: None,
                diagnostics: Vec::new(),
            }
        }
        (ScalingSpan::Captions, Some(a), Some(b)) => TimeSpan::new(a.span.start_s, b.span.end_s),
        (ScalingSpan::Video, _, _) => TimeSpan::new(0.0, duration),
    }
    .expect("ordered captions give a valid span");
    match length_scaling_align(&track.texts(), span).and_then(|t| Ok(t.with_duration(duration)?)) {
        Ok(t) => VideoResult {
            output: Some(Output::Track(t)),
            trace: None,
            diagnostics: Vec::new(),
        },
        Err(e) => error_result(video, e.to_string()),
    }
}

/// Writes everything the videos produced, then fails if any video could not
/// be processed at all.
fn finish(out: &Path, run: &RunConfig, videos: &[VideoRecord], results: Vec<VideoResult>, writes_tracks: bool) -> CmdResult {
    let mut tracks = Vec::new();
    let mut lines = Vec::new();
    let mut diagnostics = Vec::new();
    let mut traces = Vec::new();
    for (video, r) in videos.iter().zip(results) {
        match r.output {
            Some(Output::Track(t)) => tracks.push((&video.entry, t)),
            Some(Output::Lines(l)) => lines.extend(l),
            None => {}
        }
        diagnostics.extend(r.diagnostics);
        traces.push((video, r.trace));
    }
    let track_refs: Vec<_> = tracks.iter().map(|(e, t)| (*e, t)).collect();
    if writes_tracks {
        write_track_set(out, run, &track_refs)?;
    } else {
        write_jsonl(&out.join("hypotheses.jsonl"), run, &lines)?;
    }
    let trace = trace_lines(&traces);
    if !trace.is_empty() {
        write_jsonl(&out.join("trace.jsonl"), run, &trace)?;
    }
    write_jsonl(&out.join("diagnostics.jsonl"), run, &diagnostics)?;
    for d in &diagnostics {
        eprintln!("{}: {}: {}", d.severity, d.video_id, d.message);
    }
    let failed = diagnostics.iter().filter(|d| d.severity == "error").count();
    if failed > 0 {
        return Err(data_msg(format!("{failed} video(s) failed; see {}", out.join("diagnostics.jsonl").display())));
    }
    Ok(())
}

pub fn translate(out: &Path, run: &RunConfig, videos: &[VideoRecord], mode: Mode, decoder: &Decoder, exec: Execution) -> CmdResult {
    check_file_safe_ids(videos)?;
    let results = exec.map_slice(videos, |v| decoder.translate(v, mode));
    finish(out, run, videos, results, mode == Mode::DiscourseTimed)
}

pub fn align_with_model(out: &Path, run: &RunConfig, videos: &[VideoRecord], decoder: &Decoder, exec: Execution) -> CmdResult {
    check_file_safe_ids(videos)?;
    let results = exec.map_slice(videos, |v| decoder.align_model(v));
    finish(out, run, videos, results, true)
}

pub fn align_by_length(out: &Path, run: &RunConfig, videos: &[VideoRecord], span: ScalingSpan, exec: Execution) -> CmdResult {
    check_file_safe_ids(videos)?;
    let results = exec.map_slice(videos, |v| align_length_scaling(v, span));
    finish(out, run, videos, results, true)
}
