//! Caption tracks, dataset manifests and feature tracks.
//!
//! A [`CaptionTrack`] is an ordered, non-overlapping list of timed captions
//! over one video. Everything else in the crate consumes tracks built here,
//! so the constructors enforce the track invariants once and the rest of the
//! code relies on them.

mod dataset;
mod features;
mod manifest;
mod stats;
mod subtitle;
mod window;

pub use dataset::{
    entry_paths, load_dataset, read_caption_track, read_feature_track, read_manifest, resolve, DatasetError, VideoRecord,
};
pub use features::{FeatureError, FeatureSlice, FeatureTrack, DEFAULT_FPS, FEATURE_MAGIC};
pub use manifest::{load_manifest, ManifestEntry, ManifestError, Split, PROVENANCE_KEY};
pub use stats::{compute_stats, percentile_nearest_rank, StatsError, StatsInput, StatsTable, TrackStats, PERCENTILES};
pub use subtitle::{parse_caption_file, serialize_caption_file, SubtitleFormat};
pub use window::{classify_window_captions, WindowCaptions};

use serde::{Deserialize, Serialize};

use crate::time::{SpanError, TimeSpan, TIME_EPS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaptionError {
    #[error("malformed cue at line {line}, column {col}: {message}")]
    MalformedCue { line: usize, col: usize, message: String },
    #[error("cue {index} at line {line} overlaps the previous cue")]
    OverlappingCues { index: usize, line: usize },
    #[error("cue {index} at line {line} has non-monotonic times")]
    NonMonotonicTimes { index: usize, line: usize },
    #[error("caption {index} has empty text")]
    EmptyText { index: usize },
    #[error("caption {index} span {span} falls outside the video [0, {duration_s}]")]
    OutsideVideo { index: usize, span: TimeSpan, duration_s: f64 },
    #[error("caption {index} cannot be written as {format}: {reason}")]
    Unrepresentable { index: usize, format: &'static str, reason: &'static str },
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// One timed text span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caption {
    pub span: TimeSpan,
    pub text: String,
    /// Ordinal within the owning track.
    pub index: usize,
}

impl Caption {
    /// Builds a caption, trimming surrounding whitespace from `text`.
    pub fn new(span: TimeSpan, text: impl AsRef<str>, index: usize) -> Result<Self, CaptionError> {
        let text = text.as_ref().trim();
        if text.is_empty() {
            return Err(CaptionError::EmptyText { index });
        }
        Ok(Self {
            span,
            text: text.to_owned(),
            index,
        })
    }

    pub fn start_s(&self) -> f64 {
        self.span.start_s
    }

    pub fn end_s(&self) -> f64 {
        self.span.end_s
    }

    pub fn duration(&self) -> f64 {
        self.span.duration()
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// Ordered, non-overlapping captions over a video of known duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrack", into = "RawTrack")]
pub struct CaptionTrack {
    captions: Vec<Caption>,
    video_duration_s: f64,
}

impl CaptionTrack {
    /// Validates ordering, non-overlap and containment, and renumbers
    /// caption indices to their position in the track.
    pub fn new(mut captions: Vec<Caption>, video_duration_s: f64) -> Result<Self, CaptionError> {
        TimeSpan::new(0.0, video_duration_s)?;
        for (i, cap) in captions.iter_mut().enumerate() {
            cap.index = i;
            TimeSpan::new(cap.span.start_s, cap.span.end_s)?;
            if cap.text.trim().is_empty() {
                return Err(CaptionError::EmptyText { index: i });
            }
            if cap.span.end_s > video_duration_s + TIME_EPS {
                return Err(CaptionError::OutsideVideo {
                    index: i,
                    span: cap.span,
                    duration_s: video_duration_s,
                });
            }
        }
        for (i, pair) in captions.windows(2).enumerate() {
            let (prev, next) = (&pair[0], &pair[1]);
            if next.span.start_s < prev.span.start_s {
                return Err(CaptionError::NonMonotonicTimes { index: i + 1, line: 0 });
            }
            if next.span.start_s < prev.span.end_s - TIME_EPS {
                return Err(CaptionError::OverlappingCues { index: i + 1, line: 0 });
            }
        }
        Ok(Self {
            captions,
            video_duration_s,
        })
    }

    /// Builds a track whose duration is the end of its last caption.
    pub fn from_captions(captions: Vec<Caption>) -> Result<Self, CaptionError> {
        let duration = captions.last().map_or(0.0, |c| c.span.end_s);
        Self::new(captions, duration)
    }

    pub fn empty(video_duration_s: f64) -> Self {
        Self {
            captions: Vec::new(),
            video_duration_s: video_duration_s.max(0.0),
        }
    }

    /// Convenience for tests and fixtures: `(start, end, text)` triples.
    pub fn from_triples<S: AsRef<str>>(
        triples: &[(f64, f64, S)],
        video_duration_s: f64,
    ) -> Result<Self, CaptionError> {
        let captions = triples
            .iter()
            .enumerate()
            .map(|(i, (s, e, t))| Caption::new(TimeSpan::new(*s, *e)?, t, i))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(captions, video_duration_s)
    }

    pub fn captions(&self) -> &[Caption] {
        &self.captions
    }

    pub fn into_captions(self) -> Vec<Caption> {
        self.captions
    }

    pub fn video_duration_s(&self) -> f64 {
        self.video_duration_s
    }

    /// Same captions over a different (longer or equal) video duration.
    pub fn with_duration(self, video_duration_s: f64) -> Result<Self, CaptionError> {
        Self::new(self.captions, video_duration_s)
    }

    pub fn len(&self) -> usize {
        self.captions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.captions.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.captions.iter().map(|c| c.text.as_str()).collect()
    }

    /// Mean caption duration, `None` for an empty track.
    pub fn mean_caption_duration(&self) -> Option<f64> {
        if self.captions.is_empty() {
            return None;
        }
        let total: f64 = self.captions.iter().map(Caption::duration).sum();
        Some(total / self.captions.len() as f64)
    }

    /// The track with every time rounded to whole milliseconds.
    pub fn quantized_ms(&self) -> Self {
        Self {
            captions: self
                .captions
                .iter()
                .map(|c| Caption {
                    span: c.span.quantized_ms(),
                    ..c.clone()
                })
                .collect(),
            video_duration_s: crate::time::quantize_ms(self.video_duration_s),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawTrack {
    captions: Vec<Caption>,
    video_duration_s: f64,
}

impl TryFrom<RawTrack> for CaptionTrack {
    type Error = CaptionError;

    fn try_from(raw: RawTrack) -> Result<Self, Self::Error> {
        CaptionTrack::new(raw.captions, raw.video_duration_s)
    }
}

impl From<CaptionTrack> for RawTrack {
    fn from(track: CaptionTrack) -> Self {
        RawTrack {
            captions: track.captions,
            video_duration_s: track.video_duration_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_and_disorder() {
        let err = CaptionTrack::from_triples(&[(0.0, 2.0, "a"), (1.0, 3.0, "b")], 3.0).unwrap_err();
        assert!(matches!(err, CaptionError::OverlappingCues { index: 1, .. }));
        let err = CaptionTrack::from_triples(&[(2.0, 3.0, "a"), (0.0, 1.0, "b")], 3.0).unwrap_err();
        assert!(matches!(err, CaptionError::NonMonotonicTimes { .. }));
    }

    #[test]
    fn touching_captions_are_fine() {
        let t = CaptionTrack::from_triples(&[(0.0, 2.0, "a"), (2.0, 3.0, "b")], 3.0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.captions()[1].index, 1);
    }

    #[test]
    fn rejects_caption_past_video_end() {
        let err = CaptionTrack::from_triples(&[(0.0, 5.0, "a")], 4.0).unwrap_err();
        assert!(matches!(err, CaptionError::OutsideVideo { .. }));
    }

    #[test]
    fn rejects_blank_text() {
        assert!(Caption::new(TimeSpan::new(0.0, 1.0).unwrap(), "  \n", 0).is_err());
        let c = Caption::new(TimeSpan::new(0.0, 1.0).unwrap(), "  hi ", 0).unwrap();
        assert_eq!(c.text, "hi");
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"captions":[{"span":{"start_s":0.0,"end_s":2.0},"text":"a","index":0},{"span":{"start_s":1.0,"end_s":3.0},"text":"b","index":1}],"video_duration_s":3.0}"#;
        assert!(serde_json::from_str::<CaptionTrack>(bad).is_err());
    }
}
