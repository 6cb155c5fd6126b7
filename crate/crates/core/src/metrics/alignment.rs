//! Frame accuracy and the length-scaling alignment baseline.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::captions::{Caption, CaptionTrack};
use crate::par::Execution;
use crate::time::TimeSpan;

pub const DEFAULT_EVAL_FPS: f64 = 30.0;
const DURATION_TOLERANCE_S: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoAlignment {
    pub video_id: String,
    pub frame_accuracy: f64,
    pub matching_frames: usize,
    pub total_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// Matching frames over all frames, pooled across videos.
    pub frame_accuracy: f64,
    pub eval_fps: f64,
    pub matching_frames: usize,
    pub total_frames: usize,
    pub per_video: Vec<VideoAlignment>,
}

/// Caption index covering `t`, or `None` for background.
fn label_at(caps: &[Caption], t: f64) -> Option<usize> {
    let idx = caps.partition_point(|c| c.span.start_s <= t);
    let j = idx.checked_sub(1)?;
    (t < caps[j].span.end_s).then_some(caps[j].index)
}

/// Per-frame labels: frame `j` is sampled at its center `(j + 0.5) / fps`.
pub fn frame_labels(track: &CaptionTrack, eval_fps: f64) -> Vec<Option<usize>> {
    let frames = (track.video_duration_s() * eval_fps).round() as usize;
    (0..frames)
        .map(|j| label_at(track.captions(), (j as f64 + 0.5) / eval_fps))
        .collect()
}

fn score_video(video_id: &str, pred: &CaptionTrack, reference: &CaptionTrack, eval_fps: f64) -> Result<VideoAlignment, MetricError> {
    if (pred.video_duration_s() - reference.video_duration_s()).abs() > DURATION_TOLERANCE_S {
        return Err(MetricError::DurationMismatch {
            pred: pred.video_duration_s(),
            reference: reference.video_duration_s(),
        });
    }
    let (p, r) = (frame_labels(pred, eval_fps), frame_labels(reference, eval_fps));
    let total = r.len();
    let matching = r.iter().zip(&p).filter(|(a, b)| a == b).count();
    Ok(VideoAlignment {
        video_id: video_id.to_owned(),
        frame_accuracy: if total == 0 { 1.0 } else { matching as f64 / total as f64 },
        matching_frames: matching,
        total_frames: total,
    })
}

/// Fraction of evaluation frames whose caption label agrees between the two
/// tracks. Captions are matched by index, so both tracks must come from the
/// same caption list; frames covered by no caption share a background label.
pub fn frame_accuracy(pred: &CaptionTrack, reference: &CaptionTrack, eval_fps: f64) -> Result<AlignmentReport, MetricError> {
    frame_accuracy_corpus(&[("", pred, reference)], eval_fps, Execution::Sequential)
}

pub fn frame_accuracy_corpus(
    videos: &[(&str, &CaptionTrack, &CaptionTrack)],
    eval_fps: f64,
    exec: Execution,
) -> Result<AlignmentReport, MetricError> {
    let per_video = exec
        .map_slice(videos, |(id, p, r)| score_video(id, p, r, eval_fps))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let matching: usize = per_video.iter().map(|v| v.matching_frames).sum();
    let total: usize = per_video.iter().map(|v| v.total_frames).sum();
    Ok(AlignmentReport {
        frame_accuracy: if total == 0 { 1.0 } else { matching as f64 / total as f64 },
        eval_fps,
        matching_frames: matching,
        total_frames: total,
        per_video,
    })
}

/// Model-free alignment: caption boundaries placed along `span` in
/// proportion to cumulative character counts. The result is gapless and
/// ends exactly at `span.end_s`; its video duration is `span.end_s`.
pub fn length_scaling_align<S: AsRef<str>>(texts: &[S], span: TimeSpan) -> Result<CaptionTrack, MetricError> {
    let lens: Vec<usize> = texts.iter().map(|t| t.as_ref().trim().chars().count()).collect();
    let total: usize = lens.iter().sum();
    if total == 0 {
        return Err(MetricError::EmptyTexts);
    }
    let mut captions = Vec::with_capacity(texts.len());
    let mut cum = 0usize;
    let mut start = span.start_s;
    for (i, (text, len)) in texts.iter().zip(&lens).enumerate() {
        cum += len;
        let end = if cum == total {
            span.end_s
        } else {
            span.start_s + span.duration() * (cum as f64 / total as f64)
        };
        captions.push(Caption::new(TimeSpan::new(start, end)?, text, i)?);
        start = end;
    }
    Ok(CaptionTrack::new(captions, span.end_s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(a: f64, b: f64) -> TimeSpan {
        TimeSpan::new(a, b).unwrap()
    }

    #[test]
    fn equal_thirds() {
        let t = length_scaling_align(&["a".repeat(10), "b".repeat(10), "c".repeat(10)], span(0.0, 30.0)).unwrap();
        let spans: Vec<(f64, f64)> = t.captions().iter().map(|c| (c.span.start_s, c.span.end_s)).collect();
        assert_eq!(spans, vec![(0.0, 10.0), (10.0, 20.0), (20.0, 30.0)]);
    }

    #[test]
    fn proportional() {
        let t = length_scaling_align(&["a", "bcd"], span(0.0, 8.0)).unwrap();
        assert_eq!(t.captions()[0].span, span(0.0, 2.0));
        assert_eq!(t.captions()[1].span, span(2.0, 8.0));
    }

    #[test]
    fn empty_texts() {
        assert!(matches!(length_scaling_align::<&str>(&[], span(0.0, 1.0)), Err(MetricError::EmptyTexts)));
        assert!(matches!(length_scaling_align(&["", " "], span(0.0, 1.0)), Err(MetricError::EmptyTexts)));
    }

    #[test]
    fn identical_tracks_score_one() {
        let t = CaptionTrack::from_triples(&[(1.0, 3.0, "a"), (4.0, 9.0, "b")], 10.0).unwrap();
        let r = frame_accuracy(&t, &t, DEFAULT_EVAL_FPS).unwrap();
        assert_eq!(r.frame_accuracy, 1.0);
        assert_eq!(r.total_frames, 300);
    }

    #[test]
    fn half_shift() {
        let reference = CaptionTrack::from_triples(&[(0.0, 10.0, "a"), (10.0, 20.0, "b")], 20.0).unwrap();
        let pred = CaptionTrack::from_triples(&[(5.0, 15.0, "a"), (15.0, 20.0, "b")], 20.0).unwrap();
        // Brute force over frame centers.
        let fps = 30.0;
        let n = 600;
        let lab = |caps: &[(f64, f64)], t: f64| caps.iter().position(|&(a, b)| a <= t && t < b);
        let r_caps = [(0.0, 10.0), (10.0, 20.0)];
        let p_caps = [(5.0, 15.0), (15.0, 20.0)];
        let brute = (0..n)
            .filter(|j| {
                let t = (*j as f64 + 0.5) / fps;
                lab(&r_caps, t) == lab(&p_caps, t)
            })
            .count();
        let report = frame_accuracy(&pred, &reference, fps).unwrap();
        assert_eq!(report.matching_frames, brute);
        assert!((report.frame_accuracy - 0.5).abs() <= 1.0 / n as f64);
    }

    #[test]
    fn all_background_prediction() {
        let reference = CaptionTrack::from_triples(&[(0.0, 3.0, "a"), (5.0, 8.0, "b")], 10.0).unwrap();
        let pred = CaptionTrack::empty(10.0);
        let r = frame_accuracy(&pred, &reference, 30.0).unwrap();
        assert!((r.frame_accuracy - 0.4).abs() < 1e-12);
    }

    #[test]
    fn duration_mismatch() {
        let a = CaptionTrack::empty(10.0);
        let b = CaptionTrack::empty(11.0);
        assert!(matches!(frame_accuracy(&a, &b, 30.0), Err(MetricError::DurationMismatch { .. })));
    }
}
