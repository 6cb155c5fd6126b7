//! Random-clip training example synthesis.
//!
//! Long captioned videos are cut into on-disk chunks of `2n` seconds (edge
//! chunks `3n/2`) that carry `n` seconds of caption context on either side.
//! Training clips of at most `n` seconds are then sampled from each chunk:
//!
//! * interior chunks: start `~ U[0, len/2]`
//! * first chunk: start `= max(0, u)`, `u ~ U[-n/2, n]`
//! * last chunk: start `= min(len - n, u)`, `u ~ U[0, len]`
//! * short videos (`< 3n/2`): start `0`, duration `min(len, n)`
//!
//! With probability `p_truncate` the clip length is drawn from `U[m, n]`
//! instead of being `n`, and it is always clipped to stay inside its chunk.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::captions::{Caption, CaptionTrack, FeatureError, FeatureSlice, FeatureTrack};
use crate::par::Execution;
use crate::rng::keyed_rng;
use crate::time::{from_millis, to_millis, TimeSpan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChunkError {
    #[error("video duration must be positive (got {0})")]
    NonPositiveDuration(f64),
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Features(#[from] FeatureError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Maximum clip length and one-sided context length.
    pub n_s: f64,
    /// Minimum length of a truncated clip.
    pub m_s: f64,
    pub p_truncate: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_s: 34.0,
            m_s: 17.0,
            p_truncate: 0.2,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ChunkError> {
        let ok_lengths = self.m_s.is_finite() && self.n_s.is_finite() && 0.0 < self.m_s && self.m_s <= self.n_s;
        if !ok_lengths {
            return Err(ChunkError::InvalidConfig(format!(
                "need 0 < m ({}) <= n ({})",
                self.m_s, self.n_s
            )));
        }
        if !(0.0..=1.0).contains(&self.p_truncate) {
            return Err(ChunkError::InvalidConfig(format!(
                "p_truncate {} not in [0, 1]",
                self.p_truncate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChunkPosition {
    First,
    Interior,
    Last,
    Only,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkSpan {
    pub span: TimeSpan,
    pub position: ChunkPosition,
}

/// Lays out chunks over a video.
///
/// Tiles one `3n/2` chunk and then `2n` chunks from the left. A remainder of
/// at least `3n/2` becomes the last chunk; a shorter remainder is merged with
/// the final tile and the merged stretch of length `L` is re-cut into two
/// overlapping chunks of length `clamp(ceil(L/2), 3n/2, 2n)`. Videos of at
/// most `2n` seconds get a single `Only` chunk. Arithmetic is in whole
/// milliseconds so boundaries are exact.
pub fn chunk_layout(video_duration_s: f64, n_s: f64) -> Result<Vec<ChunkSpan>, ChunkError> {
    if !(video_duration_s.is_finite() && video_duration_s > 0.0) {
        return Err(ChunkError::NonPositiveDuration(video_duration_s));
    }
    if !(n_s.is_finite() && n_s > 0.0) {
        return Err(ChunkError::InvalidConfig(format!("n must be positive (got {n_s})")));
    }
    let total = to_millis(video_duration_s);
    if total == 0 {
        return Err(ChunkError::NonPositiveDuration(video_duration_s));
    }
    let n = to_millis(n_s);
    let edge = n * 3 / 2;
    let full = 2 * n;
    let mk = |a: u64, b: u64, position| ChunkSpan {
        span: TimeSpan {
            start_s: from_millis(a),
            end_s: from_millis(b),
        },
        position,
    };
    if total <= full {
        return Ok(vec![mk(0, total, ChunkPosition::Only)]);
    }

    let mut cuts: Vec<(u64, u64)> = vec![(0, edge)];
    let mut pos = edge;
    while pos + full <= total {
        cuts.push((pos, pos + full));
        pos += full;
    }
    let rest = total - pos;
    if rest >= edge {
        cuts.push((pos, total));
    } else if rest > 0 {
        let (a, _) = cuts.pop().expect("at least the first chunk");
        let merged = total - a;
        let c = merged.div_ceil(2).clamp(edge, full);
        cuts.push((a, a + c));
        cuts.push((total - c, total));
    }

    let last = cuts.len() - 1;
    Ok(cuts
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let position = match i {
                0 => ChunkPosition::First,
                i if i == last => ChunkPosition::Last,
                _ => ChunkPosition::Interior,
            };
            mk(a, b, position)
        })
        .collect())
}

/// One on-disk chunk of a video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub video_id: String,
    pub chunk_index: usize,
    pub span: TimeSpan,
    pub position: ChunkPosition,
    /// Chunk span padded by `n` on both sides and clipped to the video.
    pub context_span: TimeSpan,
    /// Every caption overlapping `context_span`, in absolute video time.
    pub context_captions: Vec<Caption>,
    pub video_duration_s: f64,
    /// Mean caption duration over the whole source video.
    pub mean_caption_duration_s: Option<f64>,
    /// Features for `context_span`. Frame data is stored separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureSlice>,
}

impl ChunkRecord {
    pub fn len_s(&self) -> f64 {
        self.span.duration()
    }

    /// File name for this chunk's feature slice.
    pub fn feature_file_name(&self) -> String {
        format!("{}.{}.feat", self.video_id, self.chunk_index)
    }

    /// Context captions as a track over the whole source video.
    pub fn context_track(&self) -> CaptionTrack {
        CaptionTrack::new(self.context_captions.clone(), self.video_duration_s)
            .expect("context captions come from a valid track")
    }
}

fn overlaps_context(cap: &Caption, ctx: &TimeSpan) -> bool {
    if cap.span.duration() == 0.0 {
        ctx.intersects_closed(&cap.span)
    } else {
        cap.span.overlaps(ctx)
    }
}

/// Cuts a video into chunk records. `features`, when given, is sliced to each
/// record's padded context span (clamped to the feature track).
pub fn build_chunk_records(
    video_id: &str,
    track: &CaptionTrack,
    features: Option<&FeatureTrack>,
    cfg: &SamplerConfig,
) -> Result<Vec<ChunkRecord>, ChunkError> {
    cfg.validate()?;
    let duration = track.video_duration_s();
    let layout = chunk_layout(duration, cfg.n_s)?;
    let mean = track.mean_caption_duration();
    Ok(layout
        .into_iter()
        .enumerate()
        .map(|(chunk_index, ChunkSpan { span, position })| {
            let context_span = TimeSpan {
                start_s: (span.start_s - cfg.n_s).max(0.0),
                end_s: (span.end_s + cfg.n_s).min(duration),
            };
            let context_captions = track
                .captions()
                .iter()
                .filter(|c| overlaps_context(c, &context_span))
                .cloned()
                .collect();
            let features = features.map(|f| {
                let mut slice = f.slice_clamped(context_span);
                slice.source = Some(format!("{video_id}.{chunk_index}.feat").into());
                slice
            });
            ChunkRecord {
                video_id: video_id.to_owned(),
                chunk_index,
                span,
                position,
                context_span,
                context_captions,
                video_duration_s: duration,
                mean_caption_duration_s: mean,
                features,
            }
        })
        .collect())
}

/// A sampled clip, relative to its chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSpec {
    pub video_id: String,
    pub chunk_index: usize,
    pub start_s: f64,
    pub duration_s: f64,
    /// Whether the length was drawn from `U[m, n]`.
    pub truncated: bool,
}

impl ClipSpec {
    pub fn absolute_span(&self, chunk: &ChunkRecord) -> TimeSpan {
        let start = chunk.span.start_s + self.start_s;
        TimeSpan {
            start_s: start,
            end_s: (start + self.duration_s).min(chunk.span.end_s),
        }
    }
}

/// Draws one clip from `chunk`. The random stream is keyed by
/// `(cfg.seed, video_id, chunk_index, draw_index)`.
pub fn sample_clip(chunk: &ChunkRecord, cfg: &SamplerConfig, draw_index: u64) -> ClipSpec {
    let mut rng = keyed_rng(cfg.seed, &chunk.video_id, chunk.chunk_index, draw_index);
    // Always consume the same three draws so streams stay aligned.
    let u_start: f64 = rng.gen();
    let u_truncate: f64 = rng.gen();
    let u_length: f64 = rng.gen();

    let n = cfg.n_s;
    let len = chunk.len_s();
    let short = chunk.position == ChunkPosition::Only && len < 1.5 * n;

    let start = if short {
        0.0
    } else {
        match chunk.position {
            ChunkPosition::First => {
                let lo = -n / 2.0;
                (lo + u_start * (n - lo)).max(0.0)
            }
            ChunkPosition::Last => (u_start * len).min((len - n).max(0.0)),
            ChunkPosition::Interior | ChunkPosition::Only => u_start * len / 2.0,
        }
    };
    let start = from_millis(to_millis(start));

    let truncated = !short && u_truncate < cfg.p_truncate;
    let nominal = if short {
        n.min(len)
    } else if truncated {
        from_millis(to_millis(cfg.m_s + u_length * (n - cfg.m_s)))
    } else {
        n
    };
    let duration = from_millis(to_millis(nominal.min(len - start).max(0.0)));
    ClipSpec {
        video_id: chunk.video_id.clone(),
        chunk_index: chunk.chunk_index,
        start_s: start,
        duration_s: duration,
        truncated,
    }
}

/// Which record and draw index the `k`-th example of a schedule uses:
/// records are visited round-robin, one draw per record per epoch.
pub fn schedule_slot(k: usize, n_records: usize) -> (usize, u64) {
    (k % n_records, (k / n_records) as u64)
}

/// Samples `count` clips round-robin over `records`.
pub fn sample_clips(records: &[ChunkRecord], cfg: &SamplerConfig, count: usize, exec: Execution) -> Vec<ClipSpec> {
    if records.is_empty() {
        return Vec::new();
    }
    exec.map_range(count, |k| {
        let (r, draw) = schedule_slot(k, records.len());
        sample_clip(&records[r], cfg, draw)
    })
}

/// Frames for an absolute span: indices in `[floor(start*fps), floor(end*fps))`.
pub fn slice_features(features: &FeatureTrack, span: TimeSpan) -> Result<FeatureSlice, ChunkError> {
    Ok(features.slice(span)?)
}

/// Per-second coverage: for each 1 s bin of the video, the total clip time
/// falling inside it, summed over `clips`.
pub fn coverage_histogram(records: &[ChunkRecord], clips: &[ClipSpec], video_duration_s: f64, exec: Execution) -> Vec<f64> {
    let bins = video_duration_s.ceil() as usize;
    exec.sum_vectors(clips.len(), bins, |i, acc| {
        let clip = &clips[i];
        let rec = records
            .iter()
            .find(|r| r.chunk_index == clip.chunk_index && r.video_id == clip.video_id)
            .expect("clip from these records");
        let span = clip.absolute_span(rec);
        let first = span.start_s.floor() as usize;
        let last = (span.end_s.ceil() as usize).min(bins);
        for (b, slot) in acc.iter_mut().enumerate().take(last).skip(first) {
            let lo = span.start_s.max(b as f64);
            let hi = span.end_s.min(b as f64 + 1.0);
            if hi > lo {
                *slot += hi - lo;
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lens(layout: &[ChunkSpan]) -> Vec<f64> {
        layout.iter().map(|c| c.span.duration()).collect()
    }

    fn covers(layout: &[ChunkSpan], duration: f64) -> bool {
        layout[0].span.start_s == 0.0
            && layout.last().unwrap().span.end_s == duration
            && layout.windows(2).all(|w| w[1].span.start_s <= w[0].span.end_s)
    }

    #[test]
    fn layout_170() {
        let l = chunk_layout(170.0, 34.0).unwrap();
        let spans: Vec<(f64, f64)> = l.iter().map(|c| (c.span.start_s, c.span.end_s)).collect();
        assert_eq!(spans, vec![(0.0, 51.0), (51.0, 119.0), (119.0, 170.0)]);
        assert_eq!(
            l.iter().map(|c| c.position).collect::<Vec<_>>(),
            vec![ChunkPosition::First, ChunkPosition::Interior, ChunkPosition::Last]
        );
    }

    #[test]
    fn layout_200_overlaps_final_two() {
        let l = chunk_layout(200.0, 34.0).unwrap();
        assert!(covers(&l, 200.0));
        assert_eq!(&lens(&l)[..2], &[51.0, 68.0]);
        let tail = &l[2..];
        assert_eq!(tail.len(), 2);
        assert_eq!(tail[0].span.start_s, 119.0);
        for c in tail {
            assert!((51.0..=68.0).contains(&c.span.duration()));
        }
        assert!(tail[1].span.start_s < tail[0].span.end_s);
    }

    #[test]
    fn short_video_single_chunk() {
        let l = chunk_layout(30.0, 34.0).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].position, ChunkPosition::Only);
        assert_eq!(l[0].span, TimeSpan::new(0.0, 30.0).unwrap());
    }

    #[test]
    fn non_positive_duration() {
        assert!(matches!(chunk_layout(0.0, 34.0), Err(ChunkError::NonPositiveDuration(_))));
        assert!(matches!(chunk_layout(-3.0, 34.0), Err(ChunkError::NonPositiveDuration(_))));
    }

    #[test]
    fn context_window_membership() {
        let track = CaptionTrack::from_triples(&[(10.0, 16.0, "early"), (60.0, 70.0, "mid"), (150.0, 160.0, "late")], 170.0)
            .unwrap();
        let recs = build_chunk_records("v", &track, None, &SamplerConfig::default()).unwrap();
        let mid = &recs[1];
        assert_eq!(mid.span, TimeSpan::new(51.0, 119.0).unwrap());
        assert_eq!(mid.context_span, TimeSpan::new(17.0, 153.0).unwrap());
        let texts: Vec<&str> = mid.context_captions.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, vec!["mid", "late"]);
    }

    #[test]
    fn clips_are_deterministic_and_in_bounds() {
        let track = CaptionTrack::empty(340.0);
        let cfg = SamplerConfig::with_seed(11);
        let recs = build_chunk_records("v", &track, None, &cfg).unwrap();
        for rec in &recs {
            for d in 0..200 {
                let a = sample_clip(rec, &cfg, d);
                assert_eq!(a, sample_clip(rec, &cfg, d));
                assert!(a.start_s >= 0.0);
                assert!(a.start_s + a.duration_s <= rec.len_s() + 1e-9);
                assert!(a.duration_s <= cfg.n_s + 1e-9);
                assert!(a.duration_s >= cfg.m_s - 1e-9, "{a:?} in {:?}", rec.span);
            }
        }
    }

    #[test]
    fn short_video_clip() {
        let cfg = SamplerConfig::default();
        let recs = build_chunk_records("s", &CaptionTrack::empty(20.0), None, &cfg).unwrap();
        let clip = sample_clip(&recs[0], &cfg, 0);
        assert_eq!((clip.start_s, clip.duration_s), (0.0, 20.0));
    }

    #[test]
    fn features_follow_context_span() {
        let cfg = SamplerConfig::default();
        let feats = FeatureTrack::clock(15.0, 170.0);
        let track = CaptionTrack::empty(170.0);
        let recs = build_chunk_records("v", &track, Some(&feats), &cfg).unwrap();
        let f = recs[1].features.as_ref().unwrap();
        assert_eq!(f.frame_range(), (17 * 15, 153 * 15));
        assert_eq!(f.source.as_deref(), Some(std::path::Path::new("v.1.feat")));
    }

    #[test]
    fn edge_start_probabilities() {
        let cfg = SamplerConfig::with_seed(3);
        let recs = build_chunk_records("v", &CaptionTrack::empty(170.0), None, &cfg).unwrap();
        let draws = 100_000;
        let rate = |rec: &ChunkRecord, target: f64| {
            (0..draws)
                .filter(|&d| (sample_clip(rec, &cfg, d).start_s - target).abs() < 1e-9)
                .count() as f64
                / draws as f64
        };
        assert!((rate(&recs[0], 0.0) - 1.0 / 3.0).abs() < 0.01);
        assert!((rate(&recs[2], 17.0) - 2.0 / 3.0).abs() < 0.01);
    }
}
