//! Opaque per-frame feature tracks.
//!
//! On disk: a 16-byte little-endian header (magic, fps as f32, dim as u32,
//! frame count as u32) followed by `frames * dim` little-endian f32 values.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::time::TimeSpan;

pub const FEATURE_MAGIC: [u8; 4] = *b"SGFT";
pub const DEFAULT_FPS: f32 = 15.0;
const HEADER_LEN: usize = 16;

/// Small slack so that e.g. `2.3 * 10.0 = 22.999999999999996` lands on frame 23.
const FRAME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("feature file is {0} bytes, shorter than the 16-byte header")]
    Truncated(usize),
    #[error("bad feature file magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("feature header has invalid fps {0}")]
    BadFps(f32),
    #[error("feature payload is {actual} bytes, header implies {expected}")]
    PayloadSize { expected: usize, actual: usize },
    #[error("frame {frame} has {actual} values, expected {expected}")]
    RaggedFrame { frame: usize, expected: usize, actual: usize },
    #[error("span {span} is outside the feature track (frames 0..{frames} at {fps} fps)")]
    SpanOutOfRange { span: TimeSpan, frames: usize, fps: f32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrack {
    fps: f32,
    dim: usize,
    data: Arc<[f32]>,
}

impl FeatureTrack {
    pub fn new(fps: f32, dim: usize, data: Vec<f32>) -> Result<Self, FeatureError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(FeatureError::BadFps(fps));
        }
        if dim == 0 && !data.is_empty() || dim > 0 && data.len() % dim != 0 {
            return Err(FeatureError::RaggedFrame {
                frame: if dim == 0 { 0 } else { data.len() / dim },
                expected: dim,
                actual: if dim == 0 { data.len() } else { data.len() % dim },
            });
        }
        Ok(Self {
            fps,
            dim,
            data: data.into(),
        })
    }

    pub fn from_frames(fps: f32, frames: &[Vec<f32>]) -> Result<Self, FeatureError> {
        let dim = frames.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(dim * frames.len());
        for (i, f) in frames.iter().enumerate() {
            if f.len() != dim {
                return Err(FeatureError::RaggedFrame {
                    frame: i,
                    expected: dim,
                    actual: f.len(),
                });
            }
            data.extend_from_slice(f);
        }
        Self::new(fps, dim, data)
    }

    /// A track of `duration_s` seconds whose single feature is the frame
    /// timestamp. Handy for fixtures: slices are easy to eyeball.
    pub fn clock(fps: f32, duration_s: f64) -> Self {
        let n = (duration_s * fps as f64 + FRAME_EPS).round() as usize;
        let data = (0..n).map(|i| i as f32 / fps).collect();
        Self::new(fps, 1, data).expect("valid clock track")
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_frames(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.n_frames() as f64 / self.fps as f64
    }

    pub fn frame(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Frame index holding time `t`.
    pub fn frame_at(&self, t: f64) -> usize {
        (t * self.fps as f64 + FRAME_EPS).floor().max(0.0) as usize
    }

    /// Frames with index in `[floor(start * fps), floor(end * fps))`.
    pub fn slice(&self, span: TimeSpan) -> Result<FeatureSlice, FeatureError> {
        let (first, last) = (self.frame_at(span.start_s), self.frame_at(span.end_s));
        if last > self.n_frames() {
            return Err(FeatureError::SpanOutOfRange {
                span,
                frames: self.n_frames(),
                fps: self.fps,
            });
        }
        Ok(FeatureSlice {
            span,
            start_frame: first,
            fps: self.fps,
            dim: self.dim,
            data: self.data[first * self.dim..last * self.dim].to_vec(),
            source: None,
        })
    }

    /// Like [`slice`](Self::slice) but clamps the span to the track.
    pub fn slice_clamped(&self, span: TimeSpan) -> FeatureSlice {
        let end = span.end_s.min(self.duration_s());
        let start = span.start_s.min(end);
        self.slice(TimeSpan { start_s: start, end_s: end }).expect("clamped span is in range")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&FEATURE_MAGIC);
        out.extend_from_slice(&self.fps.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_frames() as u32).to_le_bytes());
        for v in self.data.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FeatureError> {
        if bytes.len() < HEADER_LEN {
            return Err(FeatureError::Truncated(bytes.len()));
        }
        let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().expect("4 bytes") };
        if word(0) != FEATURE_MAGIC {
            return Err(FeatureError::BadMagic(word(0)));
        }
        let fps = f32::from_le_bytes(word(4));
        let dim = u32::from_le_bytes(word(8)) as usize;
        let frames = u32::from_le_bytes(word(12)) as usize;
        let payload = &bytes[HEADER_LEN..];
        let expected = frames * dim * 4;
        if payload.len() != expected {
            return Err(FeatureError::PayloadSize {
                expected,
                actual: payload.len(),
            });
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(fps, dim, data)
    }
}

/// A contiguous run of frames cut from a [`FeatureTrack`], tagged with the
/// absolute video span it was cut for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSlice {
    pub span: TimeSpan,
    pub start_frame: usize,
    pub fps: f32,
    pub dim: usize,
    #[serde(skip)]
    pub data: Vec<f32>,
    /// File the frames came from, when the slice was read from disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
}

impl FeatureSlice {
    /// A frameless slice that only carries timing, for translators that do
    /// not look at features.
    pub fn timing_only(span: TimeSpan, fps: f32) -> Self {
        Self {
            span,
            start_frame: (span.start_s * fps as f64 + FRAME_EPS).floor() as usize,
            fps,
            dim: 0,
            data: Vec::new(),
            source: None,
        }
    }

    pub fn n_frames(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn frame_range(&self) -> (usize, usize) {
        (self.start_frame, self.start_frame + self.n_frames())
    }

    pub fn to_track(&self) -> FeatureTrack {
        FeatureTrack::new(self.fps, self.dim, self.data.clone()).expect("slice of a valid track")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(a: f64, b: f64) -> TimeSpan {
        TimeSpan::new(a, b).unwrap()
    }

    #[test]
    fn full_window_fits_token_budget() {
        let t = FeatureTrack::clock(DEFAULT_FPS, 100.0);
        assert_eq!(t.slice(span(0.0, 34.0)).unwrap().n_frames(), 510);
    }

    #[test]
    fn empty_and_one_second() {
        let t = FeatureTrack::clock(15.0, 10.0);
        assert_eq!(t.slice(span(0.0, 0.0)).unwrap().n_frames(), 0);
        let s = t.slice(span(1.0, 2.0)).unwrap();
        assert_eq!(s.frame_range(), (15, 30));
        assert_eq!(s.data.first().copied(), Some(1.0));
    }

    #[test]
    fn out_of_range() {
        let t = FeatureTrack::clock(15.0, 10.0);
        assert!(matches!(t.slice(span(5.0, 11.0)), Err(FeatureError::SpanOutOfRange { .. })));
        assert_eq!(t.slice_clamped(span(5.0, 11.0)).n_frames(), 75);
    }

    #[test]
    fn binary_round_trip_and_errors() {
        let t = FeatureTrack::from_frames(15.0, &[vec![1.0, 2.0], vec![3.0, 4.5]]).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(bytes.len(), 16 + 16);
        assert_eq!(FeatureTrack::from_bytes(&bytes).unwrap(), t);
        assert!(matches!(FeatureTrack::from_bytes(&bytes[..10]), Err(FeatureError::Truncated(10))));
        assert!(matches!(
            FeatureTrack::from_bytes(&bytes[..20]),
            Err(FeatureError::PayloadSize { .. })
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(FeatureTrack::from_bytes(&bad), Err(FeatureError::BadMagic(_))));
    }

    #[test]
    fn ragged_frames_rejected() {
        assert!(FeatureTrack::from_frames(15.0, &[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
