use serde::{Deserialize, Serialize};

use super::{Caption, CaptionTrack};
use crate::time::{TimeSpan, TIME_EPS};

/// Captions of a track sorted relative to one clip.
///
/// `prev`, `curr` and `next` are pairwise disjoint. `crossing_right` is not
/// part of that partition: it lists captions that start inside the clip and
/// end after it, some of which may also be in `next`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowCaptions {
    pub prev: Vec<Caption>,
    pub curr: Vec<Caption>,
    pub next: Vec<Caption>,
    pub crossing_right: Vec<Caption>,
    /// Absolute end time of the caption crossing the clip start, if any.
    pub left_edge_end_s: Option<f64>,
}

/// Splits `track` around `clip`:
///
/// * `curr`: fully inside the clip,
/// * `prev`: starting in `[clip.start - n, clip.start)`, including a caption
///   that crosses (or spans) the clip start,
/// * `next`: starting at or after the clip start and ending in
///   `(clip.end, clip.end + n]`.
pub fn classify_window_captions(track: &CaptionTrack, clip: TimeSpan, n_s: f64) -> WindowCaptions {
    let mut out = WindowCaptions::default();
    for cap in track.captions() {
        let (s, e) = (cap.span.start_s, cap.span.end_s);
        if s < clip.start_s - TIME_EPS && e > clip.start_s + TIME_EPS {
            out.left_edge_end_s = Some(e);
        }
        if s >= clip.start_s - TIME_EPS && e <= clip.end_s + TIME_EPS {
            out.curr.push(cap.clone());
            continue;
        }
        if s >= clip.start_s - TIME_EPS && s < clip.end_s - TIME_EPS && e > clip.end_s + TIME_EPS {
            out.crossing_right.push(cap.clone());
        }
        if s < clip.start_s - TIME_EPS {
            if s >= clip.start_s - n_s - TIME_EPS {
                out.prev.push(cap.clone());
            }
        } else if e > clip.end_s + TIME_EPS && e <= clip.end_s + n_s + TIME_EPS {
            out.next.push(cap.clone());
        }
    }
    out
}
