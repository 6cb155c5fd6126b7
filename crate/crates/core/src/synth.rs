//! Synthetic caption tracks for tests, benches and demos.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::captions::{Caption, CaptionTrack};
use crate::rng::keyed_rng;
use crate::time::{quantize, TimeSpan};

const WORDS: &[&str] = &[
    "the", "river", "ran", "north", "past", "old", "stone", "houses", "while", "people", "watched", "from",
    "bridges", "market", "opened", "early", "every", "morning", "children", "learned", "signs", "at", "school",
    "winter", "brought", "snow", "to", "mountain", "towns", "and", "roads", "closed", "for", "weeks", "scientists",
    "measured", "light", "distant", "stars", "new", "telescope", "island", "birds", "nest", "on", "cliffs",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub min_caption_s: f64,
    pub max_caption_s: f64,
    pub max_gap_s: f64,
    pub quantum_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            min_caption_s: 1.0,
            max_caption_s: 18.0,
            max_gap_s: 2.0,
            quantum_s: 0.1,
        }
    }
}

fn sentence<R: Rng>(rng: &mut R, id: usize) -> String {
    let n = rng.gen_range(4..=12);
    let mut words: Vec<&str> = (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
    let tag = format!("s{id}");
    words.insert(0, &tag);
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// A quantized track filling `duration_s` with caption lengths drawn from
/// `[min_caption_s, max_caption_s]` and gaps from `[0, max_gap_s]`.
pub fn synthetic_track(duration_s: f64, seed: u64, cfg: &SynthConfig) -> CaptionTrack {
    let mut rng = keyed_rng(seed, "synth", 0, 0);
    let q = |t: f64| quantize(t, cfg.quantum_s);
    let mut captions = Vec::new();
    let mut t = q(rng.gen_range(0.0..=cfg.max_gap_s));
    loop {
        let len = q(rng.gen_range(cfg.min_caption_s..=cfg.max_caption_s)).max(cfg.quantum_s);
        let end = q(t + len);
        if end > duration_s {
            break;
        }
        let text = sentence(&mut rng, captions.len());
        captions.push(Caption::new(TimeSpan { start_s: t, end_s: end }, text, captions.len()).expect("non-empty text"));
        t = q(end + rng.gen_range(0.0..=cfg.max_gap_s));
    }
    CaptionTrack::new(captions, duration_s).expect("generated track is valid")
}

/// A gapless track over `span` where each caption lasts exactly
/// `chars / chars_per_s` seconds. `speeds` gives chars per second for each
/// caption in turn, cycling.
pub fn constant_rate_track(texts: &[&str], start_s: f64, speeds: &[f64], duration_s: f64) -> CaptionTrack {
    let mut t = start_s;
    let captions = texts
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let rate = speeds[i % speeds.len()];
            let end = t + text.trim().chars().count() as f64 / rate;
            let c = Caption::new(TimeSpan { start_s: t, end_s: end }, text, i).expect("non-empty text");
            t = end;
            c
        })
        .collect();
    CaptionTrack::new(captions, duration_s).expect("generated track is valid")
}

/// Gaussian noise with standard deviation `sigma_s`, redrawn until it falls
/// within three standard deviations.
pub fn truncated_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma_s: f64) -> f64 {
    if sigma_s <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma_s).expect("positive sigma");
    loop {
        let x: f64 = normal.sample(rng);
        if x.abs() <= 3.0 * sigma_s {
            return x;
        }
    }
}

/// Perturbs every boundary by truncated Gaussian noise, then repairs order:
/// times are clamped to `[lo, hi]`, starts never precede the previous end,
/// and ends never precede their start. Results snap to `quantum_s`.
pub fn jitter_captions<R: Rng + ?Sized>(
    captions: &[Caption],
    sigma_s: f64,
    lo: f64,
    hi: f64,
    quantum_s: f64,
    rng: &mut R,
) -> Vec<Caption> {
    let mut prev_end = lo;
    captions
        .iter()
        .map(|c| {
            let s = c.span.start_s + truncated_gaussian(rng, sigma_s);
            let e = c.span.end_s + truncated_gaussian(rng, sigma_s);
            let s = quantize(s.clamp(prev_end, hi), quantum_s).clamp(prev_end, hi);
            let e = quantize(e.clamp(s, hi), quantum_s).clamp(s, hi);
            prev_end = e;
            Caption {
                span: TimeSpan { start_s: s, end_s: e },
                ..c.clone()
            }
        })
        .collect()
}

pub fn jitter_track(track: &CaptionTrack, sigma_s: f64, seed: u64, trial: u64) -> CaptionTrack {
    let mut rng = keyed_rng(seed, "jitter-track", 0, trial);
    let caps = jitter_captions(track.captions(), sigma_s, 0.0, track.video_duration_s(), 0.1, &mut rng);
    CaptionTrack::new(caps, track.video_duration_s()).expect("jitter keeps the track valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_track_shape() {
        let cfg = SynthConfig::default();
        let t = synthetic_track(300.0, 1, &cfg);
        assert!(t.len() > 20);
        let caps = t.captions();
        assert!(caps.iter().all(|c| c.duration() <= 18.0 + 1e-9 && c.duration() >= 1.0 - 1e-9));
        assert!(caps.windows(2).all(|w| w[1].span.start_s - w[0].span.end_s <= 2.0 + 1e-9));
        for c in caps {
            let q = c.span.start_s * 10.0;
            assert!((q - q.round()).abs() < 1e-6);
        }
        assert_eq!(synthetic_track(300.0, 1, &cfg), t);
    }

    #[test]
    fn zero_jitter_is_identity() {
        let t = synthetic_track(100.0, 3, &SynthConfig::default());
        assert_eq!(jitter_track(&t, 0.0, 0, 0), t);
    }

    #[test]
    fn jitter_stays_valid() {
        let t = synthetic_track(100.0, 3, &SynthConfig::default());
        for trial in 0..20 {
            jitter_track(&t, 8.0, 0, trial);
        }
    }

    #[test]
    fn constant_rate() {
        let t = constant_rate_track(&["abcd", "ab"], 1.0, &[2.0], 10.0);
        assert_eq!(t.captions()[0].span, TimeSpan { start_s: 1.0, end_s: 3.0 });
        assert_eq!(t.captions()[1].span, TimeSpan { start_s: 3.0, end_s: 4.0 });
    }
}
