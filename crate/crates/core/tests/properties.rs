use proptest::prelude::*;

use signtrack::captions::{parse_caption_file, serialize_caption_file, FeatureTrack, SubtitleFormat};
use signtrack::chunker::{build_chunk_records, chunk_layout, sample_clip, SamplerConfig};
use signtrack::driver::{run_timed_translation, DriverConfig, JitterOracle, VideoInput};
use signtrack::grammar::{
    parse_timed_track, render_timed_track, synthesize_examples, ExampleRenderer, MixtureWeights, TimestampGrammar,
    WhitespaceTokenizer,
};
use signtrack::par::Execution;
use signtrack::metrics::{frame_accuracy, length_scaling_align, reslice_by_reference};
use signtrack::synth::{synthetic_track, SynthConfig};
use signtrack::{Caption, CaptionTrack, TimeSpan};

fn text() -> impl Strategy<Value = String> {
    // Words with markup-looking and non-ASCII characters; no blank lines.
    prop::collection::vec("[a-zA-Z0-9<>&;.,!?éß中 -]{1,12}", 1..5).prop_map(|w| {
        let s = w.join(" ");
        let s = s.trim();
        if s.is_empty() {
            "x".to_owned()
        } else {
            s.to_owned()
        }
    })
}

/// Sorted, non-overlapping captions on a millisecond grid.
fn track() -> impl Strategy<Value = CaptionTrack> {
    prop::collection::vec((0u64..5_000, 1u64..20_000, text()), 0..12).prop_map(|parts| {
        let mut t = 0u64;
        let caps: Vec<Caption> = parts
            .into_iter()
            .enumerate()
            .map(|(i, (gap, len, text))| {
                let start = t + gap;
                t = start + len;
                Caption::new(TimeSpan::new(start as f64 / 1000.0, t as f64 / 1000.0).unwrap(), text, i).unwrap()
            })
            .collect();
        let end = t as f64 / 1000.0;
        CaptionTrack::new(caps, end.max(1.0)).unwrap()
    })
}

fn same_content(a: &CaptionTrack, b: &CaptionTrack) -> bool {
    a.len() == b.len()
        && a.captions().iter().zip(b.captions()).all(|(x, y)| {
            x.text == y.text && x.span.to_millis() == y.span.to_millis()
        })
}

proptest! {
    #[test]
    fn vtt_round_trip(t in track()) {
        let bytes = serialize_caption_file(&t, SubtitleFormat::Vtt).unwrap();
        let back = parse_caption_file(&bytes, SubtitleFormat::Vtt).unwrap();
        prop_assert!(same_content(&t, &back));
    }

    #[test]
    fn srt_round_trip(t in track()) {
        // SRT has no escape for the cue arrow.
        if t.captions().iter().any(|c| c.text.contains("-->")) {
            prop_assert!(serialize_caption_file(&t, SubtitleFormat::Srt).is_err());
            return Ok(());
        }
        let bytes = serialize_caption_file(&t, SubtitleFormat::Srt).unwrap();
        let back = parse_caption_file(&bytes, SubtitleFormat::Srt).unwrap();
        prop_assert!(same_content(&t, &back));
    }

    #[test]
    fn timed_grammar_round_trip(quanta in prop::collection::vec((0i64..30, 1i64..60), 0..8), origin_q in 0i64..10_000) {
        let g = TimestampGrammar::default();
        let origin = origin_q as f64 * 0.1;
        let mut q = 0;
        let mut caps = Vec::new();
        for (i, (gap, len)) in quanta.into_iter().enumerate() {
            let (s, e) = (q + gap, q + gap + len);
            if e > 340 { break; }
            q = e;
            let span = TimeSpan::new(origin + s as f64 * 0.1, origin + e as f64 * 0.1).unwrap();
            caps.push(Caption::new(span, format!("line {i}"), i).unwrap());
        }
        let parsed = parse_timed_track(&render_timed_track(&caps, origin, &g).unwrap(), origin, &g);
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(parsed.captions.len(), caps.len());
        for (a, b) in parsed.captions.iter().zip(&caps) {
            prop_assert_eq!(g.quanta(a.span.start_s - origin), g.quanta(b.span.start_s - origin));
            prop_assert_eq!(g.quanta(a.span.end_s - origin), g.quanta(b.span.end_s - origin));
        }
    }

    #[test]
    fn layout_covers_video(ms in 1u64..2_000_000) {
        let d = ms as f64 / 1000.0;
        let layout = chunk_layout(d, 34.0).unwrap();
        prop_assert_eq!(layout[0].span.start_s, 0.0);
        prop_assert_eq!(layout.last().unwrap().span.end_s, d);
        for w in layout.windows(2) {
            prop_assert!(w[1].span.start_s <= w[0].span.end_s);
        }
        if layout.len() > 1 {
            for c in &layout {
                let len = c.span.duration();
                prop_assert!((51.0 - 1e-9..=68.0 + 1e-9).contains(&len), "{len}");
            }
        }
    }

    #[test]
    fn clips_stay_in_chunk(ms in 1_000u64..600_000, seed in any::<u64>(), draw in 0u64..1_000) {
        let d = ms as f64 / 1000.0;
        let cfg = SamplerConfig::with_seed(seed);
        let recs = build_chunk_records("v", &CaptionTrack::empty(d), None, &cfg).unwrap();
        for rec in &recs {
            let clip = sample_clip(rec, &cfg, draw);
            prop_assert!(rec.span.contains_span(&clip.absolute_span(rec)));
            prop_assert!(clip.duration_s <= cfg.n_s + 1e-9);
        }
    }

    #[test]
    fn reslice_keeps_every_timed_character(t in track()) {
        let segments = reslice_by_reference(t.captions(), t.captions());
        for (seg, cap) in segments.iter().zip(t.captions()) {
            prop_assert_eq!(seg, &cap.text.split_whitespace().collect::<Vec<_>>().join(" "));
        }
    }

    #[test]
    fn length_scaling_is_gapless(t in track()) {
        prop_assume!(!t.is_empty());
        let span = TimeSpan::new(t.captions()[0].span.start_s, t.captions().last().unwrap().span.end_s).unwrap();
        let p = length_scaling_align(&t.texts(), span).unwrap();
        prop_assert_eq!(p.len(), t.len());
        for w in p.captions().windows(2) {
            prop_assert_eq!(w[0].span.end_s, w[1].span.start_s);
        }
        let p = p.with_duration(t.video_duration_s()).unwrap();
        let acc = frame_accuracy(&p, &t, 30.0).unwrap().frame_accuracy;
        prop_assert!((0.0..=1.0).contains(&acc));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesized_examples_validate(seed in any::<u64>(), ms in 5_000u64..400_000, track_seed in 0u64..1_000) {
        // Millisecond durations put chunk ends off the 0.1 s grid.
        let d = ms as f64 / 1000.0;
        let cfg = SamplerConfig::with_seed(seed);
        let track = synthetic_track(d, track_seed, &SynthConfig::default());
        let feats = FeatureTrack::clock(15.0, d);
        let recs = build_chunk_records("v", &track, Some(&feats), &cfg).unwrap();
        let renderer = ExampleRenderer::default();
        for ex in synthesize_examples(&recs, &cfg, &MixtureWeights::default(), &renderer, 64, Execution::Sequential) {
            let ex = ex.unwrap();
            prop_assert!(ex.validate(&TimestampGrammar::default(), renderer.budget, &WhitespaceTokenizer).is_ok());
        }
    }

    #[test]
    fn driver_output_is_disjoint_and_windows_advance(seed in 0u64..1_000, sigma in 0.0f64..6.0, dur in 40.0f64..400.0) {
        let dur = (dur * 10.0).round() / 10.0;
        let reference = synthetic_track(dur, seed, &SynthConfig::default());
        let features = FeatureTrack::clock(15.0, dur);
        let cfg = DriverConfig::default();
        let (out, trace) = run_timed_translation(
            &VideoInput::new(&features).with_duration(dur),
            &JitterOracle::new(reference, sigma, seed),
            &cfg,
            &TimestampGrammar::default(),
        ).unwrap();
        for w in out.captions().windows(2) {
            prop_assert!(w[0].span.end_s <= w[1].span.start_s + 1e-9);
        }
        for w in trace.windows.windows(2) {
            prop_assert!(w[1].span.start_s > w[0].span.start_s);
        }
        let last = trace.windows.len() - 1;
        for w in &trace.windows {
            for c in &w.accepted {
                if w.index > 0 {
                    prop_assert!(c.span.start_s >= w.span.start_s + cfg.head_margin_s - 1e-6);
                }
                if w.index < last {
                    prop_assert!(c.span.end_s <= w.span.end_s - cfg.tail_margin_s + 1e-6);
                }
            }
        }
    }
}
