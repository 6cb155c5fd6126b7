use super::*;
use crate::metrics::{frame_accuracy, timed_bleu};
use crate::synth::{synthetic_track, SynthConfig};

fn clock(d: f64) -> FeatureTrack {
    FeatureTrack::clock(15.0, d)
}

fn g() -> TimestampGrammar {
    TimestampGrammar::default()
}

fn reference(d: f64, seed: u64) -> CaptionTrack {
    synthetic_track(d, seed, &SynthConfig::default())
}

#[test]
fn oracle_reproduces_reference() {
    for seed in 0..20 {
        let r = reference(300.0, seed);
        let f = clock(300.0);
        let (out, trace) = run_timed_translation(&VideoInput::new(&f), &OracleTranslator::new(r.clone()), &DriverConfig::default(), &g()).unwrap();
        assert_eq!(out, r, "seed {seed}");
        assert!(trace.windows.windows(2).all(|w| w[1].span.start_s > w[0].span.start_s));
        assert_eq!(timed_bleu(&out, &r).unwrap().score, 100.0);
        assert_eq!(frame_accuracy(&out, &r, 30.0).unwrap().frame_accuracy, 1.0);
    }
}

#[test]
fn empty_translator_window_count() {
    let f = clock(300.0);
    let (out, trace) = run_timed_translation(&VideoInput::new(&f), &EmptyTranslator, &DriverConfig::default(), &g()).unwrap();
    assert!(out.is_empty());
    let expected = ((300.0_f64 - 34.0) / 20.0).ceil() as usize + 1;
    assert_eq!(trace.windows.len(), expected);
    let starts: Vec<f64> = trace.windows.iter().map(|w| w.span.start_s).collect();
    assert_eq!(starts[..3], [0.0, 20.0, 40.0]);
}

#[test]
fn short_video_single_window() {
    let f = clock(20.0);
    let r = CaptionTrack::from_triples(&[(0.0, 5.0, "first one"), (15.0, 20.0, "last one")], 20.0).unwrap();
    let (out, trace) = run_timed_translation(&VideoInput::new(&f), &OracleTranslator::new(r.clone()), &DriverConfig::default(), &g()).unwrap();
    assert_eq!(trace.windows.len(), 1);
    assert_eq!(trace.windows[0].acceptance, TimeSpan::new(0.0, 20.0).unwrap());
    assert_eq!(out, r);
}

#[test]
fn stutter_trips_guard() {
    let f = clock(300.0);
    let err = run_timed_translation(&VideoInput::new(&f), &StutterTranslator::default(), &DriverConfig::default(), &g()).unwrap_err();
    assert!(matches!(err, DriverError::LivelockGuardTripped { windows: 602, .. }), "{err:?}");
}

#[test]
fn margins_respected() {
    let r = reference(300.0, 4);
    let f = clock(300.0);
    let cfg = DriverConfig::default();
    let (_, trace) = run_timed_translation(&VideoInput::new(&f), &JitterOracle::new(r, 1.0, 9), &cfg, &g()).unwrap();
    let last = trace.windows.len() - 1;
    for w in &trace.windows {
        for c in &w.accepted {
            if w.index > 0 {
                assert!(c.span.start_s >= w.span.start_s + cfg.head_margin_s - 1e-6);
            }
            if w.index < last {
                assert!(c.span.end_s <= w.span.end_s - cfg.tail_margin_s + 1e-6);
            }
        }
    }
}

#[test]
fn jitter_zero_matches_oracle() {
    let r = reference(120.0, 2);
    let f = clock(120.0);
    let v = VideoInput::new(&f);
    let cfg = DriverConfig::default();
    let a = run_timed_translation(&v, &OracleTranslator::new(r.clone()), &cfg, &g()).unwrap();
    let b = run_timed_translation(&v, &JitterOracle::new(r, 0.0, 5), &cfg, &g()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn oracle_window_arithmetic() {
    let r = CaptionTrack::from_triples(&[(60.0, 70.0, "hi")], 100.0).unwrap();
    let slice = FeatureSlice::timing_only(TimeSpan::new(50.0, 84.0).unwrap(), 15.0);
    let out = OracleTranslator::new(r).translate(&slice, "<|translate|><|timed|>").unwrap();
    assert_eq!(out, "<|10.0|><|20.0|> hi");
}

#[test]
fn context_is_bounded_suffix() {
    let r = reference(300.0, 7);
    let f = clock(300.0);
    let cfg = DriverConfig {
        context_budget: 16,
        ..DriverConfig::default()
    };
    let (out, trace) = run_timed_translation(&VideoInput::new(&f), &OracleTranslator::new(r), &cfg, &g()).unwrap();
    let full = out.texts().join(" ");
    for w in &trace.windows {
        let prev = w.input_text.split_once("<|prev|> ").unwrap().1;
        assert!(full.starts_with(prev) || full.contains(prev));
        assert!(prev.split_whitespace().count() <= 16);
    }
}

#[test]
fn untimed_discourse() {
    let r = reference(200.0, 1);
    let f = clock(200.0);
    let (text, _) = run_untimed_discourse(&VideoInput::new(&f), &OracleTranslator::new(r.clone()), &DriverConfig::default(), &g()).unwrap();
    assert_eq!(text, r.texts().join(" "));
    let (text, _) = run_untimed_discourse(&VideoInput::new(&f), &EmptyTranslator, &DriverConfig::default(), &g()).unwrap();
    assert_eq!(text, "");
}

#[test]
fn sentence_level() {
    let r = CaptionTrack::from_triples(&[(2.0, 6.0, "hello there")], 50.0).unwrap();
    let f = clock(50.0);
    let v = VideoInput::new(&f);
    let cfg = DriverConfig::default();
    let clip = TimeSpan::new(0.0, 10.0).unwrap();
    let out = run_sentence_level(&v, clip, None, &OracleTranslator::new(r.clone()), &cfg, &g()).unwrap();
    assert_eq!(out, "hello there");

    struct Echo;
    impl TranslatorPort for Echo {
        fn translate(&self, _: &FeatureSlice, input: &str) -> Result<String, TranslatorError> {
            Ok(input.to_owned())
        }
    }
    let words: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
    let echoed = run_sentence_level(&v, clip, Some(&words.join(" ")), &Echo, &cfg, &g()).unwrap();
    let ctx = echoed.split_once("<|prev|> ").unwrap().1;
    assert_eq!(ctx.split_whitespace().count(), 256);
    assert!(ctx.ends_with("w299"));

    let long = TimeSpan::new(0.0, 40.0).unwrap();
    assert!(matches!(
        run_sentence_level(&v, long, None, &Echo, &cfg, &g()),
        Err(DriverError::ClipTooLong { .. })
    ));
}

#[test]
fn translator_failure_has_window() {
    struct Fails;
    impl TranslatorPort for Fails {
        fn translate(&self, f: &FeatureSlice, _: &str) -> Result<String, TranslatorError> {
            if f.span.start_s > 0.0 {
                Err(TranslatorError("boom".into()))
            } else {
                Ok(String::new())
            }
        }
    }
    let f = clock(100.0);
    let err = run_timed_translation(&VideoInput::new(&f), &Fails, &DriverConfig::default(), &g()).unwrap_err();
    assert!(matches!(err, DriverError::TranslatorFailure { window_index: 1, .. }));
}

#[test]
fn oracle_alignment() {
    for seed in 0..10 {
        let r = reference(300.0, seed);
        let f = clock(300.0);
        let out = run_alignment(&VideoInput::new(&f), &r.texts(), &OracleTranslator::new(r.clone()), &DriverConfig::default(), &g()).unwrap();
        assert!(out.unconsumed.is_empty());
        assert_eq!(out.track, r, "seed {seed}");
        assert_eq!(frame_accuracy(&out.track, &r, 30.0).unwrap().frame_accuracy, 1.0);
    }
}

#[test]
fn alignment_decoheres() {
    let r = reference(120.0, 3);
    let f = clock(120.0);
    let err = run_alignment(&VideoInput::new(&f), &r.texts(), &StutterTranslator::default(), &DriverConfig::default(), &g()).unwrap_err();
    match err {
        DriverError::DecoherenceDetected { partial, unconsumed, .. } => {
            assert!(partial.is_empty());
            assert_eq!(unconsumed.len(), r.len());
        }
        e => panic!("{e:?}"),
    }
}

#[test]
fn alignment_of_nothing() {
    let f = clock(60.0);
    let out = run_alignment::<&str>(&VideoInput::new(&f), &[], &EmptyTranslator, &DriverConfig::default(), &g()).unwrap();
    assert!(out.track.is_empty());
    assert!(out.trace.windows.is_empty());
}

#[test]
fn alignment_with_silent_model_reports_leftovers() {
    let f = clock(60.0);
    let out = run_alignment(&VideoInput::new(&f), &["a b", "c d"], &EmptyTranslator, &DriverConfig::default(), &g()).unwrap();
    assert_eq!(out.unconsumed, vec![0, 1]);
}

#[test]
fn config_validation() {
    let cfg = DriverConfig {
        head_margin_s: 20.0,
        tail_margin_s: 20.0,
        ..DriverConfig::default()
    };
    assert!(matches!(cfg.validate(), Err(DriverError::InvalidConfig(_))));
}
