//! Rule-based translators for tests and dry runs.

use super::{TranslatorError, TranslatorPort};
use crate::captions::{Caption, CaptionTrack, FeatureSlice};
use crate::grammar::{parse_input_header, render_timed_track, InputHeader, Timing, TimestampGrammar};
use crate::rng::keyed_rng;
use crate::synth::jitter_captions;
use crate::time::{TimeSpan, TIME_EPS};

/// Answers every request from a reference track, using only the window
/// span of the features it is handed.
///
/// Translation requests get the captions lying wholly inside the window.
/// Alignment requests get the captions starting at or after the `left`
/// anchor, with any caption running past the window clamped to its end.
#[derive(Debug, Clone)]
pub struct OracleTranslator {
    reference: CaptionTrack,
    grammar: TimestampGrammar,
}

impl OracleTranslator {
    pub fn new(reference: CaptionTrack) -> Self {
        Self {
            reference,
            grammar: TimestampGrammar::default(),
        }
    }

    pub fn with_grammar(self, grammar: TimestampGrammar) -> Self {
        Self { grammar, ..self }
    }

    fn window_captions(&self, window: TimeSpan, header: &InputHeader) -> Vec<Caption> {
        if header.alignment {
            let from = window.start_s + header.left_s.unwrap_or(0.0);
            self.reference
                .captions()
                .iter()
                .filter(|c| c.span.start_s >= from - TIME_EPS && c.span.start_s < window.end_s - TIME_EPS)
                .map(|c| {
                    let mut c = c.clone();
                    c.span.end_s = c.span.end_s.min(window.end_s);
                    c
                })
                .collect()
        } else {
            self.reference
                .captions()
                .iter()
                .filter(|c| window.contains_span(&c.span))
                .cloned()
                .collect()
        }
    }

    fn render(&self, captions: &[Caption], window: TimeSpan, header: &InputHeader) -> Result<String, TranslatorError> {
        if !header.alignment && header.timing == Timing::Untimed {
            let texts: Vec<&str> = captions.iter().map(|c| c.text.as_str()).collect();
            return Ok(texts.join(" "));
        }
        render_timed_track(captions, window.start_s, &self.grammar.with_max(window.duration()))
            .map_err(|e| TranslatorError(e.to_string()))
    }
}

impl TranslatorPort for OracleTranslator {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError> {
        let header = parse_input_header(input_text);
        let captions = self.window_captions(features.span, &header);
        self.render(&captions, features.span, &header)
    }
}

/// [`OracleTranslator`] with every timestamp perturbed by Gaussian noise of
/// standard deviation `sigma_s`, truncated at three deviations. Noise is
/// keyed by the seed and the window start, so repeated calls agree.
#[derive(Debug, Clone)]
pub struct JitterOracle {
    oracle: OracleTranslator,
    sigma_s: f64,
    seed: u64,
}

impl JitterOracle {
    pub fn new(reference: CaptionTrack, sigma_s: f64, seed: u64) -> Self {
        Self {
            oracle: OracleTranslator::new(reference),
            sigma_s,
            seed,
        }
    }
}

impl TranslatorPort for JitterOracle {
    fn translate(&self, features: &FeatureSlice, input_text: &str) -> Result<String, TranslatorError> {
        let header = parse_input_header(input_text);
        let window = features.span;
        let captions = self.oracle.window_captions(window, &header);
        let grammar = &self.oracle.grammar;
        let key = grammar.quanta(window.start_s).max(0) as u64;
        let mut rng = keyed_rng(self.seed, "jitter-oracle", 0, key);
        let noisy = jitter_captions(&captions, self.sigma_s, window.start_s, window.end_s, grammar.quantum_s, &mut rng);
        self.oracle.render(&noisy, window, &header)
    }
}

/// Emits the same output on every call. The default line is accepted in
/// every window yet moves the decoder forward by a single quantum, which
/// makes it a probe for the window cap.
#[derive(Debug, Clone)]
pub struct StutterTranslator {
    pub line: String,
}

impl Default for StutterTranslator {
    fn default() -> Self {
        Self {
            line: "<|4.0|><|4.1|> uh".to_owned(),
        }
    }
}

impl TranslatorPort for StutterTranslator {
    fn translate(&self, _: &FeatureSlice, _: &str) -> Result<String, TranslatorError> {
        Ok(self.line.clone())
    }
}

/// Always answers with the empty string.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyTranslator;

impl TranslatorPort for EmptyTranslator {
    fn translate(&self, _: &FeatureSlice, _: &str) -> Result<String, TranslatorError> {
        Ok(String::new())
    }
}
