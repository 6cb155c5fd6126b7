use serde::{Deserialize, Serialize};

use super::{normalize_whitespace, GrammarError};
use crate::captions::Caption;
use crate::time::{to_quanta, TimeSpan, TIME_EPS};

/// Clip-relative timestamp tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimestampGrammar {
    pub quantum_s: f64,
    /// Largest representable clip-relative time.
    pub max_s: f64,
}

impl Default for TimestampGrammar {
    fn default() -> Self {
        Self {
            quantum_s: 0.1,
            max_s: 34.0,
        }
    }
}

impl TimestampGrammar {
    pub fn with_max(self, max_s: f64) -> Self {
        Self { max_s, ..self }
    }

    fn decimals(&self) -> usize {
        let d = -self.quantum_s.log10();
        if d <= 0.0 {
            0
        } else {
            d.ceil() as usize
        }
    }

    pub fn quanta(&self, seconds: f64) -> i64 {
        to_quanta(seconds, self.quantum_s)
    }

    fn max_quanta(&self) -> i64 {
        // Floor, so that a window that is not a whole number of quanta never
        // admits a stamp past its end.
        ((self.max_s + TIME_EPS) / self.quantum_s).floor() as i64
    }

    /// `S.S` text for a time, rounded to the quantum.
    pub fn format_value(&self, seconds: f64) -> String {
        format!("{:.*}", self.decimals(), self.quanta(seconds) as f64 * self.quantum_s)
    }

    pub fn token(&self, seconds: f64) -> String {
        format!("<|{}|>", self.format_value(seconds))
    }
}

/// Renders captions as timed lines relative to `origin_s`.
pub fn render_timed_track(captions: &[Caption], origin_s: f64, grammar: &TimestampGrammar) -> Result<String, GrammarError> {
    let mut ordered: Vec<&Caption> = captions.iter().collect();
    ordered.sort_by(|a, b| a.span.start_s.total_cmp(&b.span.start_s));
    let mut lines = Vec::with_capacity(ordered.len());
    for cap in ordered {
        let (rs, re) = (cap.span.start_s - origin_s, cap.span.end_s - origin_s);
        if rs < -TIME_EPS || re > grammar.max_s + TIME_EPS {
            return Err(GrammarError::CaptionOutsideWindow {
                index: cap.index,
                span: cap.span,
                origin_s,
                max_s: grammar.max_s,
            });
        }
        // A window whose length is not a whole number of quanta can round
        // an in-window end time up past the last stamp; clamp it back.
        let clamp = |t: f64| grammar.quanta(t).clamp(0, grammar.max_quanta()) as f64 * grammar.quantum_s;
        lines.push(format!(
            "{}{} {}",
            grammar.token(clamp(rs)),
            grammar.token(clamp(re)),
            normalize_whitespace(&cap.text)
        ));
    }
    Ok(lines.join("\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineErrorKind {
    MalformedTimestamp,
    NonMonotonic,
    OutOfWindow,
    EmptyText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    /// 1-based line number within the parsed text.
    pub line: usize,
    pub kind: LineErrorKind,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedTrack {
    /// Accepted captions in absolute time, in output order.
    pub captions: Vec<Caption>,
    pub diagnostics: Vec<LineDiagnostic>,
}

fn take_stamp(s: &str) -> Option<(&str, &str)> {
    let rest = s.strip_prefix("<|")?;
    let close = rest.find("|>")?;
    let value = &rest[..close];
    let well_formed = !value.is_empty()
        && value.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        && value.bytes().filter(|&b| b == b'.').count() <= 1
        && value.bytes().any(|b| b.is_ascii_digit());
    well_formed.then(|| (value, &rest[close + 2..]))
}

/// Parses timed model output. Bad lines are reported and skipped; the parse
/// itself never fails. Times are snapped to the grammar quantum.
pub fn parse_timed_track(text: &str, origin_s: f64, grammar: &TimestampGrammar) -> ParsedTrack {
    let mut out = ParsedTrack::default();
    let mut last: Option<(i64, i64)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut reject = |kind| {
            out.diagnostics.push(LineDiagnostic {
                line: i + 1,
                kind,
                text: raw.to_owned(),
            })
        };
        let Some((start_raw, rest)) = take_stamp(line) else {
            reject(LineErrorKind::MalformedTimestamp);
            continue;
        };
        let Some((end_raw, rest)) = take_stamp(rest) else {
            reject(LineErrorKind::MalformedTimestamp);
            continue;
        };
        let (Ok(start), Ok(end)) = (start_raw.parse::<f64>(), end_raw.parse::<f64>()) else {
            reject(LineErrorKind::MalformedTimestamp);
            continue;
        };
        let (qs, qe) = (grammar.quanta(start), grammar.quanta(end));
        if qs > grammar.max_quanta() || qe > grammar.max_quanta() {
            reject(LineErrorKind::OutOfWindow);
            continue;
        }
        if qs > qe || last.is_some_and(|(ls, le)| qs < ls || qs < le) {
            reject(LineErrorKind::NonMonotonic);
            continue;
        }
        let body = normalize_whitespace(rest);
        if body.is_empty() {
            reject(LineErrorKind::EmptyText);
            continue;
        }
        let span = TimeSpan {
            start_s: origin_s + qs as f64 * grammar.quantum_s,
            end_s: origin_s + qe as f64 * grammar.quantum_s,
        };
        last = Some((qs, qe));
        out.captions.push(Caption {
            span,
            text: body,
            index: out.captions.len(),
        });
    }
    out
}
