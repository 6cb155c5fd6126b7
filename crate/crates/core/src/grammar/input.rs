//! Model input headers, shared by training examples and inference.

use super::task::{BreakMode, SpanMode, Timing};
use super::timed::TimestampGrammar;
use super::{
    avgdur_token, left_token, TAG_ALIGN, TAG_BREAKS_GIVEN, TAG_BREAKS_PREDICT, TAG_NEXT, TAG_OVERFLOW, TAG_PREV,
    TAG_SUBSET, TAG_TIMED, TAG_TRANSLATE, TAG_UNTIMED,
};

/// `<|translate|><|timed|>[<|avgdur:S.S|>]`, then optional `<|prev|>` and
/// `<|next|>` lines.
pub fn render_translation_input(
    timing: Timing,
    avgdur_s: Option<f64>,
    prev: Option<&str>,
    next: Option<&str>,
    grammar: &TimestampGrammar,
) -> String {
    let mut input = String::from(TAG_TRANSLATE);
    input.push_str(match timing {
        Timing::Timed => TAG_TIMED,
        Timing::Untimed => TAG_UNTIMED,
    });
    if let Some(d) = avgdur_s {
        input.push_str(&avgdur_token(&grammar.format_value(d)));
    }
    for (tag, text) in [(TAG_PREV, prev), (TAG_NEXT, next)] {
        if let Some(text) = text {
            input.push('\n');
            input.push_str(tag);
            input.push(' ');
            input.push_str(text);
        }
    }
    input
}

/// `<|align|><|breaks:...|>[<|avgdur:S.S|>]<|overflow|><|left:S.S|>` followed
/// by the caption texts, one per line or space-joined.
pub fn render_alignment_input<S: AsRef<str>>(
    breaks: BreakMode,
    avgdur_s: Option<f64>,
    span_mode: SpanMode,
    left_s: f64,
    texts: &[S],
    grammar: &TimestampGrammar,
) -> String {
    let mut input = String::from(TAG_ALIGN);
    input.push_str(match breaks {
        BreakMode::InputSpecifies => TAG_BREAKS_GIVEN,
        BreakMode::ModelPredicts => TAG_BREAKS_PREDICT,
    });
    if let Some(d) = avgdur_s {
        input.push_str(&avgdur_token(&grammar.format_value(d)));
    }
    input.push_str(match span_mode {
        SpanMode::Overflow => TAG_OVERFLOW,
        SpanMode::Subset => TAG_SUBSET,
    });
    input.push_str(&left_token(&grammar.format_value(left_s)));
    input.push('\n');
    let sep = match breaks {
        BreakMode::InputSpecifies => "\n",
        BreakMode::ModelPredicts => " ",
    };
    let joined: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    input.push_str(&joined.join(sep));
    input
}

/// Header facts a rule-based translator needs from an input.
#[derive(Debug, Clone, PartialEq)]
pub struct InputHeader {
    pub alignment: bool,
    pub timing: Timing,
    pub left_s: Option<f64>,
    /// Lines after the header line.
    pub body: Vec<String>,
}

pub fn parse_input_header(input: &str) -> InputHeader {
    let mut lines = input.lines();
    let head = lines.next().unwrap_or("");
    let left_s = head
        .split_once("<|left:")
        .and_then(|(_, rest)| rest.split_once("|>"))
        .and_then(|(v, _)| v.parse().ok());
    InputHeader {
        alignment: head.starts_with(TAG_ALIGN),
        timing: if head.contains(TAG_UNTIMED) { Timing::Untimed } else { Timing::Timed },
        left_s,
        body: lines.map(str::to_owned).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_header() {
        let g = TimestampGrammar::default();
        assert_eq!(
            render_translation_input(Timing::Timed, Some(4.04), Some("a b"), None, &g),
            "<|translate|><|timed|><|avgdur:4.0|>\n<|prev|> a b"
        );
        assert_eq!(render_translation_input(Timing::Untimed, None, None, None, &g), "<|translate|><|untimed|>");
    }

    #[test]
    fn alignment_header_roundtrip() {
        let g = TimestampGrammar::default();
        let s = render_alignment_input(BreakMode::InputSpecifies, None, SpanMode::Overflow, 2.0, &["A.", "B."], &g);
        assert_eq!(s, "<|align|><|breaks:given|><|overflow|><|left:2.0|>\nA.\nB.");
        let h = parse_input_header(&s);
        assert!(h.alignment);
        assert_eq!(h.left_s, Some(2.0));
        assert_eq!(h.body, ["A.", "B."]);
    }
}
