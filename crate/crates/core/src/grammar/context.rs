//! Context-text budgeting.

/// Default prior-context budget in tokenizer units.
pub const DEFAULT_CONTEXT_BUDGET: usize = 256;

/// Splits text into budget units. Implementations return byte ranges so
/// that truncation can cut the original text at unit boundaries.
pub trait UnitTokenizer: Send + Sync {
    fn unit_ranges(&self, text: &str) -> Vec<(usize, usize)>;

    fn count(&self, text: &str) -> usize {
        self.unit_ranges(text).len()
    }
}

/// One unit per whitespace-delimited word.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl UnitTokenizer for WhitespaceTokenizer {
    fn unit_ranges(&self, text: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, ch) in text.char_indices() {
            match (ch.is_whitespace(), start) {
                (true, Some(s)) => {
                    out.push((s, i));
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, text.len()));
        }
        out
    }
}

/// Keeps the most recent text of `captions` (oldest first) within `budget`
/// units. Whole captions are kept where possible; if even the newest caption
/// is over budget, its last `budget` units are kept. Captions are joined with
/// single spaces.
pub fn truncate_context<S: AsRef<str>>(captions: &[S], budget: usize, tokenizer: &dyn UnitTokenizer) -> String {
    let mut kept: Vec<&str> = Vec::new();
    let mut used = 0;
    for cap in captions.iter().rev() {
        let text = cap.as_ref().trim();
        if text.is_empty() {
            continue;
        }
        let ranges = tokenizer.unit_ranges(text);
        if used + ranges.len() <= budget {
            used += ranges.len();
            kept.push(text);
            continue;
        }
        if kept.is_empty() && budget > 0 {
            let from = ranges[ranges.len() - budget].0;
            kept.push(&text[from..]);
        }
        break;
    }
    kept.reverse();
    kept.join(" ")
}

/// Mirror of [`truncate_context`] for following context: keeps the earliest
/// text.
pub fn truncate_context_prefix<S: AsRef<str>>(captions: &[S], budget: usize, tokenizer: &dyn UnitTokenizer) -> String {
    let mut kept: Vec<&str> = Vec::new();
    let mut used = 0;
    for cap in captions {
        let text = cap.as_ref().trim();
        if text.is_empty() {
            continue;
        }
        let ranges = tokenizer.unit_ranges(text);
        if used + ranges.len() <= budget {
            used += ranges.len();
            kept.push(text);
            continue;
        }
        if kept.is_empty() && budget > 0 {
            let to = ranges[budget - 1].1;
            kept.push(&text[..to]);
        }
        break;
    }
    kept.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn keeps_last_256_words() {
        let text = words(300);
        let out = truncate_context(&[text.as_str()], DEFAULT_CONTEXT_BUDGET, &WhitespaceTokenizer);
        assert_eq!(out, (44..300).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" "));
    }

    #[test]
    fn short_context_unchanged() {
        let text = words(10);
        assert_eq!(truncate_context(&[text.as_str()], 256, &WhitespaceTokenizer), text);
    }

    #[test]
    fn zero_budget() {
        assert_eq!(truncate_context(&["a b c"], 0, &WhitespaceTokenizer), "");
        assert_eq!(truncate_context_prefix(&["a b c"], 0, &WhitespaceTokenizer), "");
    }

    #[test]
    fn cuts_at_caption_boundary() {
        let caps = ["one two three", "four five", "six seven"];
        assert_eq!(truncate_context(&caps, 5, &WhitespaceTokenizer), "four five six seven");
        assert_eq!(truncate_context(&caps, 1, &WhitespaceTokenizer), "seven");
        assert_eq!(truncate_context_prefix(&caps, 4, &WhitespaceTokenizer), "one two three");
        assert_eq!(truncate_context_prefix(&caps, 2, &WhitespaceTokenizer), "one two");
    }

    #[test]
    fn unit_ranges_handle_unicode_space() {
        let r = WhitespaceTokenizer.unit_ranges("  héllo\u{3000}wörld\n");
        assert_eq!(r.len(), 2);
    }
}
