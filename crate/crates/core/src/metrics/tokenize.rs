//! International (mteval-v14 style) tokenization.

use std::sync::OnceLock;

use regex::Regex;

struct Rules {
    nonnum_punct: Regex,
    punct_nonnum: Regex,
    symbol: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        nonnum_punct: Regex::new(r"(\P{N})(\p{P})").expect("valid regex"),
        punct_nonnum: Regex::new(r"(\p{P})(\P{N})").expect("valid regex"),
        symbol: Regex::new(r"(\p{S})").expect("valid regex"),
    })
}

/// Splits punctuation off unless it sits between two digits, splits every
/// symbol, and collapses whitespace.
///
/// The three substitutions run in sequence with leftmost, non-overlapping
/// matching, which is what keeps `4:41.30` in one piece.
pub fn tokenize_intl(text: &str) -> Vec<String> {
    let r = rules();
    let step = r.nonnum_punct.replace_all(text, "${1} ${2} ");
    let step = r.punct_nonnum.replace_all(&step, " ${1} ${2}");
    let step = r.symbol.replace_all(&step, " ${1} ");
    step.split_whitespace().map(str::to_owned).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(s: &str) -> Vec<String> {
        tokenize_intl(s)
    }

    #[test]
    fn punctuation_split() {
        assert_eq!(tok("Hello, world!"), ["Hello", ",", "world", "!"]);
    }

    #[test]
    fn digits_protect_punctuation() {
        assert_eq!(tok("4:41.30"), ["4:41.30"]);
    }

    #[test]
    fn empty() {
        assert!(tok("").is_empty());
        assert!(tok("  \n ").is_empty());
    }

    // Expected token lists produced by sacreBLEU 2.6.0's `intl` tokenizer.
    #[test]
    fn matches_reference_tokenizer() {
        assert_eq!(
            tok("The price is $5.00, (approx.) ~ ok?"),
            ["The", "price", "is", "$", "5.00", ",", "(", "approx", ".", ")", "~", "ok", "?"]
        );
        assert_eq!(
            tok("naïve café’s «quote» 3.5% a-b"),
            ["naïve", "café", "’", "s", "«", "quote", "»", "3.5", "%", "a", "-", "b"]
        );
        assert_eq!(tok("€100 + 20 = 120€"), ["€", "100", "+", "20", "=", "120", "€"]);
    }
}
