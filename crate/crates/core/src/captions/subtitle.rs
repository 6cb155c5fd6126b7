//! WebVTT and SRT reading and writing.
//!
//! Cue times are millisecond precision on both sides. Overlapping or
//! out-of-order cues are rejected, never repaired.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Caption, CaptionError, CaptionTrack};
use crate::time::{from_millis, TimeSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubtitleFormat {
    Vtt,
    Srt,
}

impl SubtitleFormat {
    pub fn name(&self) -> &'static str {
        match self {
            SubtitleFormat::Vtt => "vtt",
            SubtitleFormat::Srt => "srt",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "vtt" => Some(SubtitleFormat::Vtt),
            "srt" => Some(SubtitleFormat::Srt),
            _ => None,
        }
    }
}

impl FromStr for SubtitleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vtt" | "webvtt" => Ok(SubtitleFormat::Vtt),
            "srt" => Ok(SubtitleFormat::Srt),
            other => Err(format!("unknown subtitle format {other:?}")),
        }
    }
}

struct Block<'a> {
    first_line: usize,
    lines: Vec<&'a str>,
}

fn blocks(text: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut current: Option<Block<'_>> = None;
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if let Some(b) = current.take() {
                out.push(b);
            }
            continue;
        }
        current
            .get_or_insert_with(|| Block {
                first_line: i + 1,
                lines: Vec::new(),
            })
            .lines
            .push(line);
    }
    out.extend(current);
    out
}

fn malformed(line: usize, col: usize, message: impl Into<String>) -> CaptionError {
    CaptionError::MalformedCue {
        line,
        col,
        message: message.into(),
    }
}

/// Parses `[HH:]MM:SS<sep>mmm` into milliseconds. `col` is the 1-based column
/// of the timestamp within its line, used for error positions.
fn parse_timestamp(raw: &str, frac_seps: &[char], line: usize, col: usize) -> Result<u64, CaptionError> {
    let (clock, frac) = raw
        .rsplit_once(|c| frac_seps.contains(&c))
        .ok_or_else(|| malformed(line, col, format!("timestamp {raw:?} has no millisecond part")))?;
    if frac.len() != 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(line, col, format!("timestamp {raw:?} needs exactly three millisecond digits")));
    }
    let fields: Vec<&str> = clock.split(':').collect();
    let (h, m, s) = match fields.as_slice() {
        [h, m, s] => (*h, *m, *s),
        [m, s] => ("0", *m, *s),
        _ => return Err(malformed(line, col, format!("timestamp {raw:?} is not [HH:]MM:SS"))),
    };
    let num = |field: &str, max: Option<u64>| -> Result<u64, CaptionError> {
        if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(line, col, format!("timestamp {raw:?} has a non-numeric field")));
        }
        let v: u64 = field
            .parse()
            .map_err(|_| malformed(line, col, format!("timestamp {raw:?} is out of range")))?;
        match max {
            Some(max) if v > max => Err(malformed(line, col, format!("timestamp {raw:?} field {v} exceeds {max}"))),
            _ => Ok(v),
        }
    };
    let (h, m, s) = (num(h, None)?, num(m, Some(59))?, num(s, Some(59))?);
    let ms: u64 = frac.parse().expect("three ascii digits");
    Ok(((h * 60 + m) * 60 + s) * 1000 + ms)
}

fn parse_timing_line(line: &str, line_no: usize, frac_seps: &[char]) -> Result<(u64, u64), CaptionError> {
    let arrow = line
        .find("-->")
        .ok_or_else(|| malformed(line_no, 1, "expected a '-->' timing line"))?;
    let left = &line[..arrow];
    let start_raw = left.trim();
    let start_col = left.len() - left.trim_start().len() + 1;
    let right = &line[arrow + 3..];
    let end_col = arrow + 4 + (right.len() - right.trim_start().len());
    // Anything after the end time is a cue setting list; ignored.
    let end_raw = right.split_whitespace().next().unwrap_or("");
    if start_raw.is_empty() {
        return Err(malformed(line_no, 1, "missing start time"));
    }
    if end_raw.is_empty() {
        return Err(malformed(line_no, arrow + 4, "missing end time"));
    }
    let start = parse_timestamp(start_raw, frac_seps, line_no, start_col)?;
    let end = parse_timestamp(end_raw, frac_seps, line_no, end_col)?;
    Ok((start, end))
}

fn unescape_vtt(text: &str) -> String {
    const ENTITIES: [(&str, &str); 6] = [
        ("&amp;", "&"),
        ("&lt;", "<"),
        ("&gt;", ">"),
        ("&nbsp;", "\u{a0}"),
        ("&lrm;", "\u{200e}"),
        ("&rlm;", "\u{200f}"),
    ];
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match ENTITIES.iter().find(|(name, _)| rest.starts_with(name)) {
            Some((name, ch)) => {
                out.push_str(ch);
                rest = &rest[name.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn escape_vtt(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct RawCue {
    line: usize,
    start_ms: u64,
    end_ms: u64,
    text: String,
}

fn parse_vtt(text: &str) -> Result<Vec<RawCue>, CaptionError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header = text.split('\n').next().unwrap_or("").trim_end_matches('\r');
    let tail = header.strip_prefix("WEBVTT");
    if !matches!(tail, Some(rest) if rest.is_empty() || rest.starts_with([' ', '\t'])) {
        return Err(malformed(1, 1, "missing WEBVTT header"));
    }
    let mut cues = Vec::new();
    for block in blocks(text).into_iter().skip(1) {
        let first = block.lines[0];
        if first.starts_with("NOTE") || first == "STYLE" || first == "REGION" {
            continue;
        }
        let timing_idx = if first.contains("-->") { 0 } else { 1 };
        let timing_line_no = block.first_line + timing_idx;
        let timing = block
            .lines
            .get(timing_idx)
            .ok_or_else(|| malformed(timing_line_no, 1, "cue identifier without timing line"))?;
        let (start_ms, end_ms) = parse_timing_line(timing, timing_line_no, &['.'])?;
        let payload = &block.lines[timing_idx + 1..];
        if let Some(pos) = payload.iter().position(|l| l.contains("-->")) {
            let col = payload[pos].find("-->").unwrap_or(0) + 1;
            return Err(malformed(timing_line_no + 1 + pos, col, "cue text may not contain '-->'"));
        }
        let text = unescape_vtt(&payload.join("\n"));
        cues.push(RawCue {
            line: timing_line_no,
            start_ms,
            end_ms,
            text,
        });
    }
    Ok(cues)
}

fn parse_srt(text: &str) -> Result<Vec<RawCue>, CaptionError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut cues = Vec::new();
    for block in blocks(text) {
        let first = block.lines[0].trim();
        let timing_idx = if first.contains("-->") {
            0
        } else if first.bytes().all(|b| b.is_ascii_digit()) {
            1
        } else {
            return Err(malformed(block.first_line, 1, "expected a numeric cue index"));
        };
        let timing_line_no = block.first_line + timing_idx;
        let timing = block
            .lines
            .get(timing_idx)
            .ok_or_else(|| malformed(timing_line_no, 1, "cue index without timing line"))?;
        let (start_ms, end_ms) = parse_timing_line(timing, timing_line_no, &[',', '.'])?;
        cues.push(RawCue {
            line: timing_line_no,
            start_ms,
            end_ms,
            text: block.lines[timing_idx + 1..].join("\n"),
        });
    }
    Ok(cues)
}

/// Parses a WebVTT or SRT file into a track. The track duration is the end
/// of the last cue (0 for an empty file); use
/// [`CaptionTrack::with_duration`] when the video is known to be longer.
pub fn parse_caption_file(bytes: &[u8], format: SubtitleFormat) -> Result<CaptionTrack, CaptionError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        malformed(line, 1, "file is not valid UTF-8")
    })?;
    let raw = match format {
        SubtitleFormat::Vtt => parse_vtt(text)?,
        SubtitleFormat::Srt => parse_srt(text)?,
    };
    let mut captions: Vec<Caption> = Vec::with_capacity(raw.len());
    for (index, cue) in raw.into_iter().enumerate() {
        if cue.end_ms < cue.start_ms {
            return Err(CaptionError::NonMonotonicTimes { index, line: cue.line });
        }
        if let Some(prev) = captions.last() {
            let prev_start = crate::time::to_millis(prev.span.start_s);
            let prev_end = crate::time::to_millis(prev.span.end_s);
            if cue.start_ms < prev_start {
                return Err(CaptionError::NonMonotonicTimes { index, line: cue.line });
            }
            if cue.start_ms < prev_end {
                return Err(CaptionError::OverlappingCues { index, line: cue.line });
            }
        }
        let span = TimeSpan::new(from_millis(cue.start_ms), from_millis(cue.end_ms))?;
        let caption = Caption::new(span, &cue.text, index).map_err(|_| malformed(cue.line + 1, 1, "cue has no text"))?;
        captions.push(caption);
    }
    CaptionTrack::from_captions(captions)
}

fn format_timestamp(out: &mut String, ms: u64, frac_sep: char) {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, ms) = (rem / 1000, rem % 1000);
    let _ = write!(out, "{h:02}:{m:02}:{s:02}{frac_sep}{ms:03}");
}

/// Writes a track as WebVTT or SRT.
///
/// WebVTT text is entity-escaped, so `-->` inside a caption survives as
/// `--&gt;`. SRT has no escaping, so such captions are rejected, as is any
/// caption containing a blank line in either format.
pub fn serialize_caption_file(track: &CaptionTrack, format: SubtitleFormat) -> Result<Vec<u8>, CaptionError> {
    let frac_sep = match format {
        SubtitleFormat::Vtt => '.',
        SubtitleFormat::Srt => ',',
    };
    let mut out = String::new();
    if format == SubtitleFormat::Vtt {
        out.push_str("WEBVTT\n\n");
    }
    for (i, cap) in track.captions().iter().enumerate() {
        if cap.text.split('\n').any(|l| l.trim().is_empty()) {
            return Err(CaptionError::Unrepresentable {
                index: i,
                format: format.name(),
                reason: "text contains a blank line",
            });
        }
        let text = match format {
            SubtitleFormat::Vtt => escape_vtt(&cap.text),
            SubtitleFormat::Srt => {
                if cap.text.contains("-->") {
                    return Err(CaptionError::Unrepresentable {
                        index: i,
                        format: "srt",
                        reason: "text contains '-->'",
                    });
                }
                cap.text.clone()
            }
        };
        let (start, end) = cap.span.to_millis();
        let _ = writeln!(out, "{}", i + 1);
        format_timestamp(&mut out, start, frac_sep);
        out.push_str(" --> ");
        format_timestamp(&mut out, end, frac_sep);
        out.push('\n');
        out.push_str(&text);
        out.push_str("\n\n");
    }
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vtt(s: &str) -> Result<CaptionTrack, CaptionError> {
        parse_caption_file(s.as_bytes(), SubtitleFormat::Vtt)
    }

    #[test]
    fn single_cue() {
        let t = vtt("WEBVTT\n\n00:00:01.000 --> 00:00:03.500\nhello\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.captions()[0].span, TimeSpan::new(1.0, 3.5).unwrap());
        assert_eq!(t.captions()[0].text, "hello");
    }

    #[test]
    fn empty_file() {
        let t = vtt("WEBVTT\n").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.video_duration_s(), 0.0);
        let t = parse_caption_file(b"", SubtitleFormat::Srt).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn overlapping_cues_rejected() {
        let err = vtt("WEBVTT\n\n00:00.000 --> 00:02.000\na\n\n00:01.000 --> 00:03.000\nb\n").unwrap_err();
        assert!(matches!(err, CaptionError::OverlappingCues { index: 1, line: 6 }));
    }

    #[test]
    fn inverted_cue_rejected() {
        let err = vtt("WEBVTT\n\n00:00:03.000 --> 00:00:02.000\na\n").unwrap_err();
        assert!(matches!(err, CaptionError::NonMonotonicTimes { index: 0, line: 3 }));
    }

    #[test]
    fn malformed_position_reported() {
        let err = vtt("WEBVTT\n\nid\n00:00:01.000 --> 00:00:0x.500\nhi\n").unwrap_err();
        match err {
            CaptionError::MalformedCue { line, col, .. } => {
                assert_eq!(line, 4);
                assert_eq!(col, 18);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(vtt("hello\n"), Err(CaptionError::MalformedCue { line: 1, .. })));
    }

    #[test]
    fn notes_settings_and_identifiers() {
        let src = "WEBVTT - title\n\nNOTE a comment\n\ncue-1\n00:00:01.000 --> 00:00:02.000 align:start\nA &amp; B &lt;3\nsecond line\n";
        let t = vtt(src).unwrap();
        assert_eq!(t.captions()[0].text, "A & B <3\nsecond line");
    }

    #[test]
    fn srt_parse() {
        let src = "1\r\n00:00:01,000 --> 00:00:02,500\r\nhi there\r\n\r\n2\r\n00:00:03,000 --> 00:00:04,000\r\nbye\r\n";
        let t = parse_caption_file(src.as_bytes(), SubtitleFormat::Srt).unwrap();
        assert_eq!(t.texts(), vec!["hi there", "bye"]);
        assert_eq!(t.captions()[0].span.end_s, 2.5);
    }

    #[test]
    fn arrow_in_text() {
        let t = CaptionTrack::from_triples(&[(0.0, 1.0, "a --> b")], 1.0).unwrap();
        let bytes = serialize_caption_file(&t, SubtitleFormat::Vtt).unwrap();
        assert!(String::from_utf8_lossy(&bytes).contains("a --&gt; b"));
        assert_eq!(vtt(std::str::from_utf8(&bytes).unwrap()).unwrap(), t);
        assert!(matches!(
            serialize_caption_file(&t, SubtitleFormat::Srt),
            Err(CaptionError::Unrepresentable { .. })
        ));
    }

    #[test]
    fn round_trip_three() {
        let t = CaptionTrack::from_triples(
            &[(0.5, 2.25, "one"), (2.25, 4.0, "two <b>"), (3600.0, 3725.125, "three\nlines")],
            3725.125,
        )
        .unwrap();
        for fmt in [SubtitleFormat::Vtt, SubtitleFormat::Srt] {
            let bytes = serialize_caption_file(&t, fmt).unwrap();
            assert_eq!(parse_caption_file(&bytes, fmt).unwrap(), t);
        }
    }
}
