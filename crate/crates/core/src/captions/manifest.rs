//! Dataset manifest: one JSON object per line, one video per record.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "zs")]
    ZeroShot,
    #[serde(rename = "si-train")]
    SignerIndependentTrain,
    #[serde(rename = "si-test")]
    SignerIndependentTest,
    #[serde(rename = "sd-train")]
    SignerDependentTrain,
    #[serde(rename = "sd-test")]
    SignerDependentTest,
}

impl Split {
    pub const ALL: [Split; 5] = [
        Split::ZeroShot,
        Split::SignerIndependentTrain,
        Split::SignerIndependentTest,
        Split::SignerDependentTrain,
        Split::SignerDependentTest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::ZeroShot => "zs",
            Split::SignerIndependentTrain => "si-train",
            Split::SignerIndependentTest => "si-test",
            Split::SignerDependentTrain => "sd-train",
            Split::SignerDependentTest => "sd-test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|split| split.as_str() == s)
            .ok_or_else(|| s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub signer_id: u8,
    pub split: Split,
    pub article_id: String,
    pub caption_track_ref: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_track_ref: Option<PathBuf>,
    /// Video length when it extends past the last caption.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifestError {
    #[error("line {line}: unknown split {value:?}")]
    UnknownSplit { line: usize, value: String },
    #[error("line {line}: duplicate video_id {video_id:?} (first seen on line {first_line})")]
    DuplicateVideoId { line: usize, first_line: usize, video_id: String },
    #[error("line {line}: missing field {field:?}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field {field:?} is invalid: {message}")]
    InvalidField { line: usize, field: &'static str, message: String },
    #[error("line {line}: not a JSON object: {message}")]
    Syntax { line: usize, message: String },
}

const MAX_SIGNER_ID: u64 = 4;

fn required_str<'a>(obj: &'a Map<String, Value>, field: &'static str, line: usize) -> Result<&'a str, ManifestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(ManifestError::MissingField { line, field }),
        Some(Value::String(s)) => Ok(s),
        Some(other) => Err(ManifestError::InvalidField {
            line,
            field,
            message: format!("expected a string, got {other}"),
        }),
    }
}

fn parse_entry(obj: &Map<String, Value>, line: usize) -> Result<ManifestEntry, ManifestError> {
    let video_id = required_str(obj, "video_id", line)?.to_owned();
    let signer_id = match obj.get("signer_id") {
        None | Some(Value::Null) => return Err(ManifestError::MissingField { line, field: "signer_id" }),
        Some(v) => v
            .as_u64()
            .filter(|id| *id <= MAX_SIGNER_ID)
            .ok_or_else(|| ManifestError::InvalidField {
                line,
                field: "signer_id",
                message: format!("expected an integer 0-{MAX_SIGNER_ID}, got {v}"),
            })? as u8,
    };
    let split_raw = required_str(obj, "split", line)?;
    let split = split_raw.parse().map_err(|value| ManifestError::UnknownSplit { line, value })?;
    let article_id = match obj.get("article_id") {
        None | Some(Value::Null) => return Err(ManifestError::MissingField { line, field: "article_id" }),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(other) => {
            return Err(ManifestError::InvalidField {
                line,
                field: "article_id",
                message: format!("expected a string, got {other}"),
            })
        }
    };
    let caption_track_ref = PathBuf::from(required_str(obj, "caption_track_ref", line)?);
    let feature_track_ref = match obj.get("feature_track_ref") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            return Err(ManifestError::InvalidField {
                line,
                field: "feature_track_ref",
                message: format!("expected a string, got {other}"),
            })
        }
    };
    let duration_s = match obj.get("duration_s") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_f64()
                .filter(|d| d.is_finite() && *d >= 0.0)
                .ok_or_else(|| ManifestError::InvalidField {
                    line,
                    field: "duration_s",
                    message: format!("expected a non-negative number, got {v}"),
                })?,
        ),
    };
    Ok(ManifestEntry {
        video_id,
        signer_id,
        split,
        article_id,
        caption_track_ref,
        feature_track_ref,
        duration_s,
    })
}

/// Key of the header record tools write at the top of their outputs.
pub const PROVENANCE_KEY: &str = "provenance";

/// Parses a manifest. Blank lines, lines starting with `#` and
/// `{"provenance": ...}` header records are skipped.
pub fn load_manifest(bytes: &[u8]) -> Result<Vec<ManifestEntry>, ManifestError> {
    let text = String::from_utf8_lossy(bytes);
    let mut seen = std::collections::HashMap::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: Value = serde_json::from_str(trimmed).map_err(|e| ManifestError::Syntax {
            line,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| ManifestError::Syntax {
            line,
            message: "expected an object".into(),
        })?;
        if obj.contains_key(PROVENANCE_KEY) {
            continue;
        }
        let entry = parse_entry(obj, line)?;
        if let Some(first_line) = seen.insert(entry.video_id.clone(), line) {
            return Err(ManifestError::DuplicateVideoId {
                line,
                first_line,
                video_id: entry.video_id,
            });
        }
        entries.push(entry);
    }
    debug_assert_eq!(entries.iter().map(|e| &e.video_id).collect::<HashSet<_>>().len(), entries.len());
    Ok(entries)
}
