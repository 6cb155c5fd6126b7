//! Reading inputs and writing outputs.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use signtrack::captions::{
    load_dataset, read_caption_track, read_feature_track, serialize_caption_file, CaptionTrack, DatasetError,
    FeatureTrack, ManifestEntry, Split, SubtitleFormat, VideoRecord, DEFAULT_FPS, PROVENANCE_KEY,
};

use crate::config::RunConfig;
use crate::exit::{data, data_msg, internal, CmdResult};

pub fn load_videos(manifest: &Path, splits: &[Split]) -> CmdResult<Vec<VideoRecord>> {
    let mut videos = load_dataset(manifest).map_err(data)?;
    if !splits.is_empty() {
        videos.retain(|v| splits.contains(&v.entry.split));
    }
    Ok(videos)
}

/// The video's feature track, or a one-value clock track when the manifest
/// gives none. Translators that read frames get no file in that case.
pub fn features_or_clock(video: &VideoRecord) -> Result<FeatureTrack, DatasetError> {
    match &video.feature_path {
        Some(p) => read_feature_track(p),
        None => Ok(FeatureTrack::clock(DEFAULT_FPS, video.track.video_duration_s())),
    }
}

/// Video ids become file names, so they may not contain separators.
pub fn check_file_safe_ids(videos: &[VideoRecord]) -> CmdResult {
    for v in videos {
        let id = &v.entry.video_id;
        if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
            return Err(data_msg(format!("video_id {id:?} cannot be used as a file name")));
        }
    }
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CmdResult {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| internal(anyhow::anyhow!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| internal(anyhow::anyhow!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .map_err(|e| internal(anyhow::anyhow!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| internal(anyhow::anyhow!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// A JSON Lines file: the provenance header, then one record per line.
pub fn write_jsonl<T: Serialize>(path: &Path, run: &RunConfig, records: &[T]) -> CmdResult {
    let mut out = run.header_line();
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(internal)?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// WebVTT with the provenance header as a NOTE block after the signature.
pub fn vtt_bytes(track: &CaptionTrack, run: &RunConfig) -> CmdResult<Vec<u8>> {
    let body = serialize_caption_file(track, SubtitleFormat::Vtt).map_err(data)?;
    let body = String::from_utf8(body).map_err(internal)?;
    let (signature, rest) = body.split_once('\n').unwrap_or((body.as_str(), ""));
    Ok(format!("{signature}\n\n{}\n{rest}", run.vtt_note()).into_bytes())
}

/// Writes one VTT per video plus a manifest pointing at them, so the output
/// directory can be read back like any dataset.
pub fn write_track_set(out: &Path, run: &RunConfig, tracks: &[(&ManifestEntry, &CaptionTrack)]) -> CmdResult {
    let mut entries = Vec::with_capacity(tracks.len());
    for (entry, track) in tracks {
        let file = format!("{}.vtt", entry.video_id);
        write_atomic(&out.join(&file), &vtt_bytes(track, run)?)?;
        entries.push(ManifestEntry {
            caption_track_ref: PathBuf::from(file),
            feature_track_ref: None,
            duration_s: Some(track.video_duration_s()),
            ..(*entry).clone()
        });
    }
    write_jsonl(&out.join("manifest.jsonl"), run, &entries)
}

/// One line of an untimed hypothesis file. Sentence-level lines carry the
/// reference caption they translate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypLine {
    pub video_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_index: Option<usize>,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct NamedTrack {
    pub video_id: String,
    pub track: CaptionTrack,
    /// False when the duration was inferred from the last caption.
    pub explicit_duration: bool,
}

/// Anything `score` accepts on either side.
#[derive(Debug, Clone)]
pub enum Scorable {
    Tracks(Vec<NamedTrack>),
    Texts(Vec<HypLine>),
}

impl Scorable {
    /// A subtitle file, a dataset manifest, or a hypothesis file.
    pub fn load(path: &Path) -> CmdResult<Self> {
        if SubtitleFormat::from_extension(path).is_some() {
            let track = read_caption_track(path, None).map_err(data)?;
            let video_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            return Ok(Scorable::Tracks(vec![NamedTrack {
                video_id,
                track,
                explicit_duration: false,
            }]));
        }
        let text = std::fs::read_to_string(path).map_err(|e| data_msg(format!("{}: {e}", path.display())))?;
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let value: Value = serde_json::from_str(raw)
                .map_err(|e| data_msg(format!("{}: line {}: {e}", path.display(), i + 1)))?;
            if value.get(PROVENANCE_KEY).is_some() {
                continue;
            }
            if value.get("caption_track_ref").is_some() {
                return Self::load_manifest(path);
            }
            let line: HypLine = serde_json::from_value(value)
                .map_err(|e| data_msg(format!("{}: line {}: {e}", path.display(), i + 1)))?;
            lines.push(line);
        }
        Ok(Scorable::Texts(lines))
    }

    fn load_manifest(path: &Path) -> CmdResult<Self> {
        let videos = load_dataset(path).map_err(data)?;
        Ok(Scorable::Tracks(
            videos
                .into_iter()
                .map(|v| NamedTrack {
                    video_id: v.entry.video_id,
                    explicit_duration: v.entry.duration_s.is_some(),
                    track: v.track,
                })
                .collect(),
        ))
    }

    pub fn is_sentence_level(&self) -> bool {
        matches!(self, Scorable::Texts(lines) if lines.iter().any(|l| l.caption_index.is_some()))
    }

    /// Segments keyed by `(video_id, caption_index)`, in file order. Tracks
    /// give one segment per caption at sentence level and one per video
    /// otherwise.
    pub fn segments(&self, sentence_level: bool) -> CmdResult<Vec<((String, Option<usize>), String)>> {
        let mut out = Vec::new();
        match self {
            Scorable::Tracks(tracks) => {
                for t in tracks {
                    if sentence_level {
                        for (i, c) in t.track.captions().iter().enumerate() {
                            out.push(((t.video_id.clone(), Some(i)), c.text.clone()));
                        }
                    } else {
                        out.push(((t.video_id.clone(), None), t.track.texts().join(" ")));
                    }
                }
            }
            Scorable::Texts(lines) => {
                for l in lines {
                    if sentence_level != l.caption_index.is_some() {
                        return Err(data_msg(format!(
                            "video {}: sentence-level and document-level lines cannot be mixed",
                            l.video_id
                        )));
                    }
                    out.push(((l.video_id.clone(), l.caption_index), l.text.clone()));
                }
            }
        }
        let mut seen = HashSet::new();
        for (key, _) in &out {
            if !seen.insert(key) {
                return Err(data_msg(format!("duplicate segment {key:?}")));
            }
        }
        Ok(out)
    }
}
