//! Reading the files a manifest points at. Relative paths resolve against
//! the manifest's directory.

use std::path::{Path, PathBuf};

use super::{
    load_manifest, parse_caption_file, CaptionError, CaptionTrack, FeatureError, FeatureTrack, ManifestEntry,
    ManifestError, SubtitleFormat,
};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Manifest { path: PathBuf, source: ManifestError },
    #[error("{path}: {source}")]
    Caption { path: PathBuf, source: CaptionError },
    #[error("{path}: unknown subtitle extension (expected .vtt or .srt)")]
    UnknownFormat { path: PathBuf },
    #[error("{path}: {source}")]
    Feature { path: PathBuf, source: FeatureError },
}

impl DatasetError {
    pub fn path(&self) -> &Path {
        match self {
            DatasetError::Io { path, .. }
            | DatasetError::Manifest { path, .. }
            | DatasetError::Caption { path, .. }
            | DatasetError::UnknownFormat { path }
            | DatasetError::Feature { path, .. } => path,
        }
    }
}

/// One manifest line with its caption track loaded.
#[derive(Debug, Clone)]
pub struct VideoRecord {
    pub entry: ManifestEntry,
    pub track: CaptionTrack,
    pub caption_path: PathBuf,
    pub feature_path: Option<PathBuf>,
}

pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, DatasetError> {
    std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a `.vtt` or `.srt` file. Without `duration_s` the video is taken
/// to end with the last caption.
pub fn read_caption_track(path: &Path, duration_s: Option<f64>) -> Result<CaptionTrack, DatasetError> {
    let format = SubtitleFormat::from_extension(path).ok_or_else(|| DatasetError::UnknownFormat {
        path: path.to_path_buf(),
    })?;
    let caption_err = |source| DatasetError::Caption {
        path: path.to_path_buf(),
        source,
    };
    let track = parse_caption_file(&read(path)?, format).map_err(caption_err)?;
    match duration_s {
        Some(d) => track.with_duration(d).map_err(caption_err),
        None => Ok(track),
    }
}

pub fn read_feature_track(path: &Path) -> Result<FeatureTrack, DatasetError> {
    FeatureTrack::from_bytes(&read(path)?).map_err(|source| DatasetError::Feature {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    load_manifest(&read(path)?).map_err(|source| DatasetError::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

fn base_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Loads the manifest and every caption track it references. Feature files
/// are only resolved, not read.
pub fn load_dataset(manifest: &Path) -> Result<Vec<VideoRecord>, DatasetError> {
    let base = base_dir(manifest);
    read_manifest(manifest)?
        .into_iter()
        .map(|entry| {
            let caption_path = resolve(&base, &entry.caption_track_ref);
            let track = read_caption_track(&caption_path, entry.duration_s)?;
            let feature_path = entry.feature_track_ref.as_deref().map(|p| resolve(&base, p));
            Ok(VideoRecord {
                entry,
                track,
                caption_path,
                feature_path,
            })
        })
        .collect()
}

/// Resolves an entry's paths without reading anything.
pub fn entry_paths(manifest: &Path, entry: &ManifestEntry) -> (PathBuf, Option<PathBuf>) {
    let base = base_dir(manifest);
    (
        resolve(&base, &entry.caption_track_ref),
        entry.feature_track_ref.as_deref().map(|p| resolve(&base, p)),
    )
}
