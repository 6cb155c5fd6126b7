use std::path::Path;

use signtrack::captions::{read_caption_track, read_feature_track, read_manifest, resolve};

use crate::exit::{data_msg, CmdResult};

/// Frames a feature track may fall short of the captions before `validate`
/// warns.
const FEATURE_SLACK_FRAMES: f64 = 1.0;

#[derive(Debug, Default)]
pub struct Report {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub videos: usize,
}

/// Checks every file the manifest references and keeps going after a
/// failure, so one run lists every problem.
pub fn check(manifest: &Path) -> Report {
    let mut report = Report::default();
    let entries = match read_manifest(manifest) {
        Ok(e) => e,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };
    let base = manifest.parent().unwrap_or(Path::new(""));
    report.videos = entries.len();
    for entry in &entries {
        let caption_path = resolve(base, &entry.caption_track_ref);
        let track = match read_caption_track(&caption_path, entry.duration_s) {
            Ok(t) => Some(t),
            Err(e) => {
                report.errors.push(format!("{}: {e}", entry.video_id));
                None
            }
        };
        let Some(feature_ref) = &entry.feature_track_ref else {
            continue;
        };
        let feature_path = resolve(base, feature_ref);
        match read_feature_track(&feature_path) {
            Ok(features) => {
                if let Some(track) = &track {
                    let short = track.video_duration_s() - features.duration_s();
                    if short > FEATURE_SLACK_FRAMES / features.fps() as f64 {
                        report.warnings.push(format!(
                            "{}: {}: features end {short:.3} s before the captions",
                            entry.video_id,
                            feature_path.display()
                        ));
                    }
                }
            }
            Err(e) => report.errors.push(format!("{}: {e}", entry.video_id)),
        }
    }
    report
}

pub fn run(manifest: &Path) -> CmdResult {
    let report = check(manifest);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    if report.errors.is_empty() {
        println!("ok: {} videos", report.videos);
        Ok(())
    } else {
        Err(data_msg(format!(
            "{}: {} problem(s) found",
            manifest.display(),
            report.errors.len()
        )))
    }
}
