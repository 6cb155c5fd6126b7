use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;
use signtrack::captions::{compute_stats, StatsInput, StatsTable, TrackStats, PERCENTILES};

use crate::config::RunConfig;
use crate::exit::{data, CmdResult};
use crate::io::load_videos;

pub fn table(manifest: &Path) -> CmdResult<StatsTable> {
    let videos = load_videos(manifest, &[])?;
    let inputs: Vec<StatsInput> = videos
        .iter()
        .map(|v| StatsInput {
            signer_id: v.entry.signer_id,
            article_id: &v.entry.article_id,
            track: &v.track,
        })
        .collect();
    compute_stats(&inputs).map_err(|e| data(anyhow::anyhow!("{}: {e}", manifest.display())))
}

fn row(out: &mut String, label: &str, s: &TrackStats) {
    let chars = s.length_percentiles_chars.map(|c| c.to_string()).join("/");
    let secs = s.duration_percentiles_s.map(|d| format!("{d:.1}")).join("/");
    let _ = writeln!(
        out,
        "{label:<10} {:>7} {:>10} {:>9} {:>7.2}  {chars:<24} {secs}",
        s.n_signers, s.n_discourses, s.n_sentences, s.hours
    );
}

pub fn render_text(t: &StatsTable, by_signer: bool) -> String {
    let pct = PERCENTILES.map(|p| format!("{p}")).join("/");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>7} {:>10} {:>9} {:>7}  {:<24} {}",
        "group",
        "signers",
        "discourses",
        "sentences",
        "hours",
        format!("chars p{pct}"),
        format!("seconds p{pct}")
    );
    row(&mut out, "overall", &t.overall);
    if by_signer {
        for (signer, s) in &t.by_signer {
            row(&mut out, &format!("signer {signer}"), s);
        }
    }
    out
}

pub fn run(manifest: &Path, by_signer: bool, as_json: bool) -> CmdResult {
    let t = table(manifest)?;
    let run = RunConfig::new("stats")
        .path("manifest", manifest)
        .option("by_signer", by_signer);
    if as_json {
        let mut report = json!({ "provenance": run.to_value(), "overall": t.overall });
        if by_signer {
            report["by_signer"] = json!(t.by_signer);
        }
        println!("{}", serde_json::to_string_pretty(&report).expect("stats serialize"));
    } else {
        println!("# {}", run.header_line());
        print!("{}", render_text(&t, by_signer));
    }
    Ok(())
}
