use std::collections::HashMap;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};
use signtrack::captions::CaptionTrack;
use signtrack::metrics::{
    corpus_bleu_with, corpus_timed_bleu, export_resliced, frame_accuracy_corpus, BleuConfig,
};
use signtrack::par::Execution;

use crate::config::RunConfig;
use crate::exit::{data, data_msg, CmdResult};
use crate::io::{write_jsonl, NamedTrack, Scorable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Corpus BLEU over sentences (sentence-level hypotheses) or whole
    /// documents (everything else).
    Bleu,
    /// BLEU after reslicing hypothesis text onto the reference captions by
    /// time.
    TimedBleu,
    /// Fraction of frames labelled with the right caption.
    FrameAcc,
}

pub struct Request<'a> {
    pub metric: Metric,
    pub hyp: &'a Path,
    pub reference: &'a Path,
    pub eval_fps: f64,
    pub lowercase: bool,
    /// Where to write timed-BLEU segments for external scorers.
    pub segments: Option<&'a Path>,
}

fn tracks(s: Scorable, side: &str) -> CmdResult<Vec<NamedTrack>> {
    match s {
        Scorable::Tracks(t) => Ok(t),
        Scorable::Texts(_) => Err(data_msg(format!("{side}: this metric needs timed caption tracks"))),
    }
}

/// Pairs tracks by video id, in reference order. When a side's duration was inferred
/// from its last caption, both are extended to the longer duration.
fn pair_tracks(hyp: Vec<NamedTrack>, refs: Vec<NamedTrack>) -> CmdResult<Vec<(String, CaptionTrack, CaptionTrack)>> {
    let mut by_id: HashMap<String, NamedTrack> = hyp.into_iter().map(|t| (t.video_id.clone(), t)).collect();
    let mut pairs = Vec::with_capacity(refs.len());
    for r in refs {
        let h = by_id.remove(&r.video_id).ok_or_else(|| data_msg(format!("no hypothesis for video {}", r.video_id)))?;
        let (mut ht, mut rt) = (h.track, r.track);
        if !(h.explicit_duration && r.explicit_duration) {
            let d = ht.video_duration_s().max(rt.video_duration_s());
            ht = ht.with_duration(d).map_err(data)?;
            rt = rt.with_duration(d).map_err(data)?;
        }
        pairs.push((r.video_id, ht, rt));
    }
    if let Some(extra) = by_id.keys().min() {
        return Err(data_msg(format!("hypothesis for unknown video {extra}")));
    }
    Ok(pairs)
}

pub fn report(req: &Request, exec: Execution) -> CmdResult<Value> {
    let mut hyp = Scorable::load(req.hyp)?;
    let reference = Scorable::load(req.reference)?;
    // Two single subtitle files are compared whatever their names.
    if let (Scorable::Tracks(h), Scorable::Tracks(r)) = (&mut hyp, &reference) {
        if let ([h], [r]) = (h.as_mut_slice(), r.as_slice()) {
            h.video_id = r.video_id.clone();
        }
    }
    let bleu_cfg = BleuConfig {
        lowercase: req.lowercase,
        ..BleuConfig::default()
    };
    Ok(match req.metric {
        Metric::Bleu => {
            let sentence_level = hyp.is_sentence_level() || reference.is_sentence_level();
            let refs = reference.segments(sentence_level)?;
            let mut hyps: HashMap<_, _> = hyp.segments(sentence_level)?.into_iter().collect();
            let mut hyp_texts = Vec::with_capacity(refs.len());
            let mut missing = 0;
            for (key, _) in &refs {
                hyp_texts.push(hyps.remove(key).unwrap_or_else(|| {
                    missing += 1;
                    String::new()
                }));
            }
            if let Some((vid, idx)) = hyps.keys().min() {
                return Err(data_msg(format!("hypothesis for unknown segment {vid}:{idx:?}")));
            }
            let ref_texts: Vec<&str> = refs.iter().map(|(_, t)| t.as_str()).collect();
            let r = corpus_bleu_with(&hyp_texts, &ref_texts, &bleu_cfg, exec).map_err(data)?;
            json!({
                "level": if sentence_level { "sentence" } else { "document" },
                "segments": refs.len(),
                "missing_hypotheses": missing,
                "bleu": r,
            })
        }
        Metric::TimedBleu => {
            let pairs = pair_tracks(tracks(hyp, "hyp")?, tracks(reference, "ref")?)?;
            let borrowed: Vec<(&CaptionTrack, &CaptionTrack)> = pairs.iter().map(|(_, h, r)| (h, r)).collect();
            let r = corpus_timed_bleu(&borrowed, &bleu_cfg, exec).map_err(data)?;
            if let Some(path) = req.segments {
                let segs: Vec<_> = pairs.iter().flat_map(|(id, h, r)| export_resliced(id, h, r)).collect();
                let run = RunConfig::new("score").path("hyp", req.hyp).path("ref", req.reference);
                write_jsonl(path, &run, &segs)?;
            }
            json!({
                "videos": pairs.len(),
                "timed_bleu": r,
            })
        }
        Metric::FrameAcc => {
            let pairs = pair_tracks(tracks(hyp, "hyp")?, tracks(reference, "ref")?)?;
            let borrowed: Vec<(&str, &CaptionTrack, &CaptionTrack)> =
                pairs.iter().map(|(id, h, r)| (id.as_str(), h, r)).collect();
            let r = frame_accuracy_corpus(&borrowed, req.eval_fps, exec).map_err(data)?;
            json!({ "frame_accuracy": r })
        }
    })
}

pub fn run(req: Request, exec: Execution) -> CmdResult {
    let body = report(&req, exec)?;
    let run = RunConfig::new("score")
        .path("hyp", req.hyp)
        .path("ref", req.reference)
        .option("metric", req.metric.to_possible_value().expect("no skipped variants").get_name())
        .option("eval_fps", req.eval_fps)
        .option("lowercase", req.lowercase);
    let mut out = json!({ "provenance": run.to_value() });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    Ok(())
}
