use std::path::Path;

use signtrack::captions::{read_feature_track, Split};
use signtrack::chunker::{build_chunk_records, ChunkRecord, SamplerConfig};
use signtrack::grammar::{synthesize_examples, ExampleRenderer, GrammarError, MixtureWeights, TimestampGrammar};
use signtrack::par::Execution;

use crate::config::RunConfig;
use crate::exit::{data, data_msg, internal, CmdResult};
use crate::io::{check_file_safe_ids, load_videos, write_atomic, write_jsonl};

pub struct Request<'a> {
    pub manifest: &'a Path,
    pub out: &'a Path,
    pub splits: &'a [Split],
    pub sampler: SamplerConfig,
    /// Total examples; `None` means one per chunk per epoch.
    pub count: Option<usize>,
    pub epochs: Option<usize>,
}

pub fn run(req: Request, exec: Execution) -> CmdResult {
    let videos = load_videos(req.manifest, req.splits)?;
    check_file_safe_ids(&videos)?;
    let mut records: Vec<ChunkRecord> = Vec::new();
    for v in &videos {
        let path = v.feature_path.as_ref().ok_or_else(|| {
            data_msg(format!(
                "{}: video {} has no feature_track_ref; examples need features",
                req.manifest.display(),
                v.entry.video_id
            ))
        })?;
        let features = read_feature_track(path).map_err(data)?;
        let recs = build_chunk_records(&v.entry.video_id, &v.track, Some(&features), &req.sampler)
            .map_err(|e| data(anyhow::anyhow!("{}: {e}", v.entry.video_id)))?;
        records.extend(recs);
    }
    let count = match (req.count, req.epochs) {
        (Some(c), _) => c,
        (None, Some(e)) => e * records.len(),
        (None, None) => records.len(),
    };
    if records.is_empty() && count > 0 {
        return Err(data_msg(format!("{}: no videos to sample from", req.manifest.display())));
    }

    let renderer = ExampleRenderer::new(TimestampGrammar::default().with_max(req.sampler.n_s));
    let weights = MixtureWeights::default();
    let examples = synthesize_examples(&records, &req.sampler, &weights, &renderer, count, exec);

    let run = RunConfig {
        seed: Some(req.sampler.seed),
        sampler: Some(req.sampler.clone()),
        grammar: Some(renderer.grammar),
        output: Some(req.out.display().to_string()),
        ..RunConfig::new("make-examples")
    }
    .path("manifest", req.manifest)
    .option("count", count)
    .option("splits", req.splits.iter().map(|s| s.as_str()).collect::<Vec<_>>());

    let mut lines = Vec::with_capacity(examples.len());
    for (k, ex) in examples.into_iter().enumerate() {
        let ex = ex.map_err(|e| match e {
            GrammarError::EmptyClip => data_msg(format!("example {k}: clip has no feature frames (feature track too short?)")),
            e => internal(anyhow::anyhow!("example {k}: {e}")),
        })?;
        ex.validate(&renderer.grammar, renderer.budget, renderer.tokenizer.as_ref())
            .map_err(|e| internal(anyhow::anyhow!("example {k} failed validation: {e}")))?;
        let file = ex.feature_slice.source.as_ref().map(|s| format!("features/{}", s.display()));
        lines.push(ex.to_record(file.as_deref()));
    }

    for rec in &records {
        let slice = rec.features.as_ref().expect("records were built with features");
        write_atomic(&req.out.join("features").join(rec.feature_file_name()), &slice.to_track().to_bytes())?;
    }
    write_jsonl(&req.out.join("chunks.jsonl"), &run, &records)?;
    write_jsonl(&req.out.join("examples.jsonl"), &run, &lines)?;
    eprintln!(
        "wrote {} examples from {} chunks of {} videos to {}",
        lines.len(),
        records.len(),
        videos.len(),
        req.out.display()
    );
    Ok(())
}
