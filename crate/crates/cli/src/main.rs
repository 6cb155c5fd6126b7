//! `signtrack`: validate caption datasets, build training examples, decode
//! videos through a translator and score the results.

mod config;
mod decode;
mod examples;
mod exit;
mod io;
mod score;
mod stats;
mod translator;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use signtrack::captions::Split;
use signtrack::metrics::DEFAULT_EVAL_FPS;
use signtrack::par::Execution;

use config::{DriverArgs, FileConfig, RunConfig, SamplerArgs};
use decode::{Decoder, Method, Mode, ScalingSpan};
use exit::{internal, usage_msg, CmdResult, Failure};
use score::Metric;
use translator::{TranslatorPool, TranslatorSpec};

#[derive(Debug, Parser)]
#[command(name = "signtrack", version, about, propagate_version = true)]
struct Cli {
    /// Worker threads for per-video work; 1 runs everything sequentially.
    /// Output bytes do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// TOML file of defaults (`seed = 7`, `window_s = 34.0`, ...); flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a manifest and every file it references.
    Validate { manifest: PathBuf },
    /// Caption statistics, overall and optionally per signer.
    Stats {
        manifest: PathBuf,
        #[arg(long)]
        by_signer: bool,
        /// JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// Chunk videos and sample training examples.
    MakeExamples(MakeExamplesArgs),
    /// Translate videos and write hypotheses plus the decoding trace.
    Translate(TranslateArgs),
    /// Place known caption texts on the video timeline.
    Align(AlignArgs),
    /// Score hypotheses against references; prints a JSON report.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("amount").args(["count", "epochs"])))]
struct MakeExamplesArgs {
    manifest: PathBuf,
    /// Seed for every random draw (may also come from --config).
    #[arg(long)]
    seed: Option<u64>,
    /// Total number of examples.
    #[arg(long)]
    count: Option<usize>,
    /// Examples per chunk; the default is one.
    #[arg(long)]
    epochs: Option<usize>,
    /// Only use videos from these splits (repeatable).
    #[arg(long = "split", value_parser = parse_split)]
    splits: Vec<Split>,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    sampler: SamplerArgs,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    manifest: PathBuf,
    /// `oracle`, `jitter:SIGMA`, `empty`, `stutter`, or a shell command
    /// speaking the JSON Lines translator protocol.
    #[arg(long, default_value = "oracle")]
    translator: TranslatorSpec,
    /// Seed for randomized translators.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "split", value_parser = parse_split)]
    splits: Vec<Split>,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    driver: DriverArgs,
}

#[derive(Debug, Args)]
struct TranslateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[command(flatten)]
    decode: DecodeArgs,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Range the length-scaling baseline fills.
    #[arg(long, value_enum, default_value = "captions")]
    span: ScalingSpan,
    #[command(flatten)]
    decode: DecodeArgs,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long, value_enum)]
    metric: Metric,
    /// Subtitle file, manifest, or hypotheses.jsonl.
    hyp: PathBuf,
    /// Subtitle file or manifest.
    reference: PathBuf,
    /// Frame rate for frame accuracy.
    #[arg(long, value_name = "FPS")]
    eval_fps: Option<f64>,
    /// Case-insensitive BLEU.
    #[arg(long)]
    lowercase: bool,
    /// Write the resliced timed-BLEU segments to this JSON Lines file.
    #[arg(long, value_name = "FILE")]
    segments: Option<PathBuf>,
}

fn parse_split(s: &str) -> Result<Split, String> {
    Split::ALL
        .into_iter()
        .find(|x| x.as_str() == s)
        .ok_or_else(|| format!("unknown split {s:?}"))
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_owned()
}

fn execution(jobs: Option<usize>) -> CmdResult<Execution> {
    let jobs = jobs.unwrap_or(0);
    if jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(internal)?;
    }
    Ok(if jobs == 1 { Execution::Sequential } else { Execution::default() })
}

fn decode_setup(args: &DecodeArgs, file: &FileConfig, command: &'static str) -> CmdResult<(RunConfig, TranslatorPool)> {
    let cfg = args.driver.resolve(file)?;
    let grammar = DriverArgs::grammar(&cfg);
    let seed = args.seed.or(file.seed);
    if args.translator.needs_seed() && seed.is_none() {
        return Err(usage_msg(format!("--translator {} needs --seed", args.translator.name())));
    }
    let pool = TranslatorPool::new(args.translator.clone(), seed.unwrap_or(0), grammar)
        .map_err(|e| internal(anyhow::anyhow!("starting translator: {e}")))?;
    let run = RunConfig {
        seed,
        driver: Some(cfg),
        grammar: Some(grammar),
        output: Some(args.out.display().to_string()),
        ..RunConfig::new(command)
    }
    .path("manifest", &args.manifest)
    .option("translator", args.translator.name())
    .option("splits", args.splits.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    Ok((run, pool))
}

fn run(cli: Cli) -> CmdResult {
    let file = FileConfig::load(cli.config.as_deref())?;
    let exec = execution(cli.jobs.or(file.jobs))?;
    match cli.command {
        Command::Validate { manifest } => validate::run(&manifest),
        Command::Stats {
            manifest,
            by_signer,
            json,
        } => stats::run(&manifest, by_signer, json),
        Command::MakeExamples(a) => {
            let seed = a
                .seed
                .or(file.seed)
                .ok_or_else(|| usage_msg("make-examples needs --seed"))?;
            let sampler = a.sampler.resolve(seed, &file)?;
            examples::run(
                examples::Request {
                    manifest: &a.manifest,
                    out: &a.out,
                    splits: &a.splits,
                    sampler,
                    count: a.count,
                    epochs: a.epochs,
                },
                exec,
            )
        }
        Command::Translate(a) => {
            let (run, pool) = decode_setup(&a.decode, &file, "translate")?;
            let run = run.option("mode", value_name(a.mode));
            let videos = io::load_videos(&a.decode.manifest, &a.decode.splits)?;
            let cfg = run.driver.clone().expect("set by decode_setup");
            let grammar = run.grammar.expect("set by decode_setup");
            let decoder = Decoder {
                pool: &pool,
                cfg: &cfg,
                grammar: &grammar,
            };
            decode::translate(&a.decode.out, &run, &videos, a.mode, &decoder, exec)
        }
        Command::Align(a) => {
            let (run, pool) = decode_setup(&a.decode, &file, "align")?;
            let run = run.option("method", value_name(a.method));
            let videos = io::load_videos(&a.decode.manifest, &a.decode.splits)?;
            match a.method {
                Method::Model => {
                    let cfg = run.driver.clone().expect("set by decode_setup");
                    let grammar = run.grammar.expect("set by decode_setup");
                    let decoder = Decoder {
                        pool: &pool,
                        cfg: &cfg,
                        grammar: &grammar,
                    };
                    decode::align_with_model(&a.decode.out, &run, &videos, &decoder, exec)
                }
                Method::LengthScaling => {
                    let run = run.option("span", value_name(a.span));
                    decode::align_by_length(&a.decode.out, &run, &videos, a.span, exec)
                }
            }
        }
        Command::Score(a) => score::run(
            score::Request {
                metric: a.metric,
                hyp: &a.hyp,
                reference: &a.reference,
                eval_fps: a.eval_fps.or(file.eval_fps).unwrap_or(DEFAULT_EVAL_FPS),
                lowercase: a.lowercase,
                segments: a.segments.as_deref(),
            },
            exec,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
