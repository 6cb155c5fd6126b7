//! Run configuration: flag values merged over an optional config file, and
//! the provenance header written into every output.

use std::collections::BTreeMap;
use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use signtrack::captions::PROVENANCE_KEY;
use signtrack::chunker::SamplerConfig;
use signtrack::driver::DriverConfig;
use signtrack::grammar::TimestampGrammar;

use crate::exit::{usage, usage_msg, CmdResult};

/// Keys accepted in a `--config` file (TOML `key = value` lines).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub max_clip_s: Option<f64>,
    pub min_clip_s: Option<f64>,
    pub p_truncate: Option<f64>,
    pub window_s: Option<f64>,
    pub head_margin_s: Option<f64>,
    pub tail_margin_s: Option<f64>,
    pub stride_s: Option<f64>,
    pub context_budget: Option<usize>,
    pub max_windows: Option<usize>,
    pub decoherence_threshold: Option<f64>,
    pub eval_fps: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CmdResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage_msg(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage_msg(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplerArgs {
    /// Maximum clip length and context length n, in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub max_clip_s: Option<f64>,
    /// Minimum length m of a truncated clip, in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub min_clip_s: Option<f64>,
    /// Probability that a clip is truncated.
    #[arg(long, value_name = "P")]
    pub p_truncate: Option<f64>,
}

impl SamplerArgs {
    pub fn resolve(&self, seed: u64, file: &FileConfig) -> CmdResult<SamplerConfig> {
        let d = SamplerConfig::default();
        let cfg = SamplerConfig {
            n_s: self.max_clip_s.or(file.max_clip_s).unwrap_or(d.n_s),
            m_s: self.min_clip_s.or(file.min_clip_s).unwrap_or(d.m_s),
            p_truncate: self.p_truncate.or(file.p_truncate).unwrap_or(d.p_truncate),
            seed,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DriverArgs {
    /// Decoding window length in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub window_s: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    pub head_margin_s: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    pub tail_margin_s: Option<f64>,
    /// Advance used when a window keeps no caption.
    #[arg(long, value_name = "SECONDS")]
    pub stride_s: Option<f64>,
    /// Prior-text budget in whitespace-separated units.
    #[arg(long, value_name = "UNITS")]
    pub context_budget: Option<usize>,
    /// Hard cap on windows per video.
    #[arg(long, value_name = "N")]
    pub max_windows: Option<usize>,
    /// Alignment stops when a window's output drifts further than this
    /// (normalized edit distance) from the captions it claims.
    #[arg(long, value_name = "D")]
    pub decoherence_threshold: Option<f64>,
}

impl DriverArgs {
    pub fn resolve(&self, file: &FileConfig) -> CmdResult<DriverConfig> {
        let d = DriverConfig::default();
        let cfg = DriverConfig {
            window_s: self.window_s.or(file.window_s).unwrap_or(d.window_s),
            head_margin_s: self.head_margin_s.or(file.head_margin_s).unwrap_or(d.head_margin_s),
            tail_margin_s: self.tail_margin_s.or(file.tail_margin_s).unwrap_or(d.tail_margin_s),
            fallback_stride_s: self.stride_s.or(file.stride_s).unwrap_or(d.fallback_stride_s),
            context_budget: self.context_budget.or(file.context_budget).unwrap_or(d.context_budget),
            max_windows: self.max_windows.or(file.max_windows).or(d.max_windows),
            avgdur_s: None,
            decoherence_threshold: self
                .decoherence_threshold
                .or(file.decoherence_threshold)
                .unwrap_or(d.decoherence_threshold),
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    /// Timestamp grammar whose range matches the window.
    pub fn grammar(cfg: &DriverConfig) -> TimestampGrammar {
        TimestampGrammar::default().with_max(cfg.window_s)
    }
}

/// Everything that determines a command's output. `--jobs` is left out on
/// purpose: it never changes the bytes written.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub paths: BTreeMap<&'static str, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<DriverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grammar: Option<TimestampGrammar>,
    pub options: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            paths: BTreeMap::new(),
            sampler: None,
            driver: None,
            grammar: None,
            options: BTreeMap::new(),
            output: None,
        }
    }

    pub fn path(mut self, key: &'static str, path: &Path) -> Self {
        self.paths.insert(key, path.display().to_string());
        self
    }

    pub fn option(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.options.insert(key, value.into());
        self
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("run config serializes")
    }

    /// `{"provenance": {...}}` on one line.
    pub fn header_line(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert(PROVENANCE_KEY.to_owned(), self.to_value());
        Value::Object(map).to_string()
    }

    /// WebVTT comment block carrying the header. `-->` may not appear in a
    /// NOTE, so it is written with a JSON escape.
    pub fn vtt_note(&self) -> String {
        format!("NOTE {}", self.header_line().replace("-->", "--\\u003e"))
    }
}
