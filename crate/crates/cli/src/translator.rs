use std::str::FromStr;

use signtrack::driver::{
    EmptyTranslator, JitterOracle, OracleTranslator, StutterTranslator, SubprocessTranslator, TranslatorPort,
};
use signtrack::grammar::TimestampGrammar;
use signtrack::CaptionTrack;

/// What `--translator` names: a built-in mock or a shell command.
#[derive(Debug, Clone, PartialEq)]
pub enum TranslatorSpec {
    /// Answers from the reference captions.
    Oracle,
    /// Oracle with timestamps perturbed by a truncated Gaussian of this
    /// standard deviation, in seconds.
    Jitter(f64),
    Empty,
    Stutter,
    Command(String),
}

impl FromStr for TranslatorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "" => return Err("translator must not be empty".into()),
            "oracle" => Self::Oracle,
            "empty" => Self::Empty,
            "stutter" => Self::Stutter,
            _ => match s.strip_prefix("jitter:") {
                Some(sigma) => {
                    let sigma: f64 = sigma.parse().map_err(|e| format!("jitter sigma {sigma:?}: {e}"))?;
                    if !(sigma.is_finite() && sigma >= 0.0) {
                        return Err(format!("jitter sigma must be a non-negative number, got {sigma}"));
                    }
                    Self::Jitter(sigma)
                }
                None => Self::Command(s.to_owned()),
            },
        })
    }
}

impl TranslatorSpec {
    pub fn name(&self) -> String {
        match self {
            Self::Oracle => "oracle".into(),
            Self::Jitter(s) => format!("jitter:{s}"),
            Self::Empty => "empty".into(),
            Self::Stutter => "stutter".into(),
            Self::Command(c) => c.clone(),
        }
    }

    pub fn needs_seed(&self) -> bool {
        matches!(self, Self::Jitter(_))
    }
}

/// Holds the one subprocess shared by every video; mocks are built per
/// video because the oracles need that video's reference.
pub struct TranslatorPool {
    spec: TranslatorSpec,
    seed: u64,
    grammar: TimestampGrammar,
    process: Option<SubprocessTranslator>,
}

impl TranslatorPool {
    pub fn new(spec: TranslatorSpec, seed: u64, grammar: TimestampGrammar) -> std::io::Result<Self> {
        let process = match &spec {
            TranslatorSpec::Command(cmd) => Some(SubprocessTranslator::spawn(cmd)?),
            _ => None,
        };
        Ok(Self {
            spec,
            seed,
            grammar,
            process,
        })
    }

    pub fn for_video(&self, reference: &CaptionTrack) -> Box<dyn TranslatorPort + '_> {
        match &self.spec {
            TranslatorSpec::Oracle => Box::new(OracleTranslator::new(reference.clone()).with_grammar(self.grammar)),
            TranslatorSpec::Jitter(sigma) => Box::new(JitterOracle::new(reference.clone(), *sigma, self.seed)),
            TranslatorSpec::Empty => Box::new(EmptyTranslator),
            TranslatorSpec::Stutter => Box::new(StutterTranslator::default()),
            TranslatorSpec::Command(_) => Box::new(self.process.as_ref().expect("spawned in new")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("oracle".parse(), Ok(TranslatorSpec::Oracle));
        assert_eq!("jitter:0.5".parse(), Ok(TranslatorSpec::Jitter(0.5)));
        assert!("jitter:-1".parse::<TranslatorSpec>().is_err());
        assert_eq!("python3 model.py".parse(), Ok(TranslatorSpec::Command("python3 model.py".into())));
    }
}
