use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakMode {
    /// Captions to align are given one per line.
    InputSpecifies,
    /// Captions are space-joined; the model places the breaks.
    ModelPredicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanMode {
    Overflow,
    Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    Untimed,
    Timed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    None,
    Prev,
    PrevAndNext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum TaskDescriptor {
    Alignment {
        breaks: BreakMode,
        /// Only ever true with [`BreakMode::ModelPredicts`].
        duration_conditioning: bool,
        span_mode: SpanMode,
    },
    Translation {
        timing: Timing,
        /// Only ever true with [`Timing::Timed`].
        duration_conditioning: bool,
        context: ContextMode,
    },
}

impl TaskDescriptor {
    pub fn is_alignment(&self) -> bool {
        matches!(self, TaskDescriptor::Alignment { .. })
    }

    pub fn duration_conditioning(&self) -> bool {
        match *self {
            TaskDescriptor::Alignment { duration_conditioning, .. } | TaskDescriptor::Translation { duration_conditioning, .. } => {
                duration_conditioning
            }
        }
    }

    pub fn timed_translation() -> Self {
        TaskDescriptor::Translation {
            timing: Timing::Timed,
            duration_conditioning: false,
            context: ContextMode::Prev,
        }
    }
}

/// Probability of the first option at each choice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights {
    pub alignment: f64,
    pub breaks_input_specifies: f64,
    pub duration_conditioning: f64,
    pub overflow: f64,
    pub timed: f64,
    /// `[none, prev, prev_and_next]`
    pub context: [f64; 3],
}

impl Default for MixtureWeights {
    fn default() -> Self {
        Self {
            alignment: 0.04,
            breaks_input_specifies: 0.5,
            duration_conditioning: 0.5,
            overflow: 0.8,
            timed: 0.8,
            context: [0.2, 0.64, 0.16],
        }
    }
}

/// Every choice point of the mixture, drawn whether or not the chosen branch
/// uses it. [`TaskChoices::descriptor`] keeps only the relevant ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskChoices {
    pub alignment: bool,
    pub breaks: BreakMode,
    pub duration_conditioning: bool,
    pub span_mode: SpanMode,
    pub timing: Timing,
    pub context: ContextMode,
}

impl TaskChoices {
    pub fn descriptor(&self) -> TaskDescriptor {
        if self.alignment {
            TaskDescriptor::Alignment {
                breaks: self.breaks,
                duration_conditioning: self.breaks == BreakMode::ModelPredicts && self.duration_conditioning,
                span_mode: self.span_mode,
            }
        } else {
            TaskDescriptor::Translation {
                timing: self.timing,
                duration_conditioning: self.timing == Timing::Timed && self.duration_conditioning,
                context: self.context,
            }
        }
    }
}

/// Draws all six choice points independently, always in the same order.
pub fn sample_task_choices<R: Rng + ?Sized>(rng: &mut R, w: &MixtureWeights) -> TaskChoices {
    let u: [f64; 6] = std::array::from_fn(|_| rng.gen());
    let context = if u[5] < w.context[0] {
        ContextMode::None
    } else if u[5] < w.context[0] + w.context[1] {
        ContextMode::Prev
    } else {
        ContextMode::PrevAndNext
    };
    TaskChoices {
        alignment: u[0] < w.alignment,
        breaks: if u[1] < w.breaks_input_specifies {
            BreakMode::InputSpecifies
        } else {
            BreakMode::ModelPredicts
        },
        duration_conditioning: u[2] < w.duration_conditioning,
        span_mode: if u[3] < w.overflow { SpanMode::Overflow } else { SpanMode::Subset },
        timing: if u[4] < w.timed { Timing::Timed } else { Timing::Untimed },
        context,
    }
}

pub fn sample_task<R: Rng + ?Sized>(rng: &mut R) -> TaskDescriptor {
    sample_task_choices(rng, &MixtureWeights::default()).descriptor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn weights_sum_to_one() {
        let w = MixtureWeights::default();
        assert!((w.context.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn masked_fields() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            match sample_task(&mut rng) {
                TaskDescriptor::Alignment {
                    breaks: BreakMode::InputSpecifies,
                    duration_conditioning: true,
                    ..
                } => panic!("duration conditioning with given breaks"),
                TaskDescriptor::Translation {
                    timing: Timing::Untimed,
                    duration_conditioning: true,
                    ..
                } => panic!("duration conditioning on untimed translation"),
                _ => {}
            }
        }
    }

    #[test]
    fn descriptor_serde_shape() {
        let d = TaskDescriptor::timed_translation();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"{"branch":"translation","timing":"timed","duration_conditioning":false,"context":"prev"}"#
        );
    }
}
