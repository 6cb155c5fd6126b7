//! Long-form sign language video translation machinery: timed caption
//! tracks, random-clip training example synthesis, a control-token task
//! grammar, chunked autoregressive decoding over a pluggable translator, and
//! timed translation and alignment metrics.

pub mod captions;
pub mod driver;
pub mod chunker;
pub mod grammar;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod synth;
pub mod time;

pub use captions::{Caption, CaptionError, CaptionTrack};
pub use time::TimeSpan;
