//! Time spans and quantization helpers.
//!
//! Times are real seconds internally. File formats carry integer
//! milliseconds and the control-token grammar carries tenths of a second, so
//! both quantizers live here.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Slack used when comparing times that went through a quantizer.
pub const TIME_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpanError {
    #[error("span times must be finite and non-negative (got {start_s}, {end_s})")]
    NotFiniteOrNegative { start_s: f64, end_s: f64 },
    #[error("span starts after it ends ({start_s} > {end_s})")]
    Inverted { start_s: f64, end_s: f64 },
}

/// A closed interval of video time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start_s: f64,
    pub end_s: f64,
}

impl TimeSpan {
    pub fn new(start_s: f64, end_s: f64) -> Result<Self, SpanError> {
        if !start_s.is_finite() || !end_s.is_finite() || start_s < 0.0 || end_s < 0.0 {
            return Err(SpanError::NotFiniteOrNegative { start_s, end_s });
        }
        if start_s > end_s {
            return Err(SpanError::Inverted { start_s, end_s });
        }
        Ok(Self { start_s, end_s })
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_span(&self, other: &TimeSpan) -> bool {
        other.start_s >= self.start_s - TIME_EPS && other.end_s <= self.end_s + TIME_EPS
    }

    /// True when the two spans share more than a single point.
    pub fn overlaps(&self, other: &TimeSpan) -> bool {
        self.start_s < other.end_s && other.start_s < self.end_s
    }

    /// Overlap test that also counts touching endpoints and zero-length spans.
    pub fn intersects_closed(&self, other: &TimeSpan) -> bool {
        self.start_s <= other.end_s && other.start_s <= self.end_s
    }

    pub fn shifted(&self, offset_s: f64) -> TimeSpan {
        TimeSpan {
            start_s: self.start_s + offset_s,
            end_s: self.end_s + offset_s,
        }
    }

    pub fn to_millis(&self) -> (u64, u64) {
        (to_millis(self.start_s), to_millis(self.end_s))
    }

    pub fn quantized_ms(&self) -> TimeSpan {
        TimeSpan {
            start_s: quantize_ms(self.start_s),
            end_s: quantize_ms(self.end_s),
        }
    }
}

impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.3}, {:.3}]", self.start_s, self.end_s)
    }
}

pub fn to_millis(seconds: f64) -> u64 {
    (seconds * 1000.0).round().max(0.0) as u64
}

pub fn from_millis(ms: u64) -> f64 {
    ms as f64 / 1000.0
}

pub fn quantize_ms(seconds: f64) -> f64 {
    from_millis(to_millis(seconds))
}

/// Number of whole quanta nearest to `seconds`.
pub fn to_quanta(seconds: f64, quantum_s: f64) -> i64 {
    (seconds / quantum_s).round() as i64
}

pub fn quantize(seconds: f64, quantum_s: f64) -> f64 {
    to_quanta(seconds, quantum_s) as f64 * quantum_s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_spans() {
        assert!(TimeSpan::new(1.0, 0.5).is_err());
        assert!(TimeSpan::new(-1.0, 0.5).is_err());
        assert!(TimeSpan::new(0.0, f64::NAN).is_err());
        assert!(TimeSpan::new(0.0, f64::INFINITY).is_err());
        assert!(TimeSpan::new(2.0, 2.0).is_ok());
    }

    #[test]
    fn millisecond_quantization() {
        assert_eq!(to_millis(1.0005), 1001);
        assert_eq!(to_millis(3.5), 3500);
        assert_eq!(quantize_ms(0.12345), 0.123);
    }

    #[test]
    fn tenth_quanta() {
        assert_eq!(to_quanta(13.9, 0.1), 139);
        assert_eq!(to_quanta(47.9 - 34.0, 0.1), 139);
        assert_eq!(to_quanta(34.0, 0.1), 340);
    }
}
