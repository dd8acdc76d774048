//! Numerical tolerances shared by every check in the crate.

use serde::{Deserialize, Serialize};

/// Relative / absolute tolerance pair.
///
/// A value `a` matches `b` when `|a - b| <= abs + rel * max(|a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }

    /// Residual normalised by the allowed slack; `<= 1` means within tolerance.
    pub fn scaled_residual(&self, a: f64, b: f64) -> f64 {
        (a - b).abs() / (self.abs + self.rel * a.abs().max(b.abs()))
    }
}
