//! Uniform-grid trapezoid quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default sampling interval T_s in µm.
pub const DEFAULT_STEP: f64 = 1.0;

/// Uniform sampling x_min, x_min + step, …, x_max. When built with
/// [`QuadratureGrid::auto`] the bounds are chosen per integral from the
/// support of the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub step: f64,
    pub bounds: Option<(f64, f64)>,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::auto(DEFAULT_STEP)
    }
}

impl QuadratureGrid {
    pub fn auto(step: f64) -> Self {
        Self { step, bounds: None }
    }

    pub fn fixed(x_min: f64, x_max: f64, step: f64) -> Self {
        Self { step, bounds: Some((x_min, x_max)) }
    }

    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return invalid(format!("grid step must be positive, got {}", self.step));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo < hi) {
                return invalid(format!("grid bounds must satisfy x_min < x_max, got [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Sample points covering `support` (unless the bounds are fixed), snapped
    /// outward to integer multiples of the step.
    pub fn points(&self, support: (f64, f64)) -> Vec<f64> {
        let (lo, hi) = self.bounds.unwrap_or(support);
        let first = (lo / self.step).floor() as i64;
        let last = (hi / self.step).ceil() as i64;
        (first..=last).map(|i| i as f64 * self.step).collect()
    }

    /// Trapezoid rule over the sampled support.
    pub fn integrate(&self, support: (f64, f64), f: impl FnMut(f64) -> f64) -> f64 {
        trapezoid(&self.points(support), self.step, f)
    }
}

/// Composite trapezoid on equally spaced `xs`.
pub fn trapezoid(xs: &[f64], step: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    match xs.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = xs[1..n - 1].iter().map(|&x| f(x)).sum();
            step * (inner + 0.5 * (f(xs[0]) + f(xs[n - 1])))
        }
    }
}

/// Union of closed intervals, as the hull when they overlap or touch.
pub(crate) fn hull(intervals: impl IntoIterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    intervals.into_iter().reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
}
