//! Violation sweeps for the three-slit two-plane geometry.
//!
//! Sweep points run in parallel and come back in sweep order. Every point is
//! evaluated with the closed-form terms, which are cheap enough for the
//! D_s × (β₁, β₂) maximization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_signs, ClosedFormTerms, LgiReport};
use crate::coeffs::two_plane_table;
use crate::constants::Constants;
use crate::error::{MpdError, Result};
use crate::setup::LgiGeometry;

/// Inclusive arithmetic range start, start + step, …, ≤ stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn single(v: f64) -> Self {
        Self { start: v, stop: v, step: 1.0 }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let ok = [self.start, self.stop, self.step].iter().all(|v| v.is_finite());
        if !ok || !(self.step > 0.0) || self.stop < self.start {
            return Err(MpdError::EmptyRange(format!("start {}, stop {}, step {}", self.start, self.stop, self.step)));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SweepAxis {
    /// First-plane shift with everything else fixed; signs optimized.
    Ds { range: Range },
    /// Source width; β pair and D_s optimized per point.
    Sigma0 { range: Range },
    /// Slit-parameter grid; D_s optimized per pair.
    Betas { beta1: Range, beta2: Range },
}

/// Search grids used where a quantity is optimized rather than swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub ds: Range,
    pub beta1: Range,
    pub beta2: Range,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            ds: Range::new(1.0, 1000.0, 1.0),
            beta1: Range::new(5.0, 50.0, 5.0),
            beta2: Range::new(10.0, 100.0, 10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Geometry at the optimum of this point (swept values plus the maximizers).
    pub geometry: LgiGeometry,
    pub report: LgiReport,
}

/// Best violation over `ds_values` for the template's σ₀, β and times.
pub fn best_over_ds(template: &LgiGeometry, ds_values: &[f64], k: &Constants) -> Option<SweepPoint> {
    let table = two_plane_table(&template.setup(), k);
    let offsets = [-template.delta_x, 0.0, template.delta_x];
    let x2 = offsets.map(|o| o * template.beta2);
    ds_values
        .iter()
        .filter_map(|&ds| {
            let x1 = offsets.map(|o| ds + o * template.beta1);
            let terms = ClosedFormTerms::from_table(&table, x1, x2, template.beta2);
            let report = best_signs(|s| terms.evaluate(s));
            report.violation.is_finite().then_some(SweepPoint { geometry: LgiGeometry { ds, ..*template }, report })
        })
        .reduce(|best, p| if p.report.violation > best.report.violation { p } else { best })
}

fn best_over_betas(template: &LgiGeometry, settings: &SweepSettings, k: &Constants) -> Result<Option<SweepPoint>> {
    let ds = settings.ds.values()?;
    let (b1, b2) = (settings.beta1.values()?, settings.beta2.values()?);
    Ok(b1
        .iter()
        .flat_map(|&beta1| b2.iter().map(move |&beta2| (beta1, beta2)))
        .filter_map(|(beta1, beta2)| best_over_ds(&LgiGeometry { beta1, beta2, ..*template }, &ds, k))
        .reduce(|best, p| if p.report.violation > best.report.violation { p } else { best }))
}

/// Runs `axis` around `template`. Points where no light reaches the slits
/// (non-finite violation everywhere) are omitted.
pub fn sweep(
    template: &LgiGeometry,
    axis: &SweepAxis,
    settings: &SweepSettings,
    k: &Constants,
) -> Result<Vec<SweepPoint>> {
    template.setup().validate()?;
    let points: Vec<Option<SweepPoint>> = match axis {
        SweepAxis::Ds { range } => range.values()?.par_iter().map(|&ds| best_over_ds(template, &[ds], k)).collect(),
        SweepAxis::Sigma0 { range } => {
            settings.ds.values()?;
            range
                .values()?
                .par_iter()
                .map(|&sigma0| best_over_betas(&LgiGeometry { sigma0, ..*template }, settings, k))
                .collect::<Result<_>>()?
        }
        SweepAxis::Betas { beta1, beta2 } => {
            let ds = settings.ds.values()?;
            let (b1, b2) = (beta1.values()?, beta2.values()?);
            let pairs: Vec<(f64, f64)> = b1.iter().flat_map(|&x| b2.iter().map(move |&y| (x, y))).collect();
            pairs
                .par_iter()
                .map(|&(beta1, beta2)| best_over_ds(&LgiGeometry { beta1, beta2, ..*template }, &ds, k))
                .collect()
        }
    };
    Ok(points.into_iter().flatten().collect())
}

/// Overall maximum of a sweep.
pub fn sweep_maximum(points: &[SweepPoint]) -> Option<&SweepPoint> {
    points.iter().reduce(|best, p| if p.report.violation > best.report.violation { p } else { best })
}
