//! Quantum path interference in time on the three-plane setup: two slits on
//! the first plane, one slit on each later plane.
//!
//! Slit "1" and "2" of the first plane are indices 0 and 1, the second one
//! sitting at positive x. The search keeps second-plane slit positions where
//! adding path 0 to path 1 raises the intensity, then places the third-plane
//! slit where adding it lowers the intensity the most.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::coeffs_at;
use crate::constants::Constants;
use crate::error::{invalid, Result};
use crate::histories::{history_weight, Event, HistorySpec};
use crate::lgi::Range;
use crate::quadrature::QuadratureGrid;
use crate::setup::PhysicalSetup;

/// Candidate second- and third-plane slit positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchRanges {
    pub x21: Range,
    pub x31: Range,
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self { x21: Range { start: 0.0, stop: 500.0, step: 1.0 }, x31: Range { start: -600.0, stop: 800.0, step: 1.0 } }
    }
}

/// A constructive second-plane position with its best third-plane position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpiCandidate {
    pub x21: f64,
    pub x31: f64,
    /// |ψ₂,₀ + ψ₂,₁|² − |ψ₂,₁|² at x21.
    pub constructive_margin: f64,
    /// |ψ₃,₁|² − |ψ₃,₀ + ψ₃,₁|² at x31; positive means destructive.
    pub destructive_margin: f64,
}

/// The nine history probabilities, raw (not normalized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpiProbabilities {
    pub p1_12: f64,
    pub p1_1: f64,
    pub p1_2: f64,
    pub p12_121: f64,
    pub p12_11: f64,
    pub p12_21: f64,
    pub p123_1211: f64,
    pub p123_111: f64,
    pub p123_211: f64,
}

impl QpiProbabilities {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.p1_12,
            self.p1_1,
            self.p1_2,
            self.p12_121,
            self.p12_11,
            self.p12_21,
            self.p123_1211,
            self.p123_111,
            self.p123_211,
        ]
    }

    /// Opening slit 1 raises the first- and second-plane probabilities and
    /// lowers the third-plane one.
    pub fn verdicts(&self) -> [bool; 3] {
        [self.p1_12 > self.p1_2, self.p12_121 > self.p12_21, self.p123_1211 < self.p123_211]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpiReport {
    pub x21: f64,
    pub x31: f64,
    pub constructive_margin: f64,
    pub destructive_margin: f64,
    pub probs: QpiProbabilities,
    pub verdicts: [bool; 3],
}

impl QpiReport {
    pub fn counterintuitive(&self) -> bool {
        self.verdicts.iter().all(|&v| v)
    }
}

fn check_qpi_setup(setup: &PhysicalSetup) -> Result<()> {
    setup.validate()?;
    let counts: Vec<usize> = setup.planes.iter().map(|p| p.slit_count()).collect();
    if counts != [2, 1, 1] {
        return invalid(format!("interference setup needs 2, 1 and 1 slits per plane, got {counts:?}"));
    }
    Ok(())
}

fn with_slits(setup: &PhysicalSetup, x21: f64, x31: f64) -> PhysicalSetup {
    let mut s = setup.clone();
    s.planes[1].slit_centers = vec![x21];
    s.planes[2].slit_centers = vec![x31];
    s
}

/// Constructive and destructive margins at the given slit positions.
pub fn margins(setup: &PhysicalSetup, k: &Constants, x21: f64, x31: f64) -> Result<(f64, f64)> {
    check_qpi_setup(setup)?;
    let at2 = coeffs_at(setup, k, 1)?;
    let at3 = coeffs_at(setup, k, 2)?;
    let [x10, x11] = [setup.planes[0].slit_centers[0], setup.planes[0].slit_centers[1]];
    let (a0, a1) = (at2.amplitude(&[x10], x21), at2.amplitude(&[x11], x21));
    let (b0, b1) = (at3.amplitude(&[x10, x21], x31), at3.amplitude(&[x11, x21], x31));
    Ok(((a0 + a1).norm_sqr() - a1.norm_sqr(), b1.norm_sqr() - (b0 + b1).norm_sqr()))
}

/// Exhaustive search over the lattice. Returns every constructive second-plane
/// position in increasing order, each with the third-plane position of
/// largest destructive margin (the smallest x31 on ties). The wave-function
/// coefficients do not depend on slit centers, so they are computed once.
pub fn find_destructive(setup: &PhysicalSetup, ranges: &SearchRanges, k: &Constants) -> Result<Vec<QpiCandidate>> {
    check_qpi_setup(setup)?;
    let x21s = ranges.x21.values()?;
    let x31s = ranges.x31.values()?;
    let at2 = coeffs_at(setup, k, 1)?;
    let at3 = coeffs_at(setup, k, 2)?;
    let [x10, x11] = [setup.planes[0].slit_centers[0], setup.planes[0].slit_centers[1]];
    let found = x21s
        .par_iter()
        .filter_map(|&x21| {
            let a1 = at2.amplitude(&[x11], x21);
            let constructive = (at2.amplitude(&[x10], x21) + a1).norm_sqr() - a1.norm_sqr();
            if !(constructive > 0.0) {
                return None;
            }
            let mut best = (f64::NAN, f64::NEG_INFINITY);
            for &x31 in &x31s {
                let b1 = at3.amplitude(&[x11, x21], x31);
                let m = b1.norm_sqr() - (at3.amplitude(&[x10, x21], x31) + b1).norm_sqr();
                if m > best.1 {
                    best = (x31, m);
                }
            }
            Some(QpiCandidate { x21, x31: best.0, constructive_margin: constructive, destructive_margin: best.1 })
        })
        .collect();
    Ok(found)
}

/// Candidate of largest destructive margin; the smallest x21 wins ties.
pub fn best_candidate(candidates: &[QpiCandidate]) -> Option<QpiCandidate> {
    candidates.iter().copied().fold(None, |best, c| match best {
        Some(b) if b.destructive_margin >= c.destructive_margin => Some(b),
        _ => Some(c),
    })
}

/// The nine history probabilities and the three verdicts at fixed slit
/// positions. Margins are recomputed at those positions.
pub fn qpi_probabilities(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    x21: f64,
    x31: f64,
) -> Result<QpiReport> {
    check_qpi_setup(setup)?;
    let s = with_slits(setup, x21, x31);
    s.validate()?;
    let first = |slits: &[usize]| match slits {
        [one] => Event::Projection { plane: 0, slit: *one },
        many => Event::SlitSet { plane: 0, slits: many.to_vec() },
    };
    let weight = |first_slits: &[usize], depth: usize| -> Result<f64> {
        let mut events = vec![first(first_slits)];
        events.extend((1..depth).map(|plane| Event::Projection { plane, slit: 0 }));
        Ok(history_weight(&s, k, grid, &HistorySpec::new(events))?.weight)
    };
    let (both, one, two) = (&[0, 1][..], &[0][..], &[1][..]);
    let probs = QpiProbabilities {
        p1_12: weight(both, 1)?,
        p1_1: weight(one, 1)?,
        p1_2: weight(two, 1)?,
        p12_121: weight(both, 2)?,
        p12_11: weight(one, 2)?,
        p12_21: weight(two, 2)?,
        p123_1211: weight(both, 3)?,
        p123_111: weight(one, 3)?,
        p123_211: weight(two, 3)?,
    };
    let (constructive_margin, destructive_margin) = margins(&s, k, x21, x31)?;
    Ok(QpiReport { x21, x31, constructive_margin, destructive_margin, verdicts: probs.verdicts(), probs })
}

/// Probabilities for every candidate, in candidate order.
pub fn candidate_reports(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    candidates: &[QpiCandidate],
) -> Result<Vec<QpiReport>> {
    candidates.par_iter().map(|c| qpi_probabilities(setup, k, grid, c.x21, c.x31)).collect()
}
