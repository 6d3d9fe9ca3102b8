//! Experiment geometry: source, slit planes and plane-to-plane flight times.
//!
//! Planes and slits are indexed from zero. Plane 0 is the first diffraction
//! plane (PL-1) and `times[0]` is the flight time from the source to it.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};

/// Slit leakage bound exp(−ΔX²/(2β²)) above which two slits stop being
/// mutually exclusive projectors.
pub const MUTUAL_EXCLUSIVITY_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    /// Slit centers in µm, strictly increasing. Empty for a pure detector plane.
    pub slit_centers: Vec<f64>,
    /// Gaussian slit parameter β in µm.
    pub beta: f64,
}

impl PlaneSpec {
    pub fn new(slit_centers: Vec<f64>, beta: f64) -> Self {
        Self { slit_centers, beta }
    }

    /// Effective slit width 2√2·β (1/e² intensity drop).
    pub fn effective_width(&self) -> f64 {
        2.0 * SQRT_2 * self.beta
    }

    pub fn slit_count(&self) -> usize {
        self.slit_centers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return invalid(format!("slit beta must be positive, got {}", self.beta));
        }
        if self.slit_centers.iter().any(|x| !x.is_finite()) {
            return invalid("slit centers must be finite");
        }
        if self.slit_centers.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("slit centers must be strictly increasing");
        }
        Ok(())
    }
}

/// A pair of slits on one plane whose Gaussian tails overlap too much.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapWarning {
    pub plane: usize,
    pub slits: (usize, usize),
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSetup {
    /// Source Gaussian standard deviation σ₀ in µm.
    pub sigma0: f64,
    pub planes: Vec<PlaneSpec>,
    /// Flight times in ns: `times[j]` is the duration from plane j−1 (or the
    /// source) to plane j.
    pub times: Vec<f64>,
}

impl PhysicalSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return invalid(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.planes.is_empty() {
            return invalid("setup needs at least one plane");
        }
        if self.times.len() != self.planes.len() {
            return invalid(format!(
                "expected {} flight times (one per plane), got {}",
                self.planes.len(),
                self.times.len()
            ));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return invalid(format!("flight times must be positive, got {t}"));
        }
        for (j, plane) in self.planes.iter().enumerate() {
            plane.validate().map_err(|e| crate::MpdError::InvalidInput(format!("plane {}: {e}", j + 1)))?;
        }
        Ok(())
    }

    /// Slit pairs violating the mutual-exclusivity precondition.
    pub fn overlap_warnings(&self) -> Vec<OverlapWarning> {
        let mut out = Vec::new();
        for (j, plane) in self.planes.iter().enumerate() {
            let n = plane.slit_centers.len();
            for a in 0..n {
                for b in a + 1..n {
                    let dx = plane.slit_centers[b] - plane.slit_centers[a];
                    let leakage = (-dx * dx / (2.0 * plane.beta * plane.beta)).exp();
                    if leakage >= MUTUAL_EXCLUSIVITY_BOUND {
                        out.push(OverlapWarning { plane: j, slits: (a, b), leakage });
                    }
                }
            }
        }
        out
    }

    /// Number of elementary paths arriving at plane `plane`.
    pub fn path_count(&self, plane: usize) -> usize {
        self.planes[..plane].iter().map(PlaneSpec::slit_count).product()
    }

    /// All elementary paths arriving at `plane`, in lexicographic order.
    pub fn paths_to(&self, plane: usize) -> Vec<PathIndex> {
        let mut paths = vec![PathIndex::default()];
        for p in &self.planes[..plane] {
            paths = paths
                .into_iter()
                .flat_map(|path| {
                    (0..p.slit_count()).map(move |s| {
                        let mut next = path.clone();
                        next.slit_choices.push(s);
                        next
                    })
                })
                .collect();
        }
        paths
    }

    /// Geometry mirrored through x = 0.
    pub fn mirrored(&self) -> Self {
        let planes = self
            .planes
            .iter()
            .map(|p| PlaneSpec { slit_centers: p.slit_centers.iter().rev().map(|x| -x).collect(), beta: p.beta })
            .collect();
        Self { planes, ..self.clone() }
    }
}

/// Slit choices of an elementary path, one per traversed plane.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathIndex {
    pub slit_choices: Vec<usize>,
}

impl PathIndex {
    pub fn new(slit_choices: Vec<usize>) -> Self {
        Self { slit_choices }
    }

    pub fn len(&self) -> usize {
        self.slit_choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slit_choices.is_empty()
    }

    /// Slit-center vector of the path.
    pub fn positions(&self, setup: &PhysicalSetup) -> Result<Vec<f64>> {
        if self.slit_choices.len() > setup.planes.len() {
            return invalid(format!(
                "path traverses {} planes but the setup has {}",
                self.slit_choices.len(),
                setup.planes.len()
            ));
        }
        self.slit_choices
            .iter()
            .zip(&setup.planes)
            .enumerate()
            .map(|(j, (&s, plane))| {
                plane.slit_centers.get(s).copied().ok_or_else(|| {
                    crate::MpdError::InvalidInput(format!(
                        "slit {} does not exist on plane {} ({} slits)",
                        s + 1,
                        j + 1,
                        plane.slit_count()
                    ))
                })
            })
            .collect()
    }
}

/// Two planes of three slits used for the Leggett–Garg analysis.
///
/// Slits sit at `ds + [−Δx, 0, Δx]·β₁` on the first plane and `[−Δx, 0, Δx]·β₂`
/// on the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgiGeometry {
    pub delta_x: f64,
    pub ds: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub sigma0: f64,
    pub t01: f64,
    pub t12: f64,
}

impl LgiGeometry {
    /// Setup of the D_s sweep with Δx = 7, t₀₁ = 0.2 ns, t₁₂ = 0.1 ns.
    pub fn ds_sweep_reference(ds: f64) -> Self {
        Self { delta_x: 7.0, ds, beta1: 15.0, beta2: 30.0, sigma0: 130.0, t01: 0.2, t12: 0.1 }
    }

    pub fn setup(&self) -> PhysicalSetup {
        let offsets = [-self.delta_x, 0.0, self.delta_x];
        PhysicalSetup {
            sigma0: self.sigma0,
            planes: vec![
                PlaneSpec::new(offsets.iter().map(|o| self.ds + o * self.beta1).collect(), self.beta1),
                PlaneSpec::new(offsets.iter().map(|o| o * self.beta2).collect(), self.beta2),
            ],
            times: vec![self.t01, self.t12],
        }
    }
}

/// Three-plane interference geometry: two slits on PL-1, one slit each on PL-2
/// and PL-3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpiGeometry {
    pub sigma0: f64,
    pub beta: [f64; 3],
    pub times: [f64; 3],
    /// PL-1 slits sit at ±`plane1_offset`·β₁.
    pub plane1_offset: f64,
    pub x21: f64,
    pub x31: f64,
}

impl Default for QpiGeometry {
    fn default() -> Self {
        Self {
            sigma0: 200.0,
            beta: [25.0, 35.0, 45.0],
            times: [0.5, 0.2, 0.1],
            plane1_offset: 4.0,
            x21: 140.0,
            x31: 143.0,
        }
    }
}

impl QpiGeometry {
    pub fn with_slits(self, x21: f64, x31: f64) -> Self {
        Self { x21, x31, ..self }
    }

    pub fn plane1_centers(&self) -> [f64; 2] {
        let x = self.plane1_offset * self.beta[0];
        [-x, x]
    }

    pub fn setup(&self) -> PhysicalSetup {
        PhysicalSetup {
            sigma0: self.sigma0,
            planes: vec![
                PlaneSpec::new(self.plane1_centers().to_vec(), self.beta[0]),
                PlaneSpec::new(vec![self.x21], self.beta[1]),
                PlaneSpec::new(vec![self.x31], self.beta[2]),
            ],
            times: self.times.to_vec(),
        }
    }
}
