//! Slit projections, detector measurements and history weights.
//!
//! A history is a chronological list of events on increasing planes. Planes
//! skipped by the history let the light through all of their slits
//! coherently, and events after the last listed one are traced out.

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{coeffs_at, PathCoefficients};
use crate::constants::Constants;
use crate::error::{invalid, MpdError, Result};
use crate::quadrature::{hull, QuadratureGrid};
use crate::setup::{PathIndex, PhysicalSetup, PlaneSpec, MUTUAL_EXCLUSIVITY_BOUND};

/// Slit integrals extend this many β around each slit center.
pub const SLIT_EXTENT: f64 = 8.0;
/// Beam integrals extend this many intensity standard deviations around each
/// path's center.
pub const BEAM_EXTENT: f64 = 10.0;

/// Amplitude transmission of slit `i`: exp(−(x − X)²/(2β²)).
pub fn slit_gain(plane: &PlaneSpec, i: usize, x: f64) -> Result<f64> {
    let center = plane.slit_centers.get(i).ok_or_else(|| {
        MpdError::InvalidInput(format!("slit {} does not exist (plane has {})", i + 1, plane.slit_count()))
    })?;
    Ok(gain(*center, plane.beta, x))
}

#[inline]
fn gain(center: f64, beta: f64, x: f64) -> f64 {
    let d = x - center;
    (-d * d / (2.0 * beta * beta)).exp()
}

fn set_gain(plane: &PlaneSpec, slits: &[usize], x: f64) -> f64 {
    slits.iter().map(|&i| gain(plane.slit_centers[i], plane.beta, x)).sum()
}

/// |m(x)|² = 1 − (Σᵢ gᵢ(x))², clamped at zero. The flag is set when the
/// clamped excess is beyond what mutually exclusive slits can produce.
pub fn measure_gain_sq(plane: &PlaneSpec, x: f64) -> (f64, bool) {
    let s: f64 = plane.slit_centers.iter().map(|&c| gain(c, plane.beta, x)).sum();
    let v = 1.0 - s * s;
    (v.max(0.0), v < -2.0 * MUTUAL_EXCLUSIVITY_BOUND)
}

/// Coherent sum of elementary paths arriving at one plane, pre-reduced to
/// Ψ(x) = exp(q·x²)·Σₙ aₙ·exp(lₙ·x).
#[derive(Debug, Clone)]
pub struct Superposition {
    quad: C64,
    terms: Vec<(C64, C64)>,
    support: Vec<(f64, f64)>,
}

impl Superposition {
    pub fn new(coeffs: &PathCoefficients, setup: &PhysicalSetup, paths: &[PathIndex]) -> Result<Self> {
        if paths.is_empty() {
            return invalid("superposition needs at least one path");
        }
        let mut terms = Vec::with_capacity(paths.len());
        let mut support = Vec::with_capacity(paths.len());
        for p in paths {
            if p.len() != coeffs.depth {
                return invalid(format!(
                    "path crosses {} planes but the coefficients describe {}",
                    p.len(),
                    coeffs.depth
                ));
            }
            let centers = p.positions(setup)?;
            let (lin, quad) = coeffs.path_exponent(&centers);
            terms.push((coeffs.upsilon * quad.exp(), lin));
            let (mu, sd) = coeffs.intensity_profile(&centers);
            support.push((mu - BEAM_EXTENT * sd, mu + BEAM_EXTENT * sd));
        }
        Ok(Self { quad: coeffs.quad, terms, support })
    }

    pub fn amplitude(&self, x: f64) -> C64 {
        let s: C64 = self.terms.iter().map(|(a, l)| a * (l * x).exp()).sum();
        s * (self.quad * x * x).exp()
    }

    pub fn intensity(&self, x: f64) -> f64 {
        self.amplitude(x).norm_sqr()
    }

    /// Interval outside which every path's intensity is negligible.
    pub fn beam_support(&self) -> (f64, f64) {
        hull(self.support.iter().copied()).expect("non-empty superposition")
    }

    /// ∫|Ψ|² over the beam support.
    pub fn norm(&self, grid: &QuadratureGrid) -> f64 {
        grid.integrate(self.beam_support(), |x| self.intensity(x))
    }
}

fn slit_support(plane: &PlaneSpec, slits: &[usize]) -> (f64, f64) {
    let ext = SLIT_EXTENT * plane.beta;
    hull(slits.iter().map(|&i| (plane.slit_centers[i] - ext, plane.slit_centers[i] + ext))).expect("non-empty slit set")
}

fn check_slits(plane: &PlaneSpec, slits: &[usize]) -> Result<()> {
    if slits.is_empty() {
        return invalid("slit set must not be empty");
    }
    for (n, &i) in slits.iter().enumerate() {
        if i >= plane.slit_count() {
            return invalid(format!("slit {} does not exist (plane has {})", i + 1, plane.slit_count()));
        }
        if slits[..n].contains(&i) {
            return invalid(format!("slit {} listed twice", i + 1));
        }
    }
    Ok(())
}

fn incoming(setup: &PhysicalSetup, k: &Constants, paths: &[PathIndex], plane: usize) -> Result<Superposition> {
    if plane >= setup.planes.len() {
        return invalid(format!("plane {} does not exist", plane + 1));
    }
    let coeffs = coeffs_at(setup, k, plane)?;
    Superposition::new(&coeffs, setup, paths)
}

/// ∫(Σ_{i∈slits} gᵢ)²·|Σₙ ψₙ|² for the paths in `incoming_paths`.
pub fn prob_slit_set(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    incoming_paths: &[PathIndex],
    plane: usize,
    slits: &[usize],
) -> Result<f64> {
    grid.validate()?;
    let psi = incoming(setup, k, incoming_paths, plane)?;
    let p = &setup.planes[plane];
    check_slits(p, slits)?;
    Ok(slit_set_integral(&psi, p, slits, grid))
}

pub(crate) fn slit_set_integral(psi: &Superposition, plane: &PlaneSpec, slits: &[usize], grid: &QuadratureGrid) -> f64 {
    grid.integrate(slit_support(plane, slits), |x| set_gain(plane, slits, x).powi(2) * psi.intensity(x))
}

/// ∫|m|²·|Σₙ ψₙ|² for the paths in `incoming_paths`.
pub fn prob_measure(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    incoming_paths: &[PathIndex],
    plane: usize,
) -> Result<f64> {
    grid.validate()?;
    let psi = incoming(setup, k, incoming_paths, plane)?;
    Ok(measure_integral(&psi, &setup.planes[plane], grid))
}

pub(crate) fn measure_integral(psi: &Superposition, plane: &PlaneSpec, grid: &QuadratureGrid) -> f64 {
    let mut clamped = false;
    let support = match plane.slit_count() {
        0 => psi.beam_support(),
        n => hull([psi.beam_support(), slit_support(plane, &(0..n).collect::<Vec<_>>())]).unwrap(),
    };
    let v = grid.integrate(support, |x| {
        let (w, c) = measure_gain_sq(plane, x);
        clamped |= c;
        w * psi.intensity(x)
    });
    if clamped {
        warn!("overlapping slits made 1 - (sum of slit gains)^2 negative; clamped to zero");
    }
    v
}

/// Probability budget of one plane for a given incoming superposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneBudget {
    pub incoming: f64,
    pub measured: f64,
    /// Single-slit projection probabilities ∫gᵢ²|Ψ|².
    pub projected: Vec<f64>,
    /// 2·Σ_{a<b} ∫g_a·g_b·|Ψ|²: the overlap counted by the squared slit sum.
    pub cross_residual: f64,
}

impl PlaneBudget {
    /// incoming − (measured + Σ projected + cross residual).
    pub fn defect(&self) -> f64 {
        self.incoming - (self.measured + self.projected.iter().sum::<f64>() + self.cross_residual)
    }
}

pub fn plane_budget(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    incoming_paths: &[PathIndex],
    plane: usize,
) -> Result<PlaneBudget> {
    grid.validate()?;
    let psi = incoming(setup, k, incoming_paths, plane)?;
    Ok(plane_budget_of(&psi, &setup.planes[plane], grid))
}

pub(crate) fn plane_budget_of(psi: &Superposition, p: &PlaneSpec, grid: &QuadratureGrid) -> PlaneBudget {
    let n = p.slit_count();
    let support = match n {
        0 => psi.beam_support(),
        _ => hull([psi.beam_support(), slit_support(p, &(0..n).collect::<Vec<_>>())]).unwrap(),
    };
    let projected = (0..n).map(|i| slit_set_integral(psi, p, &[i], grid)).collect();
    let mut cross_residual = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let (xa, xb) = (p.slit_centers[a], p.slit_centers[b]);
            cross_residual +=
                2.0 * grid.integrate(support, |x| gain(xa, p.beta, x) * gain(xb, p.beta, x) * psi.intensity(x));
        }
    }
    PlaneBudget {
        incoming: grid.integrate(support, |x| psi.intensity(x)),
        measured: measure_integral(psi, p, grid),
        projected,
        cross_residual,
    }
}

/// One event of a history. Plane and slit indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    /// Diffraction through slit `slit` of `plane`.
    Projection { plane: usize, slit: usize },
    /// Diffraction through one of `slits`, coherently superposed.
    SlitSet { plane: usize, slits: Vec<usize> },
    /// Detection on `plane` away from its slits.
    Measurement { plane: usize },
}

impl Event {
    pub fn plane(&self) -> usize {
        match self {
            Event::Projection { plane, .. } | Event::SlitSet { plane, .. } | Event::Measurement { plane } => *plane,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HistorySpec {
    pub events: Vec<Event>,
}

impl HistorySpec {
    pub fn new(events: Vec<Event>) -> Self {
        Self { events }
    }

    /// Reason the history cannot occur, if any: a measurement that is not
    /// last, or planes that do not strictly increase.
    pub fn impossibility(&self) -> Option<String> {
        for (n, pair) in self.events.windows(2).enumerate() {
            if let Event::Measurement { plane } = pair[0] {
                return Some(format!("event {} follows the measurement on plane {}", n + 2, plane + 1));
            }
            if pair[1].plane() <= pair[0].plane() {
                return Some(format!(
                    "event {} on plane {} does not come after plane {}",
                    n + 2,
                    pair[1].plane() + 1,
                    pair[0].plane() + 1
                ));
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryWeight {
    pub weight: f64,
    /// Set when the history is dynamically impossible and the weight is zero.
    pub zero_probability: Option<String>,
}

/// Weight of a history: the incoming superposition at the plane of the last
/// event, weighted by that event's gain.
pub fn history_weight(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    history: &HistorySpec,
) -> Result<HistoryWeight> {
    grid.validate()?;
    setup.validate()?;
    for e in &history.events {
        let p = setup
            .planes
            .get(e.plane())
            .ok_or_else(|| MpdError::InvalidInput(format!("plane {} does not exist", e.plane() + 1)))?;
        match e {
            Event::Projection { slit, .. } => check_slits(p, &[*slit])?,
            Event::SlitSet { slits, .. } => check_slits(p, slits)?,
            Event::Measurement { .. } => {}
        }
    }
    if let Some(reason) = history.impossibility() {
        return Ok(HistoryWeight { weight: 0.0, zero_probability: Some(reason) });
    }
    let Some(last) = history.events.last() else {
        return Ok(HistoryWeight { weight: 1.0, zero_probability: None });
    };
    let target = last.plane();
    let mut allowed: Vec<Vec<usize>> = setup.planes[..target].iter().map(|p| (0..p.slit_count()).collect()).collect();
    for e in &history.events[..history.events.len() - 1] {
        allowed[e.plane()] = match e {
            Event::Projection { slit, .. } => vec![*slit],
            Event::SlitSet { slits, .. } => slits.clone(),
            Event::Measurement { .. } => unreachable!("measurement can only be last"),
        };
    }
    let paths: Vec<PathIndex> = setup
        .paths_to(target)
        .into_iter()
        .filter(|p| p.slit_choices.iter().zip(&allowed).all(|(s, a)| a.contains(s)))
        .collect();
    if paths.is_empty() {
        return Ok(HistoryWeight {
            weight: 0.0,
            zero_probability: Some("no slit is open before the last event".into()),
        });
    }
    let psi = incoming(setup, k, &paths, target)?;
    let plane = &setup.planes[target];
    let weight = match last {
        Event::Projection { slit, .. } => slit_set_integral(&psi, plane, &[*slit], grid),
        Event::SlitSet { slits, .. } => slit_set_integral(&psi, plane, slits, grid),
        Event::Measurement { .. } => measure_integral(&psi, plane, grid),
    };
    Ok(HistoryWeight { weight, zero_probability: None })
}
