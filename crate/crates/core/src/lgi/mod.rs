//! Leggett–Garg analysis with ambiguous (slit-pair) measurements on the first
//! plane and three slits plus a detector on the second plane.
//!
//! Two routes produce the same report: [`lgi_quantities`] integrates the
//! history probabilities on a grid, [`closed_form::lgi_closed_form`]
//! evaluates the analytic Gaussian integrals.

pub mod closed_form;
pub mod sweep;

use serde::Serialize;

use crate::coeffs::coeffs_at;
use crate::constants::Constants;
use crate::error::{invalid, MpdError, Result};
use crate::histories::{measure_integral, slit_set_integral, Superposition};
use crate::quadrature::QuadratureGrid;
use crate::setup::{PathIndex, PhysicalSetup};

pub use closed_form::{lgi_closed_form, ClosedFormTerms};
pub use sweep::{sweep, sweep_maximum, Range, SweepAxis, SweepPoint, SweepSettings};

/// Slit pairs opened by the three ambiguous measurements, in order.
pub const AMBIGUOUS_PAIRS: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];

/// Number of second-plane outcomes: three slits, then the detector.
pub const OUTCOMES: usize = 4;

/// Maps ambiguous pair probabilities to inferred single-slit probabilities:
/// p̂(i) = Σ_a D[i][a]·p^A(a).
pub fn conversion_matrix() -> [[f64; 3]; 3] {
    [[0.5, 0.5, -0.5], [0.5, -0.5, 0.5], [-0.5, 0.5, 0.5]]
}

/// Dichotomic values for the first-plane slits and the second-plane outcomes.
/// The initial value is fixed at +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SignAssignment {
    pub q1: [i8; 3],
    pub q2: [i8; 4],
}

impl SignAssignment {
    pub const COUNT: usize = 128;

    /// The `n`th assignment in lexicographic order with −1 < +1 and the
    /// first-plane signs leading.
    pub fn from_index(n: usize) -> Self {
        assert!(n < Self::COUNT, "sign index {n} out of range");
        let bit = |j: usize| if (n >> (6 - j)) & 1 == 1 { 1 } else { -1 };
        Self { q1: [bit(0), bit(1), bit(2)], q2: [bit(3), bit(4), bit(5), bit(6)] }
    }

    pub fn index(&self) -> usize {
        self.q1.iter().chain(&self.q2).fold(0, |acc, &s| (acc << 1) | usize::from(s > 0))
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn negated(&self) -> Self {
        Self { q1: self.q1.map(|s| -s), q2: self.q2.map(|s| -s) }
    }

    pub(crate) fn q1f(&self) -> [f64; 3] {
        self.q1.map(f64::from)
    }

    pub(crate) fn q2f(&self) -> [f64; 4] {
        self.q2.map(f64::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LgiReport {
    pub ka: f64,
    pub kv: f64,
    /// Δ_S for the three second-plane slits and the detector.
    pub signaling: [f64; OUTCOMES],
    /// K_A − K_V; positive values violate the inequality.
    pub violation: f64,
    pub signs: SignAssignment,
    pub gamma_c: f64,
}

/// First-plane-normalized probabilities entering K_A and K_V.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguousTable {
    /// Γ_c = 1/Σᵢ p₁(i).
    pub gamma_c: f64,
    /// Unnormalized single-slit probabilities p₁(i).
    pub plane1: [f64; 3],
    /// Unnormalized p₁,₂({a, b}, î) for the pairs in [`AMBIGUOUS_PAIRS`].
    pub joint_raw: [[f64; OUTCOMES]; 3],
    /// Unnormalized p₁,₂({1,2,3}, î).
    pub all_open_raw: [f64; OUTCOMES],
}

impl AmbiguousTable {
    /// p^A(a, î) = Γ_c·p₁,₂(pair a, î).
    pub fn joint(&self) -> [[f64; OUTCOMES]; 3] {
        self.joint_raw.map(|row| row.map(|p| self.gamma_c * p))
    }

    /// p₂(î) = Γ_c·p₁,₂({1,2,3}, î).
    pub fn second_plane(&self) -> [f64; OUTCOMES] {
        self.all_open_raw.map(|p| self.gamma_c * p)
    }

    /// Δ_S(î) = p₂(î) − ½·Σ_a p^A(a, î).
    pub fn signaling(&self) -> [f64; OUTCOMES] {
        let joint = self.joint();
        let p2 = self.second_plane();
        std::array::from_fn(|o| p2[o] - 0.5 * joint.iter().map(|row| row[o]).sum::<f64>())
    }

    pub fn evaluate(&self, signs: SignAssignment) -> LgiReport {
        let joint = self.joint();
        let d = conversion_matrix();
        let (q1, q2) = (signs.q1f(), signs.q2f());
        let signaling = self.signaling();
        let mut ka = 0.0;
        for (a, row) in joint.iter().enumerate() {
            for (i, qi) in q1.iter().enumerate() {
                for (o, qo) in q2.iter().enumerate() {
                    ka += (qi + qi * qo - qo) * d[i][a] * row[o];
                }
            }
        }
        ka -= q2.iter().zip(&signaling).map(|(q, s)| q * s).sum::<f64>();
        let kv = 1.0 + signaling.iter().map(|s| s.abs()).sum::<f64>();
        LgiReport { ka, kv, signaling, violation: ka - kv, signs, gamma_c: self.gamma_c }
    }
}

fn check_lgi_setup(setup: &PhysicalSetup) -> Result<()> {
    setup.validate()?;
    if setup.planes.len() != 2 || setup.planes.iter().any(|p| p.slit_count() != 3) {
        return invalid("Leggett-Garg analysis needs exactly two planes with three slits each");
    }
    Ok(())
}

/// Probability table by grid quadrature of the history integrals.
pub fn ambiguous_joint_probs(setup: &PhysicalSetup, k: &Constants, grid: &QuadratureGrid) -> Result<AmbiguousTable> {
    check_lgi_setup(setup)?;
    grid.validate()?;
    let first = Superposition::new(&coeffs_at(setup, k, 0)?, setup, &[PathIndex::default()])?;
    let plane1: [f64; 3] = std::array::from_fn(|i| slit_set_integral(&first, &setup.planes[0], &[i], grid));
    let at_plane2 = coeffs_at(setup, k, 1)?;
    let outcomes = |slits: &[usize]| -> Result<[f64; OUTCOMES]> {
        let paths: Vec<PathIndex> = slits.iter().map(|&s| PathIndex::new(vec![s])).collect();
        let psi = Superposition::new(&at_plane2, setup, &paths)?;
        let p2 = &setup.planes[1];
        Ok([
            slit_set_integral(&psi, p2, &[0], grid),
            slit_set_integral(&psi, p2, &[1], grid),
            slit_set_integral(&psi, p2, &[2], grid),
            measure_integral(&psi, p2, grid),
        ])
    };
    let mut joint_raw = [[0.0; OUTCOMES]; 3];
    for (row, pair) in joint_raw.iter_mut().zip(AMBIGUOUS_PAIRS) {
        *row = outcomes(&pair)?;
    }
    Ok(AmbiguousTable {
        gamma_c: 1.0 / plane1.iter().sum::<f64>(),
        plane1,
        joint_raw,
        all_open_raw: outcomes(&[0, 1, 2])?,
    })
}

/// K_A, K_V and signaling for one sign assignment by grid quadrature.
pub fn lgi_quantities(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    signs: SignAssignment,
) -> Result<LgiReport> {
    Ok(ambiguous_joint_probs(setup, k, grid)?.evaluate(signs))
}

/// Best of all 128 sign assignments; ties go to the earliest in
/// [`SignAssignment::from_index`] order.
pub fn best_signs(evaluate: impl Fn(SignAssignment) -> LgiReport) -> LgiReport {
    SignAssignment::all()
        .map(evaluate)
        .reduce(|best, r| if r.violation > best.violation { r } else { best })
        .expect("128 assignments")
}

/// Quadrature-route report at the violation-maximizing signs.
pub fn optimize_signs(setup: &PhysicalSetup, k: &Constants, grid: &QuadratureGrid) -> Result<LgiReport> {
    let table = ambiguous_joint_probs(setup, k, grid)?;
    Ok(best_signs(|s| table.evaluate(s)))
}

/// Relative tolerance between the closed-form and quadrature routes.
pub const ROUTE_TOLERANCE: f64 = 1e-6;

/// Both routes evaluated at the same signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteComparison {
    pub closed_form: LgiReport,
    pub quadrature: LgiReport,
}

impl RouteComparison {
    pub fn ka_rel(&self) -> f64 {
        rel_diff(self.closed_form.ka, self.quadrature.ka)
    }

    pub fn kv_rel(&self) -> f64 {
        rel_diff(self.closed_form.kv, self.quadrature.kv)
    }

    /// Agreement within [`ROUTE_TOLERANCE`].
    pub fn agrees(&self) -> bool {
        self.ka_rel() <= ROUTE_TOLERANCE && self.kv_rel() <= ROUTE_TOLERANCE
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn compare_routes(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    signs: SignAssignment,
) -> Result<RouteComparison> {
    Ok(RouteComparison {
        closed_form: lgi_closed_form(setup, k, signs)?,
        quadrature: lgi_quantities(setup, k, grid, signs)?,
    })
}

/// Re-evaluates a closed-form optimum by quadrature.
pub fn verify_optimum(
    setup: &PhysicalSetup,
    k: &Constants,
    grid: &QuadratureGrid,
    report: &LgiReport,
) -> Result<RouteComparison> {
    let cmp = compare_routes(setup, k, grid, report.signs)?;
    if !cmp.agrees() {
        return Err(MpdError::OracleMismatch(format!(
            "closed form and quadrature differ by {:.3e} (K_A) and {:.3e} (K_V), relative",
            cmp.ka_rel(),
            cmp.kv_rel()
        )));
    }
    Ok(cmp)
}
