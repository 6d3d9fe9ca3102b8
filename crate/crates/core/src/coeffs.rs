//! Closed-form complex-Gaussian coefficients of the path wave functions.
//!
//! An elementary path n arriving at plane j has the amplitude
//!
//! ψ_{j,n}(x) = Υ_j · exp((A + iB)·x²) · exp(x⃗ₙᵀ·H·x⃗ₙ) · exp((c⃗ + i·d⃗)ᵀ·x⃗ₙ·x)
//!
//! where x⃗ₙ collects the centers of the slits the path went through. The
//! coefficients are available for one, two and three planes of propagation.

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::Constants;
use crate::error::{invalid, MpdError, Result};
use crate::setup::{PathIndex, PhysicalSetup};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Free propagation of the source to the first plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceCoeffs {
    pub chi0: C64,
    pub a0: f64,
    pub b0: f64,
}

/// Source Gaussian σ propagated for time t.
pub fn source_coeffs(sigma: f64, t: f64, k: &Constants) -> SourceCoeffs {
    let (m, hb) = (k.mass, k.hbar);
    let den = 2.0 * hb * hb * t * t + 2.0 * m * m * sigma.powi(4);
    let chi0 = PI.powf(-0.25) * (c(m * sigma) / C64::new(m * sigma * sigma, hb * t)).sqrt();
    SourceCoeffs { chi0, a0: -m * m * sigma * sigma / den, b0: hb * m * t / den }
}

/// Two-plane parameters: amplitudes ψ_{2,i} behind one slit plane plus the
/// k₁…k₁₁ family used by the closed-form Leggett–Garg expressions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPlaneCoeffs {
    pub chi0: C64,
    pub xi1: C64,
    pub a1: f64,
    pub b1: f64,
    pub h_r1: f64,
    pub h_i1: f64,
    pub c1: f64,
    pub d1: f64,
    /// k₁ … k₁₁ stored at index 0 … 10.
    pub k: [f64; 11],
    pub a_ts: f64,
    pub b_t: f64,
    pub c_ts: f64,
    pub d_ts: f64,
    pub alpha: f64,
    pub big_xi: [f64; 2],
    pub vartheta: C64,
    /// Plane-1 normalization G₂ = 1/Σᵢ exp(−X₁,ᵢ²/(β₁² + d)).
    pub g2: f64,
    /// Plane-2 normalization G₁.
    pub g1: f64,
    /// G₁/G₂, independent of the first-plane slit positions.
    pub g1_over_g2: f64,
    /// ∫exp(−x²/β₁²)·|ψ₁(x)|²dx: the first-plane slit integral of a slit at 0.
    pub slit_integral_scale: f64,
}

impl TwoPlaneCoeffs {
    /// k_n with the 1-based numbering of the formulas.
    pub fn k(&self, n: usize) -> f64 {
        self.k[n - 1]
    }
}

/// Per-hop recursion terms for hop j (slit on plane j, then flight t_{j,j+1}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopTerms {
    pub varsigma: C64,
    pub zeta: f64,
    pub zeta_c: f64,
    pub zeta_d: f64,
    pub varrho: f64,
    pub xi: C64,
    pub nu1: C64,
}

impl HopTerms {
    /// Incoming Gaussian (A, B), slit β, flight time t.
    pub fn new(a: f64, b: f64, beta: f64, t: f64, k: &Constants) -> Self {
        let (m, hb) = (k.mass, k.hbar);
        let b2 = beta * beta;
        let b4 = b2 * b2;
        let varsigma = hb * t * (2.0 * b2 * C64::new(b, -a) + I) + b2 * m;
        let varrho = 4.0 * b4 * (a * a + b * b) - 4.0 * a * b2 + 1.0;
        let zeta = 4.0 * b * b4 * hb * m * t + b4 * m * m + hb * hb * t * t * varrho;
        Self {
            varsigma,
            zeta,
            zeta_c: (2.0 * b * hb * m * t * b2 + b2 * m * m) / zeta,
            zeta_d: hb * m * t * (2.0 * a * b2 - 1.0) / zeta,
            varrho,
            xi: b2 * m / varsigma,
            nu1: -(2.0 * hb * t * C64::new(a, b) + I * m) / (2.0 * I * varsigma),
        }
    }

    /// Outgoing quadratic coefficient (A_j, B_j).
    pub fn next_quad(&self, a: f64, b: f64, beta: f64, t: f64, k: &Constants) -> (f64, f64) {
        let (m, hb) = (k.mass, k.hbar);
        let b2 = beta * beta;
        let a_next = b2 * m * m * (2.0 * a * b2 - 1.0) / (2.0 * self.zeta);
        let b_next = (2.0 * b * b2 * b2 * m * m + hb * m * t * self.varrho) / (2.0 * self.zeta);
        (a_next, b_next)
    }
}

/// Three-plane parameters for the amplitudes ψ_{3,n}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreePlaneCoeffs {
    pub source: SourceCoeffs,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub hops: [HopTerms; 2],
    pub nu22: C64,
    pub nu32: C64,
    pub nu42: f64,
    pub nu52: f64,
    pub h2: [[C64; 2]; 2],
    pub c2: [f64; 2],
    pub d2: [f64; 2],
    pub upsilon3: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoeffDetail {
    Source(SourceCoeffs),
    TwoPlane(Box<TwoPlaneCoeffs>),
    ThreePlane(Box<ThreePlaneCoeffs>),
}

/// Coefficients of every elementary path arriving at one plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathCoefficients {
    /// Number of slit planes already traversed.
    pub depth: usize,
    pub upsilon: C64,
    /// A + iB.
    pub quad: C64,
    /// Quadratic form on the slit-center vector (row-major, depth × depth).
    pub h: Vec<Vec<C64>>,
    /// c⃗ + i·d⃗.
    pub lin: Vec<C64>,
    pub detail: CoeffDetail,
}

impl PathCoefficients {
    /// Amplitude of the path with slit centers `centers` at position `x`.
    pub fn amplitude(&self, centers: &[f64], x: f64) -> C64 {
        debug_assert_eq!(centers.len(), self.depth);
        let (lin, quad) = self.path_exponent(centers);
        self.upsilon * (self.quad * x * x + lin * x + quad).exp()
    }

    /// Linear coefficient (c⃗ + i·d⃗)ᵀx⃗ and constant x⃗ᵀHx⃗ of a path.
    pub fn path_exponent(&self, centers: &[f64]) -> (C64, C64) {
        let lin = self.lin.iter().zip(centers).map(|(l, x)| l * x).sum();
        let mut quad = C64::new(0.0, 0.0);
        for (row, xr) in self.h.iter().zip(centers) {
            for (hv, xc) in row.iter().zip(centers) {
                quad += hv * xr * xc;
            }
        }
        (lin, quad)
    }

    /// Center and standard deviation of the path intensity |ψ|².
    pub fn intensity_profile(&self, centers: &[f64]) -> (f64, f64) {
        let (lin, _) = self.path_exponent(centers);
        let a = self.quad.re;
        (-lin.re / (2.0 * a), (-1.0 / (4.0 * a)).sqrt())
    }
}

fn check_hops(setup: &PhysicalSetup, hops: usize) -> Result<()> {
    setup.validate()?;
    if setup.planes.len() < hops {
        return Err(MpdError::Unsupported(format!("need at least {hops} planes, setup has {}", setup.planes.len())));
    }
    Ok(())
}

/// Coefficients of the field arriving at the first plane.
pub fn plane1_coeffs(setup: &PhysicalSetup, k: &Constants) -> Result<PathCoefficients> {
    check_hops(setup, 1)?;
    let s = source_coeffs(setup.sigma0, setup.times[0], k);
    Ok(PathCoefficients {
        depth: 0,
        upsilon: s.chi0,
        quad: C64::new(s.a0, s.b0),
        h: Vec::new(),
        lin: Vec::new(),
        detail: CoeffDetail::Source(s),
    })
}

/// Coefficients of the paths arriving at the second plane (one slit plane
/// traversed). The second plane's β enters only the k-family.
pub fn two_plane_coeffs(setup: &PhysicalSetup, k: &Constants) -> Result<PathCoefficients> {
    check_hops(setup, 2)?;
    let t = two_plane_table(setup, k);
    let r1 = C64::new(t.c1, t.d1);
    Ok(PathCoefficients {
        depth: 1,
        upsilon: t.chi0 * t.xi1.sqrt(),
        quad: C64::new(t.a1, t.b1),
        h: vec![vec![C64::new(t.h_r1, t.h_i1)]],
        lin: vec![r1],
        detail: CoeffDetail::TwoPlane(Box::new(t)),
    })
}

pub(crate) fn two_plane_table(setup: &PhysicalSetup, k: &Constants) -> TwoPlaneCoeffs {
    let (m, hb) = (k.mass, k.hbar);
    let (s0, t01, t12) = (setup.sigma0, setup.times[0], setup.times[1]);
    let (beta1, beta2) = (setup.planes[0].beta, setup.planes[1].beta);
    let (m2, hb2) = (m * m, hb * hb);
    let (s02, s04) = (s0 * s0, s0.powi(4));
    let (bb1, bb2) = (beta1 * beta1, beta2 * beta2);
    let bb1_2 = bb1 * bb1;

    let a_ts = hb2 * t01 * t01 + m2 * s04;
    let b_t = hb2 * (t01 + t12).powi(2);
    let c_ts = hb2 * s02 * t12 * t12;
    let d_ts = a_ts / (m2 * s02);
    let big_xi = [bb1 + s02, bb2 + s02];
    let vartheta = C64::new(m * s02, hb * t01);
    let alpha = bb1_2 * m2 * (b_t + m2 * s04) + 2.0 * bb1 * m2 * c_ts + hb2 * t12 * t12 * a_ts;
    let k11 = bb1_2 * m2 * (m2 * s02 * big_xi[1] + b_t) + bb1 * m2 * (bb2 * a_ts + 2.0 * c_ts) + hb2 * t12 * t12 * a_ts;
    let ahh = a_ts + hb2 * t01 * t12;
    let bd = bb1 + d_ts;
    let mut kk = [0.0; 11];
    kk[0] = -hb * m * t12 * ahh / (2.0 * k11);
    kk[1] = hb * m * m2 * s02 * t12 * bd / k11;
    kk[2] = -bb1 * m2 * ahh / k11;
    kk[3] = bb1 * m2 * m2 * s02 * bd / k11;
    kk[4] = -m2 * (bb1 * (m2 * s02 * big_xi[1] + b_t) + c_ts) / k11;
    kk[5] =
        -m2 * (2.0 * bb1 * (m2 * s02 * big_xi[1] + b_t)) / (4.0 * k11) + m2 * (-bb2 * a_ts - 2.0 * c_ts) / (4.0 * k11);
    kk[6] = bb2 * m2 * a_ts / (2.0 * k11);
    kk[7] = -0.25 * (1.0 / bb1 + 1.0 / bd);
    kk[8] = 0.5 * (1.0 / bb1 - 1.0 / bd);
    kk[9] = -1.0 / bd;
    kk[10] = k11;

    let chi0 = source_coeffs(s0, t01, k).chi0;
    let xi1 = bb1 * m * vartheta / (bb1 * m * C64::new(m * s02, b_t.sqrt()) + I * hb * t12 * vartheta);
    let g2 = 1.0 / setup.planes[0].slit_centers.iter().map(|x| (-x * x / bd).exp()).sum::<f64>();
    let g1_over_g2 = beta1 * beta2 * m2 * s0 * (bd / k11).sqrt();
    let g1 = g2 * g1_over_g2;
    let a0 = -1.0 / (2.0 * d_ts);
    let slit_integral_scale = (PI / (1.0 / bb1 - 2.0 * a0)).sqrt() * chi0.norm_sqr();

    TwoPlaneCoeffs {
        chi0,
        xi1,
        a1: -bb1 * m2 * (hb2 * t01 * t01 + m2 * s02 * big_xi[0]) / (2.0 * alpha),
        b1: (bb1_2 * m * m2 * hb * t01 + m * hb * t12 * (hb2 * t01 * t01 + m2 * big_xi[0].powi(2))) / (2.0 * alpha),
        h_r1: -m2 * (bb1 * (b_t + m2 * s04) + c_ts) / (2.0 * alpha),
        h_i1: m * hb * t12 * ahh / (2.0 * alpha),
        c1: bb1 * m2 * ahh / alpha,
        d1: -m * hb * t12 * (hb2 * t01 * t01 + m2 * s02 * big_xi[0]) / alpha,
        k: kk,
        a_ts,
        b_t,
        c_ts,
        d_ts,
        alpha,
        big_xi,
        vartheta,
        g2,
        g1,
        g1_over_g2,
        slit_integral_scale,
    }
}

/// Coefficients of the paths arriving at the third plane (two slit planes
/// traversed).
pub fn three_plane_coeffs(setup: &PhysicalSetup, k: &Constants) -> Result<PathCoefficients> {
    check_hops(setup, 3)?;
    let t = three_plane_table(setup, k);
    Ok(PathCoefficients {
        depth: 2,
        upsilon: t.upsilon3,
        quad: C64::new(t.a2, t.b2),
        h: t.h2.iter().map(|r| r.to_vec()).collect(),
        lin: vec![C64::new(t.c2[0], t.d2[0]), C64::new(t.c2[1], t.d2[1])],
        detail: CoeffDetail::ThreePlane(Box::new(t)),
    })
}

fn three_plane_table(setup: &PhysicalSetup, k: &Constants) -> ThreePlaneCoeffs {
    let (m, hb) = (k.mass, k.hbar);
    let source = source_coeffs(setup.sigma0, setup.times[0], k);
    let two = two_plane_table(setup, k);
    let (beta1, beta2) = (setup.planes[0].beta, setup.planes[1].beta);
    let (t12, t23) = (setup.times[1], setup.times[2]);

    let hop1 = HopTerms::new(source.a0, source.b0, beta1, t12, k);
    let hop2 = HopTerms::new(two.a1, two.b1, beta2, t23, k);
    let (a2, b2) = hop2.next_quad(two.a1, two.b1, beta2, t23, k);

    let bb2 = beta2 * beta2;
    let nu22 = -bb2 * hb * t23 / (2.0 * I * hop2.varsigma);
    let nu32 = -hb * t23 / (I * hop2.varsigma);
    let nu42 = bb2 * hop2.zeta_c;
    let nu52 = -2.0 * hb * t23 * a2 / m;
    let r1 = C64::new(hop1.zeta_c, hop1.zeta_d);
    let h2 = [[nu22 * r1 * r1 + hop1.nu1, C64::new(0.0, 0.0)], [nu32 * r1, hop2.nu1]];
    let c2 = [nu42 * hop1.zeta_c + nu52 * hop1.zeta_d, hop2.zeta_c];
    let d2 = [nu42 * hop1.zeta_d - nu52 * hop1.zeta_c, hop2.zeta_d];
    let upsilon3 = source.chi0 * hop1.xi.sqrt() * hop2.xi.sqrt();

    ThreePlaneCoeffs {
        source,
        a1: two.a1,
        b1: two.b1,
        a2,
        b2,
        hops: [hop1, hop2],
        nu22,
        nu32,
        nu42,
        nu52,
        h2,
        c2,
        d2,
        upsilon3,
    }
}

/// Coefficients of the field arriving at `plane` (0-based).
pub fn coeffs_at(setup: &PhysicalSetup, k: &Constants, plane: usize) -> Result<PathCoefficients> {
    match plane {
        0 => plane1_coeffs(setup, k),
        1 => two_plane_coeffs(setup, k),
        2 => three_plane_coeffs(setup, k),
        _ => Err(MpdError::Unsupported(format!(
            "closed-form coefficients exist for up to three planes, requested plane {}",
            plane + 1
        ))),
    }
}

/// Amplitude of an elementary path at position `x` on the plane it arrives at.
pub fn path_wavefunction(coeffs: &PathCoefficients, setup: &PhysicalSetup, path: &PathIndex, x: f64) -> Result<C64> {
    if path.len() != coeffs.depth {
        return invalid(format!("path crosses {} planes but the coefficients describe {}", path.len(), coeffs.depth));
    }
    Ok(coeffs.amplitude(&path.positions(setup)?, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setup::{LgiGeometry, QpiGeometry};

    #[test]
    fn source_quadratic_matches_formula() {
        let k = Constants::reference();
        let s = source_coeffs(200.0, 0.5, &k);
        let m = k.mass;
        let expected = -m * m * 200.0f64.powi(2) / (2.0 * 0.25 + 2.0 * m * m * 200.0f64.powi(4));
        assert!((s.a0 - expected).abs() / expected.abs() < 1e-14);
        assert!(s.a0 < 0.0);
    }

    #[test]
    fn table_recursion_agrees_with_two_plane_table() {
        let k = Constants::reference();
        let setup = QpiGeometry::default().setup();
        let CoeffDetail::ThreePlane(t3) = three_plane_coeffs(&setup, &k).unwrap().detail else { unreachable!() };
        let CoeffDetail::TwoPlane(t2) = two_plane_coeffs(&setup, &k).unwrap().detail else { unreachable!() };
        let hop = t3.hops[0];
        let (a1, b1) = hop.next_quad(t3.source.a0, t3.source.b0, 25.0, 0.2, &k);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(a1, t2.a1) < 1e-12, "{a1} vs {}", t2.a1);
        assert!(rel(b1, t2.b1) < 1e-12, "{b1} vs {}", t2.b1);
        assert!(rel(hop.zeta_c, t2.c1) < 1e-12);
        assert!(rel(hop.zeta_d, t2.d1) < 1e-12);
        assert!((hop.nu1 - C64::new(t2.h_r1, t2.h_i1)).norm() / hop.nu1.norm() < 1e-12);
        assert!((hop.xi - t2.xi1).norm() / hop.xi.norm() < 1e-12);
        assert!((hop.zeta - hop.varsigma.norm_sqr()).abs() / hop.zeta < 1e-12);
    }

    #[test]
    fn quadratic_coefficients_are_normalizable() {
        let k = Constants::reference();
        let s = LgiGeometry::ds_sweep_reference(50.0).setup();
        assert!(plane1_coeffs(&s, &k).unwrap().quad.re < 0.0);
        assert!(two_plane_coeffs(&s, &k).unwrap().quad.re < 0.0);
        let q = QpiGeometry::default().setup();
        assert!(three_plane_coeffs(&q, &k).unwrap().quad.re < 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let k = Constants::reference();
        let s = QpiGeometry::default().setup();
        let c = three_plane_coeffs(&s, &k).unwrap();
        assert!(path_wavefunction(&c, &s, &PathIndex::new(vec![0]), 0.0).is_err());
        assert!(path_wavefunction(&c, &s, &PathIndex::new(vec![0, 0]), 0.0).is_ok());
        let lgi = LgiGeometry::ds_sweep_reference(0.0).setup();
        assert!(three_plane_coeffs(&lgi, &k).is_err());
        assert!(coeffs_at(&s, &k, 3).is_err());
    }
}
