//! Analytic K_A and K_V from the two-plane k-family.
//!
//! Pair index order is (1,2), (1,3), (2,3) throughout, matching
//! [`super::AMBIGUOUS_PAIRS`].

use serde::Serialize;

use super::{check_lgi_setup, LgiReport, SignAssignment, AMBIGUOUS_PAIRS};
use crate::coeffs::{two_plane_table, TwoPlaneCoeffs};
use crate::constants::Constants;
use crate::error::Result;
use crate::setup::PhysicalSetup;

/// Sign pattern of the pair terms in the inferred probability of slit i.
const PAIR_SIGNS: [[f64; 3]; 3] = [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]];

/// Setup-dependent terms; K_A is linear in them for fixed signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormTerms {
    pub gamma_c: f64,
    /// G₁ and G₂ multiplied by exp(max k₁₀X₁²); the f-terms carry the
    /// inverse factor so every product is unchanged.
    pub g1: f64,
    pub g2: f64,
    /// f₁(X₁,ᵢ, ℓᵢ).
    pub f1: [f64; 3],
    /// f₂(X₂,ᵢ).
    pub f2: [f64; 3],
    /// f₁,₂(X₁,ᵢ, X₂,ⱼ, ℓᵢ) at [i][j].
    pub f12: [[f64; 3]; 3],
    /// f_V(X₂,ⱼ).
    pub fv: [f64; 3],
    pub ft: f64,
    /// Second-plane slit overlap. g_a·g_b = exp(−(X_a − X_b)²/(4β₂²))·g_m² with
    /// m the midpoint, so each pair acts as a virtual slit at m with weight
    /// 2·exp(−(X_a − X_b)²/(4β₂²)) that removes probability from the detector.
    pub overlap: [VirtualSlit; 3],
}

/// f-terms of a virtual second-plane slit, already multiplied by its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirtualSlit {
    pub f2: f64,
    pub f12: [f64; 3],
    pub fv: f64,
}

impl ClosedFormTerms {
    pub fn new(setup: &PhysicalSetup, k: &Constants) -> Result<Self> {
        check_lgi_setup(setup)?;
        let table = two_plane_table(setup, k);
        let x1: [f64; 3] = setup.planes[0].slit_centers[..].try_into().expect("three slits");
        let x2: [f64; 3] = setup.planes[1].slit_centers[..].try_into().expect("three slits");
        Ok(Self::from_table(&table, x1, x2, setup.planes[1].beta))
    }

    /// Terms for first-plane centers `x1` and second-plane centers `x2`. The
    /// table depends only on σ₀, β and the flight times, so it can be shared
    /// across slit placements. `beta2` sets the second-plane overlap weights.
    pub fn from_table(t: &TwoPlaneCoeffs, x1: [f64; 3], x2: [f64; 3], beta2: f64) -> Self {
        let k = &t.k;
        let (k1, k2, k3, k4, k5, k6, k7, k8, k9, k10) = (k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7], k[8], k[9]);

        // Every term carries G₁ or G₂ ∝ 1/Σexp(k₁₀X²); the largest exponent
        // is factored out of both so that far-off slits do not overflow.
        let shift = x1.iter().map(|x| k10 * x * x).fold(f64::NEG_INFINITY, f64::max);
        let g2 = 1.0 / x1.iter().map(|x| (k10 * x * x - shift).exp()).sum::<f64>();
        let g1 = g2 * t.g1_over_g2;

        let e1 = |x: f64, y: f64| (-2.0 * k3 * y * x - k4 * y * y + k5 * x * x - shift).exp();
        let e2 =
            |a: f64, b: f64, y: f64| (k6 * (a * a + b * b) - k3 * (a + b) * y - k4 * y * y + k7 * a * b - shift).exp();
        let phase = |a: f64, b: f64, y: f64| (k1 * (a * a - b * b) + k2 * (a - b) * y).cos();
        let e4 = AMBIGUOUS_PAIRS.map(|[a, b]| {
            let (a, b) = (x1[a], x1[b]);
            (k8 * (a * a + b * b) + k9 * a * b - shift).exp()
        });
        // g⃗ at a second-plane slit centered at y.
        let pair_terms = |y: f64| AMBIGUOUS_PAIRS.map(|[a, b]| phase(x1[a], x1[b], y) * e2(x1[a], x1[b], y));
        let dot = |l: &[f64; 3], v: &[f64; 3]| l.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let slit_terms = |y: f64| {
            let pt = pair_terms(y);
            let f2 = -2.0 * pt.iter().sum::<f64>() - x1.iter().map(|&x| e1(x, y)).sum::<f64>();
            let f12 = std::array::from_fn(|i| dot(&PAIR_SIGNS[i], &pt) + e1(x1[i], y));
            VirtualSlit { f2, f12, fv: g1 * pt.iter().sum::<f64>() }
        };

        let ft = e4.iter().sum();
        let f1 = std::array::from_fn(|i| (k10 * x1[i] * x1[i] - shift).exp() + dot(&PAIR_SIGNS[i], &e4));
        let real = x2.map(slit_terms);
        let overlap = AMBIGUOUS_PAIRS.map(|[a, b]| {
            let w = 2.0 * (-(x2[a] - x2[b]).powi(2) / (4.0 * beta2 * beta2)).exp();
            let v = slit_terms(0.5 * (x2[a] + x2[b]));
            VirtualSlit { f2: w * v.f2, f12: v.f12.map(|f| w * f), fv: w * v.fv }
        });
        let gamma_c = (g2.ln() - shift).exp() / t.slit_integral_scale;
        Self {
            gamma_c,
            g1,
            g2,
            f1,
            f2: real.map(|v| v.f2),
            f12: std::array::from_fn(|i| real.map(|v| v.f12[i])),
            fv: real.map(|v| v.fv),
            ft,
            overlap,
        }
    }

    pub fn kv(&self) -> f64 {
        1.0 + self.signaling().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Signaling per outcome: f_V at the three slits, then the detector term.
    pub fn signaling(&self) -> [f64; 4] {
        let sum_fv: f64 = self.fv.iter().chain(self.overlap.iter().map(|v| &v.fv)).sum();
        [self.fv[0], self.fv[1], self.fv[2], self.ft * self.g2 - sum_fv]
    }

    #[allow(clippy::needless_range_loop)]
    pub fn ka(&self, signs: SignAssignment) -> f64 {
        let (q1, q2) = (signs.q1f(), signs.q2f());
        let q24 = q2[3];
        let (g1, g2) = (self.g1, self.g2);
        let mut ka = 0.0;
        for j in 0..3 {
            ka += g1 * (q2[j] - q24) * self.f2[j];
        }
        for i in 0..3 {
            for j in 0..3 {
                ka += g1 * q1[i] * (q2[j] - q24) * self.f12[i][j];
            }
            ka += g2 * (1.0 + q24) * q1[i] * self.f1[i] - g2 * q24 * self.f1[i];
        }
        // Overlap leaves the detector outcome and every first-plane marginal.
        for v in &self.overlap {
            ka -= g1 * ((1.0 + q24) * (0..3).map(|i| q1[i] * v.f12[i]).sum::<f64>() + q24 * v.f2);
        }
        ka - g2 * q24 * self.ft
    }

    pub fn evaluate(&self, signs: SignAssignment) -> LgiReport {
        let ka = self.ka(signs);
        let kv = self.kv();
        LgiReport { ka, kv, signaling: self.signaling(), violation: ka - kv, signs, gamma_c: self.gamma_c }
    }
}

/// K_A and K_V for one sign assignment from the analytic terms.
pub fn lgi_closed_form(setup: &PhysicalSetup, k: &Constants, signs: SignAssignment) -> Result<LgiReport> {
    Ok(ClosedFormTerms::new(setup, k)?.evaluate(signs))
}
