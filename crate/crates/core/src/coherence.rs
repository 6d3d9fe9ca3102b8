//! Source coherence against the transverse extent of the slit layout.
//!
//! The spatial coherence diameter after a hop of duration t from a Gaussian
//! of standard deviation σ is the 1/e² width 2/√(−A₀) of the freely
//! propagated beam. A slit re-sources the beam with its own β.

use serde::Serialize;
use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::coeffs::source_coeffs;
use crate::constants::Constants;
use crate::error::{invalid, Result};
use crate::setup::{LgiGeometry, QpiGeometry};

/// 2/√(−A₀) for a Gaussian of standard deviation `sigma` after time `t`.
pub fn coherence_diameter(t: f64, sigma: f64, k: &Constants) -> f64 {
    if t == 0.0 {
        return 2.0 * SQRT_2 * sigma;
    }
    2.0 / (-source_coeffs(sigma, t, k).a0).sqrt()
}

/// √(2 ln2/(π n_r))·λ²/Δλ, in the unit of `lambda`.
pub fn temporal_coherence_length(delta_lambda: f64, lambda: f64, n_r: f64) -> Result<f64> {
    if !(delta_lambda > 0.0 && lambda > 0.0 && n_r > 0.0) {
        return invalid(format!(
            "coherence length needs positive inputs, got Δλ={delta_lambda}, λ={lambda}, n_r={n_r}"
        ));
    }
    Ok((2.0 * LN_2 / (PI * n_r)).sqrt() * lambda * lambda / delta_lambda)
}

/// One comparison of a coherence diameter with the setup extent it must cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceCheck {
    /// Which hop: "D1", "D2" or "D3".
    pub label: &'static str,
    pub dc: f64,
    pub d_setup: f64,
}

impl CoherenceCheck {
    pub fn feasible(&self) -> bool {
        self.dc >= self.d_setup
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub checks: Vec<CoherenceCheck>,
}

impl CoherenceReport {
    pub fn dc_values(&self) -> Vec<f64> {
        self.checks.iter().map(|c| c.dc).collect()
    }

    pub fn d_setup(&self) -> Vec<f64> {
        self.checks.iter().map(|c| c.d_setup).collect()
    }

    pub fn feasible(&self) -> Vec<bool> {
        self.checks.iter().map(CoherenceCheck::feasible).collect()
    }

    pub fn all_feasible(&self) -> bool {
        self.checks.iter().all(CoherenceCheck::feasible)
    }
}

/// Two-plane triple-slit layout. D₁ spans the first-plane slits seen from
/// the source axis, D₂ reaches from the outer first-plane slit to the far
/// second-plane slit.
pub fn check_lgi_coherence(g: &LgiGeometry, k: &Constants) -> CoherenceReport {
    let reach = g.delta_x + SQRT_2;
    let d1 = 2.0 * (g.ds + reach * g.beta1);
    CoherenceReport {
        checks: vec![
            CoherenceCheck { label: "D1", dc: coherence_diameter(g.t01, g.sigma0, k), d_setup: d1 },
            CoherenceCheck {
                label: "D2",
                dc: coherence_diameter(g.t12, g.beta1, k),
                d_setup: d1 + 2.0 * reach * g.beta2,
            },
        ],
    }
}

/// Three-plane interference layout with the first-plane offset as Δx.
pub fn check_qpi_coherence(g: &QpiGeometry, k: &Constants) -> CoherenceReport {
    let dx = g.plane1_offset;
    let [b1, b2, b3] = g.beta;
    let [t01, t12, t23] = g.times;
    CoherenceReport {
        checks: vec![
            CoherenceCheck { label: "D1", dc: coherence_diameter(t01, g.sigma0, k), d_setup: 2.0 * (dx + SQRT_2) * b1 },
            CoherenceCheck {
                label: "D2",
                dc: coherence_diameter(t12, b1, k),
                d_setup: 2.0 * dx * b1 + 2.0 * g.x21 + 2.0 * SQRT_2 * b2,
            },
            CoherenceCheck {
                label: "D3",
                dc: coherence_diameter(t23, b2, k),
                d_setup: 2.0 * ((g.x31 - g.x21).abs() + SQRT_2 * b3),
            },
        ],
    }
}
