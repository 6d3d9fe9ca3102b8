//! Physical constants in the canonical unit system.
//!
//! Lengths are in µm and times in ns. The pair (m, ħ) only ever enters the
//! propagation formulas through the ratio m/ħ = 2π/(λc), so the gauge is fixed
//! by ħ := 1. [`Constants::rescaled`] moves to any other gauge for checks.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Speed of light in µm/ns.
pub const SPEED_OF_LIGHT_UM_PER_NS: f64 = 3.0e5;
/// Source wavelength used by the reference scenarios, in µm.
pub const DEFAULT_WAVELENGTH_UM: f64 = 0.65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Wavelength in µm.
    pub lambda: f64,
    /// Speed of light in µm/ns.
    pub c: f64,
    /// Reduced Planck constant in canonical units.
    pub hbar: f64,
    /// Virtual photon mass ħk/c in canonical units.
    pub mass: f64,
}

/// Virtual mass m = ħ·(2π/λ)/c of a photon, in whatever units the inputs use.
pub fn virtual_mass(hbar: f64, lambda: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return invalid(format!("wavelength must be positive, got {lambda}"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("light speed must be positive, got {c}"));
    }
    Ok(hbar * (2.0 * PI / lambda) / c)
}

impl Constants {
    /// Canonical constants (ħ = 1) for wavelength `lambda` (µm) and speed `c` (µm/ns).
    pub fn canonical(lambda: f64, c: f64) -> Result<Self> {
        let mass = virtual_mass(1.0, lambda, c)?;
        Ok(Self { lambda, c, hbar: 1.0, mass })
    }

    /// 650 nm source, c = 3×10⁸ m/s.
    pub fn reference() -> Self {
        Self::canonical(DEFAULT_WAVELENGTH_UM, SPEED_OF_LIGHT_UM_PER_NS).expect("reference constants are valid")
    }

    /// Joint rescaling (m, ħ) → (s·m, s·ħ). Every observable is invariant under it.
    pub fn rescaled(&self, s: f64) -> Self {
        Self { hbar: self.hbar * s, mass: self.mass * s, ..*self }
    }

    pub fn mass_over_hbar(&self) -> f64 {
        self.mass / self.hbar
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}
