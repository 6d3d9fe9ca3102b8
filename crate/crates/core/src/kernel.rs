//! Free-particle propagation kernel and the Gaussian source.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::constants::Constants;
use crate::error::{invalid, Result};

/// K(x₁, t₁; x₀, t₀) = √(m/(2πiħΔt))·exp(i·m·Δx²/(2ħΔt)).
pub fn kernel(x1: f64, t1: f64, x0: f64, t0: f64, k: &Constants) -> Result<C64> {
    let dt = t1 - t0;
    if !(dt > 0.0) {
        return invalid(format!("kernel needs t1 > t0, got Δt = {dt}"));
    }
    Ok(kernel_prefactor(dt, k) * kernel_phase(x1 - x0, dt, k))
}

pub(crate) fn kernel_prefactor(dt: f64, k: &Constants) -> C64 {
    (C64::new(0.0, -k.mass / (2.0 * PI * k.hbar * dt))).sqrt()
}

#[inline]
pub(crate) fn kernel_phase(dx: f64, dt: f64, k: &Constants) -> C64 {
    C64::from_polar(1.0, k.mass * dx * dx / (2.0 * k.hbar * dt))
}

/// Normalized source Ψ₀(x) = exp(−x²/(2σ₀²))/√(σ₀√π).
pub fn source_amplitude(sigma0: f64, x: f64) -> f64 {
    (-x * x / (2.0 * sigma0 * sigma0)).exp() / (sigma0 * PI.sqrt()).sqrt()
}

/// Propagates a field sampled on a uniform grid to `targets` by trapezoid
/// quadrature of the kernel over the samples.
pub fn propagate_sampled(xs: &[f64], field: &[C64], dt: f64, k: &Constants, targets: &[f64]) -> Result<Vec<C64>> {
    if xs.len() != field.len() || xs.len() < 2 {
        return invalid("sampled field needs matching abscissae and at least two samples");
    }
    if !(dt > 0.0) {
        return invalid(format!("propagation time must be positive, got {dt}"));
    }
    let h = xs[1] - xs[0];
    let pre = kernel_prefactor(dt, k) * h;
    let last = xs.len() - 1;
    Ok(targets
        .iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, (&x0, &f)) in xs.iter().zip(field).enumerate() {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                acc += f * kernel_phase(x - x0, dt, k) * w;
            }
            acc * pre
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_displacement_has_unit_phase() {
        let k = Constants::reference();
        let v = kernel(3.0, 0.5, 3.0, 0.2, &k).unwrap();
        let expected = (C64::new(0.0, -k.mass / (2.0 * PI * k.hbar * 0.3))).sqrt();
        assert!((v - expected).norm() < 1e-18);
        assert!((kernel_phase(0.0, 0.3, &k) - C64::new(1.0, 0.0)).norm() == 0.0);
        // √(1/i) has phase −π/4
        assert!((expected.arg() + PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_interval() {
        let k = Constants::reference();
        assert!(kernel(0.0, 1.0, 0.0, 1.0, &k).is_err());
        assert!(kernel(0.0, 0.5, 0.0, 1.0, &k).is_err());
    }

    #[test]
    fn source_is_normalized() {
        let sigma = 200.0;
        let h = 0.5;
        let n = (16.0 * sigma / h) as i64;
        let total: f64 = (-n..=n).map(|i| source_amplitude(sigma, i as f64 * h).powi(2) * h).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}
