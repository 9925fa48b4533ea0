use crate::dispersion::{ModeField, ModeSolution, RadialQuadrature};
use crate::{Error, Result};

/// Azimuthally symmetric transverse profile `u(ρ)`, m⁻¹.
pub trait RadialField {
    fn value(&self, rho: f64) -> f64;
}

impl RadialField for ModeField {
    fn value(&self, rho: f64) -> f64 {
        ModeField::value(self, rho)
    }
}

/// Normalised Gaussian `u = √(2/π)/w0 · exp(-ρ²/w0²)`; `∫u⁴ d²ρ = 1/(π w0²)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianField {
    pub w0: f64,
}

impl RadialField for GaussianField {
    fn value(&self, rho: f64) -> f64 {
        (2.0 / std::f64::consts::PI).sqrt() / self.w0 * (-(rho / self.w0).powi(2)).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroField;

impl RadialField for ZeroField {
    fn value(&self, _rho: f64) -> f64 {
        0.0
    }
}

/// `∫ u_p u_p' u_s u_i d²ρ` on a given radial rule.
pub fn overlap_with(quad: &RadialQuadrature, fields: [&dyn RadialField; 4]) -> f64 {
    quad.integrate(|rho| fields.iter().map(|f| f.value(rho)).product())
}

/// Four-mode overlap `η` (m⁻²) of modes solved at one cross-section.
pub fn overlap_integral(
    pump1: &ModeSolution,
    pump2: &ModeSolution,
    signal: &ModeSolution,
    idler: &ModeSolution,
) -> Result<f64> {
    let modes = [pump1, pump2, signal, idler];
    if modes.iter().any(|m| m.cross_section != pump1.cross_section) {
        return Err(Error::invalid(
            "overlap integral needs all four modes at the same cross-section",
        ));
    }
    let w_min = modes.iter().map(|m| m.field.uw().1).fold(f64::INFINITY, f64::min);
    let quad = RadialQuadrature::new(pump1.cross_section.radius(), w_min);
    Ok(overlap_with(
        &quad,
        [&pump1.field, &pump2.field, &signal.field, &idler.field],
    ))
}
