//! Physical constants and wavelength/frequency conversions.

use std::f64::consts::PI;

/// Vacuum speed of light, m/s (exact).
pub const C: f64 = 299_792_458.0;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Angular frequency (rad/s) of a vacuum wavelength (m).
#[inline]
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * PI * C / lambda
}

/// Vacuum wavelength (m) of an angular frequency (rad/s).
#[inline]
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * C / omega
}

/// Converts a wavelength FWHM around `lambda0` to an angular-frequency FWHM.
#[inline]
pub fn omega_width_from_wavelength_width(lambda0: f64, dlambda: f64) -> f64 {
    2.0 * PI * C * dlambda / (lambda0 * lambda0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
