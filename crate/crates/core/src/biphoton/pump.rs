use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SpectralGrid;
use crate::units::{omega_from_wavelength, omega_width_from_wavelength_width, HBAR};
use crate::{Error, Result};

/// Gaussian pump pulse train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Central vacuum wavelength, m.
    pub lambda0: f64,
    /// Spectral standard deviation of the field envelope, rad/s.
    pub sigma: f64,
    /// Intensity FWHM duration, s.
    pub pulse_duration: f64,
    /// Hz
    pub rep_rate: f64,
    /// W
    pub avg_power: f64,
    pub transform_limited: bool,
}

/// `2 √(ln 2)`: links `σ` to the intensity FWHM in both domains.
fn two_sqrt_ln2() -> f64 {
    2.0 * std::f64::consts::LN_2.sqrt()
}

impl PumpSpec {
    pub fn new(
        lambda0: f64,
        sigma: f64,
        pulse_duration: f64,
        rep_rate: f64,
        avg_power: f64,
        transform_limited: bool,
    ) -> Result<Self> {
        for (name, v) in [
            ("lambda0", lambda0),
            ("sigma", sigma),
            ("pulse_duration", pulse_duration),
            ("rep_rate", rep_rate),
            ("avg_power", avg_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("pump {name} = {v} must be > 0")));
            }
        }
        if transform_limited {
            let tl = two_sqrt_ln2() / sigma;
            if ((pulse_duration - tl) / tl).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "transform-limited pump needs duration {tl:.6e} s for sigma {sigma:.6e} rad/s, got {pulse_duration:.6e}"
                )));
            }
        }
        Ok(PumpSpec {
            lambda0,
            sigma,
            pulse_duration,
            rep_rate,
            avg_power,
            transform_limited,
        })
    }

    /// Pump whose spectral intensity has FWHM `fwhm_wavelength` (m); the
    /// duration is independent (chirped pulse).
    pub fn from_spectral_fwhm(
        lambda0: f64,
        fwhm_wavelength: f64,
        pulse_duration: f64,
        rep_rate: f64,
        avg_power: f64,
    ) -> Result<Self> {
        let sigma = omega_width_from_wavelength_width(lambda0, fwhm_wavelength) / two_sqrt_ln2();
        Self::new(lambda0, sigma, pulse_duration, rep_rate, avg_power, false)
    }

    /// Transform-limited pulse: `τ_p = 2√(ln 2)/σ`.
    pub fn transform_limited(lambda0: f64, sigma: f64, rep_rate: f64, avg_power: f64) -> Result<Self> {
        Self::new(lambda0, sigma, two_sqrt_ln2() / sigma, rep_rate, avg_power, true)
    }

    /// 1062 nm, 2 nm spectral FWHM, 100 ps, 18 MHz, 118 mW.
    pub fn reference() -> Self {
        Self::from_spectral_fwhm(1.062e-6, 2e-9, 100e-12, 18e6, 0.118).expect("valid reference pump")
    }

    pub fn omega0(&self) -> f64 {
        omega_from_wavelength(self.lambda0)
    }

    /// Spectral intensity FWHM, rad/s.
    pub fn spectral_fwhm(&self) -> f64 {
        two_sqrt_ln2() * self.sigma
    }

    /// Field envelope `E_p(ω) = exp(-(ω-ω0)²/(2σ²))`.
    pub fn envelope(&self, omega: f64) -> f64 {
        let x = (omega - self.omega0()) / self.sigma;
        (-0.5 * x * x).exp()
    }

    pub fn pulse_energy(&self) -> f64 {
        self.avg_power / self.rep_rate
    }

    /// `E_pulse / (ħ ω0)`.
    pub fn photons_per_pulse(&self) -> f64 {
        self.pulse_energy() / (HBAR * self.omega0())
    }

    /// Closed form of the self-convolution: `σ√π exp(-(Ω-2ω0)²/(4σ²))`.
    pub fn convolution_closed_form(&self, omega_sum: f64) -> f64 {
        let x = (omega_sum - 2.0 * self.omega0()) / self.sigma;
        self.sigma * std::f64::consts::PI.sqrt() * (-0.25 * x * x).exp()
    }

    /// Trapezoidal evaluation of `∫ E_p(ω) E_p(Ω-ω) dω` over `ω0 ± 40σ`.
    pub fn convolution_numeric(&self, omega_sum: f64) -> f64 {
        const HALF_SPAN: f64 = 40.0;
        const STEPS_PER_SIGMA: f64 = 4.0;
        let w0 = self.omega0();
        let h = self.sigma / STEPS_PER_SIGMA;
        let n = (2.0 * HALF_SPAN * STEPS_PER_SIGMA) as usize;
        let lo = w0 - HALF_SPAN * self.sigma;
        let mut s = 0.0;
        for k in 0..=n {
            let w = lo + k as f64 * h;
            let f = self.envelope(w) * self.envelope(omega_sum - w);
            s += if k == 0 || k == n { 0.5 * f } else { f };
        }
        s * h
    }
}

/// Which route evaluates the pump convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PumpMethod {
    #[default]
    Numeric,
    ClosedForm,
}

/// Pump function `ℐ(ω_s, ω_i)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct PumpFunction {
    pub values: Array2<f64>,
    /// Largest closed-form value at the grid's extreme sum frequencies,
    /// relative to the in-grid peak.
    pub boundary_ratio: f64,
    /// Set when `boundary_ratio ≥ 1e-6`: the grid clips the energy band.
    pub coverage_warning: bool,
}

pub fn pump_function(pump: &PumpSpec, grid: &SpectralGrid, method: PumpMethod) -> PumpFunction {
    let (ns, ni) = grid.shape();
    let mut values = Array2::<f64>::zeros((ns, ni));
    values
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(ni)
        .enumerate()
        .for_each(|(r, row)| {
            let ws = grid.signal()[r];
            for (v, &wi) in row.iter_mut().zip(grid.idler()) {
                *v = match method {
                    PumpMethod::Numeric => pump.convolution_numeric(ws + wi),
                    PumpMethod::ClosedForm => pump.convolution_closed_form(ws + wi),
                };
            }
        });
    let (lo, hi) = grid.sum_range();
    let peak = pump.convolution_closed_form((2.0 * pump.omega0()).clamp(lo, hi));
    let edge = pump
        .convolution_closed_form(lo)
        .max(pump.convolution_closed_form(hi));
    let boundary_ratio = if peak > 0.0 { edge / peak } else { 1.0 };
    PumpFunction {
        values,
        boundary_ratio,
        coverage_warning: !(boundary_ratio < 1e-6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pump_width() {
        let p = PumpSpec::reference();
        // Δω = 2πcΔλ/λ² for 2 nm at 1062 nm
        let dw = 2.0 * std::f64::consts::PI * 299_792_458.0 * 2e-9 / (1.062e-6f64).powi(2);
        assert!((p.spectral_fwhm() - dw).abs() < 1e-6 * dw);
        assert!((p.envelope(p.omega0() + 0.5 * dw).powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn transform_limit_checked() {
        let p = PumpSpec::transform_limited(1.062e-6, 1e12, 18e6, 0.1).unwrap();
        assert!((p.pulse_duration * p.sigma - 2.0 * std::f64::consts::LN_2.sqrt()).abs() < 1e-12);
        assert!(PumpSpec::new(1.062e-6, 1e12, 1e-9, 18e6, 0.1, true).is_err());
        assert!(PumpSpec::new(1.062e-6, 1e12, 1e-9, 18e6, 0.1, false).is_ok());
        assert!(PumpSpec::new(1.062e-6, -1.0, 1e-9, 18e6, 0.1, false).is_err());
    }

    #[test]
    fn numeric_matches_closed_form() {
        let p = PumpSpec::reference();
        let w0 = p.omega0();
        for k in -20..=20 {
            let s = 2.0 * w0 + k as f64 * 0.7 * p.sigma;
            let a = p.convolution_numeric(s);
            let b = p.convolution_closed_form(s);
            assert!((a - b).abs() <= 1e-6 * b, "{k}: {a} {b}");
        }
    }

    #[test]
    fn maximal_on_energy_line() {
        let p = PumpSpec::reference();
        let w0 = p.omega0();
        let grid = SpectralGrid::new(
            (0..41).map(|k| w0 - 2e13 + k as f64 * 1e12).collect(),
            (0..41).map(|k| w0 - 2e13 + k as f64 * 1e12).collect(),
        )
        .unwrap();
        let f = pump_function(&p, &grid, PumpMethod::ClosedForm);
        let peak = f.values.iter().cloned().fold(0.0, f64::max);
        for ((i, j), &v) in f.values.indexed_iter() {
            if i + j == 40 {
                assert_eq!(v, peak);
            }
        }
        assert!(!f.coverage_warning);
    }

    #[test]
    fn narrower_pump_narrower_ridge() {
        let grid =
            SpectralGrid::from_wavelength_windows((1.05e-6, 1.075e-6), (1.05e-6, 1.075e-6), 64, 64).unwrap();
        let mut last = usize::MAX;
        for halvings in 0..4 {
            let mut p = PumpSpec::reference();
            p.sigma /= 2f64.powi(halvings);
            let f = pump_function(&p, &grid, PumpMethod::ClosedForm);
            let peak = f.values.iter().cloned().fold(0.0, f64::max);
            let above = f.values.iter().filter(|&&v| v > 0.5 * peak).count();
            assert!(above <= last);
            last = above;
        }
    }
}
