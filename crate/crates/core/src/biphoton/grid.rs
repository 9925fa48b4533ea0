use serde::Serialize;

use crate::units::{omega_from_wavelength, wavelength_from_omega};
use crate::{Error, Result};

/// Rectangular `(ω_s, ω_i)` grid. Matrices over it are indexed `[signal, idler]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralGrid {
    signal: Vec<f64>,
    idler: Vec<f64>,
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::invalid(format!("{name} axis needs at least 2 points")));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::invalid(format!(
            "{name} axis has a non-positive frequency"
        )));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

/// `n` points uniform in ω spanning the wavelength window `[lo, hi]` (m).
pub fn omega_axis(lambda_lo: f64, lambda_hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lambda_lo > 0.0 && lambda_hi > lambda_lo) || n < 2 {
        return Err(Error::invalid(format!(
            "bad wavelength window [{lambda_lo}, {lambda_hi}] with {n} points"
        )));
    }
    let w0 = omega_from_wavelength(lambda_hi);
    let w1 = omega_from_wavelength(lambda_lo);
    Ok((0..n)
        .map(|k| w0 + (w1 - w0) * k as f64 / (n - 1) as f64)
        .collect())
}

impl SpectralGrid {
    pub fn new(signal: Vec<f64>, idler: Vec<f64>) -> Result<Self> {
        check_axis("signal", &signal)?;
        check_axis("idler", &idler)?;
        Ok(SpectralGrid { signal, idler })
    }

    /// Grid uniform in ω over two wavelength windows (m).
    pub fn from_wavelength_windows(
        signal: (f64, f64),
        idler: (f64, f64),
        n_signal: usize,
        n_idler: usize,
    ) -> Result<Self> {
        Self::new(
            omega_axis(signal.0, signal.1, n_signal)?,
            omega_axis(idler.0, idler.1, n_idler)?,
        )
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn idler(&self) -> &[f64] {
        &self.idler
    }

    /// `(n_signal, n_idler)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.signal.len(), self.idler.len())
    }

    /// Grid with the two axes exchanged.
    pub fn transposed(&self) -> SpectralGrid {
        SpectralGrid {
            signal: self.idler.clone(),
            idler: self.signal.clone(),
        }
    }

    pub fn signal_wavelengths(&self) -> Vec<f64> {
        self.signal.iter().map(|&w| wavelength_from_omega(w)).collect()
    }

    pub fn idler_wavelengths(&self) -> Vec<f64> {
        self.idler.iter().map(|&w| wavelength_from_omega(w)).collect()
    }

    /// Centre cell frequencies.
    pub fn center(&self) -> (f64, f64) {
        let mid = |v: &[f64]| 0.5 * (v[0] + v[v.len() - 1]);
        (mid(&self.signal), mid(&self.idler))
    }

    /// Range of `ω_s + ω_i` covered.
    pub fn sum_range(&self) -> (f64, f64) {
        (
            self.signal[0] + self.idler[0],
            self.signal[self.signal.len() - 1] + self.idler[self.idler.len() - 1],
        )
    }
}
