use rayon::prelude::*;

use super::mode::{neff_slope, solve_neff, CrossSection, ModeLabel};
use crate::units::C;
use crate::{Error, Result};

/// Tabulated `n_eff(ω)` of one mode at one cross-section, interpolated by a
/// monotone cubic Hermite spline.
///
/// Node slopes come from implicit differentiation of the characteristic
/// equation at each root, then pass through the Fritsch–Carlson limiter.
#[derive(Debug, Clone)]
pub struct NeffTable {
    label: ModeLabel,
    diameter: f64,
    omegas: Vec<f64>,
    neffs: Vec<f64>,
    slopes: Vec<f64>,
}

/// Solves `label` at every point of `omega_grid` (strictly increasing).
pub fn neff_table(cs: &CrossSection, omega_grid: &[f64], label: ModeLabel) -> Result<NeffTable> {
    if omega_grid.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("frequency grid must be strictly increasing"));
    }
    let solved: Vec<Result<(f64, f64)>> = omega_grid
        .par_iter()
        .map(|&w| {
            let n = solve_neff(cs, w, label)?;
            let s = if omega_grid.len() > 1 {
                neff_slope(cs, w, label, n)?
            } else {
                0.0
            };
            Ok((n, s))
        })
        .collect();

    let mut cut = Vec::new();
    let mut neffs = Vec::with_capacity(solved.len());
    let mut slopes = Vec::with_capacity(solved.len());
    for (r, &w) in solved.into_iter().zip(omega_grid) {
        match r {
            Ok((n, s)) => {
                neffs.push(n);
                slopes.push(s);
            }
            Err(Error::NoGuidedMode { .. }) => cut.push(w),
            Err(e) => return Err(e),
        }
    }
    if !cut.is_empty() {
        return Err(Error::CutoffInTable {
            label: label.to_string(),
            omegas: cut,
        });
    }
    limit_slopes(omega_grid, &neffs, &mut slopes);
    Ok(NeffTable {
        label,
        diameter: cs.diameter,
        omegas: omega_grid.to_vec(),
        neffs,
        slopes,
    })
}

/// Fritsch–Carlson: zero slopes at local extrema and clamp `α² + β² ≤ 9`.
fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    for k in 0..x.len().saturating_sub(1) {
        let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
        if delta == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        if d[k].signum() != delta.signum() {
            d[k] = 0.0;
        }
        if d[k + 1].signum() != delta.signum() {
            d[k + 1] = 0.0;
        }
        let a = d[k] / delta;
        let b = d[k + 1] / delta;
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            d[k] = t * a * delta;
            d[k + 1] = t * b * delta;
        }
    }
}

impl NeffTable {
    /// `n` points uniform in ω over `[omega_min, omega_max]`.
    pub fn uniform(
        cs: &CrossSection,
        omega_min: f64,
        omega_max: f64,
        n: usize,
        label: ModeLabel,
    ) -> Result<Self> {
        if n == 0 || !(omega_max >= omega_min) {
            return Err(Error::invalid("table needs n >= 1 and omega_max >= omega_min"));
        }
        let grid: Vec<f64> = if n == 1 {
            vec![omega_min]
        } else {
            (0..n)
                .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (n - 1) as f64)
                .collect()
        };
        neff_table(cs, &grid, label)
    }

    pub fn label(&self) -> ModeLabel {
        self.label
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn neffs(&self) -> &[f64] {
        &self.neffs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omegas[0], *self.omegas.last().unwrap())
    }

    /// Interpolated effective index; outside the tabulated range is an error.
    pub fn neff(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let tol = 1e-12 * hi;
        if !(omega >= lo - tol && omega <= hi + tol) {
            return Err(Error::Extrapolation {
                omega,
                min: lo,
                max: hi,
            });
        }
        if self.omegas.len() == 1 {
            return Ok(self.neffs[0]);
        }
        let x = omega.clamp(lo, hi);
        let k = self
            .omegas
            .partition_point(|&w| w <= x)
            .clamp(1, self.omegas.len() - 1)
            - 1;
        let h = self.omegas[k + 1] - self.omegas[k];
        let t = (x - self.omegas[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.neffs[k]
            + h10 * h * self.slopes[k]
            + h01 * self.neffs[k + 1]
            + h11 * h * self.slopes[k + 1])
    }

    /// Propagation constant `β = ω n_eff / c`, rad/m.
    pub fn k(&self, omega: f64) -> Result<f64> {
        Ok(omega * self.neff(omega)? / C)
    }
}
