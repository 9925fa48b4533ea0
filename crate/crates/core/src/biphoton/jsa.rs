use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::SpectralGrid;
use super::phase::{phase_matching, ModeSet, OverlapMode, TABLE_SPACING};
use super::pump::{pump_function, PumpMethod, PumpSpec};
use crate::dispersion::{FieldModel, SCAN_POINTS};
use crate::profile::SegmentedProfile;
use crate::units::wavelength_from_omega;
use crate::{Error, Result, SCHEMA_VERSION, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct JsaOptions {
    pub overlap: OverlapMode,
    pub pump_method: PumpMethod,
}

/// Numerical settings echoed into every export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub neff_scan_points: usize,
    pub neff_table_spacing_rad_s: f64,
    pub pump_coverage_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsaMetadata {
    pub schema: u32,
    pub software_version: String,
    pub pump: PumpSpec,
    pub pump_method: PumpMethod,
    pub profile_hash: String,
    pub segments: usize,
    pub segment_length_m: f64,
    pub modes: ModeSet,
    pub field_model: FieldModel,
    pub overlap_mode: OverlapMode,
    pub overlap_error_bound: Option<f64>,
    pub pump_boundary_ratio: f64,
    pub pump_coverage_warning: bool,
    /// Peak of `|F|²` before normalisation.
    pub raw_peak_intensity: f64,
    pub tolerances: Tolerances,
}

/// Joint spectral amplitude `F(ω_s, ω_i)`, indexed `[signal, idler]`.
#[derive(Debug, Clone)]
pub struct JsaGrid {
    pub grid: SpectralGrid,
    pub amplitude: Array2<Complex64>,
    pub metadata: JsaMetadata,
}

/// Location of the JSI maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsiPeak {
    pub signal_index: usize,
    pub idler_index: usize,
    pub omega_s: f64,
    pub omega_i: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub value: f64,
}

/// Signal and idler spectra, each summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
}

impl JsaGrid {
    pub fn new(grid: SpectralGrid, amplitude: Array2<Complex64>, metadata: JsaMetadata) -> Result<Self> {
        if amplitude.dim() != grid.shape() {
            return Err(Error::invalid(format!(
                "amplitude shape {:?} does not match grid {:?}",
                amplitude.dim(),
                grid.shape()
            )));
        }
        if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("amplitude has non-finite entries"));
        }
        Ok(JsaGrid {
            grid,
            amplitude,
            metadata,
        })
    }

    /// `|F|²`.
    pub fn intensity(&self) -> Array2<f64> {
        self.amplitude.mapv(|z| z.norm_sqr())
    }

    /// `|F|²` scaled to a unit maximum (all zero stays zero).
    pub fn normalized_intensity(&self) -> Array2<f64> {
        peak_normalized(&self.intensity()).0
    }

    /// Maximum of the JSI; ties resolve to the first cell in row-major order.
    pub fn peak(&self) -> JsiPeak {
        let jsi = self.intensity();
        let mut best = (0, 0, f64::NEG_INFINITY);
        for ((i, j), &v) in jsi.indexed_iter() {
            if v > best.2 {
                best = (i, j, v);
            }
        }
        let (i, j, value) = best;
        let ws = self.grid.signal()[i];
        let wi = self.grid.idler()[j];
        JsiPeak {
            signal_index: i,
            idler_index: j,
            omega_s: ws,
            omega_i: wi,
            lambda_s: wavelength_from_omega(ws),
            lambda_i: wavelength_from_omega(wi),
            value,
        }
    }

    pub fn marginals(&self) -> Result<Marginals> {
        marginals(&self.intensity())
    }

    /// Signal and idler exchanged: axes swapped, amplitude transposed.
    pub fn transposed(&self) -> JsaGrid {
        let mut metadata = self.metadata.clone();
        metadata.modes = metadata.modes.swapped();
        JsaGrid {
            grid: self.grid.transposed(),
            amplitude: self.amplitude.t().to_owned(),
            metadata,
        }
    }
}

/// `(m / max(m), max(m))`; an all-zero matrix is returned unchanged.
pub fn peak_normalized(m: &Array2<f64>) -> (Array2<f64>, f64) {
    let peak = m.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        (m.mapv(|v| v / peak), peak)
    } else {
        (m.clone(), peak)
    }
}

/// Row and column sums of a JSI, each normalised to unit sum.
pub fn marginals(jsi: &Array2<f64>) -> Result<Marginals> {
    let total: f64 = jsi.sum();
    if !(total > 0.0) {
        return Err(Error::invalid("marginals of an all-zero intensity"));
    }
    let signal = jsi.rows().into_iter().map(|r| r.sum() / total).collect();
    let idler = jsi.columns().into_iter().map(|c| c.sum() / total).collect();
    Ok(Marginals { signal, idler })
}

/// The three panels: phase matching `𝒥`, pump function `ℐ` and `F = ℐ·𝒥`.
#[derive(Debug, Clone)]
pub struct JsaPanels {
    pub phase_matching: Array2<Complex64>,
    pub pump: Array2<f64>,
    pub jsa: JsaGrid,
}

/// Assembles `F(ω_s, ω_i) = ℐ(ω_s, ω_i) 𝒥(ω_s, ω_i)` with `ω_p` at the pump centre.
pub fn jsa(
    segmented: &SegmentedProfile,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    modes: &ModeSet,
    options: &JsaOptions,
) -> Result<JsaPanels> {
    let pm = phase_matching(segmented, grid, pump.omega0(), modes, options.overlap)?;
    let pf = pump_function(pump, grid, options.pump_method);
    let mut amplitude = pm.values.clone();
    amplitude.zip_mut_with(&pf.values, |f, &p| *f *= p);
    let raw_peak_intensity = amplitude.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let metadata = JsaMetadata {
        schema: SCHEMA_VERSION,
        software_version: VERSION.to_string(),
        pump: pump.clone(),
        pump_method: options.pump_method,
        profile_hash: segmented.profile_hash.clone(),
        segments: segmented.len(),
        segment_length_m: segmented.segment_length,
        modes: *modes,
        field_model: pm.field_model,
        overlap_mode: pm.overlap_mode,
        overlap_error_bound: pm.overlap_error_bound,
        pump_boundary_ratio: pf.boundary_ratio,
        pump_coverage_warning: pf.coverage_warning,
        raw_peak_intensity,
        tolerances: Tolerances {
            neff_scan_points: SCAN_POINTS,
            neff_table_spacing_rad_s: TABLE_SPACING,
            pump_coverage_threshold: 1e-6,
        },
    };
    let jsa = JsaGrid::new(grid.clone(), amplitude, metadata)?;
    Ok(JsaPanels {
        phase_matching: pm.values,
        pump: pf.values,
        jsa,
    })
}
