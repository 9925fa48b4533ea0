use std::collections::HashMap;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SpectralGrid;
use crate::dispersion::{
    solve_neff, CrossSection, FieldModel, ModeLabel, ModeSolution, NeffTable, RadialQuadrature,
};
use crate::profile::SegmentedProfile;
use crate::units::C;
use crate::{Error, Result};

/// Largest node spacing of the per-segment effective-index tables, rad/s.
pub const TABLE_SPACING: f64 = 1e13;

/// Mode assignment of the three interacting fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSet {
    pub pump: ModeLabel,
    pub signal: ModeLabel,
    pub idler: ModeLabel,
}

impl Default for ModeSet {
    fn default() -> Self {
        ModeSet {
            pump: ModeLabel::HE11,
            signal: ModeLabel::HE11,
            idler: ModeLabel::HE11,
        }
    }
}

impl ModeSet {
    /// Signal and idler roles exchanged.
    pub fn swapped(&self) -> ModeSet {
        ModeSet {
            pump: self.pump,
            signal: self.idler,
            idler: self.signal,
        }
    }

    fn distinct(&self) -> Vec<ModeLabel> {
        let mut v = vec![self.pump];
        for l in [self.signal, self.idler] {
            if !v.contains(&l) {
                v.push(l);
            }
        }
        v
    }
}

/// Where the overlap integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// At each grid point's own `(ω_s, ω_i)`.
    #[default]
    PerPoint,
    /// Once per segment at the grid centre.
    Center,
}

/// Effective-index tables of every mode in a [`ModeSet`] at one cross-section.
#[derive(Debug, Clone)]
pub struct SegmentDispersion {
    cross_section: CrossSection,
    tables: Vec<NeffTable>,
}

impl SegmentDispersion {
    /// Tables covering `[omega_min, omega_max]` with spacing at most [`TABLE_SPACING`].
    pub fn build(cs: &CrossSection, modes: &ModeSet, omega_min: f64, omega_max: f64) -> Result<Self> {
        let pad = 1e-9 * omega_max;
        let (lo, hi) = (omega_min - pad, omega_max + pad);
        let n = (((hi - lo) / TABLE_SPACING).ceil() as usize + 1).max(8);
        let tables = modes
            .distinct()
            .into_iter()
            .map(|l| NeffTable::uniform(cs, lo, hi, n, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(SegmentDispersion {
            cross_section: cs.clone(),
            tables,
        })
    }

    pub fn cross_section(&self) -> &CrossSection {
        &self.cross_section
    }

    pub fn table(&self, label: ModeLabel) -> Option<&NeffTable> {
        self.tables.iter().find(|t| t.label() == label)
    }

    fn k(&self, label: ModeLabel, omega: f64) -> Result<f64> {
        self.table(label)
            .ok_or_else(|| Error::invalid(format!("no table for {label}")))?
            .k(omega)
    }
}

/// `Δk = k_p(ω_p) + k_p(ω_s+ω_i−ω_p) − k_s(ω_s) − k_i(ω_i)` from tables, rad/m.
pub fn delta_k(
    disp: &SegmentDispersion,
    modes: &ModeSet,
    omega_p: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    let conj = omega_s + omega_i - omega_p;
    // (k_s + k_i) grouped so the exchange symmetry is exact in floating point
    Ok(disp.k(modes.pump, omega_p)? + disp.k(modes.pump, conj)?
        - (disp.k(modes.signal, omega_s)? + disp.k(modes.idler, omega_i)?))
}

/// Same as [`delta_k`] with every index from a direct mode solve.
pub fn delta_k_direct(
    cs: &CrossSection,
    modes: &ModeSet,
    omega_p: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    let k = |l: ModeLabel, w: f64| -> Result<f64> { Ok(w * solve_neff(cs, w, l)? / C) };
    let conj = omega_s + omega_i - omega_p;
    Ok(k(modes.pump, omega_p)? + k(modes.pump, conj)?
        - (k(modes.signal, omega_s)? + k(modes.idler, omega_i)?))
}

/// `sin(x)/x`, `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching function over the grid plus diagnostics.
#[derive(Debug, Clone)]
pub struct PhaseMatching {
    pub values: Array2<Complex64>,
    pub overlap_mode: OverlapMode,
    /// Centre mode only: largest relative deviation of the grid-corner
    /// overlaps from the centre value, over all segments.
    pub overlap_error_bound: Option<f64>,
    pub field_model: FieldModel,
}

/// Per distinct diameter: axis wavevectors, pump terms and the overlap map.
struct Prepared {
    disp: SegmentDispersion,
    kp0: f64,
    ks: Vec<f64>,
    ki: Vec<f64>,
    eta: EtaMap,
    eta_error: f64,
    field_model: FieldModel,
}

enum EtaMap {
    Grid(Array2<f64>),
    Constant(f64),
}

impl EtaMap {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            EtaMap::Grid(m) => m[[i, j]],
            EtaMap::Constant(c) => *c,
        }
    }
}

/// Field values at the nodes of a shared radial rule.
fn node_values(sol: &ModeSolution, quad: &RadialQuadrature) -> Vec<f64> {
    quad.nodes.iter().map(|&r| sol.field.value(r)).collect()
}

fn prepare(
    cs: &CrossSection,
    grid: &SpectralGrid,
    omega_p: f64,
    modes: &ModeSet,
    overlap: OverlapMode,
) -> Result<Prepared> {
    let (smin, smax) = (grid.signal()[0], *grid.signal().last().unwrap());
    let (imin, imax) = (grid.idler()[0], *grid.idler().last().unwrap());
    let (sum_lo, sum_hi) = grid.sum_range();
    let lo = smin.min(imin).min(omega_p).min(sum_lo - omega_p);
    let hi = smax.max(imax).max(omega_p).max(sum_hi - omega_p);
    if !(lo > 0.0) {
        return Err(Error::domain(format!(
            "conjugate pump frequency {lo:.6e} rad/s is not positive"
        )));
    }
    let disp = SegmentDispersion::build(cs, modes, lo, hi)?;
    let kp0 = disp.k(modes.pump, omega_p)?;
    let ks = grid
        .signal()
        .iter()
        .map(|&w| disp.k(modes.signal, w))
        .collect::<Result<Vec<_>>>()?;
    let ki = grid
        .idler()
        .iter()
        .map(|&w| disp.k(modes.idler, w))
        .collect::<Result<Vec<_>>>()?;

    let mode_at = |label: ModeLabel, w: f64| -> Result<ModeSolution> {
        let t = disp.table(label).expect("table built for every label");
        ModeSolution::from_neff(cs, w, label, t.neff(w)?)
    };
    let pump = mode_at(modes.pump, omega_p)?;
    let field_model = pump.field.model();

    let (eta, eta_error) = match overlap {
        OverlapMode::PerPoint => {
            let sig = grid
                .signal()
                .iter()
                .map(|&w| mode_at(modes.signal, w))
                .collect::<Result<Vec<_>>>()?;
            let idl = grid
                .idler()
                .iter()
                .map(|&w| mode_at(modes.idler, w))
                .collect::<Result<Vec<_>>>()?;
            let w_min = sig
                .iter()
                .chain(&idl)
                .chain(std::iter::once(&pump))
                .map(|m| m.field.uw().1)
                .fold(f64::INFINITY, f64::min);
            let quad = RadialQuadrature::new(cs.radius(), w_min);
            let up = node_values(&pump, &quad);
            let nk = quad.nodes.len();
            let mut s_mat = Array2::<f64>::zeros((sig.len(), nk));
            for (mut row, m) in s_mat.axis_iter_mut(Axis(0)).zip(&sig) {
                let v = node_values(m, &quad);
                for k in 0..nk {
                    row[k] = v[k] * up[k] * up[k] * quad.weights[k];
                }
            }
            let mut i_mat = Array2::<f64>::zeros((nk, idl.len()));
            for (j, m) in idl.iter().enumerate() {
                for (k, v) in node_values(m, &quad).into_iter().enumerate() {
                    i_mat[[k, j]] = v;
                }
            }
            (EtaMap::Grid(s_mat.dot(&i_mat)), 0.0)
        }
        OverlapMode::Center => {
            let eta_at = |ws: f64, wi: f64| -> Result<f64> {
                let s = mode_at(modes.signal, ws)?;
                let i = mode_at(modes.idler, wi)?;
                super::overlap::overlap_integral(&pump, &pump, &s, &i)
            };
            let (cs_w, ci_w) = grid.center();
            let e0 = eta_at(cs_w, ci_w)?;
            let mut err: f64 = 0.0;
            for ws in [smin, smax] {
                for wi in [imin, imax] {
                    err = err.max(((eta_at(ws, wi)? - e0) / e0).abs());
                }
            }
            (EtaMap::Constant(e0), err)
        }
    };

    Ok(Prepared {
        disp,
        kp0,
        ks,
        ki,
        eta,
        eta_error,
        field_model,
    })
}

/// Segmented phase-matching sum
/// `𝒥 = Σ_q (l/L) sinc(Δk_q l/2) e^{iΔk_q l/2} e^{i Σ_{n>q} Δk_n l} η_q`.
///
/// The `l/L` weight makes a uniform waist give the same value for any `N`.
pub fn phase_matching(
    segmented: &SegmentedProfile,
    grid: &SpectralGrid,
    omega_p: f64,
    modes: &ModeSet,
    overlap: OverlapMode,
) -> Result<PhaseMatching> {
    let n_seg = segmented.len();
    if n_seg == 0 {
        return Err(Error::invalid("no segments"));
    }
    // one preparation per distinct diameter
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut distinct: Vec<(usize, &CrossSection)> = Vec::new();
    let seg_to_distinct: Vec<usize> = segmented
        .segments
        .iter()
        .enumerate()
        .map(|(q, cs)| {
            *index.entry(cs.diameter.to_bits()).or_insert_with(|| {
                distinct.push((q, cs));
                distinct.len() - 1
            })
        })
        .collect();

    let prepared = distinct
        .par_iter()
        .map(|&(q, cs)| {
            prepare(cs, grid, omega_p, modes, overlap).map_err(|e| match e {
                Error::CutoffInTable { label, omegas } => Error::CutoffInSegment {
                    label,
                    segment: q,
                    omega: omegas[0],
                },
                Error::NoGuidedMode { label, omega, .. } => Error::CutoffInSegment {
                    label,
                    segment: q,
                    omega,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let l = segmented.segment_length;
    let weight = 1.0 / n_seg as f64;
    let (ns, ni) = grid.shape();
    let mut values = Array2::<Complex64>::zeros((ns, ni));
    let rows: Vec<Result<()>> = values
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(ni)
        .enumerate()
        .map(|(i, row)| {
            let ws = grid.signal()[i];
            let mut dk = vec![0.0; prepared.len()];
            for (j, wi) in grid.idler().iter().enumerate() {
                let conj = ws + wi - omega_p;
                for (d, p) in dk.iter_mut().zip(&prepared) {
                    *d = p.kp0 + p.disp.k(modes.pump, conj)? - (p.ks[i] + p.ki[j]);
                }
                let mut acc = 0.0;
                let mut sum = Complex64::new(0.0, 0.0);
                for q in (0..n_seg).rev() {
                    let p = &prepared[seg_to_distinct[q]];
                    let d = dk[seg_to_distinct[q]];
                    let half = 0.5 * d * l;
                    let amp = weight * sinc(half) * p.eta.at(i, j);
                    sum += Complex64::from_polar(amp, half + acc);
                    acc += d * l;
                }
                row[j] = sum;
            }
            Ok(())
        })
        .collect();
    rows.into_iter().collect::<Result<Vec<_>>>()?;

    let overlap_error_bound = match overlap {
        OverlapMode::PerPoint => None,
        OverlapMode::Center => Some(prepared.iter().map(|p| p.eta_error).fold(0.0, f64::max)),
    };
    Ok(PhaseMatching {
        values,
        overlap_mode: overlap,
        overlap_error_bound,
        field_model: prepared[0].field_model,
    })
}
