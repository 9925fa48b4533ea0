//! Joint spectral amplitude of a segmented waist: pump envelope and its
//! self-convolution, per-segment overlaps and wave-vector mismatch, the
//! segmented phase-matching sum, and derived analyses.

pub mod export;
mod grid;
mod jsa;
mod overlap;
mod phase;
mod pump;
mod schmidt;

pub use grid::{omega_axis, SpectralGrid};
pub use jsa::{
    jsa, marginals, peak_normalized, JsaGrid, JsaMetadata, JsaOptions, JsaPanels, JsiPeak, Marginals,
    Tolerances,
};
pub use overlap::{overlap_integral, overlap_with, GaussianField, RadialField, ZeroField};
pub use phase::{
    delta_k, delta_k_direct, phase_matching, sinc, ModeSet, OverlapMode, PhaseMatching, SegmentDispersion,
    TABLE_SPACING,
};
pub use pump::{pump_function, PumpFunction, PumpMethod, PumpSpec};
pub use schmidt::{schmidt_analysis, schmidt_decompose, SchmidtReport};
