//! Photon pairs from spontaneous four-wave mixing in tapered optical
//! micro-/nanofibres.
//!
//! The crate is split along the physical pipeline:
//!
//! - [`dispersion`]: Sellmeier glasses, the full-vector step-index mode
//!   solver and interpolated effective-index tables.
//! - [`profile`]: taper geometry ingestion and uniform segmentation.
//! - [`biphoton`]: phase matching over a segmented waist, the pump envelope,
//!   overlap integrals, the joint spectral amplitude and its Schmidt spectrum.
//! - [`rates`]: pair-rate bookkeeping and the SFWM/Raman power-scan fit.
//! - [`tags`]: time-tag streams, coincidence histograms, heralded g², and a
//!   seeded Monte-Carlo tag generator.

pub mod biphoton;
pub mod dispersion;
mod error;
pub mod profile;
pub mod rates;
pub mod special;
pub mod tags;
pub mod units;

pub use error::{Error, Result};

/// Schema version shared by every file format this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Crate version, echoed into exported metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
