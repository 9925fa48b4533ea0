//! Pair-rate bookkeeping and the offset + linear + quadratic power-scan fit
//! separating Raman (linear) from four-wave-mixing (quadratic) counts.

mod budget;
mod fit;

pub use budget::{car, loss_scenarios, pair_rates, LossBudget, LossScenario, PairRates};
pub use fit::{
    fit_power_scan, format_power_scan, parse_power_scan, synthetic_power_scan, CurvePoint, PowerScanFit,
    Weighting,
};

/// Default conversion efficiency, pairs per pump photon.
pub const DEFAULT_EFFICIENCY: f64 = 7e-10;
