use serde::{Deserialize, Serialize};

use crate::biphoton::PumpSpec;
use crate::units::{db_to_linear, linear_to_db};
use crate::{Error, Result};

/// Channel transmittances. The dB figures cover the whole path including
/// detector quantum efficiency; the efficiencies are kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub signal_db: f64,
    pub idler_db: f64,
    pub signal_detector_efficiency: f64,
    pub idler_detector_efficiency: f64,
}

impl LossBudget {
    pub const DEFAULT_SIGNAL_DETECTOR: f64 = 0.40;
    pub const DEFAULT_IDLER_DETECTOR: f64 = 0.12;

    pub fn new(
        signal_db: f64,
        idler_db: f64,
        signal_detector_efficiency: f64,
        idler_detector_efficiency: f64,
    ) -> Result<Self> {
        for (name, db) in [("signal", signal_db), ("idler", idler_db)] {
            if !(db <= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} transmittance {db} dB must be <= 0"
                )));
            }
        }
        for (name, e) in [
            ("signal", signal_detector_efficiency),
            ("idler", idler_detector_efficiency),
        ] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::invalid(format!(
                    "{name} detector efficiency {e} must lie in (0, 1]"
                )));
            }
        }
        Ok(LossBudget {
            signal_db,
            idler_db,
            signal_detector_efficiency,
            idler_detector_efficiency,
        })
    }

    /// Folds detector efficiencies into optics-only path losses.
    pub fn from_optics(
        signal_optics_db: f64,
        idler_optics_db: f64,
        signal_detector_efficiency: f64,
        idler_detector_efficiency: f64,
    ) -> Result<Self> {
        if !(signal_optics_db <= 0.0 && idler_optics_db <= 0.0) {
            return Err(Error::invalid("optics losses must be <= 0 dB"));
        }
        let s = signal_optics_db + linear_to_db(signal_detector_efficiency);
        let i = idler_optics_db + linear_to_db(idler_detector_efficiency);
        if !s.is_finite() || !i.is_finite() {
            return Err(Error::invalid("detector efficiencies must be > 0"));
        }
        Self::new(s, i, signal_detector_efficiency, idler_detector_efficiency)
    }

    /// Lossless channels.
    pub fn identity() -> Self {
        LossBudget {
            signal_db: 0.0,
            idler_db: 0.0,
            signal_detector_efficiency: 1.0,
            idler_detector_efficiency: 1.0,
        }
    }

    pub fn signal_transmittance(&self) -> f64 {
        db_to_linear(self.signal_db)
    }

    pub fn idler_transmittance(&self) -> f64 {
        db_to_linear(self.idler_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRates {
    /// pairs/s generated in the fibre
    pub internal: f64,
    /// pairs/s reaching both detectors
    pub observed: f64,
}

/// `R_int = η · photons_per_pulse · f_rep`, `R_obs = R_int · T_s · T_i`.
pub fn pair_rates(
    efficiency: f64,
    pump: &PumpSpec,
    photons_per_pulse: f64,
    budget: &LossBudget,
) -> Result<PairRates> {
    if !(efficiency >= 0.0 && efficiency.is_finite()) {
        return Err(Error::invalid(format!(
            "conversion efficiency {efficiency} must be >= 0"
        )));
    }
    if !(photons_per_pulse >= 0.0 && photons_per_pulse.is_finite()) {
        return Err(Error::invalid(format!(
            "photons per pulse {photons_per_pulse} must be >= 0"
        )));
    }
    let internal = efficiency * photons_per_pulse * pump.rep_rate;
    Ok(PairRates {
        internal,
        observed: internal * budget.signal_transmittance() * budget.idler_transmittance(),
    })
}

/// One reading of an ambiguous loss figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossScenario {
    pub name: String,
    pub signal_db: f64,
    pub idler_db: f64,
    pub observed: f64,
}

/// The two readings of a single quoted loss: split evenly over both arms
/// (`total`) or applied to each arm (`per_channel`).
pub fn loss_scenarios(internal: f64, quoted_db: f64) -> Vec<LossScenario> {
    [("total", 0.5 * quoted_db), ("per_channel", quoted_db)]
        .into_iter()
        .map(|(name, db)| LossScenario {
            name: name.to_string(),
            signal_db: db,
            idler_db: db,
            observed: internal * db_to_linear(db) * db_to_linear(db),
        })
        .collect()
}

/// Coincidence-to-accidental ratio.
pub fn car(peak_rate: f64, accidental_rate: f64) -> Result<f64> {
    if !(accidental_rate > 0.0) {
        return Err(Error::invalid(format!(
            "accidental rate {accidental_rate} must be > 0 for a CAR"
        )));
    }
    if !(peak_rate >= 0.0) {
        return Err(Error::invalid(format!("peak rate {peak_rate} must be >= 0")));
    }
    Ok(peak_rate / accidental_rate)
}
