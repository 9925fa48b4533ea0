//! Run configuration: a TOML document with fixed sections. Every key can be
//! overridden on the command line as `--section.key value`.

use std::path::{Path, PathBuf};

use fiberpair::biphoton::{ModeSet, OverlapMode, PumpMethod, PumpSpec, SpectralGrid};
use fiberpair::dispersion::{CladdingModel, CrossSection, ModeLabel, SellmeierGlass};
use fiberpair::profile::{SegmentedProfile, TaperProfile};
use fiberpair::tags::{PairStatistics, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fiber: FiberSection,
    pub profile: ProfileSection,
    pub pump: PumpSection,
    pub grid: GridSection,
    pub modes: ModesSection,
    pub output: OutputSection,
    pub simulate: SimulateSection,
    pub analysis: AnalysisSection,
    pub rates: RatesSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSection {
    /// Built-in glass name or path to a Sellmeier file.
    pub glass: String,
    pub cladding_index: f64,
    /// Glass for the cladding; overrides `cladding_index` when set.
    pub cladding_glass: Option<String>,
}

impl Default for FiberSection {
    fn default() -> Self {
        FiberSection {
            glass: "fused_silica".into(),
            cladding_index: 1.0,
            cladding_glass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    /// Two-column `z_m diameter_m` file. Exclusive with `uniform_diameter_nm`.
    pub path: Option<PathBuf>,
    pub uniform_diameter_nm: Option<f64>,
    /// Only used with `uniform_diameter_nm`.
    pub length_mm: f64,
    pub segments: usize,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            path: None,
            uniform_diameter_nm: None,
            length_mm: 14.0,
            segments: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSection {
    pub wavelength_nm: f64,
    /// Spectral intensity FWHM.
    pub fwhm_nm: f64,
    pub pulse_duration_ps: f64,
    pub rep_rate_mhz: f64,
    pub avg_power_mw: f64,
    /// Derive the duration from the bandwidth instead of `pulse_duration_ps`.
    pub transform_limited: bool,
    pub method: PumpMethod,
}

impl Default for PumpSection {
    fn default() -> Self {
        PumpSection {
            wavelength_nm: 1062.0,
            fwhm_nm: 2.0,
            pulse_duration_ps: 100.0,
            rep_rate_mhz: 18.0,
            avg_power_mw: 118.0,
            transform_limited: false,
            method: PumpMethod::Numeric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub signal_nm: [f64; 2],
    pub idler_nm: [f64; 2],
    pub signal_points: usize,
    pub idler_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            signal_nm: [850.0, 950.0],
            idler_nm: [1250.0, 1400.0],
            signal_points: 256,
            idler_points: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub pump: ModeLabel,
    pub signal: ModeLabel,
    pub idler: ModeLabel,
    pub overlap: OverlapMode,
    /// `modes` command: waist diameter; falls back to `profile.uniform_diameter_nm`.
    pub diameter_nm: Option<f64>,
    pub wavelength_nm: [f64; 2],
    pub points: usize,
    pub labels: Vec<ModeLabel>,
}

impl Default for ModesSection {
    fn default() -> Self {
        ModesSection {
            pump: ModeLabel::HE11,
            signal: ModeLabel::HE11,
            idler: ModeLabel::HE11,
            overlap: OverlapMode::PerPoint,
            diameter_nm: None,
            wavelength_nm: [800.0, 1400.0],
            points: 61,
            labels: vec![ModeLabel::HE11],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagFormat {
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: GridFormat,
    pub tags_format: TagFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            format: GridFormat::Both,
            tags_format: TagFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub rep_period_ns: f64,
    pub pulses: u64,
    pub mu: f64,
    pub statistics: PairStatistics,
    pub herald_efficiency: f64,
    pub splitter_ratio: f64,
    pub efficiency_a: f64,
    pub efficiency_b: f64,
    /// Channels 1, 2, 3.
    pub dark_rates_hz: [f64; 3],
    pub dead_time_us: f64,
    pub jitter_ps: f64,
    pub tick_ps: f64,
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimulateSection {
            rep_period_ns: d.rep_period * 1e9,
            pulses: d.pulses,
            mu: d.mu,
            statistics: d.statistics,
            herald_efficiency: d.herald_efficiency,
            splitter_ratio: d.splitter_ratio,
            efficiency_a: d.efficiency_a,
            efficiency_b: d.efficiency_b,
            dark_rates_hz: d.dark_rates,
            dead_time_us: d.dead_time * 1e6,
            jitter_ps: d.jitter * 1e12,
            tick_ps: d.tick_fs as f64 / 1000.0,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Tag file (text or TTAG1 binary) for `coincidences` and `g2h`.
    pub input: Option<PathBuf>,
    pub channels: Vec<u8>,
    /// Coincidence delays are `t_stop − t_start`.
    pub start_channel: u8,
    pub stop_channel: u8,
    pub herald_channel: u8,
    pub channel_a: u8,
    pub channel_b: u8,
    pub bin_ticks: u64,
    /// Must be a multiple of `bin_ticks`.
    pub range_ticks: u64,
    pub window_ticks: u64,
    /// Overrides the period stored in the stream.
    pub rep_period_ticks: Option<f64>,
    pub m_max: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            input: None,
            channels: vec![1, 2, 3],
            start_channel: 2,
            stop_channel: 1,
            herald_channel: 2,
            channel_a: 1,
            channel_b: 3,
            bin_ticks: 10,
            range_ticks: 2000,
            window_ticks: 10,
            rep_period_ticks: None,
            m_max: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingKind {
    Unweighted,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesSection {
    /// Pairs per pump photon pair interaction (calibration input).
    pub efficiency: f64,
    /// Quoted photons per pulse; when absent, `E_pulse/ħω` of the pump.
    pub photons_per_pulse: Option<f64>,
    /// A single quoted loss, reported under both readings.
    pub quoted_loss_db: f64,
    /// Explicit path losses including detectors; both or neither.
    pub signal_db: Option<f64>,
    pub idler_db: Option<f64>,
    pub signal_detector_efficiency: f64,
    pub idler_detector_efficiency: f64,
    /// `power_mW,rate_Hz` CSV for `tags fit-power`.
    pub power_scan: Option<PathBuf>,
    pub weighting: WeightingKind,
    pub integration_time_s: f64,
    /// Powers (mW) at which the fitted curves are sampled.
    pub curve_points: usize,
}

impl Default for RatesSection {
    fn default() -> Self {
        RatesSection {
            efficiency: fiberpair::rates::DEFAULT_EFFICIENCY,
            photons_per_pulse: Some(2.67e8),
            quoted_loss_db: -17.0,
            signal_db: None,
            idler_db: None,
            signal_detector_efficiency: fiberpair::rates::LossBudget::DEFAULT_SIGNAL_DETECTOR,
            idler_detector_efficiency: fiberpair::rates::LossBudget::DEFAULT_IDLER_DETECTOR,
            power_scan: None,
            weighting: WeightingKind::Unweighted,
            integration_time_s: 1.0,
            curve_points: 101,
        }
    }
}

/// Parses an override value as a TOML value, falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Splits `--section.key value` / `--section.key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            return Err(CliError::Config(format!(
                "unexpected argument '{a}' (overrides look like --section.key value)"
            )));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("override --{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        if key.split('.').count() != 2 || key.split('.').any(str::is_empty) {
            return Err(CliError::Config(format!(
                "override --{key} must name section.key"
            )));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Keys holding file paths; relative values in a config file resolve
/// against the file's directory.
const PATH_KEYS: [(&str, &str); 6] = [
    ("profile", "path"),
    ("analysis", "input"),
    ("rates", "power_scan"),
    ("output", "dir"),
    ("fiber", "glass"),
    ("fiber", "cladding_glass"),
];

impl RunConfig {
    /// Parses a document, applies overrides, then validates field names and types.
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> Result<Self, CliError> {
        Self::parse_in(text, None, overrides)
    }

    fn parse_in(text: &str, base: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config: {e}")))?;
        if let Some(base) = base {
            for (section, key) in PATH_KEYS {
                let Some(toml::Value::Table(sec)) = table.get_mut(section) else {
                    continue;
                };
                if let Some(toml::Value::String(v)) = sec.get_mut(key) {
                    let builtin = section == "fiber" && SellmeierGlass::builtin(v).is_some();
                    if !builtin && Path::new(v.as_str()).is_relative() {
                        *v = base.join(&*v).to_string_lossy().into_owned();
                    }
                }
            }
        }
        for (key, raw) in overrides {
            let (section, field) = key.split_once('.').expect("checked by parse_overrides");
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(sec) = entry else {
                return Err(CliError::Config(format!("config: '{section}' is not a section")));
            };
            sec.insert(field.to_string(), override_value(raw));
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config: {e}")))
    }

    /// Reads a config file. Paths in the file are relative to it; paths in
    /// overrides are relative to the working directory.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Self::from_toml("", overrides);
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_in(&text, Some(path.parent().unwrap_or(Path::new(""))), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn glass(name: &str) -> Result<SellmeierGlass, CliError> {
        match SellmeierGlass::builtin(name) {
            Some(g) => Ok(g),
            None => SellmeierGlass::load(name).map_err(|e| CliError::input(name, e)),
        }
    }

    pub fn core_glass(&self) -> Result<SellmeierGlass, CliError> {
        Self::glass(&self.fiber.glass)
    }

    pub fn cladding(&self) -> Result<CladdingModel, CliError> {
        match &self.fiber.cladding_glass {
            Some(g) => Ok(CladdingModel::Glass(Self::glass(g)?)),
            None => {
                let n = self.fiber.cladding_index;
                if !(n >= 1.0 && n.is_finite()) {
                    return Err(CliError::Config(format!("fiber.cladding_index {n} must be >= 1")));
                }
                Ok(CladdingModel::Constant { index: n })
            }
        }
    }

    pub fn cross_section(&self, diameter: f64) -> Result<CrossSection, CliError> {
        Ok(CrossSection::new(diameter, self.core_glass()?, self.cladding()?)?)
    }

    pub fn taper(&self) -> Result<TaperProfile, CliError> {
        let p = &self.profile;
        match (&p.path, p.uniform_diameter_nm) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "profile: set either path or uniform_diameter_nm, not both".into(),
            )),
            (None, None) => Err(CliError::Config(
                "profile: set path or uniform_diameter_nm".into(),
            )),
            (Some(path), None) => TaperProfile::load(path).map_err(|e| CliError::input(path, e)),
            (None, Some(d)) => {
                let label = format!("uniform_{d}nm_{}mm", p.length_mm);
                Ok(TaperProfile::uniform(label, d * 1e-9, p.length_mm * 1e-3)?)
            }
        }
    }

    pub fn segmented(&self) -> Result<SegmentedProfile, CliError> {
        let t = self.taper()?;
        Ok(t.segment_with(self.profile.segments, &self.core_glass()?, &self.cladding()?)?)
    }

    pub fn pump(&self) -> Result<PumpSpec, CliError> {
        let p = &self.pump;
        let lambda0 = p.wavelength_nm * 1e-9;
        let spec = PumpSpec::from_spectral_fwhm(
            lambda0,
            p.fwhm_nm * 1e-9,
            p.pulse_duration_ps * 1e-12,
            p.rep_rate_mhz * 1e6,
            p.avg_power_mw * 1e-3,
        )?;
        if p.transform_limited {
            Ok(PumpSpec::transform_limited(
                lambda0,
                spec.sigma,
                spec.rep_rate,
                spec.avg_power,
            )?)
        } else {
            Ok(spec)
        }
    }

    pub fn grid(&self) -> Result<SpectralGrid, CliError> {
        let g = &self.grid;
        Ok(SpectralGrid::from_wavelength_windows(
            (g.signal_nm[0] * 1e-9, g.signal_nm[1] * 1e-9),
            (g.idler_nm[0] * 1e-9, g.idler_nm[1] * 1e-9),
            g.signal_points,
            g.idler_points,
        )?)
    }

    pub fn mode_set(&self) -> ModeSet {
        ModeSet {
            pump: self.modes.pump,
            signal: self.modes.signal,
            idler: self.modes.idler,
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let s = &self.simulate;
        let tick_fs = (s.tick_ps * 1000.0).round();
        if !(tick_fs >= 1.0 && tick_fs <= u32::MAX as f64) {
            return Err(CliError::Config(format!(
                "simulate.tick_ps {} out of range",
                s.tick_ps
            )));
        }
        let c = SimConfig {
            rep_period: s.rep_period_ns * 1e-9,
            pulses: s.pulses,
            mu: s.mu,
            statistics: s.statistics,
            herald_efficiency: s.herald_efficiency,
            splitter_ratio: s.splitter_ratio,
            efficiency_a: s.efficiency_a,
            efficiency_b: s.efficiency_b,
            dark_rates: s.dark_rates_hz,
            dead_time: s.dead_time_us * 1e-6,
            jitter: s.jitter_ps * 1e-12,
            tick_fs: tick_fs as u32,
            seed: s.seed,
        };
        c.validate()?;
        Ok(c)
    }
}
