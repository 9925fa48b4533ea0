use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SellmeierTerm {
    /// Oscillator strength, dimensionless.
    pub b: f64,
    /// Resonance wavelength squared, μm².
    pub c_um2: f64,
}

/// `n²(λ) = 1 + Σ_j B_j λ² / (λ² − C_j)` with λ in μm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SellmeierGlass {
    name: String,
    terms: Vec<SellmeierTerm>,
    validity_um: (f64, f64),
}

impl SellmeierGlass {
    pub fn new(name: impl Into<String>, terms: Vec<SellmeierTerm>, validity_um: (f64, f64)) -> Result<Self> {
        let name = name.into();
        if terms.is_empty() {
            return Err(Error::invalid(format!("glass '{name}': no Sellmeier terms")));
        }
        for (j, t) in terms.iter().enumerate() {
            // B = 0 is allowed: the term is inert
            if !(t.b >= 0.0 && t.b.is_finite()) {
                return Err(Error::invalid(format!(
                    "glass '{name}': B[{j}] = {} must be >= 0",
                    t.b
                )));
            }
            if !(t.c_um2 > 0.0 && t.c_um2.is_finite()) {
                return Err(Error::invalid(format!(
                    "glass '{name}': C[{j}] = {} must be > 0",
                    t.c_um2
                )));
            }
        }
        let (lo, hi) = validity_um;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "glass '{name}': validity interval [{lo}, {hi}] um is empty or non-positive"
            )));
        }
        for (j, t) in terms.iter().enumerate() {
            let res = t.c_um2.sqrt();
            if t.b > 0.0 && res >= lo && res <= hi {
                return Err(Error::invalid(format!(
                    "glass '{name}': resonance {j} at {res} um lies inside the validity interval"
                )));
            }
        }
        Ok(SellmeierGlass {
            name,
            terms,
            validity_um,
        })
    }

    /// Fused silica, Malitson (1965), valid 0.21–6.7 μm.
    pub fn fused_silica() -> Self {
        let terms = [
            (0.696_166_3, 0.068_404_3),
            (0.407_942_6, 0.116_241_4),
            (0.897_479_4, 9.896_161),
        ]
        .into_iter()
        .map(|(b, lam): (f64, f64)| SellmeierTerm { b, c_um2: lam * lam })
        .collect();
        SellmeierGlass::new("fused_silica", terms, (0.21, 6.7)).expect("built-in glass is valid")
    }

    /// Looks up a built-in glass by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "fused_silica" | "silica" | "SiO2" => Some(Self::fused_silica()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &[SellmeierTerm] {
        &self.terms
    }

    /// Validity interval, μm.
    pub fn validity_um(&self) -> (f64, f64) {
        self.validity_um
    }

    /// Refractive index at a vacuum wavelength in metres.
    pub fn index(&self, wavelength: f64) -> Result<f64> {
        let um = wavelength * 1e6;
        let (lo, hi) = self.validity_um;
        if !(um >= lo && um <= hi) {
            return Err(Error::domain(format!(
                "wavelength {um:.6} um outside validity interval [{lo}, {hi}] um of glass '{}'",
                self.name
            )));
        }
        Ok(self.index_unchecked(um))
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, um: f64) -> f64 {
        let l2 = um * um;
        let s: f64 = self.terms.iter().map(|t| t.b * l2 / (l2 - t.c_um2)).sum();
        (1.0 + s).sqrt()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut b = None;
        let mut c = None;
        let mut validity = None;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            last_line = lineno;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::line(lineno, "expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            let slot_taken = |taken: bool| {
                if taken {
                    Err(Error::line(lineno, format!("duplicate key '{key}'")))
                } else {
                    Ok(())
                }
            };
            match key {
                "name" => {
                    slot_taken(name.is_some())?;
                    if value.is_empty() {
                        return Err(Error::line(lineno, "empty glass name"));
                    }
                    name = Some(value.to_string());
                }
                "B" => {
                    slot_taken(b.is_some())?;
                    b = Some(parse_list(value, lineno)?);
                }
                "C" => {
                    slot_taken(c.is_some())?;
                    c = Some(parse_list(value, lineno)?);
                }
                "validity_um" => {
                    slot_taken(validity.is_some())?;
                    let v = parse_list(value, lineno)?;
                    if v.len() != 2 {
                        return Err(Error::line(lineno, "validity_um needs exactly two values"));
                    }
                    validity = Some((v[0], v[1]));
                }
                other => return Err(Error::line(lineno, format!("unknown key '{other}'"))),
            }
        }
        let missing = |k: &str| Error::line(last_line, format!("missing key '{k}'"));
        let name = name.ok_or_else(|| missing("name"))?;
        let b = b.ok_or_else(|| missing("B"))?;
        let c = c.ok_or_else(|| missing("C"))?;
        let validity = validity.ok_or_else(|| missing("validity_um"))?;
        if b.len() != c.len() {
            return Err(Error::invalid(format!(
                "glass '{name}': {} B coefficients but {} C coefficients",
                b.len(),
                c.len()
            )));
        }
        let terms = b
            .into_iter()
            .zip(c)
            .map(|(b, c_um2)| SellmeierTerm { b, c_um2 })
            .collect();
        SellmeierGlass::new(name, terms, validity)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serialises to the key-value glass format; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let list = |v: Vec<f64>| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "B = {}", list(self.terms.iter().map(|t| t.b).collect()));
        let _ = writeln!(s, "C = {}", list(self.terms.iter().map(|t| t.c_um2).collect()));
        let _ = writeln!(
            s,
            "validity_um = {:?}, {:?}",
            self.validity_um.0, self.validity_um.1
        );
        s
    }
}

fn parse_list(value: &str, lineno: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::line(lineno, format!("bad number '{tok}'")))
        })
        .collect()
}

/// Refractive index of a glass at a vacuum wavelength (m).
pub fn refractive_index(glass: &SellmeierGlass, wavelength: f64) -> Result<f64> {
    glass.index(wavelength)
}

/// Index model of the region surrounding the waist.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CladdingModel {
    Constant { index: f64 },
    Glass(SellmeierGlass),
}

impl CladdingModel {
    pub const AIR: CladdingModel = CladdingModel::Constant { index: 1.0 };

    pub fn index(&self, wavelength: f64) -> Result<f64> {
        match self {
            CladdingModel::Constant { index } => Ok(*index),
            CladdingModel::Glass(g) => g.index(wavelength),
        }
    }
}
