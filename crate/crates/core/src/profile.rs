//! Taper geometry: measured diameter-vs-position samples and their split
//! into uniform segments.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dispersion::{CladdingModel, CrossSection, SellmeierGlass};
use crate::{Error, Result};

/// Diameter along the fibre axis, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaperProfile {
    label: String,
    /// `(z, diameter)`, both in metres.
    samples: Vec<(f64, f64)>,
}

impl TaperProfile {
    pub fn new(label: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "profile needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, &(z, d)) in samples.iter().enumerate() {
            if !z.is_finite() || !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!(
                    "sample {}: z = {z}, diameter = {d} (diameter must be > 0)",
                    i + 1
                )));
            }
            if i > 0 && !(z > samples[i - 1].0) {
                return Err(Error::invalid(format!(
                    "sample {}: z = {z} does not increase (previous {})",
                    i + 1,
                    samples[i - 1].0
                )));
            }
        }
        Ok(TaperProfile {
            label: label.into(),
            samples,
        })
    }

    /// Constant diameter `d` over `[0, length]`.
    pub fn uniform(label: impl Into<String>, diameter: f64, length: f64) -> Result<Self> {
        Self::new(label, vec![(0.0, diameter), (length, diameter)])
    }

    /// Parses the two-column text format: `z diameter` per line (metres),
    /// `#` starts a comment.
    pub fn parse(label: impl Into<String>, text: &str) -> Result<Self> {
        let mut samples: Vec<(f64, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(zs), Some(ds), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::line(lineno, "expected two columns: z_m diameter_m"));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::line(lineno, format!("bad number '{s}'")))
            };
            let z = num(zs)?;
            let d = num(ds)?;
            if !(d > 0.0) {
                return Err(Error::line(lineno, format!("diameter {d} must be > 0")));
            }
            if let Some(&(zp, _)) = samples.last() {
                if z == zp {
                    return Err(Error::line(lineno, format!("duplicate z = {z}")));
                }
                if z < zp {
                    return Err(Error::line(
                        lineno,
                        format!("z = {z} decreases (previous sample at {zp}); z must be strictly increasing"),
                    ));
                }
            }
            samples.push((z, d));
        }
        if samples.is_empty() {
            return Err(Error::invalid("profile contains no samples"));
        }
        Self::new(label, samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(label, &std::fs::read_to_string(path)?)
    }

    /// Text form accepted by [`TaperProfile::parse`]; round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# z_m diameter_m\n");
        for (z, d) in &self.samples {
            let _ = writeln!(s, "{z:?} {d:?}");
        }
        s
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// `(z_first, z_last)`.
    pub fn z_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn span(&self) -> f64 {
        let (a, b) = self.z_range();
        b - a
    }

    /// `(min, max)` sample diameter.
    pub fn diameter_range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, d)| {
                (lo.min(d), hi.max(d))
            })
    }

    /// Linear interpolation, clamped to the end samples outside the range.
    pub fn diameter_at(&self, z: f64) -> f64 {
        let s = &self.samples;
        if z <= s[0].0 {
            return s[0].1;
        }
        if z >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let k = s.partition_point(|&(zk, _)| zk <= z) - 1;
        let (z0, d0) = s[k];
        let (z1, d1) = s[k + 1];
        if d0 == d1 {
            return d0;
        }
        let t = (z - z0) / (z1 - z0);
        (d0 + t * (d1 - d0)).clamp(d0.min(d1), d0.max(d1))
    }

    /// SHA-256 over the little-endian bit patterns of all samples, hex.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (z, d) in &self.samples {
            h.update(z.to_le_bytes());
            h.update(d.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `n` equal segments of fused silica in air.
    pub fn segment(&self, n: usize) -> Result<SegmentedProfile> {
        self.segment_with(n, &SellmeierGlass::fused_silica(), &CladdingModel::AIR)
    }

    /// `n` equal segments; each takes the diameter at its midpoint.
    pub fn segment_with(
        &self,
        n: usize,
        core: &SellmeierGlass,
        cladding: &CladdingModel,
    ) -> Result<SegmentedProfile> {
        if n == 0 {
            return Err(Error::invalid("segment count must be >= 1"));
        }
        let (z0, _) = self.z_range();
        let l = self.span() / n as f64;
        let segments = (0..n)
            .map(|q| {
                let zm = z0 + (q as f64 + 0.5) * l;
                CrossSection::new(self.diameter_at(zm), core.clone(), cladding.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SegmentedProfile {
            segment_length: l,
            segments,
            profile_hash: self.hash(),
        })
    }
}

/// Uniform split of a profile: `N` cross-sections of length `l` each.
#[derive(Debug, Clone)]
pub struct SegmentedProfile {
    /// m
    pub segment_length: f64,
    pub segments: Vec<CrossSection>,
    /// Hash of the source profile.
    pub profile_hash: String,
}

impl SegmentedProfile {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total length `N·l`.
    pub fn length(&self) -> f64 {
        self.segment_length * self.segments.len() as f64
    }

    pub fn diameters(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.diameter).collect()
    }
}
