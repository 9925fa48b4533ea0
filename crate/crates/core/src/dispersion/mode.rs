use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::glass::{CladdingModel, SellmeierGlass};
use crate::special::{bessel_j_upto, bessel_k_scaled_upto, gauss_legendre};
use crate::units::{wavelength_from_omega, C};
use crate::{Error, Result};

/// Number of points in the bracketing scan between cladding and core index.
pub const SCAN_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeFamily {
    HE,
    EH,
    TE,
    TM,
}

/// `family` + azimuthal order `m` + radial order `n`, e.g. HE11, TE01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub family: ModeFamily,
    pub azimuthal: u32,
    pub radial: u32,
}

impl ModeLabel {
    pub const HE11: ModeLabel = ModeLabel {
        family: ModeFamily::HE,
        azimuthal: 1,
        radial: 1,
    };

    pub fn new(family: ModeFamily, azimuthal: u32, radial: u32) -> Result<Self> {
        if radial == 0 {
            return Err(Error::invalid("radial order starts at 1"));
        }
        match family {
            ModeFamily::TE | ModeFamily::TM if azimuthal != 0 => {
                Err(Error::invalid(format!("{family:?} modes have azimuthal order 0")))
            }
            ModeFamily::HE | ModeFamily::EH if azimuthal == 0 => Err(Error::invalid(format!(
                "{family:?} modes have azimuthal order >= 1"
            ))),
            _ => Ok(ModeLabel {
                family,
                azimuthal,
                radial,
            }),
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            ModeFamily::HE => "HE",
            ModeFamily::EH => "EH",
            ModeFamily::TE => "TE",
            ModeFamily::TM => "TM",
        };
        if self.azimuthal < 10 && self.radial < 10 {
            write!(f, "{fam}{}{}", self.azimuthal, self.radial)
        } else {
            write!(f, "{fam}{},{}", self.azimuthal, self.radial)
        }
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    /// Accepts `HE11`, `TE01`, or `HE12,3` for multi-digit orders.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("bad mode label '{s}'"));
        if s.len() < 4 || !s.is_char_boundary(2) {
            return Err(bad());
        }
        let family = match &s[..2].to_ascii_uppercase()[..] {
            "HE" => ModeFamily::HE,
            "EH" => ModeFamily::EH,
            "TE" => ModeFamily::TE,
            "TM" => ModeFamily::TM,
            _ => return Err(bad()),
        };
        let rest = &s[2..];
        let (m, n) = if let Some((m, n)) = rest.split_once(',') {
            (m.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?)
        } else if rest.len() == 2 && rest.bytes().all(|b| b.is_ascii_digit()) {
            (
                (rest.as_bytes()[0] - b'0') as u32,
                (rest.as_bytes()[1] - b'0') as u32,
            )
        } else {
            return Err(bad());
        };
        ModeLabel::new(family, m, n)
    }
}

impl Serialize for ModeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One circular cross-section of the waist: glass core in a uniform cladding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection {
    /// m
    pub diameter: f64,
    pub core: SellmeierGlass,
    pub cladding: CladdingModel,
}

impl CrossSection {
    pub fn new(diameter: f64, core: SellmeierGlass, cladding: CladdingModel) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::invalid(format!("diameter {diameter} must be > 0")));
        }
        Ok(CrossSection {
            diameter,
            core,
            cladding,
        })
    }

    /// Fused-silica rod in air.
    pub fn silica_in_air(diameter: f64) -> Result<Self> {
        Self::new(diameter, SellmeierGlass::fused_silica(), CladdingModel::AIR)
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// `(core, cladding)` indices at `omega`, enforcing the guidance condition.
    pub fn indices(&self, omega: f64) -> Result<(f64, f64)> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!("omega = {omega} must be > 0")));
        }
        let lambda = wavelength_from_omega(omega);
        let n1 = self.core.index(lambda)?;
        let n0 = self.cladding.index(lambda)?;
        if !(n1 > n0) {
            return Err(Error::domain(format!(
                "guidance condition fails at {:.3} nm: core {n1} <= cladding {n0}",
                lambda * 1e9
            )));
        }
        Ok((n1, n0))
    }

    pub fn v_number(&self, omega: f64) -> Result<f64> {
        let (n1, n0) = self.indices(omega)?;
        Ok(omega / C * self.radius() * (n1 * n1 - n0 * n0).sqrt())
    }
}

/// Waveguide parameters frozen at one frequency.
#[derive(Debug, Clone, Copy)]
struct Guide {
    a: f64,
    k0: f64,
    n1: f64,
    n0: f64,
}

impl Guide {
    fn at(cs: &CrossSection, omega: f64) -> Result<Guide> {
        let (n1, n0) = cs.indices(omega)?;
        Ok(Guide {
            a: cs.radius(),
            k0: omega / C,
            n1,
            n0,
        })
    }

    fn uw(&self, neff: f64) -> (f64, f64) {
        let ka = self.k0 * self.a;
        let u = ka * (self.n1 * self.n1 - neff * neff).max(0.0).sqrt();
        let w = ka * (neff * neff - self.n0 * self.n0).max(0.0).sqrt();
        (u, w)
    }
}

/// Pole-free characteristic function and its local magnitude scale.
///
/// Hybrid modes use the explicit root of the quadratic in `J'_ν/(uJ_ν)`,
/// multiplied through by `J_ν(u)`; the lower branch is HE, the upper EH.
fn characteristic(g: &Guide, label: ModeLabel, neff: f64) -> (f64, f64) {
    let (u, w) = g.uw(neff);
    let nu = label.azimuthal as usize;
    match label.family {
        ModeFamily::TE | ModeFamily::TM => {
            let j = bessel_j_upto(1, u);
            let k = bessel_k_scaled_upto(1, w);
            let kr = k[1] / (w * k[0]);
            let (c1, c0) = if label.family == ModeFamily::TE {
                (1.0, 1.0)
            } else {
                (g.n1 * g.n1, g.n0 * g.n0)
            };
            let lhs = c1 * j[1] / u;
            let rhs = c0 * j[0] * kr;
            (lhs + rhs, lhs.abs() + rhs.abs())
        }
        ModeFamily::HE | ModeFamily::EH => {
            let j = bessel_j_upto(nu + 1, u);
            let k = bessel_k_scaled_upto(nu, w);
            let nuf = nu as f64;
            let jnu = j[nu];
            let jp = j[nu - 1] - nuf / u * jnu;
            let kr = -k[nu - 1] / (w * k[nu]) - nuf / (w * w);
            let r = (g.n0 / g.n1).powi(2);
            let big_r = (1.0 / (u * u) + 1.0 / (w * w)) * (1.0 / (u * u) + r / (w * w));
            let disc = ((0.5 * (1.0 - r) * kr).powi(2) + nuf * nuf * big_r).sqrt();
            let x = if label.family == ModeFamily::HE {
                -0.5 * (1.0 + r) * kr - disc
            } else {
                -0.5 * (1.0 + r) * kr + disc
            };
            let lhs = jp / u;
            let rhs = x * jnu;
            (lhs - rhs, lhs.abs() + rhs.abs())
        }
    }
}

/// Characteristic-equation value and local scale at a trial `neff`.
pub fn characteristic_residual(
    cs: &CrossSection,
    omega: f64,
    label: ModeLabel,
    neff: f64,
) -> Result<(f64, f64)> {
    let g = Guide::at(cs, omega)?;
    if !(neff > g.n0 && neff < g.n1) {
        return Err(Error::domain(format!("neff {neff} outside ({}, {})", g.n0, g.n1)));
    }
    Ok(characteristic(&g, label, neff))
}

fn scan_point(g: &Guide, i: usize) -> f64 {
    const EDGE: f64 = 1e-9;
    let s = if i == 0 {
        1.0 - EDGE
    } else if i == SCAN_POINTS {
        EDGE
    } else {
        1.0 - i as f64 / SCAN_POINTS as f64
    };
    g.n0 + (g.n1 - g.n0) * s
}

fn find_root(g: &Guide, label: ModeLabel) -> Option<f64> {
    let f = |n: f64| characteristic(g, label, n).0;
    let mut hi = scan_point(g, 0);
    let mut fhi = f(hi);
    let mut seen = 0u32;
    for i in 1..=SCAN_POINTS {
        let lo = scan_point(g, i);
        let flo = f(lo);
        if flo == 0.0 {
            seen += 1;
            if seen == label.radial {
                return Some(lo);
            }
        } else if fhi != 0.0 && flo.signum() != fhi.signum() {
            seen += 1;
            if seen == label.radial {
                return Some(bisect(&f, lo, hi, flo));
            }
        }
        hi = lo;
        fhi = flo;
    }
    None
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let slo = flo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Which transverse quantity the stored radial profile represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// Azimuthal RMS of the dominant Cartesian component (HE1m/EH1m, TE, TM).
    DominantComponent,
    /// Azimuthally averaged transverse intensity (hybrid modes with ν ≥ 2).
    TransverseIntensity,
}

/// Normalised radial profile `u(ρ)` of one guided mode, `∫|u|² d²ρ = 1`.
#[derive(Debug, Clone)]
pub struct ModeField {
    a: f64,
    u: f64,
    w: f64,
    nu: usize,
    family: ModeFamily,
    a1: f64,
    a2: f64,
    /// n1²/n0², TM only
    eps_ratio: f64,
    inv_jnu: f64,
    inv_knu_scaled: f64,
    norm: f64,
    model: FieldModel,
}

impl ModeField {
    fn build(g: &Guide, label: ModeLabel, neff: f64) -> ModeField {
        let (u, w) = g.uw(neff);
        let nu = label.azimuthal as usize;
        let (a1, a2, inv_jnu, inv_knu_scaled) = match label.family {
            ModeFamily::TE | ModeFamily::TM => {
                let j = bessel_j_upto(1, u);
                let k = bessel_k_scaled_upto(1, w);
                (0.0, 0.0, 1.0 / j[1], 1.0 / k[1])
            }
            ModeFamily::HE | ModeFamily::EH => {
                let j = bessel_j_upto(nu + 1, u);
                let k = bessel_k_scaled_upto(nu + 1, w);
                let v2 = u * u + w * w;
                let b1 = (j[nu - 1] - j[nu + 1]) / (2.0 * u * j[nu]);
                let b2 = -(k[nu - 1] + k[nu + 1]) / (2.0 * w * k[nu]);
                let f2 = v2 / (u * u * w * w) * nu as f64 / (b1 + b2);
                (0.5 * (f2 - 1.0), 0.5 * (f2 + 1.0), 1.0 / j[nu], 1.0 / k[nu])
            }
        };
        let model = if matches!(label.family, ModeFamily::HE | ModeFamily::EH) && nu >= 2 {
            FieldModel::TransverseIntensity
        } else {
            FieldModel::DominantComponent
        };
        let mut field = ModeField {
            a: g.a,
            u,
            w,
            nu,
            family: label.family,
            a1,
            a2,
            eps_ratio: (g.n1 / g.n0).powi(2),
            inv_jnu,
            inv_knu_scaled,
            norm: 1.0,
            model,
        };
        let quad = RadialQuadrature::new(g.a, w);
        let power: f64 = quad.integrate(|rho| field.intensity_unnormalised(rho));
        field.norm = 1.0 / power.sqrt();
        field
    }

    /// Transverse components at normalised radius `r = ρ/a` (Snyder & Love
    /// amplitudes): `(e_r, e_φ)` amplitudes of the azimuthal harmonics.
    fn components(&self, r: f64) -> (f64, f64) {
        let nu = self.nu;
        if r < 1.0 {
            let x = self.u * r;
            match self.family {
                ModeFamily::TE | ModeFamily::TM => {
                    let j = bessel_j_upto(1, x);
                    let e = j[1] * self.inv_jnu;
                    if self.family == ModeFamily::TE {
                        (0.0, e)
                    } else {
                        (e, 0.0)
                    }
                }
                _ => {
                    let j = bessel_j_upto(nu + 1, x);
                    let er = -(self.a1 * j[nu - 1] + self.a2 * j[nu + 1]) * self.inv_jnu;
                    let ep = -(self.a1 * j[nu - 1] - self.a2 * j[nu + 1]) * self.inv_jnu;
                    (er, ep)
                }
            }
        } else {
            let x = self.w * r;
            let decay = (-self.w * (r - 1.0)).exp();
            match self.family {
                ModeFamily::TE | ModeFamily::TM => {
                    let k = bessel_k_scaled_upto(1, x);
                    let e = k[1] * self.inv_knu_scaled * decay;
                    if self.family == ModeFamily::TE {
                        (0.0, e)
                    } else {
                        (self.eps_ratio * e, 0.0)
                    }
                }
                _ => {
                    let k = bessel_k_scaled_upto(nu + 1, x);
                    let s = self.u / self.w * self.inv_knu_scaled * decay;
                    let er = -(self.a1 * k[nu - 1] - self.a2 * k[nu + 1]) * s;
                    let ep = -(self.a1 * k[nu - 1] + self.a2 * k[nu + 1]) * s;
                    (er, ep)
                }
            }
        }
    }

    fn intensity_unnormalised(&self, rho: f64) -> f64 {
        let r = rho / self.a;
        let (er, ep) = self.components(r);
        match (self.family, self.nu) {
            (ModeFamily::TE, _) => ep * ep,
            (ModeFamily::TM, _) => er * er,
            (_, 1) => {
                // e_x = c0 + c2 cos 2φ with c0 = (e_r + e_φ)/2, c2 = (e_r - e_φ)/2
                let c0 = 0.5 * (er + ep);
                let c2 = 0.5 * (er - ep);
                c0 * c0 + 0.5 * c2 * c2
            }
            _ => 0.5 * (er * er + ep * ep),
        }
    }

    /// `u(ρ)` in m⁻¹.
    pub fn value(&self, rho: f64) -> f64 {
        self.norm * self.intensity_unnormalised(rho).sqrt()
    }

    /// Radial e_r and e_φ harmonic amplitudes at `ρ`, unnormalised.
    pub fn transverse_components(&self, rho: f64) -> (f64, f64) {
        self.components(rho / self.a)
    }

    pub fn model(&self) -> FieldModel {
        self.model
    }

    pub fn core_radius(&self) -> f64 {
        self.a
    }

    /// Modal parameters `(U, W)`.
    pub fn uw(&self) -> (f64, f64) {
        (self.u, self.w)
    }

    /// Radial samples `(ρ, u(ρ))`: 48 points over the core, 48 over the
    /// cladding out to where `|u|²` has fallen by `e^-40`.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(96);
        for i in 0..48 {
            let rho = self.a * i as f64 / 48.0;
            out.push((rho, self.value(rho)));
        }
        let outer = 1.0 + 20.0 / self.w.max(1e-3);
        for i in 0..48 {
            let r = 1.0 + (outer - 1.0) * i as f64 / 47.0;
            let rho = self.a * r;
            out.push((rho, self.value(rho)));
        }
        out
    }
}

/// Composite Gauss–Legendre rule for `∫ f(ρ) d²ρ` over the plane with
/// azimuthal symmetry; weights include the `2πρ` Jacobian.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialQuadrature {
    /// Rule adapted to core radius `a` and the slowest cladding decay `w_min`
    /// (normalised decay constant W).
    pub fn new(a: f64, w_min: f64) -> Self {
        let w = w_min.max(1e-6);
        let mut edges = vec![0.0, 0.5, 1.0];
        let core_panels = 2;
        let mut e = 1.0;
        while w * (e - 1.0) < 1.0 && e < 1.0 + 1.0 / w {
            e *= 2.0;
            edges.push(e);
        }
        if edges.len() == 3 {
            e = 1.0 + 1.0 / w;
            edges.push(e);
        }
        while w * (e - 1.0) < 22.0 {
            e += 2.0 / w;
            edges.push(e);
        }
        let (x12, w12) = gauss_legendre(12);
        let (x10, w10) = gauss_legendre(10);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (p, pair) in edges.windows(2).enumerate() {
            let (lo, hi) = (pair[0] * a, pair[1] * a);
            let (xs, ws) = if p < core_panels {
                (&x12, &w12)
            } else {
                (&x10, &w10)
            };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in xs.iter().zip(ws) {
                let rho = mid + half * x;
                nodes.push(rho);
                weights.push(wt * half * 2.0 * std::f64::consts::PI * rho);
            }
        }
        RadialQuadrature { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }
}

/// A solved guided mode at one cross-section and frequency.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub label: ModeLabel,
    /// rad/s
    pub omega: f64,
    pub n_eff: f64,
    /// rad/m, exactly `omega * n_eff / c`
    pub beta: f64,
    pub cross_section: CrossSection,
    pub field: ModeField,
}

impl ModeSolution {
    /// Builds the solution (field included) from an already known `n_eff`.
    pub fn from_neff(cs: &CrossSection, omega: f64, label: ModeLabel, n_eff: f64) -> Result<Self> {
        let g = Guide::at(cs, omega)?;
        if !(n_eff > g.n0 && n_eff < g.n1) {
            return Err(Error::domain(format!(
                "neff {n_eff} outside ({}, {}) for {label}",
                g.n0, g.n1
            )));
        }
        Ok(ModeSolution {
            label,
            omega,
            n_eff,
            beta: omega * n_eff / C,
            cross_section: cs.clone(),
            field: ModeField::build(&g, label, n_eff),
        })
    }
}

/// Effective index only: the bracketing scan plus bisection of [`solve_mode`]
/// without assembling the field.
pub fn solve_neff(cs: &CrossSection, omega: f64, label: ModeLabel) -> Result<f64> {
    let g = Guide::at(cs, omega)?;
    find_root(&g, label).ok_or_else(|| Error::NoGuidedMode {
        label: label.to_string(),
        omega,
        diameter: cs.diameter,
    })
}

/// Solves the full-vector eigenvalue equation of a two-layer circular
/// step-index guide for the requested mode.
pub fn solve_mode(cs: &CrossSection, omega: f64, label: ModeLabel) -> Result<ModeSolution> {
    let neff = solve_neff(cs, omega, label)?;
    ModeSolution::from_neff(cs, omega, label, neff)
}

/// `d n_eff / d omega` at a root, by implicit differentiation of the
/// characteristic function.
pub(crate) fn neff_slope(cs: &CrossSection, omega: f64, label: ModeLabel, neff: f64) -> Result<f64> {
    let g = Guide::at(cs, omega)?;
    let dn = 1e-7 * (g.n1 - g.n0);
    let dw = 1e-6 * omega;
    let f = |g: &Guide, n: f64| characteristic(g, label, n).0;
    let g_n = (f(&g, neff + dn) - f(&g, neff - dn)) / (2.0 * dn);
    let gp = Guide::at(cs, omega + dw)?;
    let gm = Guide::at(cs, omega - dw)?;
    let g_w = (f(&gp, neff) - f(&gm, neff)) / (2.0 * dw);
    if g_n == 0.0 || !g_n.is_finite() || !g_w.is_finite() {
        return Err(Error::NoConvergence(format!(
            "degenerate slope for {label} at omega {omega:.6e}"
        )));
    }
    Ok(-g_w / g_n)
}
