//! CSV and JSON writers for spectral grids. Layouts are described in
//! `docs/formats.md`.

use std::io::{self, Write};

use ndarray::Array2;
use serde_json::{json, Value};

use super::grid::SpectralGrid;
use super::jsa::{JsaGrid, JsaMetadata, Marginals};
use super::schmidt::SchmidtReport;
use crate::units::wavelength_from_omega;
use crate::SCHEMA_VERSION;

fn row<W: Write>(w: &mut W, head: &str, values: impl Iterator<Item = f64>) -> io::Result<()> {
    write!(w, "{head}")?;
    for v in values {
        write!(w, ",{v:.12e}")?;
    }
    writeln!(w)
}

/// Real matrix over a grid: comment line, idler axis row, signal axis row,
/// then one line per signal frequency.
pub fn write_grid_csv<W: Write>(
    w: &mut W,
    grid: &SpectralGrid,
    quantity: &str,
    values: &Array2<f64>,
    scale: f64,
) -> io::Result<()> {
    writeln!(
        w,
        "# fiberpair schema {SCHEMA_VERSION} quantity {quantity} scale {scale:.12e}"
    )?;
    row(w, "idler_omega_rad_s", grid.idler().iter().copied())?;
    row(w, "signal_omega_rad_s", grid.signal().iter().copied())?;
    for r in values.rows() {
        let mut first = true;
        for v in r {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v:.12e}")?;
            first = false;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn matrix(values: &Array2<f64>) -> Value {
    Value::Array(values.rows().into_iter().map(|r| json!(r.to_vec())).collect())
}

/// Real matrix with axes and metadata.
pub fn grid_json(
    grid: &SpectralGrid,
    quantity: &str,
    values: &Array2<f64>,
    scale: f64,
    metadata: &JsaMetadata,
) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "quantity": quantity,
        "scale": scale,
        "signal_omega_rad_s": grid.signal(),
        "idler_omega_rad_s": grid.idler(),
        "values": matrix(values),
        "metadata": metadata,
    })
}

/// Complex amplitude as separate real and imaginary matrices.
pub fn jsa_json(jsa: &JsaGrid) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "quantity": "jsa",
        "signal_omega_rad_s": jsa.grid.signal(),
        "idler_omega_rad_s": jsa.grid.idler(),
        "real": matrix(&jsa.amplitude.mapv(|z| z.re)),
        "imag": matrix(&jsa.amplitude.mapv(|z| z.im)),
        "metadata": jsa.metadata,
    })
}

/// `axis,omega_rad_s,wavelength_m,weight` with `axis` = signal | idler.
pub fn write_marginals_csv<W: Write>(w: &mut W, grid: &SpectralGrid, m: &Marginals) -> io::Result<()> {
    writeln!(w, "axis,omega_rad_s,wavelength_m,weight")?;
    for (name, axis, weights) in [
        ("signal", grid.signal(), &m.signal),
        ("idler", grid.idler(), &m.idler),
    ] {
        for (&om, &p) in axis.iter().zip(weights) {
            writeln!(w, "{name},{om:.12e},{:.12e},{p:.12e}", wavelength_from_omega(om))?;
        }
    }
    Ok(())
}

pub fn schmidt_json(report: &SchmidtReport, metadata: &JsaMetadata) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "schmidt_number": report.schmidt_number,
        "heralded_purity": report.heralded_purity,
        "coefficients": report.coefficients,
        "metadata": metadata,
    })
}
