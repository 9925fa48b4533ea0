use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use super::jsa::JsaGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtReport {
    /// Descending, non-negative, summing to one.
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
    /// `1/K`.
    pub heralded_purity: f64,
}

pub fn schmidt_analysis(jsa: &JsaGrid) -> Result<SchmidtReport> {
    schmidt_decompose(&jsa.amplitude)
}

/// Singular-value spectrum of a sampled amplitude. On a uniform grid the
/// cell measure is a common factor and drops out after normalisation.
pub fn schmidt_decompose(f: &Array2<Complex64>) -> Result<SchmidtReport> {
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("amplitude has non-finite entries"));
    }
    let (r, c) = f.dim();
    let m = DMatrix::from_fn(r, c, |i, j| f[[i, j]]);
    let sv = m.singular_values();
    let mut lambda: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let total: f64 = lambda.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("Schmidt decomposition of an all-zero amplitude"));
    }
    for l in lambda.iter_mut() {
        *l /= total;
    }
    lambda.sort_by(|a, b| b.total_cmp(a));
    let k = 1.0 / lambda.iter().map(|l| l * l).sum::<f64>();
    Ok(SchmidtReport {
        coefficients: lambda,
        schmidt_number: k,
        heralded_purity: 1.0 / k,
    })
}
