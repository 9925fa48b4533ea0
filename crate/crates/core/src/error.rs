use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain where a model is defined (Sellmeier validity,
    /// guidance condition, non-positive frequencies, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no guided {label} mode at omega = {omega:.6e} rad/s (diameter {diameter:.4e} m)")]
    NoGuidedMode {
        label: String,
        omega: f64,
        diameter: f64,
    },

    #[error("{label} is not guided at {} frequencies: {}", .omegas.len(), fmt_list(.omegas))]
    CutoffInTable { label: String, omegas: Vec<f64> },

    #[error("no guided {label} mode in segment {segment} at omega = {omega:.6e} rad/s")]
    CutoffInSegment {
        label: String,
        segment: usize,
        omega: f64,
    },

    #[error("root refinement did not converge: {0}")]
    NoConvergence(String),

    #[error("omega = {omega:.6e} rad/s outside table range [{min:.6e}, {max:.6e}]")]
    Extrapolation { omega: f64, min: f64, max: f64 },

    #[error("parse error at line {line}: {msg}")]
    ParseLine { line: usize, msg: String },

    #[error("parse error at byte {offset}: {msg}")]
    ParseByte { offset: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn line(line: usize, msg: impl Into<String>) -> Self {
        Error::ParseLine {
            line,
            msg: msg.into(),
        }
    }

    /// True for the physics-domain class (cutoff, validity range, guidance).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NoGuidedMode { .. }
                | Error::CutoffInTable { .. }
                | Error::CutoffInSegment { .. }
                | Error::Extrapolation { .. }
                | Error::NoConvergence(_)
        )
    }
}

fn fmt_list(v: &[f64]) -> String {
    const SHOWN: usize = 6;
    let mut s = v
        .iter()
        .take(SHOWN)
        .map(|x| format!("{x:.6e}"))
        .collect::<Vec<_>>()
        .join(", ");
    if v.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", v.len() - SHOWN));
    }
    s
}
