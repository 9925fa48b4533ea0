use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Counting statistics: variance `rate / integration_time`.
    Poisson { integration_time: f64 },
}

/// Least-squares fit of `rate = D + b·P + a·P²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerScanFit {
    /// Hz
    pub d: f64,
    /// Hz/W²
    pub a: f64,
    /// Hz/W
    pub b: f64,
    /// Parameter order (D, b, a). Absent for an exactly determined
    /// unweighted fit (no residual degrees of freedom).
    pub covariance: Option<[[f64; 3]; 3]>,
    /// `‖W^{1/2}(y − Xc)‖₂`
    pub residual_norm: f64,
    pub points: usize,
    pub weighting: Weighting,
}

/// One power of a decomposed fit curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub power: f64,
    pub total: f64,
    /// `a·P²`
    pub sfwm: f64,
    /// `b·P`
    pub raman: f64,
    pub offset: f64,
}

impl PowerScanFit {
    pub fn eval(&self, p: f64) -> f64 {
        self.d + self.b * p + self.a * p * p
    }

    /// Quadratic (SFWM), linear (Raman) and offset parts at each power.
    pub fn curves(&self, powers: &[f64]) -> Vec<CurvePoint> {
        powers
            .iter()
            .map(|&p| CurvePoint {
                power: p,
                total: self.eval(p),
                sfwm: self.a * p * p,
                raman: self.b * p,
                offset: self.d,
            })
            .collect()
    }

    /// One-sigma errors of (D, b, a).
    pub fn std_errors(&self) -> Option<[f64; 3]> {
        self.covariance
            .map(|c| [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()])
    }
}

/// Fits `(P [W], rate [Hz])` points in the basis `{1, P, P²}`.
pub fn fit_power_scan(points: &[(f64, f64)], weighting: Weighting) -> Result<PowerScanFit> {
    if points.iter().any(|(p, r)| !p.is_finite() || !r.is_finite()) {
        return Err(Error::invalid("power scan contains non-finite values"));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::invalid(format!(
            "power scan needs at least 3 distinct powers, got {}",
            distinct.len()
        )));
    }
    let n = points.len();
    let weights: Vec<f64> = match weighting {
        Weighting::Unweighted => vec![1.0; n],
        Weighting::Poisson { integration_time } => {
            if !(integration_time > 0.0) {
                return Err(Error::invalid("integration time must be > 0"));
            }
            points
                .iter()
                .map(|&(_, r)| {
                    if r > 0.0 {
                        Ok(integration_time / r)
                    } else {
                        Err(Error::invalid("Poisson weights need positive rates"))
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    // columns scaled by the largest power for conditioning
    let scale = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let x = DMatrix::from_fn(n, 3, |i, j| {
        let t = points[i].0 / scale;
        weights[i].sqrt() * t.powi(j as i32)
    });
    let y = DVector::from_fn(n, |i, _| weights[i].sqrt() * points[i].1);

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::invalid("rank-deficient design matrix"));
    }
    let c = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    let resid = &y - &x * &c;
    let rss = resid.norm_squared();

    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::invalid("rank-deficient design matrix"))?;
    let factor = match weighting {
        Weighting::Poisson { .. } => Some(1.0),
        Weighting::Unweighted if n > 3 => Some(rss / (n - 3) as f64),
        Weighting::Unweighted => None,
    };
    let unscale = [1.0, 1.0 / scale, 1.0 / (scale * scale)];
    let covariance = factor.map(|f| {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f * xtx_inv[(i, j)] * unscale[i] * unscale[j];
            }
        }
        m
    });
    Ok(PowerScanFit {
        d: c[0] * unscale[0],
        b: c[1] * unscale[1],
        a: c[2] * unscale[2],
        covariance,
        residual_norm: rss.sqrt(),
        points: n,
        weighting,
    })
}

/// Parses `power_mW,rate_Hz` lines (optional header with exactly those
/// names, `#` comments) into `(W, Hz)` pairs.
pub fn parse_power_scan(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_data && cols == ["power_mW", "rate_Hz"] {
            seen_data = true;
            continue;
        }
        seen_data = true;
        if cols.len() != 2 {
            return Err(Error::line(lineno, "expected two columns: power_mW,rate_Hz"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::line(lineno, format!("bad number '{s}'")))
        };
        let p = num(cols[0])?;
        let r = num(cols[1])?;
        if p < 0.0 {
            return Err(Error::line(lineno, format!("negative power {p}")));
        }
        out.push((p * 1e-3, r));
    }
    Ok(out)
}

/// Writes points back in the `power_mW,rate_Hz` format.
pub fn format_power_scan(points: &[(f64, f64)]) -> String {
    let mut s = String::from("power_mW,rate_Hz\n");
    for (p, r) in points {
        s.push_str(&format!("{:?},{:?}\n", p * 1e3, r));
    }
    s
}

/// `D + bP + aP²` at each power with multiplicative Gaussian noise of
/// relative size `noise`, reproducible from `seed`.
pub fn synthetic_power_scan(
    d: f64,
    a: f64,
    b: f64,
    powers: &[f64],
    noise: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    powers
        .iter()
        .map(|&p| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (p, (d + b * p + a * p * p) * (1.0 + noise * z))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powers() -> Vec<f64> {
        (0..10).map(|k| 0.020 + 0.1 * k as f64 / 9.0).collect()
    }

    #[test]
    fn exact_quadratic_recovered() {
        let pts = synthetic_power_scan(400.0, 4.3e6, 5.7e4, &powers(), 0.0, 1);
        let f = fit_power_scan(&pts, Weighting::Unweighted).unwrap();
        assert!((f.d / 400.0 - 1.0).abs() < 1e-9);
        assert!((f.a / 4.3e6 - 1.0).abs() < 1e-9);
        assert!((f.b / 5.7e4 - 1.0).abs() < 1e-9);
        let g = fit_power_scan(
            &pts,
            Weighting::Poisson {
                integration_time: 10.0,
            },
        )
        .unwrap();
        assert!((g.a / 4.3e6 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_rates() {
        let pts: Vec<_> = powers().into_iter().map(|p| (p, 250.0)).collect();
        let f = fit_power_scan(&pts, Weighting::Unweighted).unwrap();
        assert!((f.d - 250.0).abs() < 1e-9);
        assert!(f.a.abs() < 1e-6 && f.b.abs() < 1e-7, "{} {}", f.a, f.b);
    }

    #[test]
    fn needs_three_powers() {
        assert!(fit_power_scan(
            &[(0.1, 1.0), (0.1, 2.0), (0.2, 3.0), (0.2, 1.0)],
            Weighting::Unweighted
        )
        .is_err());
        let f = fit_power_scan(&[(0.1, 1.0), (0.2, 2.0), (0.3, 5.0)], Weighting::Unweighted).unwrap();
        assert!(f.covariance.is_none());
    }

    #[test]
    fn covariance_matches_scatter() {
        // sampling spread of D over seeds vs reported standard error, with
        // additive noise of 100 Hz (the homoscedastic case OLS assumes)
        let pw = powers();
        let mut ds = Vec::new();
        let mut se = 0.0;
        for seed in 0..400 {
            let noise = synthetic_power_scan(100.0, 0.0, 0.0, &pw, 1.0, seed);
            let pts: Vec<_> = noise
                .iter()
                .map(|&(p, e)| (p, 400.0 + 5.7e4 * p + 4.3e6 * p * p + e - 100.0))
                .collect();
            let f = fit_power_scan(&pts, Weighting::Unweighted).unwrap();
            ds.push(f.d);
            se += f.std_errors().unwrap()[0] / 400.0;
        }
        let mean = ds.iter().sum::<f64>() / ds.len() as f64;
        let sd = (ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (ds.len() - 1) as f64).sqrt();
        assert!((se / sd - 1.0).abs() < 0.2, "{se} {sd}");
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let pts = vec![(0.02, 1000.5), (0.05, 3000.0), (0.1, 9000.25)];
        let back = parse_power_scan(&format_power_scan(&pts)).unwrap();
        for (a, b) in pts.iter().zip(&back) {
            assert!((a.0 - b.0).abs() < 1e-15 && a.1 == b.1);
        }
        assert!(matches!(
            parse_power_scan("power_mW,rate_Hz\n20,100\n30\n"),
            Err(Error::ParseLine { line: 3, .. })
        ));
        assert!(matches!(
            parse_power_scan("20,abc\n"),
            Err(Error::ParseLine { line: 1, .. })
        ));
        assert!(parse_power_scan("").unwrap().is_empty());
    }
}
