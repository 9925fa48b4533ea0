//! Integer-order Bessel functions and Gauss–Legendre rules.
//!
//! Only what the step-index mode solver needs: `J_n(x)` for real `x ≥ 0` and
//! exponentially scaled `e^x K_n(x)` for `x > 0`. Both return whole
//! sequences `0..=nmax` because the characteristic equation and the field
//! profiles always need neighbouring orders together.

use std::f64::consts::PI;

/// `J_0(x) ..= J_nmax(x)` for `x ≥ 0`.
///
/// Power series below `x = 2`, Miller's backward recurrence normalised with
/// `J_0 + 2 Σ J_2k = 1` above.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x >= 0.0, "bessel_j_upto: x = {x}");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 2.0 {
        for (n, o) in out.iter_mut().enumerate() {
            *o = j_series(n, x);
        }
        return out;
    }

    let nn = nmax.max(x.ceil() as usize);
    let mut m = nn + 30 + (60.0 * nn as f64).sqrt() as usize;
    m += m % 2;

    const BIG: f64 = 1e200;
    const SMALL: f64 = 1e-200;
    let mut jp1 = 0.0; // J_{k+1}
    let mut j = 1.0; // J_k, k = m
    let mut sum = 2.0 * j; // m is even and > 0
    for k in (1..=m).rev() {
        let jm1 = (2.0 * k as f64 / x) * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if j.abs() > BIG {
            j *= SMALL;
            jp1 *= SMALL;
            sum *= SMALL;
            for o in out.iter_mut() {
                *o *= SMALL;
            }
        }
        if idx <= nmax {
            out[idx] = j;
        }
        if idx == 0 {
            sum += j;
        } else if idx % 2 == 0 {
            sum += 2.0 * j;
        }
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    out
}

fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200 {
            break;
        }
    }
    sum
}

#[inline]
pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_upto(n, x)[n]
}

/// `e^x K_0(x)` and `e^x K_1(x)` for `x > 0`.
///
/// Trapezoidal rule on `e^x K_ν(x) = ∫₀^∞ exp(-x (cosh t - 1)) cosh(νt) dt`.
/// The integrand is entire and decays doubly exponentially, so the rule
/// converges geometrically in the step; the steps below leave errors at the
/// level of f64 rounding.
pub fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0, "bessel_k01_scaled: x = {x}");
    let h = if x <= 6.25 { 0.1 } else { 0.25 / x.sqrt() };
    let mut s0 = 0.5;
    let mut s1 = 0.5;
    let mut k = 1u32;
    loop {
        let t = k as f64 * h;
        let sh = (0.5 * t).sinh();
        let arg = 2.0 * x * sh * sh; // x (cosh t - 1)
        let e = (-arg).exp();
        let c = 1.0 + 2.0 * sh * sh;
        s0 += e;
        s1 += e * c;
        if arg - t > 45.0 {
            break;
        }
        k += 1;
    }
    (h * s0, h * s1)
}

/// `e^x K_0(x) ..= e^x K_nmax(x)` for `x > 0` (upward recurrence, stable for K).
pub fn bessel_k_scaled_upto(nmax: usize, x: f64) -> Vec<f64> {
    let (k0, k1) = bessel_k01_scaled(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(k0);
    if nmax >= 1 {
        out.push(k1);
    }
    for n in 1..nmax {
        let next = out[n - 1] + (2.0 * n as f64 / x) * out[n];
        out.push(next);
    }
    out
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_{n-1}(z)
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
