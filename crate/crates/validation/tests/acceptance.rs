//! Acceptance criteria 1-10, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use fiberpair::biphoton::{
    jsa, overlap_integral, phase_matching, pump_function, schmidt_decompose, JsaOptions, OverlapMode,
    PumpMethod,
};
use fiberpair::dispersion::{solve_mode, solve_neff, CrossSection, ModeLabel};
use fiberpair::rates::{fit_power_scan, synthetic_power_scan, Weighting};
use fiberpair::tags::{
    coincidence_histogram, heralded_g2, heralded_g2_brute, predict, simulate_tags, SimConfig,
};
use fiberpair::units::{omega_from_wavelength, C};
use fiberpair_cli::{execute, Cli, RunConfig};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str, overrides: &[(&str, &str)]) -> RunConfig {
    let ov: Vec<(String, String)> = overrides
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    RunConfig::load(Some(&repo().join("configs").join(name)), &ov).unwrap()
}

fn cli(args: &[&str]) {
    let mut full = vec!["fiberpair"];
    full.extend_from_slice(args);
    let parsed = Cli::try_parse_from(full).unwrap();
    execute(&parsed).unwrap_or_else(|e| panic!("{e}"));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn jsi_peak_nm(dir: &Path) -> (f64, f64) {
    let s = read_json(&dir.join("summary.json"));
    (
        s["peak"]["lambda_s"].as_f64().unwrap() * 1e9,
        s["peak"]["lambda_i"].as_f64().unwrap() * 1e9,
    )
}

fn phase_matching_location() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = repo().join("configs/jsi_900nm.toml");
    let t0 = Instant::now();
    cli(&["jsi", "-c", cfg.to_str().unwrap(), "--output.dir", out]);
    let secs = t0.elapsed().as_secs_f64();
    let (ls, li) = jsi_peak_nm(dir.path());

    // where the maximum actually is when the windows are opened up
    let wide = tempfile::tempdir().unwrap();
    cli(&[
        "jsi",
        "-c",
        cfg.to_str().unwrap(),
        "--grid.signal_nm",
        "[800.0, 960.0]",
        "--grid.idler_nm",
        "[1200.0, 1550.0]",
        "--grid.signal_points",
        "160",
        "--grid.idler_points",
        "160",
        "--output.dir",
        wide.path().to_str().unwrap(),
    ]);
    let (ws, wi) = jsi_peak_nm(wide.path());
    let located = (ls - 880.0).abs() <= 10.0 && (li - 1310.0).abs() <= 20.0;
    verdict(
        located && secs <= 60.0,
        format!(
            "256x256, N=100: peak signal {ls:.1} nm, idler {li:.1} nm (target 880±10, 1310±20) in {secs:.1} s; \
             widened windows put the maximum at {ws:.1} / {wi:.1} nm"
        ),
    )
}

fn overlap_magnitude() -> Verdict {
    let cs = CrossSection::silica_in_air(890e-9).unwrap();
    let m = |nm: f64| solve_mode(&cs, omega_from_wavelength(nm * 1e-9), ModeLabel::HE11).unwrap();
    let p = m(1062.0);
    let eta = overlap_integral(&p, &p, &m(880.0), &m(1310.0)).unwrap();
    let ratio = eta / 1e12;
    verdict(
        (0.5..=2.0).contains(&ratio),
        format!("eta = {eta:.4e} m^-2, ratio to 1e12 = {ratio:.3}"),
    )
}

fn segmentation_identity() -> Verdict {
    let t0 = Instant::now();
    let cfg = config(
        "jsi_890nm.toml",
        &[("grid.signal_points", "16"), ("grid.idler_points", "16")],
    );
    let grid = cfg.grid().unwrap();
    let wp = cfg.pump().unwrap().omega0();
    let modes = cfg.mode_set();
    let taper = cfg.taper().unwrap();
    let pm = |n: usize| {
        let seg = taper.segment(n).unwrap();
        phase_matching(&seg, &grid, wp, &modes, OverlapMode::PerPoint)
            .unwrap()
            .values
    };
    let one = pm(1);
    let peak = one.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut worst_pointwise = 0.0f64;
    for n in [2, 7, 100] {
        let many = pm(n);
        for (a, b) in many.iter().zip(one.iter()) {
            let d = (a - b).norm();
            worst = worst.max(d / peak);
            if b.norm() > 1e-3 * peak {
                worst_pointwise = worst_pointwise.max(d / b.norm());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-9 && secs < 1.0,
        format!(
            "N in {{2,7,100}} vs closed form: max |diff|/max|J| = {worst:.2e}, \
             pointwise (|J| > 1e-3 peak) {worst_pointwise:.2e}, {secs:.2} s"
        ),
    )
}

fn pump_convolution() -> Verdict {
    let cfg = config("jsi_900nm.toml", &[]);
    let grid = cfg.grid().unwrap();
    let pump = cfg.pump().unwrap();
    let num = pump_function(&pump, &grid, PumpMethod::Numeric).values;
    let exact = pump_function(&pump, &grid, PumpMethod::ClosedForm).values;
    let total = num.len();
    let good = num
        .iter()
        .zip(exact.iter())
        .filter(|(n, c)| (*n - *c).abs() <= 1e-6 * c.abs())
        .count();
    let frac = good as f64 / total as f64;
    let worst = num
        .iter()
        .zip(exact.iter())
        .filter(|(_, c)| **c > 1e-12)
        .map(|(n, c)| (n - c).abs() / c)
        .fold(0.0, f64::max);
    verdict(
        frac >= 0.99,
        format!(
            "{good}/{total} points ({:.2}%) within 1e-6; worst relative error where I > 1e-12: {worst:.2e}",
            100.0 * frac
        ),
    )
}

/// `J_n(x)` from the Bessel integral over one period (trapezoid, spectrally exact).
fn bessel_j(n: u32, x: f64) -> f64 {
    const M: usize = 96;
    let h = std::f64::consts::TAU / M as f64;
    (0..M)
        .map(|k| {
            let t = k as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / M as f64
}

/// `e^x K_n(x)` from `∫₀^∞ exp(-x (cosh t - 1)) cosh(nt) dt`.
fn bessel_k_scaled(n: u32, x: f64) -> f64 {
    let h = 0.025f64;
    let mut sum = 0.5;
    let mut t = h;
    loop {
        let e = x * (t.cosh() - 1.0);
        if e > 60.0 + n as f64 * t {
            break;
        }
        sum += (-e).exp() * (n as f64 * t).cosh();
        t += h;
    }
    h * sum
}

/// HE/EH characteristic equation for azimuthal order 1, cleared of Bessel poles.
fn hybrid_equation(n1: f64, n0: f64, a: f64, k: f64, neff: f64) -> f64 {
    let u = a * k * (n1 * n1 - neff * neff).sqrt();
    let w = a * k * (neff * neff - n0 * n0).sqrt();
    let j = [0, 1, 2].map(|n| bessel_j(n, u));
    let kk = [0, 1, 2].map(|n| bessel_k_scaled(n, w));
    let jp = 0.5 * (j[0] - j[2]);
    let kp = -0.5 * (kk[0] + kk[2]);
    let r = (n0 * n0) / (n1 * n1);
    let lhs = (jp * w * kk[1] + kp * u * j[1]) * (jp * w * kk[1] + r * kp * u * j[1]);
    let s = 1.0 / (u * u) + 1.0 / (w * w);
    let rhs = (neff / n1).powi(2) * s * s * (u * j[1] * w * kk[1]).powi(2);
    lhs - rhs
}

fn brute_force_he11(cs: &CrossSection, omega: f64) -> f64 {
    let (n1, n0) = cs.indices(omega).unwrap();
    let (a, k) = (cs.radius(), omega / C);
    let f = |n: f64| hybrid_equation(n1, n0, a, k, n);
    const STEPS: usize = 20_000;
    let at = |i: usize| n1 - (n1 - n0) * (i as f64 + 0.5) / STEPS as f64;
    let mut prev = f(at(0));
    for i in 1..STEPS {
        let cur = f(at(i));
        if cur.signum() != prev.signum() {
            let (mut lo, mut hi) = (at(i), at(i - 1));
            let slo = cur.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid).signum() == slo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev = cur;
    }
    panic!("no HE11 root found");
}

fn mode_solver_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    let mut bounded = true;
    for _ in 0..10 {
        let d = rng.random_range(400e-9..1500e-9);
        let lambda = rng.random_range(700e-9..1600e-9);
        let cs = CrossSection::silica_in_air(d).unwrap();
        let w = omega_from_wavelength(lambda);
        let n = solve_neff(&cs, w, ModeLabel::HE11).unwrap();
        let (n1, n0) = cs.indices(w).unwrap();
        bounded &= n > n0 && n < n1;
        worst = worst.max((n - brute_force_he11(&cs, w)).abs());
    }
    verdict(
        worst <= 1e-8 && bounded,
        format!("10 random (d, lambda): max |neff - scan| = {worst:.2e}, bounds held: {bounded}"),
    )
}

fn power_scan_fit() -> Verdict {
    let powers: Vec<f64> = (0..10).map(|k| 0.020 + 0.100 * k as f64 / 9.0).collect();
    let pts = synthetic_power_scan(400.0, 4.3e6, 5.7e4, &powers, 0.01, 42);
    let fit = fit_power_scan(&pts, Weighting::Unweighted).unwrap();
    let sd = fit.std_errors().unwrap();
    let err = [fit.d / 400.0 - 1.0, fit.b / 5.7e4 - 1.0, fit.a / 4.3e6 - 1.0];
    verdict(
        err.iter().all(|e| e.abs() <= 0.05),
        format!(
            "seed 42: D = {:.1} Hz ({:+.1}%, 1 sd {:.0}%), b = {:.4} kHz/mW ({:+.1}%, 1 sd {:.0}%), \
             a = {:.5} kHz/mW^2 ({:+.1}%, 1 sd {:.1}%)",
            fit.d,
            100.0 * err[0],
            100.0 * sd[0] / 400.0,
            fit.b * 1e-6,
            100.0 * err[1],
            100.0 * sd[1] / 5.7e4,
            fit.a * 1e-9,
            100.0 * err[2],
            100.0 * sd[2] / 4.3e6,
        ),
    )
}

fn coincidence_comb() -> Verdict {
    let sim = SimConfig::default();
    let stream = simulate_tags(&sim).unwrap();
    let bin = 10;
    let h = coincidence_histogram(&stream, 2, 1, bin, 2000).unwrap();
    let centers = h.centers();
    let mut sorted = h.counts.clone();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2] as f64;
    let threshold = median + 5.0 * (median + 1.0).sqrt();
    // clusters of above-threshold bins, separated by gaps of 100+ ticks
    let mut peaks: Vec<(i64, u64)> = Vec::new();
    let mut last: Option<i64> = None;
    for (&x, &n) in centers.iter().zip(&h.counts) {
        if n as f64 <= threshold {
            continue;
        }
        match (last, peaks.last_mut()) {
            (Some(l), Some(p)) if x - l < 100 => {
                if n > p.1 {
                    *p = (x, n);
                }
            }
            _ => peaks.push((x, n)),
        }
        last = Some(x);
    }
    let tick_ns = stream.tick_duration() * 1e9;
    let spacings: Vec<f64> = peaks
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) as f64 * tick_ns)
        .collect();
    let bin_ns = bin as f64 * tick_ns;
    let spaced = spacings.len() >= 2 && spacings.iter().all(|s| (s - 54.0).abs() <= bin_ns);
    let zero = peaks
        .iter()
        .position(|p| p.0.abs() as f64 * tick_ns < 0.5 * bin_ns);
    let tallest = zero.is_some_and(|z| peaks.iter().enumerate().all(|(i, p)| i == z || p.1 < peaks[z].1));
    let list: Vec<String> = peaks
        .iter()
        .map(|p| format!("{:.1} ns:{}", p.0 as f64 * tick_ns, p.1))
        .collect();
    verdict(
        spaced && tallest,
        format!(
            "{} peaks [{}], spacings {:?} ns (bin {bin_ns:.2} ns), zero-delay tallest: {tallest}",
            peaks.len(),
            list.join(", "),
            spacings
                .iter()
                .map(|s| (s * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    )
}

fn heralded_g2_oracle() -> Verdict {
    let sim = SimConfig {
        pulses: 10_000_000,
        mu: 0.05,
        herald_efficiency: 0.5,
        efficiency_a: 0.5,
        efficiency_b: 0.5,
        dark_rates: [0.0; 3],
        dead_time: 0.0,
        seed: 8,
        ..SimConfig::default()
    };
    let pred = predict(&sim).unwrap();
    let stream = simulate_tags(&sim).unwrap();
    let g = heralded_g2(&stream, 2, 1, 3, 10, 5).unwrap();
    let z0 = (g.g2[0] - pred.g2_0) / g.sigma[0];
    let z_side: Vec<f64> = (1..g.g2.len()).map(|m| (g.g2[m] - 1.0) / g.sigma[m]).collect();
    let side_ok = z_side.iter().all(|z| z.abs() <= 3.0);

    let small = SimConfig {
        pulses: 250_000,
        dark_rates: [2e3, 2e3, 2e3],
        seed: 9,
        ..sim.clone()
    };
    let s = simulate_tags(&small).unwrap();
    let fast = heralded_g2(&s, 2, 1, 3, 10, 8).unwrap();
    let slow = heralded_g2_brute(&s, 2, 1, 3, 10, 8).unwrap();
    let exact = fast.coincidences == slow.coincidences && fast.g2 == slow.g2;
    verdict(
        z0.abs() <= 3.0 && side_ok && exact && s.len() >= 10_000,
        format!(
            "g2(0) = {:.5} ± {:.5} vs predicted {:.5} (z = {z0:+.2}); max |z| for m >= 1: {:.2}; \
             brute force on {} events identical: {exact}",
            g.g2[0],
            g.sigma[0],
            pred.g2_0,
            z_side.iter().fold(0.0f64, |m, z| m.max(z.abs())),
            s.len()
        ),
    )
}

fn schmidt_sanity() -> Verdict {
    let (r, c) = (64, 80);
    let f = Array2::from_shape_fn((r, c), |(i, j)| {
        let x = (i as f64 - 30.0) / 9.0;
        let y = (j as f64 - 45.0) / 13.0;
        Complex64::from_polar((-x * x).exp(), 0.3 * x * x) * Complex64::from_polar((-y * y).exp(), -0.7 * y)
    });
    let k_sep = schmidt_decompose(&f).unwrap().schmidt_number;

    let k_at = |n: &str| {
        let cfg = config(
            "jsi_890nm.toml",
            &[("grid.signal_points", n), ("grid.idler_points", n)],
        );
        let seg = cfg.segmented().unwrap();
        let p = jsa(
            &seg,
            &cfg.pump().unwrap(),
            &cfg.grid().unwrap(),
            &cfg.mode_set(),
            &JsaOptions::default(),
        )
        .unwrap();
        let f = p.jsa.amplitude;
        // K = (Tr ρ)² / Tr ρ², ρ = F F†, without any decomposition
        let rho = f.dot(&f.t().mapv(|z| z.conj()));
        let tr = f.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let tr2 = rho.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (schmidt_decompose(&f).unwrap().schmidt_number, tr * tr / tr2)
    };
    let (k128, _) = k_at("128");
    let (k256, k256_trace) = k_at("256");
    let drift = (k128 / k256 - 1.0).abs();
    let routes = (k256 / k256_trace - 1.0).abs();
    verdict(
        (k_sep - 1.0).abs() <= 1e-6 && drift <= 0.01 && routes <= 1e-9,
        format!(
            "separable K - 1 = {:.1e}; 890 nm fixture K = {k128:.4} (128^2), {k256:.4} (256^2), change {:.3}%; \
             SVD vs trace route {routes:.1e}",
            k_sep - 1.0,
            100.0 * drift
        ),
    )
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Verdict {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let jdir = tempfile::tempdir().unwrap();
        let sdir = tempfile::tempdir().unwrap();
        cli(&[
            "jsi",
            "-c",
            repo().join("configs/jsi_measured.toml").to_str().unwrap(),
            "--grid.signal_points",
            "64",
            "--grid.idler_points",
            "64",
            "--profile.segments",
            "40",
            "--output.dir",
            jdir.path().to_str().unwrap(),
        ]);
        cli(&[
            "tags",
            "simulate",
            "-c",
            repo().join("configs/simulate_comb.toml").to_str().unwrap(),
            "--simulate.pulses",
            "2000000",
            "--output.dir",
            sdir.path().to_str().unwrap(),
        ]);
        outputs.push((files(jdir.path()), files(sdir.path())));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    let same = a == b;
    let n = a.0.len() + a.1.len();
    let bytes: usize = a.0.values().chain(a.1.values()).map(Vec::len).sum();
    verdict(
        same && n > 0,
        format!("jsi + tags simulate twice: {n} files, {bytes} bytes, byte-identical: {same}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "phase-matching location", phase_matching_location),
        (2, "overlap magnitude", overlap_magnitude),
        (3, "segmentation identity", segmentation_identity),
        (4, "pump convolution", pump_convolution),
        (5, "mode-solver oracle", mode_solver_oracle),
        (6, "power-scan fit", power_scan_fit),
        (7, "coincidence comb", coincidence_comb),
        (8, "heralded g2 oracle", heralded_g2_oracle),
        (9, "Schmidt sanity", schmidt_sanity),
        (10, "determinism", determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {tag}  {name}: {} [{:.1} s]",
            v.detail,
            t0.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
