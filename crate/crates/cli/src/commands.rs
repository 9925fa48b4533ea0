use std::fmt::Write as _;
use std::path::Path;

use fiberpair::biphoton::export::{grid_json, jsa_json, schmidt_json, write_grid_csv, write_marginals_csv};
use fiberpair::biphoton::{jsa, peak_normalized, schmidt_analysis, JsaOptions};
use fiberpair::dispersion::neff_table;
use fiberpair::rates::{fit_power_scan, loss_scenarios, pair_rates, parse_power_scan, LossBudget, Weighting};
use fiberpair::tags::{
    coincidence_histogram, comb_peaks, heralded_g2, parse_tags, peak_and_accidentals, predict, simulate_tags,
    write_binary, write_text, TagStream,
};
use fiberpair::units::{omega_from_wavelength, wavelength_from_omega};
use fiberpair::{SCHEMA_VERSION, VERSION};
use serde_json::json;

use crate::config::{GridFormat, RunConfig, TagFormat, WeightingKind};
use crate::error::CliError;
use crate::output::OutDir;
use crate::Outcome;

fn wants_csv(cfg: &RunConfig) -> bool {
    matches!(cfg.output.format, GridFormat::Csv | GridFormat::Both)
}

fn wants_json(cfg: &RunConfig) -> bool {
    matches!(cfg.output.format, GridFormat::Json | GridFormat::Both)
}

fn done(out: OutDir, summary: Vec<String>, warnings: Vec<String>) -> Outcome {
    Outcome {
        files: out.written,
        summary,
        warnings,
    }
}

pub fn modes(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = &cfg.modes;
    let d_nm = m
        .diameter_nm
        .or(cfg.profile.uniform_diameter_nm)
        .ok_or_else(|| CliError::Config("modes: set modes.diameter_nm".into()))?;
    if m.points < 1 || !(m.wavelength_nm[0] > 0.0 && m.wavelength_nm[1] >= m.wavelength_nm[0]) {
        return Err(CliError::Config(
            "modes: need points >= 1 and 0 < wavelength_nm[0] <= wavelength_nm[1]".into(),
        ));
    }
    if m.labels.is_empty() {
        return Err(CliError::Config("modes: labels is empty".into()));
    }
    let cs = cfg.cross_section(d_nm * 1e-9)?;
    let [lo, hi] = m.wavelength_nm;
    let wavelengths: Vec<f64> = (0..m.points)
        .map(|i| {
            let t = if m.points == 1 {
                0.0
            } else {
                i as f64 / (m.points - 1) as f64
            };
            (lo + (hi - lo) * t) * 1e-9
        })
        .collect();
    // tables want ascending ω
    let mut omegas: Vec<f64> = wavelengths
        .iter()
        .rev()
        .map(|&l| omega_from_wavelength(l))
        .collect();
    omegas.dedup();
    let mut columns = Vec::new();
    for &label in &m.labels {
        let t = neff_table(&cs, &omegas, label)?;
        let mut n = t.neffs().to_vec();
        n.reverse();
        columns.push((label, n));
    }
    let wavelengths: Vec<f64> = omegas.iter().rev().map(|&w| wavelength_from_omega(w)).collect();

    let mut out = OutDir::create(&cfg.output.dir)?;
    if wants_csv(cfg) {
        let mut s = String::from("wavelength_m,omega_rad_s");
        for (l, _) in &columns {
            let _ = write!(s, ",{l}_neff");
        }
        s.push('\n');
        for (i, &l) in wavelengths.iter().enumerate() {
            let _ = write!(s, "{l:.12e},{:.12e}", omega_from_wavelength(l));
            for (_, n) in &columns {
                let _ = write!(s, ",{:.12e}", n[i]);
            }
            s.push('\n');
        }
        out.write("modes.csv", s.as_bytes())?;
    }
    if wants_json(cfg) {
        let neff: serde_json::Map<String, serde_json::Value> =
            columns.iter().map(|(l, n)| (l.to_string(), json!(n))).collect();
        out.json(
            "modes.json",
            &json!({
                "schema": SCHEMA_VERSION,
                "software_version": VERSION,
                "diameter_m": d_nm * 1e-9,
                "core": cs.core.name(),
                "cladding": cs.cladding,
                "wavelength_m": wavelengths,
                "n_eff": neff,
            }),
        )?;
    }
    let summary = vec![format!(
        "{} mode(s) at d = {d_nm} nm over {lo}-{hi} nm ({} points)",
        columns.len(),
        wavelengths.len()
    )];
    Ok(done(out, summary, vec![]))
}

pub fn jsi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seg = cfg.segmented()?;
    let pump = cfg.pump()?;
    let grid = cfg.grid()?;
    let modes = cfg.mode_set();
    let options = JsaOptions {
        overlap: cfg.modes.overlap,
        pump_method: cfg.pump.method,
    };
    let panels = jsa(&seg, &pump, &grid, &modes, &options)?;
    let meta = &panels.jsa.metadata;
    let schmidt = schmidt_analysis(&panels.jsa)?;
    let peak = panels.jsa.peak();
    let marg = panels.jsa.marginals()?;

    let mut out = OutDir::create(&cfg.output.dir)?;
    let grids = [
        (
            "phase_matching",
            "phase_matching_intensity",
            panels.phase_matching.mapv(|z| z.norm_sqr()),
        ),
        ("pump", "pump_intensity", panels.pump.mapv(|v| v * v)),
        ("jsi", "joint_spectral_intensity", panels.jsa.intensity()),
    ];
    for (name, quantity, values) in &grids {
        let (norm, scale) = peak_normalized(values);
        if wants_csv(cfg) {
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &grid, quantity, &norm, scale).map_err(|e| CliError::io(name, e))?;
            out.write(&format!("{name}.csv"), &buf)?;
        }
        if wants_json(cfg) {
            out.json(
                &format!("{name}.json"),
                &grid_json(&grid, quantity, &norm, scale, meta),
            )?;
        }
    }
    if wants_json(cfg) {
        out.json("jsa.json", &jsa_json(&panels.jsa))?;
    }
    let mut buf = Vec::new();
    write_marginals_csv(&mut buf, &grid, &marg).map_err(|e| CliError::io("marginals", e))?;
    out.write("marginals.csv", &buf)?;
    out.json("schmidt.json", &schmidt_json(&schmidt, meta))?;
    out.json(
        "summary.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "peak": peak,
            "schmidt_number": schmidt.schmidt_number,
            "heralded_purity": schmidt.heralded_purity,
            "metadata": meta,
        }),
    )?;

    let mut warnings = Vec::new();
    if meta.pump_coverage_warning {
        warnings.push(format!(
            "pump envelope not negligible at the grid edge (ratio {:.3e}); widen the windows",
            meta.pump_boundary_ratio
        ));
    }
    let last = |n: usize, i: usize| i == 0 || i + 1 == n;
    let (ns, ni) = grid.shape();
    if last(ns, peak.signal_index) || last(ni, peak.idler_index) {
        warnings
            .push("JSI peak lies on the grid boundary; the true maximum may be outside the windows".into());
    }
    let summary = vec![
        format!(
            "JSI peak: signal {:.2} nm, idler {:.2} nm",
            peak.lambda_s * 1e9,
            peak.lambda_i * 1e9
        ),
        format!(
            "Schmidt number K = {:.6}, heralded purity = {:.6}",
            schmidt.schmidt_number, schmidt.heralded_purity
        ),
    ];
    Ok(done(out, summary, warnings))
}

pub fn rates(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = &cfg.rates;
    let pump = cfg.pump()?;
    let from_pump = pump.photons_per_pulse();
    let photons = r.photons_per_pulse.unwrap_or(from_pump);
    let budget = match (r.signal_db, r.idler_db) {
        (Some(s), Some(i)) => Some(LossBudget::new(
            s,
            i,
            r.signal_detector_efficiency,
            r.idler_detector_efficiency,
        )?),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "rates: give both signal_db and idler_db or neither".into(),
            ))
        }
    };
    let internal = pair_rates(r.efficiency, &pump, photons, &LossBudget::identity())?.internal;
    let observed = budget
        .as_ref()
        .map(|b| pair_rates(r.efficiency, &pump, photons, b))
        .transpose()?;
    if !(r.quoted_loss_db <= 0.0) {
        return Err(CliError::Config("rates.quoted_loss_db must be <= 0".into()));
    }
    let scenarios = loss_scenarios(internal, r.quoted_loss_db);

    let mut notes = Vec::new();
    let ratio = photons / from_pump;
    if !(0.5..=2.0).contains(&ratio) {
        notes.push(format!(
            "photons_per_pulse {photons:.3e} differs from pulse energy / photon energy {from_pump:.3e} by a factor {ratio:.3e}"
        ));
    }
    notes.push(format!(
        "quoted loss {} dB read as a total gives {:.3e} pairs/s observed; read per channel, {:.3e} pairs/s",
        r.quoted_loss_db, scenarios[0].observed, scenarios[1].observed
    ));

    let mut out = OutDir::create(&cfg.output.dir)?;
    out.json(
        "rates.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "software_version": VERSION,
            "efficiency": r.efficiency,
            "pump": pump,
            "photons_per_pulse": photons,
            "photons_per_pulse_from_pump": from_pump,
            "internal_rate_hz": internal,
            "budget": budget,
            "observed": observed,
            "quoted_loss_db": r.quoted_loss_db,
            "scenarios": scenarios,
            "notes": notes,
        }),
    )?;
    let mut summary = vec![format!("internal pair rate {internal:.4e} /s")];
    if let Some(o) = observed {
        summary.push(format!("observed pair rate {:.4e} /s", o.observed));
    }
    for s in &scenarios {
        summary.push(format!(
            "scenario {}: {} dB per arm -> {:.4e} /s",
            s.name, s.signal_db, s.observed
        ));
    }
    Ok(done(out, summary, notes))
}

fn load_tags(cfg: &RunConfig) -> Result<TagStream, CliError> {
    let path = cfg
        .analysis
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("analysis.input: no tag file given".into()))?;
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_tags(&bytes, &cfg.analysis.channels).map_err(|e| CliError::input(path, e))
}

fn reorder_warning(s: &TagStream, path: Option<&Path>) -> Vec<String> {
    if s.reordered > 0 {
        vec![format!(
            "{}: {} records were out of time order and have been sorted",
            path.map(|p| p.display().to_string()).unwrap_or_default(),
            s.reordered
        )]
    } else {
        vec![]
    }
}

pub fn coincidences(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let stream = load_tags(cfg)?;
    let hist = coincidence_histogram(
        &stream,
        a.start_channel,
        a.stop_channel,
        a.bin_ticks,
        a.range_ticks,
    )?;
    let mut warnings = reorder_warning(&stream, a.input.as_deref());
    let rep = match a.rep_period_ticks.or(stream.rep_period_ticks) {
        Some(t) => t,
        None => {
            // binary streams carry no period; assume the configured source
            let t = cfg.simulate.rep_period_ns * 1e-9 / stream.tick_duration();
            warnings.push(format!(
                "stream has no repetition period; using simulate.rep_period_ns = {} ({t:.3} ticks)",
                cfg.simulate.rep_period_ns
            ));
            t
        }
    };
    let analysis = peak_and_accidentals(&hist, rep, a.window_ticks)?;
    let comb = comb_peaks(&hist, rep, (a.range_ticks as f64 / rep).floor() as i64);

    let mut out = OutDir::create(&cfg.output.dir)?;
    let mut s = String::from("delay_ticks,delay_s,counts\n");
    for (c, n) in hist.centers().iter().zip(&hist.counts) {
        let _ = writeln!(s, "{c},{:.12e},{n}", *c as f64 * hist.tick_s);
    }
    out.write("coincidences.csv", s.as_bytes())?;
    out.json(
        "coincidences.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "software_version": VERSION,
            "input": a.input,
            "start_channel": a.start_channel,
            "stop_channel": a.stop_channel,
            "bin_ticks": a.bin_ticks,
            "range_ticks": a.range_ticks,
            "window_ticks": a.window_ticks,
            "tick_s": hist.tick_s,
            "rep_period_ticks": rep,
            "acquisition_ticks": hist.acquisition_ticks,
            "total_pairs": hist.total(),
            "reordered_records": stream.reordered,
            "peak_and_accidentals": analysis,
            "comb": comb,
        }),
    )?;
    let mut summary = vec![format!("{} pairs within ±{} ticks", hist.total(), a.range_ticks)];
    summary.push(format!(
        "peak {} counts, accidentals {:.2} counts, CAR {}",
        analysis.peak_counts,
        analysis.accidental_counts,
        analysis
            .car
            .map_or("undefined (no accidentals)".to_string(), |c| format!("{c:.3}"))
    ));
    Ok(done(out, summary, warnings))
}

pub fn g2h(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let stream = load_tags(cfg)?;
    let g = heralded_g2(
        &stream,
        a.herald_channel,
        a.channel_a,
        a.channel_b,
        a.window_ticks,
        a.m_max,
    )?;
    let mut out = OutDir::create(&cfg.output.dir)?;
    let mut s = String::from("m,coincidences,g2,sigma\n");
    for m in 0..g.g2.len() {
        let _ = writeln!(
            s,
            "{m},{},{:.12e},{:.12e}",
            g.coincidences[m], g.g2[m], g.sigma[m]
        );
    }
    out.write("g2h.csv", s.as_bytes())?;
    out.json(
        "g2h.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "software_version": VERSION,
            "input": a.input,
            "tick_s": stream.tick_duration(),
            "reordered_records": stream.reordered,
            "histogram": g,
        }),
    )?;
    let summary = vec![format!(
        "g2_h(0) = {:.6} ± {:.6} from {} heralds ({} triples)",
        g.g2[0], g.sigma[0], g.heralds, g.coincidences[0]
    )];
    Ok(done(out, summary, reorder_warning(&stream, a.input.as_deref())))
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let c = cfg.sim_config()?;
    let stream = simulate_tags(&c)?;
    let prediction = predict(&c)?;
    let mut out = OutDir::create(&cfg.output.dir)?;
    let file = match cfg.output.tags_format {
        TagFormat::Binary => out.write("tags.ttag", &write_binary(&stream))?,
        TagFormat::Text => out.write("tags.txt", write_text(&stream).as_bytes())?,
    };
    let counts: Vec<_> = stream
        .channels()
        .iter()
        .map(|&ch| json!({"channel": ch, "count": stream.count(ch)}))
        .collect();
    out.json(
        "simulate.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "software_version": VERSION,
            "config": c,
            "file": file.file_name().map(|f| f.to_string_lossy().into_owned()),
            "records": stream.len(),
            "counts": counts,
            "rep_period_ticks": stream.rep_period_ticks,
            "duration_ticks": stream.duration_ticks,
            "prediction": prediction,
        }),
    )?;
    let summary = vec![format!(
        "{} records over {} pulses (predicted g2_h(0) = {:.4})",
        stream.len(),
        c.pulses,
        prediction.g2_0
    )];
    Ok(done(out, summary, vec![]))
}

pub fn fit_power(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = &cfg.rates;
    let path = r
        .power_scan
        .as_deref()
        .ok_or_else(|| CliError::Config("rates.power_scan: no power-scan file given".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let points = parse_power_scan(&text).map_err(|e| CliError::input(path, e))?;
    let weighting = match r.weighting {
        WeightingKind::Unweighted => Weighting::Unweighted,
        WeightingKind::Poisson => Weighting::Poisson {
            integration_time: r.integration_time_s,
        },
    };
    let fit = fit_power_scan(&points, weighting).map_err(|e| CliError::input(path, e))?;
    let (pmin, pmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    let n = r.curve_points.max(2);
    let powers: Vec<f64> = (0..n)
        .map(|i| pmin + (pmax - pmin) * i as f64 / (n - 1) as f64)
        .collect();
    let curves = fit.curves(&powers);

    let mut out = OutDir::create(&cfg.output.dir)?;
    let mut s = String::from("power_mW,total_Hz,sfwm_Hz,raman_Hz,offset_Hz\n");
    for c in &curves {
        let _ = writeln!(
            s,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            c.power * 1e3,
            c.total,
            c.sfwm,
            c.raman,
            c.offset
        );
    }
    out.write("fit_curves.csv", s.as_bytes())?;
    out.json(
        "fit.json",
        &json!({
            "schema": SCHEMA_VERSION,
            "software_version": VERSION,
            "input": path,
            "fit": fit,
            "std_errors": fit.std_errors(),
            "d_hz": fit.d,
            "b_khz_per_mw": fit.b * 1e-6,
            "a_khz_per_mw2": fit.a * 1e-9,
        }),
    )?;
    let summary = vec![format!(
        "D = {:.4} Hz, b = {:.6} kHz/mW, a = {:.6} kHz/mW²",
        fit.d,
        fit.b * 1e-6,
        fit.a * 1e-9
    )];
    Ok(done(out, summary, vec![]))
}
