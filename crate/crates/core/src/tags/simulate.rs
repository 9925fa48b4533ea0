use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use super::record::{TagRecord, TagStream, DEFAULT_CHANNELS, DEFAULT_TICK_FS};
use crate::{Error, Result};

pub const CHANNEL_A: u8 = 1;
pub const CHANNEL_HERALD: u8 = 2;
pub const CHANNEL_B: u8 = 3;

/// Photon-pair number distribution per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    #[default]
    Poisson,
    Thermal,
    /// At most one pair; `mu` is the pair probability.
    Single,
}

/// Pulsed pair source with a heralding detector and a split signal arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// s
    pub rep_period: f64,
    pub pulses: u64,
    /// Mean pairs per pulse.
    pub mu: f64,
    pub statistics: PairStatistics,
    /// Idler transmittance × detector efficiency (channel 2).
    pub herald_efficiency: f64,
    /// Fraction of signal photons sent towards channel 1.
    pub splitter_ratio: f64,
    pub efficiency_a: f64,
    pub efficiency_b: f64,
    /// Hz, channels 1, 2, 3.
    pub dark_rates: [f64; 3],
    /// s, non-paralysable; 0 disables.
    pub dead_time: f64,
    /// s, Gaussian standard deviation.
    pub jitter: f64,
    pub tick_fs: u32,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            rep_period: 54e-9,
            pulses: 10_000_000,
            mu: 0.05,
            statistics: PairStatistics::Poisson,
            herald_efficiency: 0.05,
            splitter_ratio: 0.47,
            efficiency_a: 0.1,
            efficiency_b: 0.1,
            dark_rates: [100.0, 100.0, 100.0],
            dead_time: 15e-6,
            jitter: 50e-12,
            tick_fs: DEFAULT_TICK_FS,
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} is not a probability")))
            }
        };
        prob("herald_efficiency", self.herald_efficiency)?;
        prob("splitter_ratio", self.splitter_ratio)?;
        prob("efficiency_a", self.efficiency_a)?;
        prob("efficiency_b", self.efficiency_b)?;
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!(
                "mu = {} must be finite and >= 0",
                self.mu
            )));
        }
        if self.statistics == PairStatistics::Single {
            prob("mu (single-pair probability)", self.mu)?;
        }
        if !(self.rep_period > 0.0 && self.rep_period.is_finite()) {
            return Err(Error::invalid("rep_period must be > 0"));
        }
        if self.dark_rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("dark rates must be finite and >= 0"));
        }
        if !(self.dead_time >= 0.0 && self.dead_time.is_finite()) {
            return Err(Error::invalid("dead_time must be >= 0"));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::invalid("jitter must be >= 0"));
        }
        if self.tick_fs == 0 {
            return Err(Error::invalid("tick must be > 0"));
        }
        let ticks = self.duration() / self.tick();
        if !(ticks < 9.0e18) {
            return Err(Error::invalid("simulated duration overflows the tick counter"));
        }
        Ok(())
    }

    pub fn tick(&self) -> f64 {
        self.tick_fs as f64 * 1e-15
    }

    pub fn duration(&self) -> f64 {
        self.pulses as f64 * self.rep_period
    }

    /// Detection probability of one signal photon in arm A and arm B.
    pub fn arm_probabilities(&self) -> (f64, f64) {
        (
            self.splitter_ratio * self.efficiency_a,
            (1.0 - self.splitter_ratio) * self.efficiency_b,
        )
    }

    /// `E[x^n]` for the pair-number distribution.
    pub fn generating_function(&self, x: f64) -> f64 {
        let mu = self.mu;
        match self.statistics {
            PairStatistics::Poisson => (-mu * (1.0 - x)).exp(),
            PairStatistics::Thermal => 1.0 / (1.0 + mu * (1.0 - x)),
            PairStatistics::Single => 1.0 - mu * (1.0 - x),
        }
    }

    fn p_nonzero(&self) -> f64 {
        1.0 - self.generating_function(0.0)
    }

    /// Pair number given at least one pair.
    fn sample_nonzero<R: Rng>(&self, rng: &mut R) -> u32 {
        match self.statistics {
            PairStatistics::Single => 1,
            PairStatistics::Thermal => {
                let q = self.mu / (1.0 + self.mu);
                1 + Geometric::new(1.0 - q).unwrap().sample(rng) as u32
            }
            PairStatistics::Poisson => {
                // inversion on the zero-truncated distribution
                let mu = self.mu;
                let u: f64 = rng.random::<f64>() * -(-mu).exp_m1();
                let mut p = mu * (-mu).exp();
                let mut cdf = p;
                let mut n = 1;
                while cdf < u && n < 10_000 {
                    n += 1;
                    p *= mu / n as f64;
                    cdf += p;
                }
                n
            }
        }
    }
}

/// Per-pulse click probabilities implied by the pair statistics alone
/// (no dark counts, no dead time, windows wide enough for the jitter).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPrediction {
    pub p_herald: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_herald_a: f64,
    pub p_herald_b: f64,
    pub p_a_b: f64,
    pub p_herald_a_b: f64,
    /// `P(HAB)·P(H) / (P(HA)·P(HB))`
    pub g2_0: f64,
    pub expected_heralds: f64,
    pub expected_triples: f64,
    /// `g2_0 / √(expected triples)`
    pub g2_0_sigma: f64,
}

pub fn predict(config: &SimConfig) -> Result<SimPrediction> {
    config.validate()?;
    let eh = config.herald_efficiency;
    let (pa, pb) = config.arm_probabilities();
    // probability that every detector in a set stays silent
    let z = |q: f64| config.generating_function(1.0 - q);
    let zh = z(eh);
    let za = z(pa);
    let zb = z(pb);
    let zha = z(1.0 - (1.0 - eh) * (1.0 - pa));
    let zhb = z(1.0 - (1.0 - eh) * (1.0 - pb));
    let zab = z(pa + pb);
    let zhab = z(1.0 - (1.0 - eh) * (1.0 - pa - pb));
    let p_herald = 1.0 - zh;
    let p_herald_a = 1.0 - zh - za + zha;
    let p_herald_b = 1.0 - zh - zb + zhb;
    let p_herald_a_b = (1.0 - zh - za - zb + zha + zhb + zab - zhab).max(0.0);
    let n = config.pulses as f64;
    let g2_0 = if p_herald_a > 0.0 && p_herald_b > 0.0 {
        p_herald_a_b * p_herald / (p_herald_a * p_herald_b)
    } else {
        f64::NAN
    };
    let expected_triples = n * p_herald_a_b;
    Ok(SimPrediction {
        p_herald,
        p_a: 1.0 - za,
        p_b: 1.0 - zb,
        p_herald_a,
        p_herald_b,
        p_a_b: 1.0 - za - zb + zab,
        p_herald_a_b,
        g2_0,
        expected_heralds: n * p_herald,
        expected_triples,
        g2_0_sigma: g2_0 / expected_triples.sqrt(),
    })
}

fn earliest(slot: &mut Option<f64>, t: f64) {
    if slot.is_none_or(|s| t < s) {
        *slot = Some(t);
    }
}

/// Non-paralysable dead time on ascending times.
pub fn apply_dead_time(times: &[f64], dead_time: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(times.len());
    for &t in times {
        if out.last().is_none_or(|&last| t >= last + dead_time) {
            out.push(t);
        }
    }
    out
}

/// Raw click times per channel (1, 2, 3) before dead time, ascending.
pub fn simulate_clicks(config: &SimConfig) -> Result<[Vec<f64>; 3]> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut clicks: [Vec<f64>; 3] = Default::default();
    let t_rep = config.rep_period;
    let (eh, r) = (config.herald_efficiency, config.splitter_ratio);
    let p = config.p_nonzero();
    let jitter = |rng: &mut ChaCha8Rng| -> f64 {
        if config.jitter > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            config.jitter * z
        } else {
            0.0
        }
    };
    if p > 0.0 {
        let skip = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
        let mut n: u64 = 0;
        loop {
            n = n.saturating_add(skip.sample(&mut rng));
            if n >= config.pulses {
                break;
            }
            let t0 = (n as f64 + 0.5) * t_rep;
            let pairs = config.sample_nonzero(&mut rng);
            let mut first: [Option<f64>; 3] = [None; 3];
            for _ in 0..pairs {
                if rng.random::<f64>() < eh {
                    earliest(&mut first[1], t0 + jitter(&mut rng));
                }
                let (arm, eff) = if rng.random::<f64>() < r {
                    (0, config.efficiency_a)
                } else {
                    (2, config.efficiency_b)
                };
                if rng.random::<f64>() < eff {
                    earliest(&mut first[arm], t0 + jitter(&mut rng));
                }
            }
            for (c, f) in clicks.iter_mut().zip(first) {
                if let Some(t) = f {
                    c.push(t);
                }
            }
            n += 1;
        }
    }
    let duration = config.duration();
    for (c, &rate) in clicks.iter_mut().zip(&config.dark_rates) {
        if rate > 0.0 {
            let gap = Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))?;
            let mut t = 0.0;
            loop {
                t += gap.sample(&mut rng);
                if t >= duration {
                    break;
                }
                c.push(t);
            }
        }
        c.sort_by(f64::total_cmp);
    }
    Ok(clicks)
}

/// Simulated tag stream on channels 1 (signal A), 2 (herald), 3 (signal B).
pub fn simulate_tags(config: &SimConfig) -> Result<TagStream> {
    let clicks = simulate_clicks(config)?;
    let tick = config.tick();
    let mut records = Vec::new();
    for (ch, times) in DEFAULT_CHANNELS.iter().zip(&clicks) {
        for t in apply_dead_time(times, config.dead_time) {
            records.push(TagRecord::new(*ch, (t.max(0.0) / tick).floor() as u64));
        }
    }
    records.sort();
    let stream = TagStream::new(records, config.tick_fs, DEFAULT_CHANNELS.to_vec())?;
    Ok(stream.with_metadata(
        Some(config.rep_period / tick),
        Some((config.duration() / tick).ceil() as u64),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SimConfig {
        SimConfig {
            pulses: 200_000,
            dark_rates: [0.0; 3],
            dead_time: 0.0,
            jitter: 0.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn nothing_in_nothing_out() {
        let c = SimConfig { mu: 0.0, ..quiet() };
        assert!(simulate_tags(&c).unwrap().is_empty());
    }

    #[test]
    fn lossless_pairs_share_a_slot() {
        let c = SimConfig {
            mu: 0.01,
            herald_efficiency: 1.0,
            efficiency_a: 1.0,
            efficiency_b: 1.0,
            ..quiet()
        };
        let s = simulate_tags(&c).unwrap();
        let h = s.times(CHANNEL_HERALD);
        let mut sig: Vec<u64> = s.times(CHANNEL_A);
        sig.extend(s.times(CHANNEL_B));
        sig.sort();
        sig.dedup();
        assert!(h.len() > 1000);
        assert_eq!(h, sig);
        let period = c.rep_period / c.tick();
        for t in h {
            let slot = (t as f64 / period).floor();
            assert!(
                ((slot + 0.5) * period - t as f64).abs() <= 1.0 + 1e-6,
                "{t} {slot} {period}"
            );
        }
    }

    #[test]
    fn deterministic_and_seeded() {
        let c = SimConfig {
            pulses: 100_000,
            ..SimConfig::default()
        };
        assert_eq!(simulate_tags(&c).unwrap(), simulate_tags(&c).unwrap());
        let d = SimConfig { seed: 7, ..c.clone() };
        assert_ne!(simulate_tags(&c).unwrap(), simulate_tags(&d).unwrap());
    }

    #[test]
    fn dead_time_never_adds_counts() {
        let mut prev = [usize::MAX; 3];
        for dt in [0.0, 1e-9, 1e-7, 1e-6, 15e-6, 1e-4] {
            let c = SimConfig {
                pulses: 200_000,
                mu: 0.2,
                herald_efficiency: 0.5,
                dead_time: dt,
                dark_rates: [1e5, 1e5, 1e5],
                ..SimConfig::default()
            };
            let s = simulate_tags(&c).unwrap();
            for (k, ch) in DEFAULT_CHANNELS.iter().enumerate() {
                let n = s.count(*ch);
                assert!(n <= prev[k], "{dt} {ch} {n} {}", prev[k]);
                prev[k] = n;
            }
        }
    }

    #[test]
    fn invalid_probabilities() {
        assert!(SimConfig {
            herald_efficiency: 1.5,
            ..quiet()
        }
        .validate()
        .is_err());
        assert!(SimConfig { mu: -0.1, ..quiet() }.validate().is_err());
        assert!(SimConfig {
            mu: 2.0,
            statistics: PairStatistics::Single,
            ..quiet()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            splitter_ratio: f64::NAN,
            ..quiet()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn single_pairs_have_no_triples() {
        let c = SimConfig {
            mu: 0.3,
            statistics: PairStatistics::Single,
            herald_efficiency: 0.8,
            efficiency_a: 0.9,
            efficiency_b: 0.9,
            ..quiet()
        };
        assert_eq!(predict(&c).unwrap().p_herald_a_b, 0.0);
        let s = simulate_tags(&c).unwrap();
        let g = crate::tags::heralded_g2(&s, 2, 1, 3, 10, 3).unwrap();
        assert_eq!(g.g2[0], 0.0);
        assert_eq!(g.coincidences[0], 0);
    }

    #[test]
    fn truncated_sampler_mean() {
        // E[n | n ≥ 1] = μ/(1 − e^{−μ}) for Poisson, 1 + μ for thermal
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (stats, mu, want) in [
            (PairStatistics::Poisson, 0.05f64, 0.05 / -(-0.05f64).exp_m1()),
            (PairStatistics::Poisson, 3.0, 3.0 / (1.0 - (-3.0f64).exp())),
            (PairStatistics::Thermal, 0.5, 1.5),
        ] {
            let c = SimConfig {
                mu,
                statistics: stats,
                ..quiet()
            };
            let n = 200_000;
            let mean = (0..n).map(|_| c.sample_nonzero(&mut rng) as f64).sum::<f64>() / n as f64;
            assert!((mean / want - 1.0).abs() < 0.01, "{stats:?} {mean} {want}");
        }
    }
}
