use serde::Serialize;

use super::record::TagStream;
use crate::{Error, Result};

/// Heralded autocorrelation versus herald separation `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldedG2Histogram {
    pub herald_channel: u8,
    pub channel_a: u8,
    pub channel_b: u8,
    /// Ticks; a click counts when `t − t_herald ∈ [−window/2, window − window/2)`.
    pub window: u64,
    pub heralds: u64,
    /// `Σ A_i`
    pub heralded_a: u64,
    /// `Σ B_i`
    pub heralded_b: u64,
    /// `Σ_i A_i·B_{i+m}` for m = 0..=m_max.
    pub coincidences: Vec<u64>,
    /// `coincidences[m]·H / (ΣA·ΣB)`
    pub g2: Vec<f64>,
    /// Poisson one-sigma from the coincidence count (zero counts give the
    /// one-count bound).
    pub sigma: Vec<f64>,
}

impl HeraldedG2Histogram {
    pub fn max_separation(&self) -> usize {
        self.g2.len() - 1
    }
}

/// Flags per herald: whether `times` has an event in the herald's window.
fn flags(heralds: &[u64], times: &[u64], window: u64) -> Vec<bool> {
    let h = window / 2;
    let mut lo = 0;
    heralds
        .iter()
        .map(|&t| {
            let start = t.saturating_sub(h);
            let end = t.saturating_add(window - h);
            while lo < times.len() && times[lo] < start {
                lo += 1;
            }
            lo < times.len() && times[lo] < end
        })
        .collect()
}

fn assemble(
    herald_channel: u8,
    channel_a: u8,
    channel_b: u8,
    window: u64,
    a: &[bool],
    b: &[bool],
    m_max: usize,
) -> Result<HeraldedG2Histogram> {
    let heralds = a.len() as u64;
    if heralds == 0 {
        return Err(Error::invalid("no herald events"));
    }
    let sa = a.iter().filter(|&&x| x).count() as u64;
    let sb = b.iter().filter(|&&x| x).count() as u64;
    if sa == 0 || sb == 0 {
        return Err(Error::invalid(format!(
            "no heralded clicks on channel {}",
            if sa == 0 { channel_a } else { channel_b }
        )));
    }
    let norm = heralds as f64 / (sa as f64 * sb as f64);
    let coincidences: Vec<u64> = (0..=m_max)
        .map(|m| a.iter().zip(b.iter().skip(m)).filter(|(x, y)| **x && **y).count() as u64)
        .collect();
    let g2 = coincidences.iter().map(|&c| c as f64 * norm).collect();
    let sigma = coincidences
        .iter()
        .map(|&c| (c.max(1) as f64).sqrt() * norm)
        .collect();
    Ok(HeraldedG2Histogram {
        herald_channel,
        channel_a,
        channel_b,
        window,
        heralds,
        heralded_a: sa,
        heralded_b: sb,
        coincidences,
        g2,
        sigma,
    })
}

/// `g²_h(m) = [Σ_i A_i B_{i+m}]·H / [(Σ A_i)(Σ B_i)]` over the heralds of
/// `herald_channel`.
pub fn heralded_g2(
    stream: &TagStream,
    herald_channel: u8,
    channel_a: u8,
    channel_b: u8,
    window: u64,
    m_max: usize,
) -> Result<HeraldedG2Histogram> {
    if window == 0 {
        return Err(Error::invalid("window must be >= 1 tick"));
    }
    let h = stream.times(herald_channel);
    let a = flags(&h, &stream.times(channel_a), window);
    let b = flags(&h, &stream.times(channel_b), window);
    assemble(herald_channel, channel_a, channel_b, window, &a, &b, m_max)
}

/// Direct per-herald scan of every record; reference for `heralded_g2`.
pub fn heralded_g2_brute(
    stream: &TagStream,
    herald_channel: u8,
    channel_a: u8,
    channel_b: u8,
    window: u64,
    m_max: usize,
) -> Result<HeraldedG2Histogram> {
    if window == 0 {
        return Err(Error::invalid("window must be >= 1 tick"));
    }
    let lo = -((window / 2) as i128);
    let hi = lo + window as i128;
    let recs = stream.records();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in recs.iter().filter(|r| r.channel == herald_channel) {
        let hit = |ch: u8| {
            recs.iter().any(|x| {
                let d = x.ticks as i128 - r.ticks as i128;
                x.channel == ch && d >= lo && d < hi
            })
        };
        a.push(hit(channel_a));
        b.push(hit(channel_b));
    }
    assemble(herald_channel, channel_a, channel_b, window, &a, &b, m_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::record::{TagRecord, DEFAULT_CHANNELS};

    fn stream(recs: &[(u8, u64)]) -> TagStream {
        TagStream::new(
            recs.iter().map(|&(c, t)| TagRecord::new(c, t)).collect(),
            81_000,
            DEFAULT_CHANNELS.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn window_edges() {
        // window 10 covers [-5, 5)
        let heralds = [100, 200];
        assert_eq!(flags(&heralds, &[95, 204], 10), vec![true, true]);
        assert_eq!(flags(&heralds, &[105, 194], 10), vec![false, false]);
        assert_eq!(flags(&heralds, &[150], 101), vec![true, true]);
    }

    #[test]
    fn herald_near_zero() {
        let s = stream(&[(2, 2), (1, 0), (3, 6)]);
        let g = heralded_g2(&s, 2, 1, 3, 10, 0).unwrap();
        assert_eq!(g.coincidences, vec![1]);
        assert_eq!(g, heralded_g2_brute(&s, 2, 1, 3, 10, 0).unwrap());
    }

    #[test]
    fn estimator_by_hand() {
        // heralds at 100, 200, 300, 400; A after 1st, 2nd; B after 2nd, 3rd
        let s = stream(&[
            (2, 100),
            (1, 101),
            (2, 200),
            (1, 199),
            (3, 202),
            (2, 300),
            (3, 300),
            (2, 400),
        ]);
        let g = heralded_g2(&s, 2, 1, 3, 10, 2).unwrap();
        assert_eq!(g.heralds, 4);
        assert_eq!((g.heralded_a, g.heralded_b), (2, 2));
        assert_eq!(g.coincidences, vec![1, 2, 1]);
        assert_eq!(g.g2, vec![1.0, 2.0, 1.0]);
        assert_eq!(g, heralded_g2_brute(&s, 2, 1, 3, 10, 2).unwrap());
    }

    #[test]
    fn undefined_normalisation() {
        assert!(heralded_g2(&stream(&[(1, 1), (3, 1)]), 2, 1, 3, 10, 1).is_err());
        assert!(heralded_g2(&stream(&[(2, 1), (3, 1)]), 2, 1, 3, 10, 1).is_err());
        assert!(heralded_g2(&stream(&[(2, 1), (1, 1)]), 2, 1, 3, 10, 1).is_err());
        assert!(heralded_g2(&stream(&[(2, 1), (1, 1), (3, 1)]), 2, 1, 3, 0, 1).is_err());
    }
}
