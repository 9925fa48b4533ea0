use serde::Serialize;

use super::record::TagStream;
use crate::rates::car;
use crate::{Error, Result};

/// Counts of `t_B − t_A` delays, bin `j` centred on `j·bin_width` ticks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram {
    pub channel_a: u8,
    pub channel_b: u8,
    pub bin_width: u64,
    /// Largest |delay| included, ticks.
    pub range: u64,
    /// Bin `j` lives at `counts[j + half_bins]`.
    pub counts: Vec<u64>,
    pub acquisition_ticks: u64,
    pub tick_s: f64,
}

impl CoincidenceHistogram {
    pub fn half_bins(&self) -> i64 {
        ((self.counts.len() - 1) / 2) as i64
    }

    /// Bin centres in ticks.
    pub fn centers(&self) -> Vec<i64> {
        let h = self.half_bins();
        (-h..=h).map(|j| j * self.bin_width as i64).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn acquisition_seconds(&self) -> f64 {
        self.acquisition_ticks as f64 * self.tick_s
    }

    /// Sum over bins whose centre is within `half_window` ticks of `center`.
    pub fn window_sum(&self, center: f64, half_window: f64) -> (u64, usize) {
        let mut sum = 0;
        let mut bins = 0;
        for (c, n) in self.centers().into_iter().zip(&self.counts) {
            if (c as f64 - center).abs() <= half_window {
                sum += n;
                bins += 1;
            }
        }
        (sum, bins)
    }
}

fn bin_index(d: i64, w: i64) -> i64 {
    (d + w / 2).div_euclid(w)
}

/// Histogram of delays `t_B − t_A` with `|delay| ≤ range`. Self pairs are
/// skipped when both channels are the same.
pub fn coincidence_histogram(
    stream: &TagStream,
    channel_a: u8,
    channel_b: u8,
    bin_width: u64,
    range: u64,
) -> Result<CoincidenceHistogram> {
    if bin_width == 0 {
        return Err(Error::invalid("bin width must be > 0"));
    }
    if !range.is_multiple_of(bin_width) {
        return Err(Error::invalid(format!(
            "range {range} is not a multiple of the bin width {bin_width}"
        )));
    }
    if range > i64::MAX as u64 / 4 {
        return Err(Error::invalid("histogram range too large"));
    }
    let w = bin_width as i64;
    let r = range as i64;
    let half = bin_index(r, w);
    let mut counts = vec![0u64; (2 * half + 1) as usize];
    let a = stream.times(channel_a);
    let b = stream.times(channel_b);
    let same = channel_a == channel_b;
    let mut lo = 0usize;
    for (ia, &ta) in a.iter().enumerate() {
        while lo < b.len() && b[lo] < ta.saturating_sub(range) {
            lo += 1;
        }
        let mut k = lo;
        while k < b.len() && b[k] <= ta.saturating_add(range) {
            if !(same && k == ia) {
                let d = if b[k] >= ta {
                    (b[k] - ta) as i64
                } else {
                    -((ta - b[k]) as i64)
                };
                counts[(bin_index(d, w) + half) as usize] += 1;
            }
            k += 1;
        }
    }
    Ok(CoincidenceHistogram {
        channel_a,
        channel_b,
        bin_width,
        range,
        counts,
        acquisition_ticks: stream.acquisition_ticks(),
        tick_s: stream.tick_duration(),
    })
}

/// O(N_A·N_B) reference used to check the merge pass.
pub fn coincidence_histogram_brute(
    stream: &TagStream,
    channel_a: u8,
    channel_b: u8,
    bin_width: u64,
    range: u64,
) -> Result<CoincidenceHistogram> {
    let mut h = coincidence_histogram(
        &TagStream::empty(stream.tick_fs()),
        channel_a,
        channel_b,
        bin_width,
        range,
    )?;
    h.acquisition_ticks = stream.acquisition_ticks();
    let w = bin_width as i64;
    let half = h.half_bins();
    let recs = stream.records();
    for (i, ra) in recs.iter().enumerate() {
        if ra.channel != channel_a {
            continue;
        }
        for (j, rb) in recs.iter().enumerate() {
            if rb.channel != channel_b || i == j {
                continue;
            }
            let d = rb.ticks as i128 - ra.ticks as i128;
            if d.unsigned_abs() <= range as u128 {
                h.counts[(bin_index(d as i64, w) + half) as usize] += 1;
            }
        }
    }
    Ok(h)
}

/// Zero-delay peak against the side peaks at ±1, ±2 pump periods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakAccidentals {
    pub peak_counts: u64,
    /// Mean over the four side windows.
    pub accidental_counts: f64,
    pub side_counts: [u64; 4],
    pub peak_rate: f64,
    pub accidental_rate: f64,
    /// Absent when no accidentals were seen.
    pub car: Option<f64>,
    /// Window in ticks.
    pub window: u64,
}

pub fn peak_and_accidentals(
    hist: &CoincidenceHistogram,
    rep_period_ticks: f64,
    window: u64,
) -> Result<PeakAccidentals> {
    if !(rep_period_ticks > 0.0 && rep_period_ticks.is_finite()) {
        return Err(Error::invalid("repetition period must be > 0"));
    }
    if window == 0 {
        return Err(Error::invalid("coincidence window must be > 0"));
    }
    let hw = window as f64 / 2.0;
    let (peak, _) = hist.window_sum(0.0, hw);
    let mut side = [0u64; 4];
    for (s, k) in side.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
        let (n, bins) = hist.window_sum(k * rep_period_ticks, hw);
        if bins == 0 {
            return Err(Error::invalid(format!(
                "histogram range {} ticks does not reach the side peak at {} periods",
                hist.range, k
            )));
        }
        *s = n;
    }
    let acc = side.iter().sum::<u64>() as f64 / 4.0;
    let t = hist.acquisition_seconds();
    let (peak_rate, accidental_rate) = if t > 0.0 {
        (peak as f64 / t, acc / t)
    } else {
        (0.0, 0.0)
    };
    let car = car(peak as f64, acc).ok();
    Ok(PeakAccidentals {
        peak_counts: peak,
        accidental_counts: acc,
        side_counts: side,
        peak_rate,
        accidental_rate,
        car,
        window,
    })
}

/// One tooth of the pulsed coincidence comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombPeak {
    pub order: i64,
    /// Centre of the tallest bin within half a period of `order·T`.
    pub position: i64,
    pub height: u64,
    /// Counts within a quarter period.
    pub area: u64,
}

pub fn comb_peaks(hist: &CoincidenceHistogram, rep_period_ticks: f64, max_order: i64) -> Vec<CombPeak> {
    let centers = hist.centers();
    (-max_order..=max_order)
        .filter_map(|k| {
            let c = k as f64 * rep_period_ticks;
            let mut best: Option<(i64, u64)> = None;
            let mut area = 0;
            for (&x, &n) in centers.iter().zip(&hist.counts) {
                let d = (x as f64 - c).abs();
                if d < rep_period_ticks / 2.0 && best.is_none_or(|b| n > b.1) {
                    best = Some((x, n));
                }
                if d <= rep_period_ticks / 4.0 {
                    area += n;
                }
            }
            best.map(|(position, height)| CombPeak {
                order: k,
                position,
                height,
                area,
            })
        })
        .collect()
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
    fn single_pair() {
        let s = stream(&[(1, 100), (3, 110)]);
        let h = coincidence_histogram(&s, 1, 3, 4, 20).unwrap();
        assert_eq!(h.counts.len(), 11);
        // 10 ticks → (10 + 2) div 4 = 3
        let c = h.centers();
        let j = h.counts.iter().position(|&n| n == 1).unwrap();
        assert_eq!(c[j], 12);
        assert_eq!(h.total(), 1);
        let back = coincidence_histogram(&s, 3, 1, 4, 20).unwrap();
        assert_eq!(
            back.centers()[back.counts.iter().position(|&n| n == 1).unwrap()],
            -8
        );
    }

    #[test]
    fn range_is_inclusive() {
        let s = stream(&[(1, 100), (3, 120), (3, 121), (3, 79), (3, 80)]);
        let h = coincidence_histogram(&s, 1, 3, 1, 20).unwrap();
        assert_eq!(h.total(), 2);
        assert_eq!(h, coincidence_histogram_brute(&s, 1, 3, 1, 20).unwrap());
    }

    #[test]
    fn autocorrelation_skips_self() {
        let s = stream(&[(1, 5), (1, 5), (1, 9)]);
        let h = coincidence_histogram(&s, 1, 1, 1, 10).unwrap();
        assert_eq!(h.total(), 6);
        assert_eq!(h, coincidence_histogram_brute(&s, 1, 1, 1, 10).unwrap());
    }

    #[test]
    fn merge_matches_brute_force() {
        let mut recs = Vec::new();
        let mut x: u64 = 12345;
        for _ in 0..400 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            recs.push((1 + ((x >> 33) % 3) as u8, (x >> 40) % 5000));
        }
        let s = stream(&recs);
        for (a, b) in [(1, 3), (2, 1), (2, 2)] {
            for (w, r) in [(1, 50), (7, 301), (10, 20)] {
                assert_eq!(
                    coincidence_histogram(&s, a, b, w, r).unwrap(),
                    coincidence_histogram_brute(&s, a, b, w, r).unwrap()
                );
            }
        }
    }

    #[test]
    fn car_and_windows() {
        let h = CoincidenceHistogram {
            channel_a: 1,
            channel_b: 3,
            bin_width: 10,
            range: 250,
            counts: {
                let mut c = vec![1u64; 51];
                c[25] = 41;
                c
            },
            acquisition_ticks: 1_000_000,
            tick_s: 1e-12,
        };
        let pa = peak_and_accidentals(&h, 100.0, 10).unwrap();
        assert_eq!(pa.peak_counts, 41);
        assert_eq!(pa.accidental_counts, 1.0);
        assert_eq!(pa.car, Some(41.0));
        assert!((pa.peak_rate - 41.0 / 1e-6).abs() < 1e-3);
        // window spanning the whole histogram sees the same counts everywhere
        let all = peak_and_accidentals(&h, 100.0, 10_000).unwrap();
        assert_eq!(all.car, Some(1.0));
        assert!(peak_and_accidentals(&h, 200.0, 10).is_err());
        let mut z = h.clone();
        z.counts = vec![0; 51];
        z.counts[25] = 3;
        assert_eq!(peak_and_accidentals(&z, 100.0, 10).unwrap().car, None);
    }
}
