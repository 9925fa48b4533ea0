//! Time-tag streams: parsing, coincidence histograms, heralded g², and a
//! seeded pulsed-source simulator.

mod coincidence;
mod g2;
mod record;
mod simulate;

pub use coincidence::{
    coincidence_histogram, coincidence_histogram_brute, comb_peaks, peak_and_accidentals,
    CoincidenceHistogram, CombPeak, PeakAccidentals,
};
pub use g2::{heralded_g2, heralded_g2_brute, HeraldedG2Histogram};
pub use record::{
    parse_binary, parse_tags, parse_text, write_binary, write_text, TagRecord, TagStream, DEFAULT_CHANNELS,
    DEFAULT_TICK_FS, MAGIC, RECORD_BYTES,
};
pub use simulate::{
    apply_dead_time, predict, simulate_clicks, simulate_tags, PairStatistics, SimConfig, SimPrediction,
    CHANNEL_A, CHANNEL_B, CHANNEL_HERALD,
};

/// 810 ps at the default tick.
pub const DEFAULT_WINDOW_TICKS: u64 = 10;
