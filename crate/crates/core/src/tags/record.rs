use std::fmt::Write as _;

use serde::Serialize;

use crate::{Error, Result};

/// Binary stream magic.
pub const MAGIC: &[u8; 5] = b"TTAG1";
/// Bytes per binary record: u8 channel + u64 ticks.
pub const RECORD_BYTES: usize = 9;
/// 81 ps.
pub const DEFAULT_TICK_FS: u32 = 81_000;
pub const DEFAULT_CHANNELS: [u8; 3] = [1, 2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TagRecord {
    pub ticks: u64,
    pub channel: u8,
}

impl TagRecord {
    pub fn new(channel: u8, ticks: u64) -> Self {
        TagRecord { ticks, channel }
    }
}

/// Time-ordered detector events. Ties are ordered by channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagStream {
    records: Vec<TagRecord>,
    tick_fs: u32,
    channels: Vec<u8>,
    /// Pump period in ticks, if known.
    pub rep_period_ticks: Option<f64>,
    /// Acquisition length in ticks, if known.
    pub duration_ticks: Option<u64>,
    /// Records that arrived before a predecessor and were re-sorted.
    pub reordered: usize,
}

impl TagStream {
    /// Builds a stream, sorting if needed and counting displaced records.
    pub fn new(mut records: Vec<TagRecord>, tick_fs: u32, channels: Vec<u8>) -> Result<Self> {
        if tick_fs == 0 {
            return Err(Error::invalid("tick duration must be > 0"));
        }
        if let Some(r) = records.iter().find(|r| !channels.contains(&r.channel)) {
            return Err(Error::invalid(format!(
                "channel {} not in declared set {:?}",
                r.channel, channels
            )));
        }
        let reordered = records.windows(2).filter(|w| w[1] < w[0]).count();
        if reordered > 0 {
            records.sort();
        }
        Ok(TagStream {
            records,
            tick_fs,
            channels,
            rep_period_ticks: None,
            duration_ticks: None,
            reordered,
        })
    }

    pub fn empty(tick_fs: u32) -> Self {
        TagStream {
            records: Vec::new(),
            tick_fs,
            channels: DEFAULT_CHANNELS.to_vec(),
            rep_period_ticks: None,
            duration_ticks: None,
            reordered: 0,
        }
    }

    pub fn records(&self) -> &[TagRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn channels(&self) -> &[u8] {
        &self.channels
    }

    pub fn tick_fs(&self) -> u32 {
        self.tick_fs
    }

    /// Seconds per tick.
    pub fn tick_duration(&self) -> f64 {
        self.tick_fs as f64 * 1e-15
    }

    /// Timestamps of one channel, ascending.
    pub fn times(&self, channel: u8) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| r.ticks)
            .collect()
    }

    pub fn count(&self, channel: u8) -> usize {
        self.records.iter().filter(|r| r.channel == channel).count()
    }

    /// Declared duration, else one past the last timestamp.
    pub fn acquisition_ticks(&self) -> u64 {
        self.duration_ticks
            .unwrap_or_else(|| self.records.last().map_or(0, |r| r.ticks + 1))
    }

    /// Same events shifted by `offset` ticks.
    pub fn shifted(&self, offset: u64) -> Result<TagStream> {
        let records = self
            .records
            .iter()
            .map(|r| {
                r.ticks
                    .checked_add(offset)
                    .map(|t| TagRecord::new(r.channel, t))
                    .ok_or_else(|| Error::invalid("timestamp overflow"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TagStream {
            records,
            duration_ticks: self.duration_ticks.map(|d| d + offset),
            ..self.clone()
        })
    }

    pub fn with_metadata(mut self, rep_period_ticks: Option<f64>, duration_ticks: Option<u64>) -> Self {
        self.rep_period_ticks = rep_period_ticks;
        self.duration_ticks = duration_ticks;
        self
    }
}

fn parse_tick_ps(v: &str, lineno: usize) -> Result<u32> {
    let ps: f64 = v
        .parse()
        .map_err(|_| Error::line(lineno, format!("bad tick duration '{v}'")))?;
    let fs = (ps * 1000.0).round();
    if !(fs >= 1.0 && fs <= u32::MAX as f64) || ((ps * 1000.0) - fs).abs() > 1e-6 {
        return Err(Error::line(
            lineno,
            format!("tick duration {v} ps is not a positive whole number of femtoseconds"),
        ));
    }
    Ok(fs as u32)
}

/// Text format: `channel<whitespace>ticks` per line, `#` comments, header
/// directives `#tick_ps`, `#channels`, `#rep_period_ticks`, `#duration_ticks`.
/// `channels` is the declared set unless the input carries `#channels`.
pub fn parse_text(text: &str, channels: &[u8]) -> Result<TagStream> {
    let mut tick_fs = DEFAULT_TICK_FS;
    let mut declared = channels.to_vec();
    let mut rep = None;
    let mut duration = None;
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            let key = it.next().unwrap_or("");
            let value = it.next();
            match (key, value) {
                ("tick_ps", Some(v)) => tick_fs = parse_tick_ps(v, lineno)?,
                ("channels", Some(v)) => {
                    declared = v
                        .split(',')
                        .map(|c| {
                            c.trim()
                                .parse::<u8>()
                                .map_err(|_| Error::line(lineno, format!("bad channel '{c}'")))
                        })
                        .collect::<Result<_>>()?;
                }
                ("rep_period_ticks", Some(v)) => {
                    let p: f64 = v
                        .parse()
                        .ok()
                        .filter(|p: &f64| *p > 0.0 && p.is_finite())
                        .ok_or_else(|| Error::line(lineno, format!("bad rep period '{v}'")))?;
                    rep = Some(p);
                }
                ("duration_ticks", Some(v)) => {
                    duration = Some(
                        v.parse::<u64>()
                            .map_err(|_| Error::line(lineno, format!("bad duration '{v}'")))?,
                    );
                }
                _ => {}
            }
            continue;
        }
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(c), Some(t), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::line(lineno, "expected 'channel<TAB>ticks'"));
        };
        let channel: u8 = c
            .parse()
            .map_err(|_| Error::line(lineno, format!("bad channel '{c}'")))?;
        if !declared.contains(&channel) {
            return Err(Error::line(
                lineno,
                format!("unknown channel {channel} (declared {declared:?})"),
            ));
        }
        if t.starts_with('-') && t[1..].bytes().all(|b| b.is_ascii_digit()) && t.len() > 1 {
            return Err(Error::line(lineno, format!("negative timestamp {t}")));
        }
        let ticks: u64 = t
            .parse()
            .map_err(|_| Error::line(lineno, format!("bad timestamp '{t}'")))?;
        records.push(TagRecord::new(channel, ticks));
    }
    Ok(TagStream::new(records, tick_fs, declared)?.with_metadata(rep, duration))
}

/// Binary format: `TTAG1`, u32 LE tick in fs, then 9-byte records
/// (u8 channel, u64 LE ticks).
pub fn parse_binary(bytes: &[u8], channels: &[u8]) -> Result<TagStream> {
    let err = |offset: usize, msg: String| Error::ParseByte { offset, msg };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(err(0, "missing TTAG1 magic".into()));
    }
    let header = MAGIC.len() + 4;
    if bytes.len() < header {
        return Err(err(MAGIC.len(), "truncated tick-duration field".into()));
    }
    let tick_fs = u32::from_le_bytes(bytes[MAGIC.len()..header].try_into().unwrap());
    if tick_fs == 0 {
        return Err(err(MAGIC.len(), "tick duration is zero".into()));
    }
    let body = &bytes[header..];
    if !body.len().is_multiple_of(RECORD_BYTES) {
        let off = header + body.len() / RECORD_BYTES * RECORD_BYTES;
        return Err(err(
            off,
            format!("trailing partial record of {} bytes", body.len() % RECORD_BYTES),
        ));
    }
    let mut records = Vec::with_capacity(body.len() / RECORD_BYTES);
    for (k, rec) in body.chunks_exact(RECORD_BYTES).enumerate() {
        let off = header + k * RECORD_BYTES;
        let channel = rec[0];
        if !channels.contains(&channel) {
            return Err(err(off, format!("unknown channel {channel}")));
        }
        let ticks = u64::from_le_bytes(rec[1..].try_into().unwrap());
        records.push(TagRecord::new(channel, ticks));
    }
    TagStream::new(records, tick_fs, channels.to_vec())
}

/// Picks the binary parser when the input starts with the magic.
pub fn parse_tags(bytes: &[u8], channels: &[u8]) -> Result<TagStream> {
    if bytes.starts_with(MAGIC) {
        return parse_binary(bytes, channels);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| Error::ParseByte {
        offset: e.valid_up_to(),
        msg: "input is neither TTAG1 binary nor UTF-8 text".into(),
    })?;
    parse_text(text, channels)
}

pub fn write_text(stream: &TagStream) -> String {
    let mut s = String::new();
    let fs = stream.tick_fs;
    if fs.is_multiple_of(1000) {
        let _ = writeln!(s, "#tick_ps {}", fs / 1000);
    } else {
        let _ = writeln!(s, "#tick_ps {}.{:03}", fs / 1000, fs % 1000);
    }
    let ch: Vec<String> = stream.channels.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(s, "#channels {}", ch.join(","));
    if let Some(p) = stream.rep_period_ticks {
        let _ = writeln!(s, "#rep_period_ticks {p:?}");
    }
    if let Some(d) = stream.duration_ticks {
        let _ = writeln!(s, "#duration_ticks {d}");
    }
    for r in &stream.records {
        let _ = writeln!(s, "{}\t{}", r.channel, r.ticks);
    }
    s
}

pub fn write_binary(stream: &TagStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + RECORD_BYTES * stream.records.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&stream.tick_fs.to_le_bytes());
    for r in &stream.records {
        out.push(r.channel);
        out.extend_from_slice(&r.ticks.to_le_bytes());
    }
    out
}
