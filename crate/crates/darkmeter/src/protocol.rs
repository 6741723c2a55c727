//! Shuttered count series and the open-minus-closed difference construction.
//!
//! A campaign records photon counts in fixed-length intervals while a shutter
//! alternates between open and closed blocks. Differencing the i-th interval
//! of an open block against the i-th interval of the adjacent closed block
//! cancels slow dark-rate drift; the resulting difference distribution is the
//! input to all downstream inference.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("interval {index} (t_start {t_start}) breaks block alternation: expected {expected}, found {found}")]
    NonAlternating {
        index: usize,
        t_start: u64,
        expected: Shutter,
        found: Shutter,
    },
    #[error("timestamp gap at interval {index}: expected t_start {expected}, found {found}")]
    TimestampGap { index: usize, expected: u64, found: u64 },
    #[error("no usable interval pairs (need at least one complete open/closed block pair)")]
    Empty,
    #[error("insufficient data: need at least {need} samples, have {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("CSV error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shutter {
    Open,
    Closed,
}

impl Shutter {
    pub fn flipped(self) -> Shutter {
        match self {
            Shutter::Open => Shutter::Closed,
            Shutter::Closed => Shutter::Open,
        }
    }

    fn code(self) -> char {
        match self {
            Shutter::Open => 'O',
            Shutter::Closed => 'C',
        }
    }
}

impl fmt::Display for Shutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// One counting interval: start time, shutter state, raw counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountInterval {
    /// Seconds since campaign start.
    pub t_start: u64,
    pub shutter: Shutter,
    pub counts: u32,
}

/// The raw campaign record: a contiguous sequence of counting intervals.
#[derive(Debug, Clone, Default)]
pub struct CountSeries {
    pub intervals: Vec<CountInterval>,
}

/// Block structure of the shutter cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShutterProtocol {
    /// Intervals per open or closed block.
    #[serde(default = "default_block_len")]
    pub block_len: usize,
    /// Interval length in seconds.
    #[serde(default = "default_interval_len")]
    pub interval_len: u32,
    /// Drop the first interval of every block (shutter motion).
    #[serde(default = "default_discard_first")]
    pub discard_first: bool,
}

fn default_block_len() -> usize {
    10
}
fn default_interval_len() -> u32 {
    1
}
fn default_discard_first() -> bool {
    true
}

impl Default for ShutterProtocol {
    fn default() -> Self {
        ShutterProtocol {
            block_len: default_block_len(),
            interval_len: default_interval_len(),
            discard_first: default_discard_first(),
        }
    }
}

impl ShutterProtocol {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.interval_len == 0 {
            return Err(ProtocolError::InvalidProtocol(
                "interval_len must be positive".into(),
            ));
        }
        let min_len = if self.discard_first { 2 } else { 1 };
        if self.block_len < min_len {
            return Err(ProtocolError::InvalidProtocol(format!(
                "block_len must be at least {min_len} (got {})",
                self.block_len
            )));
        }
        Ok(())
    }

    /// Usable intervals per block after discarding.
    pub fn usable_per_block(&self) -> usize {
        self.block_len - usize::from(self.discard_first)
    }

    /// Difference samples produced by one wall-clock hour of data, if the
    /// hour divides evenly into block pairs.
    pub fn samples_per_hour(&self) -> usize {
        let intervals_per_hour = 3600 / self.interval_len as usize;
        let pairs_per_hour = intervals_per_hour / (2 * self.block_len);
        pairs_per_hour * self.usable_per_block()
    }
}

/// Per-sample provenance: which block pair and which within-block interval
/// (1-based) a difference came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub pair: u32,
    pub interval: u16,
}

/// Paired open-minus-closed differences in counts per second.
#[derive(Debug, Clone)]
pub struct DifferenceSeries {
    samples: Vec<f64>,
    times: Vec<u64>,
    pairing: Vec<PairIndex>,
    protocol: ShutterProtocol,
}

impl DifferenceSeries {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Time of the open interval each sample came from, seconds since start.
    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn pairing(&self) -> &[PairIndex] {
        &self.pairing
    }

    pub fn protocol(&self) -> &ShutterProtocol {
        &self.protocol
    }

    /// Write as single-column CSV with header `delta_cnt_per_s`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), ProtocolError> {
        writeln!(w, "delta_cnt_per_s")?;
        for s in &self.samples {
            writeln!(w, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyStat {
    pub hour: u32,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    /// True when the hour holds fewer samples than a complete hour would.
    pub partial: bool,
}

/// First and second moments of a sample set, with a per-hour breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub n: usize,
    pub hourly: Vec<HourlyStat>,
}

/// Construct the difference distribution from an alternating-block series.
///
/// Blocks are consumed in adjacent non-overlapping pairs; within a pair the
/// i-th open interval is differenced against the i-th closed interval. The
/// first interval of every block is dropped when the protocol says so, and
/// trailing blocks without a partner are dropped.
pub fn build_differences(
    series: &CountSeries,
    protocol: &ShutterProtocol,
) -> Result<DifferenceSeries, ProtocolError> {
    protocol.validate()?;
    let intervals = &series.intervals;
    if intervals.is_empty() {
        return Err(ProtocolError::Empty);
    }

    let block_len = protocol.block_len;
    let step = protocol.interval_len as u64;
    let first_state = intervals[0].shutter;
    let t0 = intervals[0].t_start;

    for (k, iv) in intervals.iter().enumerate() {
        let expected_t = t0 + k as u64 * step;
        if iv.t_start != expected_t {
            return Err(ProtocolError::TimestampGap {
                index: k,
                expected: expected_t,
                found: iv.t_start,
            });
        }
        let block = k / block_len;
        let expected_state = if block.is_multiple_of(2) {
            first_state
        } else {
            first_state.flipped()
        };
        if iv.shutter != expected_state {
            return Err(ProtocolError::NonAlternating {
                index: k,
                t_start: iv.t_start,
                expected: expected_state,
                found: iv.shutter,
            });
        }
    }

    let complete_blocks = intervals.len() / block_len;
    let pairs = complete_blocks / 2;
    if pairs == 0 {
        return Err(ProtocolError::Empty);
    }

    let start = usize::from(protocol.discard_first);
    let per_pair = block_len - start;
    let mut samples = Vec::with_capacity(pairs * per_pair);
    let mut times = Vec::with_capacity(pairs * per_pair);
    let mut pairing = Vec::with_capacity(pairs * per_pair);

    for p in 0..pairs {
        let a = 2 * p * block_len;
        let b = a + block_len;
        // Alternation was validated above, so exactly one of the two blocks
        // in the pair is open.
        let (open_base, closed_base) = if intervals[a].shutter == Shutter::Open {
            (a, b)
        } else {
            (b, a)
        };
        for i in start..block_len {
            let open = &intervals[open_base + i];
            let closed = &intervals[closed_base + i];
            let delta = (open.counts as f64 - closed.counts as f64) / step as f64;
            samples.push(delta);
            times.push(open.t_start);
            pairing.push(PairIndex {
                pair: p as u32,
                interval: (i + 1) as u16,
            });
        }
    }

    Ok(DifferenceSeries {
        samples,
        times,
        pairing,
        protocol: *protocol,
    })
}

/// Summarise a difference series: global moments plus hourly breakdown.
pub fn summarize(diff: &DifferenceSeries) -> Result<SeriesSummary, ProtocolError> {
    if diff.n() < 2 {
        return Err(ProtocolError::InsufficientData {
            need: 2,
            have: diff.n(),
        });
    }
    let (mean, variance) = crate::math::sample_mean_var(&diff.samples);
    let hourly = hourly_breakdown(&diff.samples, &diff.times, diff.protocol.samples_per_hour());
    Ok(SeriesSummary {
        mean,
        variance,
        n: diff.n(),
        hourly,
    })
}

fn hourly_breakdown(samples: &[f64], times: &[u64], expected_per_hour: usize) -> Vec<HourlyStat> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let hour = (times[i] / 3600) as u32;
        let mut j = i;
        while j < samples.len() && (times[j] / 3600) as u32 == hour {
            j += 1;
        }
        let chunk = &samples[i..j];
        let (mean, var) = crate::math::sample_mean_var(chunk);
        out.push(HourlyStat {
            hour,
            mean,
            sd: var.sqrt(),
            n: chunk.len(),
            partial: expected_per_hour > 0 && chunk.len() < expected_per_hour,
        });
        i = j;
    }
    out
}

impl CountSeries {
    /// Moments of the per-second count rate for one shutter state.
    pub fn summarize_shutter(
        &self,
        shutter: Shutter,
        interval_len: u32,
    ) -> Result<SeriesSummary, ProtocolError> {
        let rates: Vec<f64> = self
            .intervals
            .iter()
            .filter(|iv| iv.shutter == shutter)
            .map(|iv| iv.counts as f64 / interval_len as f64)
            .collect();
        if rates.len() < 2 {
            return Err(ProtocolError::InsufficientData {
                need: 2,
                have: rates.len(),
            });
        }
        let times: Vec<u64> = self
            .intervals
            .iter()
            .filter(|iv| iv.shutter == shutter)
            .map(|iv| iv.t_start)
            .collect();
        let (mean, variance) = crate::math::sample_mean_var(&rates);
        let hourly = hourly_breakdown(&rates, &times, 0);
        Ok(SeriesSummary {
            mean,
            variance,
            n: rates.len(),
            hourly,
        })
    }

    /// Write as CSV with header `t_start_s,shutter,counts`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), ProtocolError> {
        writeln!(w, "t_start_s,shutter,counts")?;
        for iv in &self.intervals {
            writeln!(w, "{},{},{}", iv.t_start, iv.shutter, iv.counts)?;
        }
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<(), ProtocolError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn read_csv_str(text: &str) -> Result<CountSeries, ProtocolError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "t_start_s,shutter,counts" => {}
            Some((_, header)) => {
                return Err(ProtocolError::Csv {
                    line: 1,
                    msg: format!("expected header `t_start_s,shutter,counts`, found `{header}`"),
                })
            }
            None => {
                return Err(ProtocolError::Csv {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let mut intervals = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (t, s, c) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(t), Some(s), Some(c), None) => (t, s, c),
                _ => {
                    return Err(ProtocolError::Csv {
                        line: lineno,
                        msg: format!("expected 3 fields, found `{line}`"),
                    })
                }
            };
            let t_start: u64 = t.trim().parse().map_err(|_| ProtocolError::Csv {
                line: lineno,
                msg: format!("invalid t_start_s `{t}`"),
            })?;
            let shutter = match s.trim() {
                "O" => Shutter::Open,
                "C" => Shutter::Closed,
                other => {
                    return Err(ProtocolError::Csv {
                        line: lineno,
                        msg: format!("invalid shutter `{other}` (expected O or C)"),
                    })
                }
            };
            let counts: u32 = c.trim().parse().map_err(|_| ProtocolError::Csv {
                line: lineno,
                msg: format!("invalid counts `{c}` (expected non-negative integer)"),
            })?;
            intervals.push(CountInterval {
                t_start,
                shutter,
                counts,
            });
        }
        Ok(CountSeries { intervals })
    }

    pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<CountSeries, ProtocolError> {
        let text = fs::read_to_string(path)?;
        Self::read_csv_str(&text)
    }
}
