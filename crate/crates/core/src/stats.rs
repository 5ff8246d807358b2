//! Per-batch timing logs and their summary statistics.
//!
//! A [`SampleLog`] is one repetition of a benchmark: a batch index, start
//! offset and duration per successful batch, plus the batches that failed.
//! [`compute_stats`] drops the first `settle` batches and summarizes the rest
//! with min/avg/median/max and the sample (n-1) standard deviation.
//!
//! Logs archive to a delimited text format:
//!
//! ```text
//! # modlink-samples v1
//! # subject = eem
//! # endpoint = 127.0.0.1:5020
//! # batch_size = 10
//! # spans = 1
//! # repetition = 0
//! # failed = 17 timeout
//! batch_index,start_us,duration_us
//! 0,0,1290
//! 1,1302,1275
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

const ARCHIVE_MAGIC: &str = "# modlink-samples v1";
const COLUMNS: &str = "batch_index,start_us,duration_us";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub batch_index: u64,
    /// Offset from the start of the repetition, monotonic clock.
    pub start_us: u64,
    pub duration_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub batch_index: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogMeta {
    pub subject: String,
    pub endpoint: String,
    /// Fields read per batch.
    pub batch_size: usize,
    /// Requests per batch.
    pub spans: usize,
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleLog {
    pub meta: LogMeta,
    pub samples: Vec<Sample>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchStats {
    /// Samples the statistics are computed over.
    pub count: usize,
    /// Samples removed by the settle cut.
    pub settled: usize,
    /// Failed batches, never part of the statistics.
    pub failed: usize,
    pub min_us: f64,
    pub avg_us: f64,
    pub median_us: f64,
    pub max_us: f64,
    pub stddev_us: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("settle count {settle} leaves nothing of {batches} batches")]
    SettleTooLarge { settle: usize, batches: usize },
    #[error("no successful samples after the settle cut")]
    NoSamples,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sample archive line {line}: {message}")]
pub struct ArchiveError {
    pub line: usize,
    pub message: String,
}

impl SampleLog {
    pub fn new(meta: LogMeta) -> Self {
        SampleLog {
            meta,
            samples: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Batches attempted: successes plus failures.
    pub fn batches(&self) -> usize {
        self.samples.len() + self.failures.len()
    }

    pub fn durations(&self) -> impl Iterator<Item = u64> + '_ {
        self.samples.iter().map(|s| s.duration_us)
    }

    /// Renders the archive text format.
    pub fn to_archive(&self) -> String {
        let mut out = String::with_capacity(64 + self.samples.len() * 20);
        let m = &self.meta;
        let _ = writeln!(out, "{ARCHIVE_MAGIC}");
        let _ = writeln!(out, "# subject = {}", one_line(&m.subject));
        let _ = writeln!(out, "# endpoint = {}", one_line(&m.endpoint));
        let _ = writeln!(out, "# batch_size = {}", m.batch_size);
        let _ = writeln!(out, "# spans = {}", m.spans);
        let _ = writeln!(out, "# repetition = {}", m.repetition);
        for f in &self.failures {
            let _ = writeln!(out, "# failed = {} {}", f.batch_index, one_line(&f.message));
        }
        let _ = writeln!(out, "{COLUMNS}");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.batch_index, s.start_us, s.duration_us);
        }
        out
    }

    pub fn from_archive(text: &str) -> Result<Self, ArchiveError> {
        let bad = |line: usize, message: String| ArchiveError { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == ARCHIVE_MAGIC => {}
            _ => return Err(bad(1, "missing `# modlink-samples v1` header".into())),
        }
        let mut log = SampleLog::default();
        let mut in_body = false;
        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if !in_body {
                if line == COLUMNS {
                    in_body = true;
                    continue;
                }
                let meta = line
                    .strip_prefix('#')
                    .ok_or_else(|| bad(lineno, format!("unexpected line `{line}`")))?;
                let (key, value) = meta
                    .split_once('=')
                    .ok_or_else(|| bad(lineno, format!("malformed metadata `{line}`")))?;
                let value = value.trim();
                let number = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| bad(lineno, format!("malformed number `{v}`")))
                };
                match key.trim() {
                    "subject" => log.meta.subject = value.to_string(),
                    "endpoint" => log.meta.endpoint = value.to_string(),
                    "batch_size" => log.meta.batch_size = number(value)?,
                    "spans" => log.meta.spans = number(value)?,
                    "repetition" => log.meta.repetition = number(value)?,
                    "failed" => {
                        let (index, message) = value.split_once(' ').unwrap_or((value, ""));
                        log.failures.push(Failure {
                            batch_index: number(index)? as u64,
                            message: message.to_string(),
                        });
                    }
                    other => return Err(bad(lineno, format!("unknown metadata key `{other}`"))),
                }
                continue;
            }
            let mut cols = line.split(',').map(|c| c.trim().parse::<u64>());
            match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(Ok(batch_index)), Some(Ok(start_us)), Some(Ok(duration_us)), None) => {
                    log.samples.push(Sample {
                        batch_index,
                        start_us,
                        duration_us,
                    })
                }
                _ => return Err(bad(lineno, format!("malformed sample row `{line}`"))),
            }
        }
        if !in_body {
            return Err(bad(0, "missing column header".into()));
        }
        Ok(log)
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Summary of `durations`; `None` when empty. Sorts its input.
pub fn summarize(durations: &mut [u64]) -> Option<(f64, f64, f64, f64, f64)> {
    if durations.is_empty() {
        return None;
    }
    durations.sort_unstable();
    let n = durations.len();
    let min = durations[0] as f64;
    let max = durations[n - 1] as f64;
    let median = if n % 2 == 1 {
        durations[n / 2] as f64
    } else {
        (durations[n / 2 - 1] as f64 + durations[n / 2] as f64) / 2.0
    };
    let avg = durations.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
    let stddev = if n > 1 {
        let ss: f64 = durations
            .iter()
            .map(|&d| {
                let dev = d as f64 - avg;
                dev * dev
            })
            .sum();
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    // accumulated rounding can push the mean a hair outside [min, max]
    Some((min, avg.clamp(min, max), median, max, stddev))
}

/// Statistics over samples with `batch_index >= settle`.
pub fn compute_stats(log: &SampleLog, settle: usize) -> Result<BenchStats, StatsError> {
    compute_pooled_stats(core::slice::from_ref(log), settle)
}

/// Applies the settle cut to each log separately, then summarizes all
/// retained samples together.
pub fn compute_pooled_stats(logs: &[SampleLog], settle: usize) -> Result<BenchStats, StatsError> {
    let mut retained = Vec::new();
    let mut settled = 0;
    let mut failed = 0;
    for log in logs {
        let batches = log.batches();
        if settle >= batches {
            return Err(StatsError::SettleTooLarge { settle, batches });
        }
        for s in &log.samples {
            if s.batch_index >= settle as u64 {
                retained.push(s.duration_us);
            } else {
                settled += 1;
            }
        }
        failed += log.failures.len();
    }
    let count = retained.len();
    let (min_us, avg_us, median_us, max_us, stddev_us) =
        summarize(&mut retained).ok_or(StatsError::NoSamples)?;
    Ok(BenchStats {
        count,
        settled,
        failed,
        min_us,
        avg_us,
        median_us,
        max_us,
        stddev_us,
    })
}
