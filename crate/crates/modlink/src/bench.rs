//! Back-to-back batch timing with archived logs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use modlink_core::planner::BatchPlan;
use modlink_core::stats::{Failure, LogMeta, Sample, SampleLog};

use crate::connector::Connector;

/// Runs are aborted once more than this share of a repetition's batches
/// failed.
pub const MAX_FAILURE_RATIO: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub subject: String,
    pub batches: usize,
    pub repetitions: usize,
    /// Logs are written here, one file per repetition, before any
    /// statistics are computed.
    pub archive_dir: Option<PathBuf>,
}

impl BenchConfig {
    pub fn new(subject: impl Into<String>, batches: usize, repetitions: usize) -> Self {
        BenchConfig {
            subject: subject.into(),
            batches,
            repetitions,
            archive_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("batches and repetitions must both be at least 1")]
    EmptyRun,
    #[error(
        "repetition {repetition} aborted: {failures} of {attempted} batches failed (last: {last_error})"
    )]
    TooManyFailures {
        repetition: usize,
        failures: usize,
        attempted: usize,
        last_error: String,
    },
    #[error("cannot archive {path}: {source}")]
    Archive {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// File name for one repetition's log.
pub fn archive_name(subject: &str, repetition: usize) -> String {
    let clean: String = subject
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{clean}-rep{repetition}.csv")
}

pub fn archive_log(dir: &Path, log: &SampleLog) -> Result<PathBuf, BenchError> {
    let path = dir.join(archive_name(&log.meta.subject, log.meta.repetition));
    fs::create_dir_all(dir)
        .and_then(|()| fs::write(&path, log.to_archive()))
        .map_err(|source| BenchError::Archive {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}

/// Reads `plan` `batches` times per repetition without pacing and records
/// each batch's wall time in µs. Failed batches are logged separately and a
/// broken connection is reopened before the next batch.
pub fn run_benchmark(
    connector: &mut Connector,
    plan: &BatchPlan,
    config: &BenchConfig,
) -> Result<Vec<SampleLog>, BenchError> {
    if config.batches == 0 || config.repetitions == 0 {
        return Err(BenchError::EmptyRun);
    }
    let allowed = (config.batches as f64 * MAX_FAILURE_RATIO).floor() as usize;
    let mut logs = Vec::with_capacity(config.repetitions);
    for repetition in 0..config.repetitions {
        let mut log = SampleLog::new(LogMeta {
            subject: config.subject.clone(),
            endpoint: connector.config().endpoint.clone(),
            batch_size: plan.field_count(),
            spans: plan.span_count(),
            repetition,
        });
        log.samples.reserve(config.batches);
        let origin = Instant::now();
        for i in 0..config.batches {
            let t0 = Instant::now();
            let result = if connector.is_connected() {
                connector.read_batch(plan).map(drop)
            } else {
                connector.reconnect().and_then(|()| connector.read_batch(plan).map(drop))
            };
            let elapsed = t0.elapsed();
            match result {
                Ok(()) => log.samples.push(Sample {
                    batch_index: i as u64,
                    start_us: (t0 - origin).as_micros() as u64,
                    duration_us: elapsed.as_micros() as u64,
                }),
                Err(e) => {
                    log.failures.push(Failure {
                        batch_index: i as u64,
                        message: e.to_string(),
                    });
                    if log.failures.len() > allowed {
                        if let Some(dir) = &config.archive_dir {
                            archive_log(dir, &log)?;
                        }
                        return Err(BenchError::TooManyFailures {
                            repetition,
                            failures: log.failures.len(),
                            attempted: i + 1,
                            last_error: e.to_string(),
                        });
                    }
                }
            }
        }
        if let Some(dir) = &config.archive_dir {
            let path = archive_log(dir, &log)?;
            info!("archived {}", path.display());
        }
        logs.push(log);
    }
    Ok(logs)
}
