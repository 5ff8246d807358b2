//! The `modlink` command line.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 connection failure
//! or timeout, 3 Modbus exception response, 4 I/O error. Every failure
//! prints one diagnostic line `modlink: error[<kind>]: <message>` on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use modlink_core::codec::{decode_value, encode_value, ByteOrder, DataType, Value};
use modlink_core::latency::Jitter;
use modlink_core::model::{parse_model, validate, ConnectorModel};
use modlink_core::planner::{build_plan, BatchPlan, DEFAULT_GAP_THRESHOLD};
use modlink_core::stats::compute_pooled_stats;
use modlink_core::table::{emit_table, TableColumn};
use serde_json::json;

use crate::bench::{run_benchmark, BenchConfig, BenchError};
use crate::connector::{
    Connector, ConnectorConfig, ConnectorError, ErrorClass, PollEvent, PollOptions,
};
use crate::descriptor::InstanceDescriptor;
use crate::emulator;
use crate::profile::{load_profile, preset, DeviceProfile};

/// Environment variable overriding the endpoint stored in a model.
pub const ENDPOINT_ENV: &str = "MODLINK_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Connection = 2,
    Exception = 3,
    Io = 4,
}

#[derive(Parser)]
#[command(name = "modlink", version, about = "Model-driven Modbus/TCP connector toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model document; nonzero exit on any error-class violation
    Validate { model: PathBuf },
    /// Build the read plan and write a connector instance descriptor
    Gen {
        model: PathBuf,
        /// Dead registers a span may absorb between fields
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
        gap: u16,
        /// Output file instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the device emulator until interrupted
    Serve(ServeArgs),
    /// Read a model's fields once or periodically
    Read(ReadArgs),
    /// Time batch reads and print a statistics table
    Bench(BenchArgs),
    /// Convert between values and register words
    #[command(subcommand)]
    Codec(CodecCommand),
}

#[derive(Args)]
struct ServeArgs {
    /// Profile file, or a bundled preset: sentron-like, eem-like
    profile: Option<String>,
    #[arg(long, default_value_t = 502)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Fixed response delay in µs, replacing the profile's
    #[arg(long)]
    latency_fixed: Option<u64>,
    /// none, uniform(a,b) or normal(mean,sd) in µs
    #[arg(long)]
    latency_jitter: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Target {
    /// Model document or instance descriptor
    input: PathBuf,
    /// Planner gap threshold (ignored for descriptors)
    #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
    gap: u16,
    /// host:port, overriding the model
    #[arg(long, env = ENDPOINT_ENV)]
    endpoint: Option<String>,
    /// Response timeout in ms
    #[arg(long, default_value_t = 1000)]
    timeout: u64,
}

#[derive(Args)]
struct ReadArgs {
    #[command(flatten)]
    target: Target,
    /// Read a single batch (default)
    #[arg(long, conflicts_with = "poll")]
    once: bool,
    /// Poll every MS milliseconds until interrupted
    #[arg(long, value_name = "MS")]
    poll: Option<u64>,
    /// Stop polling after N batches
    #[arg(long, requires = "poll")]
    count: Option<u64>,
    /// Stop polling at the first failed batch
    #[arg(long, requires = "poll")]
    stop_on_error: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = 5000)]
    batches: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Leading batches of each repetition left out of the statistics
    #[arg(long, default_value_t = 1500)]
    settle: usize,
    /// Directory for sample logs, stats.csv and table.txt
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Column label; defaults to the device name
    #[arg(long)]
    subject: Option<String>,
    /// Column group label
    #[arg(long, default_value = "local")]
    environment: String,
}

#[derive(Subcommand)]
enum CodecCommand {
    /// Encode a value, printing hex register words
    Encode {
        #[arg(long = "type")]
        data_type: String,
        #[arg(long, default_value = "big")]
        order: String,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Decode hex register words
    Decode {
        #[arg(long = "type")]
        data_type: String,
        #[arg(long, default_value = "big")]
        order: String,
        #[arg(required = true)]
        registers: Vec<String>,
    },
}

/// A failure carrying its diagnostic kind and exit status.
struct Failure {
    status: ExitStatus,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(status: ExitStatus, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            status,
            kind,
            message: message.into(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self::new(ExitStatus::Validation, "validation", message)
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self::new(ExitStatus::Io, "io", format!("{}: {e}", path.display()))
    }
}

impl From<ConnectorError> for Failure {
    fn from(e: ConnectorError) -> Self {
        let (status, kind) = match e.class() {
            ErrorClass::Config => (ExitStatus::Validation, "config"),
            ErrorClass::Connection => (ExitStatus::Connection, "connect"),
            ErrorClass::Timeout => (ExitStatus::Connection, "timeout"),
            ErrorClass::Exception => (ExitStatus::Exception, "exception"),
            ErrorClass::Protocol => (ExitStatus::Connection, "protocol"),
            ErrorClass::Field => (ExitStatus::Validation, "field"),
        };
        Failure::new(status, kind, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return ExitStatus::Success as i32;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = writeln!(err, "modlink: error[usage]: missing subcommand");
                let _ = write!(err, "{e}");
                return ExitStatus::Validation as i32;
            }
            let text = e.to_string();
            let mut lines = text.lines();
            let first = lines.next().unwrap_or_default();
            let first = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(err, "modlink: error[usage]: {first}");
            for line in lines {
                let _ = writeln!(err, "{line}");
            }
            return ExitStatus::Validation as i32;
        }
    };
    let result = match cli.command {
        Command::Validate { model } => cmd_validate(&model, out),
        Command::Gen { model, gap, output } => cmd_gen(&model, gap, output.as_deref(), out),
        Command::Serve(args) => cmd_serve(args, out),
        Command::Read(args) => cmd_read(args, out, err),
        Command::Bench(args) => cmd_bench(args, out),
        Command::Codec(c) => cmd_codec(c, out),
    };
    match result {
        Ok(()) => ExitStatus::Success as i32,
        Err(f) => {
            let _ = writeln!(err, "modlink: error[{}]: {}", f.kind, f.message.replace('\n', " "));
            f.status as i32
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_model(path: &Path) -> Result<ConnectorModel, Failure> {
    let text = read_text(path)?;
    let model = parse_model(&text)
        .map_err(|e| Failure::new(ExitStatus::Validation, "parse", format!("{}: {e}", path.display())))?;
    let errors: Vec<_> = validate(&model).into_iter().filter(|v| v.is_error()).collect();
    if let Some(first) = errors.first() {
        return Err(Failure::validation(format!(
            "{}: {first}{}",
            path.display(),
            if errors.len() > 1 {
                format!(" (and {} more)", errors.len() - 1)
            } else {
                String::new()
            }
        )));
    }
    Ok(model)
}

/// A model document or a descriptor, resolved to a plan.
fn load_plan(path: &Path, gap: u16) -> Result<BatchPlan, Failure> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let d = InstanceDescriptor::from_json(&text)
            .map_err(|e| Failure::new(ExitStatus::Validation, "parse", format!("{}: {e}", path.display())))?;
        return Ok(d.plan());
    }
    let model = load_model(path)?;
    let plan = build_plan(&model, gap);
    plan.check().map_err(|e| Failure::validation(e.to_string()))?;
    Ok(plan)
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let text = read_text(path)?;
    let model = parse_model(&text)
        .map_err(|e| Failure::new(ExitStatus::Validation, "parse", format!("{}: {e}", path.display())))?;
    let violations = validate(&model);
    for v in &violations {
        let _ = writeln!(out, "{v}");
    }
    let errors = violations.iter().filter(|v| v.is_error()).count();
    if errors > 0 {
        let first = violations.iter().find(|v| v.is_error()).expect("counted");
        return Err(Failure::validation(format!(
            "{}: {errors} error(s), first: field `{}`: {}",
            path.display(),
            first.field,
            first.rule.describe()
        )));
    }
    let _ = writeln!(
        out,
        "ok: {} ({} fields, {} warnings)",
        model.device_name,
        model.fields.len(),
        violations.len()
    );
    Ok(())
}

fn cmd_gen(path: &Path, gap: u16, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let model = load_model(path)?;
    let plan = build_plan(&model, gap);
    plan.check().map_err(|e| Failure::validation(e.to_string()))?;
    let json = InstanceDescriptor::from_plan(&plan).to_json();
    match output {
        Some(file) => fs::write(file, json + "\n").map_err(|e| Failure::io(file, e)),
        None => writeln!(out, "{json}").map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn resolve_profile(spec: Option<&str>) -> Result<DeviceProfile, Failure> {
    let Some(spec) = spec else {
        return Ok(DeviceProfile::default());
    };
    if let Some(p) = preset(spec) {
        if !Path::new(spec).exists() {
            return Ok(p);
        }
    }
    let text = read_text(Path::new(spec))?;
    load_profile(&text).map_err(|e| Failure::new(ExitStatus::Validation, "parse", format!("{spec}: {e}")))
}

fn cmd_serve(args: ServeArgs, out: &mut dyn Write) -> Outcome {
    let mut profile = resolve_profile(args.profile.as_deref())?;
    if let Some(us) = args.latency_fixed {
        profile.latency.fixed_us = us;
    }
    if let Some(spec) = &args.latency_jitter {
        profile.latency.jitter =
            Jitter::parse(spec).map_err(|e| Failure::new(ExitStatus::Validation, "usage", e.to_string()))?;
    }
    if let Some(seed) = args.seed {
        profile.latency.seed = seed;
    }
    let endpoint = format!("{}:{}", args.host, args.port);
    let handle = emulator::serve(endpoint.as_str(), profile)
        .map_err(|e| Failure::new(ExitStatus::Io, "bind", format!("{endpoint}: {e}")))?;
    let _ = writeln!(
        out,
        "serving {} on {} (fixed {} µs, jitter {})",
        if handle.profile().name.is_empty() { "default" } else { &handle.profile().name },
        handle.local_addr(),
        handle.profile().latency.fixed_us,
        handle.profile().latency.jitter
    );
    let _ = out.flush();
    handle.wait();
    Ok(())
}

fn connector_for(plan: &BatchPlan, target: &Target) -> Result<Connector, Failure> {
    let mut config = ConnectorConfig::for_model(&plan.model);
    if let Some(e) = &target.endpoint {
        config.endpoint = e.clone();
    }
    if target.timeout == 0 {
        return Err(Failure::new(ExitStatus::Validation, "usage", "--timeout must be positive"));
    }
    config.response_timeout = Duration::from_millis(target.timeout);
    Ok(Connector::connect(config)?)
}

/// JSON for a decoded value. Floats use their shortest round-trip text so
/// an f32 prints as `230.1`, not its widened f64 expansion; non-finite
/// floats become strings.
fn value_json(value: &Value) -> serde_json::Value {
    let float = |text: String| match text.parse::<f64>() {
        Ok(f) if f.is_finite() => json!(f),
        _ => json!(text),
    };
    match value {
        Value::F32(v) => float(v.to_string()),
        Value::F64(v) => float(v.to_string()),
        other => serde_json::to_value(other).unwrap_or(serde_json::Value::Null),
    }
}

fn record_line(index: u64, duration: Duration, record: &crate::connector::Record) -> String {
    let fields: serde_json::Map<String, serde_json::Value> = record
        .fields
        .iter()
        .map(|(k, r)| (k.clone(), value_json(&r.value)))
        .collect();
    let timestamp = record.fields.values().map(|r| r.timestamp_us).max().unwrap_or(0);
    json!({
        "batch": index,
        "timestamp_us": timestamp,
        "duration_us": duration.as_micros() as u64,
        "fields": fields,
    })
    .to_string()
}

fn cmd_read(args: ReadArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let plan = load_plan(&args.target.input, args.target.gap)?;
    let mut connector = connector_for(&plan, &args.target)?;
    let Some(ms) = args.poll else {
        let t0 = std::time::Instant::now();
        let record = connector.read_batch(&plan)?;
        let _ = writeln!(out, "{}", record_line(0, t0.elapsed(), &record));
        return Ok(());
    };
    if ms == 0 {
        return Err(Failure::new(ExitStatus::Validation, "usage", "--poll must be positive"));
    }
    let options = PollOptions {
        interval: Duration::from_millis(ms),
        stop_on_error: args.stop_on_error,
        max_polls: args.count,
    };
    let stop = AtomicBool::new(false);
    let mut last_error = None;
    connector.poll(&plan, &options, &stop, |event| match event {
        PollEvent::Record {
            index,
            record,
            duration,
        } => {
            let _ = writeln!(out, "{}", record_line(index, duration, &record));
            let _ = out.flush();
        }
        PollEvent::Error { index, error } => {
            let _ = writeln!(err, "modlink: warning[batch {index}]: {error}");
            last_error = Some(error);
        }
    })?;
    match last_error {
        Some(e) if args.stop_on_error => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Outcome {
    let plan = load_plan(&args.target.input, args.target.gap)?;
    let mut connector = connector_for(&plan, &args.target)?;
    let subject = args.subject.unwrap_or_else(|| plan.model.device_name.clone());
    let config = BenchConfig {
        archive_dir: Some(args.out.clone()),
        ..BenchConfig::new(subject.clone(), args.batches, args.reps)
    };
    let logs = run_benchmark(&mut connector, &plan, &config).map_err(|e| match e {
        BenchError::EmptyRun => Failure::new(ExitStatus::Validation, "usage", e.to_string()),
        BenchError::TooManyFailures { .. } => Failure::new(ExitStatus::Connection, "bench", e.to_string()),
        BenchError::Archive { .. } => Failure::new(ExitStatus::Io, "io", e.to_string()),
    })?;
    let stats = compute_pooled_stats(&logs, args.settle)
        .map_err(|e| Failure::new(ExitStatus::Validation, "usage", e.to_string()))?;
    let table = emit_table(&[TableColumn {
        environment: args.environment,
        subject,
        stats: Some(stats),
    }]);
    let stats_path = args.out.join("stats.csv");
    fs::write(&stats_path, &table.csv).map_err(|e| Failure::io(&stats_path, e))?;
    let table_path = args.out.join("table.txt");
    fs::write(&table_path, &table.text).map_err(|e| Failure::io(&table_path, e))?;
    let _ = write!(out, "{}", table.text);
    let _ = writeln!(
        out,
        "{} batches x {} reps, {} spans/batch, settle {}: {} samples kept, {} failed",
        args.batches,
        args.reps,
        plan.span_count(),
        args.settle,
        stats.count,
        stats.failed
    );
    Ok(())
}

fn codec_args(data_type: &str, order: &str) -> Result<(DataType, ByteOrder), Failure> {
    let ty = DataType::parse(data_type)
        .ok_or_else(|| Failure::new(ExitStatus::Validation, "usage", format!("unknown type `{data_type}`")))?;
    let order = ByteOrder::parse(order)
        .ok_or_else(|| Failure::new(ExitStatus::Validation, "usage", format!("unknown byte order `{order}`")))?;
    Ok((ty, order))
}

fn cmd_codec(command: CodecCommand, out: &mut dyn Write) -> Outcome {
    let codec_err = |e: modlink_core::codec::CodecError| Failure::new(ExitStatus::Validation, "codec", e.to_string());
    match command {
        CodecCommand::Encode {
            data_type,
            order,
            value,
        } => {
            let (ty, order) = codec_args(&data_type, &order)?;
            let v = Value::parse(&value, ty).map_err(codec_err)?;
            let regs = encode_value(&v, ty, order).map_err(codec_err)?;
            let words: Vec<String> = regs.iter().map(|r| format!("{r:04X}")).collect();
            let _ = writeln!(out, "{}", words.join(" "));
        }
        CodecCommand::Decode {
            data_type,
            order,
            registers,
        } => {
            let (ty, order) = codec_args(&data_type, &order)?;
            let regs = registers
                .iter()
                .map(|w| {
                    let digits = w.strip_prefix("0x").or_else(|| w.strip_prefix("0X")).unwrap_or(w);
                    u16::from_str_radix(digits, 16).map_err(|_| {
                        Failure::new(ExitStatus::Validation, "usage", format!("`{w}` is not a hex register word"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let v = decode_value(&regs, ty, order).map_err(codec_err)?;
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(())
}
