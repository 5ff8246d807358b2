//! Transport-free building blocks for model-driven Modbus/TCP connectors.
//!
//! Everything here works on byte slices, register words and plain data:
//! MBAP framing ([`protocol`]), typed register conversion ([`codec`]),
//! declarative register maps ([`model`]), read coalescing ([`planner`]),
//! emulated device latency ([`latency`]) and benchmark statistics
//! ([`stats`], [`table`]). Sockets, files and the CLI live in the `modlink`
//! crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod codec;
pub mod latency;
pub mod model;
pub mod planner;
pub mod protocol;
pub mod stats;
pub mod table;

pub use codec::{decode_value, encode_value, ByteOrder, CodecError, DataType, Value};
pub use latency::{apply_latency, Jitter, LatencyProfile, LatencySampler, Warmup};
pub use model::{parse_model, validate, ConnectorModel, FieldSpec, ModelError, Severity, Violation};
pub use planner::{build_plan, BatchPlan, CoveredField, PlanError, ReadSpan, DEFAULT_GAP_THRESHOLD};
pub use protocol::{
    decode_request, decode_response, encode_request, encode_response, ExceptionCode, FrameError,
    FunctionCode, MbapHeader, RegisterSpace, RequestPdu, ResponsePdu,
};
pub use stats::{compute_pooled_stats, compute_stats, BenchStats, Sample, SampleLog, StatsError};
