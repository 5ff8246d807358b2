//! Std side of modlink: the polling connector, the device emulator, the
//! benchmark runner, instance descriptors, device profiles and the CLI.
//!
//! Protocol framing, value codecs, models, planning and statistics live in
//! `modlink-core`, which is `no_std`.

pub mod bench;
pub mod cli;
pub mod connector;
pub mod descriptor;
pub mod emulator;
pub mod profile;
pub mod store;

pub use bench::{run_benchmark, BenchConfig, BenchError};
pub use connector::{Connector, ConnectorConfig, ConnectorError, PollEvent, PollOptions, Record};
pub use descriptor::InstanceDescriptor;
pub use emulator::{serve, ServerHandle};
pub use profile::{load_profile, preset, DeviceProfile};
pub use store::RegisterStore;
