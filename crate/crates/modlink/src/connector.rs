//! Polling Modbus/TCP client that executes batch plans.
//!
//! One request is outstanding at a time and a batch's spans run strictly in
//! plan order. Nothing is retried: a timeout or a lost connection marks the
//! connector broken and is reported to the caller, who may [`reconnect`].
//!
//! [`reconnect`]: Connector::reconnect

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use modlink_core::codec::{bit_value, decode_value, encode_value, CodecError, DataType, Value};
use modlink_core::model::ConnectorModel;
use modlink_core::planner::BatchPlan;
use modlink_core::protocol::{
    decode_response, encode_request, ExceptionCode, FrameError, MbapHeader, RegisterSpace,
    RequestPdu, ResponsePdu, MBAP_HEADER_LEN,
};
use serde::Serialize;

pub const DEFAULT_RESPONSE_TIMEOUT: Duration = Duration::from_millis(1000);
pub const DEFAULT_CONNECT_TIMEOUT: Duration = Duration::from_millis(1000);
pub const DEFAULT_POLL_INTERVAL: Duration = Duration::from_millis(1000);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectorConfig {
    /// `host:port`.
    pub endpoint: String,
    pub unit_id: u8,
    pub response_timeout: Duration,
    pub connect_timeout: Duration,
    pub poll_interval: Duration,
}

impl ConnectorConfig {
    pub fn new(endpoint: impl Into<String>, unit_id: u8) -> Self {
        ConnectorConfig {
            endpoint: endpoint.into(),
            unit_id,
            response_timeout: DEFAULT_RESPONSE_TIMEOUT,
            connect_timeout: DEFAULT_CONNECT_TIMEOUT,
            poll_interval: DEFAULT_POLL_INTERVAL,
        }
    }

    pub fn for_model(model: &ConnectorModel) -> Self {
        Self::new(model.endpoint.clone(), model.unit_id)
    }
}

/// Coarse error class, stable for scripting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Connection,
    Timeout,
    Exception,
    Protocol,
    Field,
}

#[derive(Debug, thiserror::Error)]
pub enum ConnectorError {
    #[error("invalid connector configuration: {0}")]
    Config(String),
    #[error("cannot connect to {endpoint}: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: io::Error,
    },
    #[error("no response to function 0x{function:02X} within {after:?}")]
    Timeout { function: u8, after: Duration },
    #[error("connection lost: {0}")]
    ConnectionLost(io::Error),
    #[error("not connected (an earlier failure closed the connection)")]
    NotConnected,
    #[error(
        "exception 0x{:02X} ({}) for function 0x{function:02X} on {space} {start}..{}",
        code.0,
        code.description(),
        *start as usize + *count as usize
    )]
    Exception {
        function: u8,
        code: ExceptionCode,
        space: RegisterSpace,
        start: u16,
        count: u16,
    },
    #[error("malformed response: {0}")]
    Frame(#[from] FrameError),
    #[error("response transaction id {actual} does not match request {expected}")]
    TransactionMismatch { expected: u16, actual: u16 },
    #[error("response unit id {actual} does not match request {expected}")]
    UnitMismatch { expected: u8, actual: u8 },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("read-only field `{0}`")]
    ReadOnlyField(String),
    #[error("field `{field}`: {source}")]
    Value {
        field: String,
        #[source]
        source: CodecError,
    },
}

impl ConnectorError {
    pub fn class(&self) -> ErrorClass {
        match self {
            ConnectorError::Config(_) => ErrorClass::Config,
            ConnectorError::Connect { .. }
            | ConnectorError::ConnectionLost(_)
            | ConnectorError::NotConnected => ErrorClass::Connection,
            ConnectorError::Timeout { .. } => ErrorClass::Timeout,
            ConnectorError::Exception { .. } => ErrorClass::Exception,
            ConnectorError::Frame(_)
            | ConnectorError::TransactionMismatch { .. }
            | ConnectorError::UnitMismatch { .. } => ErrorClass::Protocol,
            ConnectorError::UnknownField(_)
            | ConnectorError::ReadOnlyField(_)
            | ConnectorError::Value { .. } => ErrorClass::Field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reading {
    pub value: Value,
    /// Microseconds since the Unix epoch when the span holding the field was
    /// answered.
    pub timestamp_us: u64,
}

/// Decoded values of one batch, keyed by field name.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Record {
    pub fields: BTreeMap<String, Reading>,
}

impl Record {
    pub fn value(&self, field: &str) -> Option<&Value> {
        self.fields.get(field).map(|r| &r.value)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// Echo of a successful write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteAck {
    pub function: u8,
    pub address: u16,
    pub quantity: u16,
}

pub struct Connector {
    config: ConnectorConfig,
    peer: SocketAddr,
    stream: Option<TcpStream>,
    next_tid: u16,
    requests: u64,
    buf: Vec<u8>,
}

fn open(config: &ConnectorConfig) -> Result<(TcpStream, SocketAddr), ConnectorError> {
    let connect_err = |source| ConnectorError::Connect {
        endpoint: config.endpoint.clone(),
        source,
    };
    let addrs: Vec<SocketAddr> = config
        .endpoint
        .to_socket_addrs()
        .map_err(connect_err)?
        .collect();
    let mut last = io::Error::new(io::ErrorKind::AddrNotAvailable, "endpoint resolved to nothing");
    for addr in addrs {
        match TcpStream::connect_timeout(&addr, config.connect_timeout) {
            Ok(stream) => {
                stream.set_nodelay(true).map_err(connect_err)?;
                stream
                    .set_write_timeout(Some(config.response_timeout))
                    .map_err(connect_err)?;
                return Ok((stream, addr));
            }
            Err(e) => last = e,
        }
    }
    Err(connect_err(last))
}

fn now_us() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_micros() as u64)
        .unwrap_or(0)
}

impl Connector {
    /// Opens the TCP session. The first request carries transaction id 0.
    pub fn connect(config: ConnectorConfig) -> Result<Self, ConnectorError> {
        if config.response_timeout.is_zero() || config.connect_timeout.is_zero() {
            return Err(ConnectorError::Config("timeouts must be positive".into()));
        }
        let (stream, peer) = open(&config)?;
        Ok(Connector {
            config,
            peer,
            stream: Some(stream),
            next_tid: 0,
            requests: 0,
            buf: Vec::with_capacity(MBAP_HEADER_LEN + 256),
        })
    }

    pub fn config(&self) -> &ConnectorConfig {
        &self.config
    }

    pub fn peer(&self) -> SocketAddr {
        self.peer
    }

    pub fn is_connected(&self) -> bool {
        self.stream.is_some()
    }

    /// Requests put on the wire since connecting.
    pub fn requests_sent(&self) -> u64 {
        self.requests
    }

    /// Transaction id the next request will carry.
    pub fn next_transaction_id(&self) -> u16 {
        self.next_tid
    }

    /// Replaces the connection with a fresh one. Transaction ids continue.
    pub fn reconnect(&mut self) -> Result<(), ConnectorError> {
        self.stream = None;
        let (stream, peer) = open(&self.config)?;
        self.stream = Some(stream);
        self.peer = peer;
        Ok(())
    }

    /// Sends one request and waits for its response. Exception responses
    /// become [`ConnectorError::Exception`].
    pub fn transact(&mut self, request: &RequestPdu) -> Result<ResponsePdu, ConnectorError> {
        let tid = self.next_tid;
        let unit = self.config.unit_id;
        let frame = encode_request(tid, unit, request)?;
        let function = request.function_code().as_u8();
        let timeout = self.config.response_timeout;
        let stream = self.stream.as_mut().ok_or(ConnectorError::NotConnected)?;
        self.next_tid = self.next_tid.wrapping_add(1);
        self.requests += 1;

        let deadline = Instant::now() + timeout;
        let result = stream
            .write_all(&frame)
            .and_then(|()| read_frame(stream, &mut self.buf, deadline));
        if let Err(e) = result {
            // the stream may still deliver a late answer; never reuse it
            self.stream = None;
            return Err(match e.kind() {
                io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => {
                    ConnectorError::Timeout { function, after: timeout }
                }
                _ => ConnectorError::ConnectionLost(e),
            });
        }
        let (header, response) = match decode_response(&self.buf) {
            Ok(r) => r,
            Err(e) => {
                self.stream = None;
                return Err(e.into());
            }
        };
        if header.transaction_id != tid {
            self.stream = None;
            return Err(ConnectorError::TransactionMismatch {
                expected: tid,
                actual: header.transaction_id,
            });
        }
        if header.unit_id != unit {
            self.stream = None;
            return Err(ConnectorError::UnitMismatch {
                expected: unit,
                actual: header.unit_id,
            });
        }
        if let ResponsePdu::Exception { function: f, code } = response {
            let (space, start, count) = request.target();
            if f != function {
                return Err(FrameError::FunctionMismatch {
                    expected: function,
                    actual: f,
                }
                .into());
            }
            return Err(ConnectorError::Exception {
                function,
                code,
                space,
                start,
                count: count as u16,
            });
        }
        Ok(response.answering(request)?)
    }

    /// Reads every span of `plan` in order and decodes all fields. An empty
    /// plan sends nothing.
    pub fn read_batch(&mut self, plan: &BatchPlan) -> Result<Record, ConnectorError> {
        let mut record = Record::default();
        for span in &plan.spans {
            let response = self.transact(&span.request())?;
            let stamp = now_us();
            match response {
                ResponsePdu::ReadCoils(bits) | ResponsePdu::ReadDiscreteInputs(bits) => {
                    for f in &span.fields {
                        let value = Value::Bool(bits[f.offset as usize]);
                        record.fields.insert(f.name.clone(), Reading { value, timestamp_us: stamp });
                    }
                }
                ResponsePdu::ReadHoldingRegisters(regs) | ResponsePdu::ReadInputRegisters(regs) => {
                    for f in &span.fields {
                        let value = decode_value(&regs[f.range()], f.data_type, f.order).map_err(
                            |source| ConnectorError::Value {
                                field: f.name.clone(),
                                source,
                            },
                        )?;
                        record.fields.insert(f.name.clone(), Reading { value, timestamp_us: stamp });
                    }
                }
                _ => unreachable!("answering() guarantees a read response"),
            }
        }
        Ok(record)
    }

    /// Writes one field. Single-register and bit fields use the single-write
    /// functions, wider fields write multiple registers. Read-only fields and
    /// unencodable values fail before anything is sent.
    pub fn write_field(
        &mut self,
        model: &ConnectorModel,
        name: &str,
        value: &Value,
    ) -> Result<WriteAck, ConnectorError> {
        let field = model
            .field(name)
            .ok_or_else(|| ConnectorError::UnknownField(name.to_string()))?;
        if !field.writable || !field.space.is_writable() {
            return Err(ConnectorError::ReadOnlyField(name.to_string()));
        }
        let value_err = |source| ConnectorError::Value {
            field: name.to_string(),
            source,
        };
        let request = if field.data_type == DataType::Bit {
            RequestPdu::WriteSingleCoil {
                address: field.offset,
                value: bit_value(value).map_err(value_err)?,
            }
        } else {
            let regs = encode_value(value, field.data_type, model.order_of(field)).map_err(value_err)?;
            if regs.len() == 1 {
                RequestPdu::WriteSingleRegister {
                    address: field.offset,
                    value: regs[0],
                }
            } else {
                RequestPdu::WriteMultipleRegisters {
                    address: field.offset,
                    values: regs,
                }
            }
        };
        let ack = match self.transact(&request)? {
            ResponsePdu::WriteSingleCoil { address, .. } | ResponsePdu::WriteSingleRegister { address, .. } => {
                WriteAck {
                    function: request.function_code().as_u8(),
                    address,
                    quantity: 1,
                }
            }
            ResponsePdu::WriteMultipleRegisters { address, quantity }
            | ResponsePdu::WriteMultipleCoils { address, quantity } => WriteAck {
                function: request.function_code().as_u8(),
                address,
                quantity,
            },
            _ => unreachable!("answering() guarantees a write echo"),
        };
        Ok(ack)
    }

    /// Runs `read_batch` every `options.interval` until `stop` is set,
    /// `options.max_polls` batches ran, or an error occurs with
    /// `stop_on_error`. Overrunning batches start the next one immediately.
    /// When the connection broke, each later poll first tries one reconnect.
    pub fn poll(
        &mut self,
        plan: &BatchPlan,
        options: &PollOptions,
        stop: &AtomicBool,
        mut sink: impl FnMut(PollEvent),
    ) -> Result<PollSummary, ConnectorError> {
        if options.interval.is_zero() {
            return Err(ConnectorError::Config("poll interval must be positive".into()));
        }
        let mut summary = PollSummary::default();
        let started = Instant::now();
        let mut index = 0u64;
        while !stop.load(Ordering::SeqCst) && options.max_polls.is_none_or(|m| index < m) {
            let due = started + options.interval * index as u32;
            if !sleep_until(due, stop) {
                break;
            }
            let t0 = Instant::now();
            let result = if self.is_connected() {
                self.read_batch(plan)
            } else {
                self.reconnect().and_then(|()| self.read_batch(plan))
            };
            let duration = t0.elapsed();
            match result {
                Ok(record) => {
                    summary.records += 1;
                    sink(PollEvent::Record {
                        index,
                        record,
                        duration,
                    });
                }
                Err(error) => {
                    summary.errors += 1;
                    sink(PollEvent::Error { index, error });
                    if options.stop_on_error {
                        summary.stopped_on_error = true;
                        break;
                    }
                }
            }
            index += 1;
        }
        Ok(summary)
    }
}

/// Waits until `due`, checking `stop` at least every 10 ms. False if stopped.
fn sleep_until(due: Instant, stop: &AtomicBool) -> bool {
    loop {
        if stop.load(Ordering::SeqCst) {
            return false;
        }
        let now = Instant::now();
        if now >= due {
            return true;
        }
        thread::sleep((due - now).min(Duration::from_millis(10)));
    }
}

/// Reads one complete response ADU into `buf`.
fn read_frame(stream: &mut TcpStream, buf: &mut Vec<u8>, deadline: Instant) -> io::Result<()> {
    buf.clear();
    buf.resize(MBAP_HEADER_LEN, 0);
    read_exact_by(stream, &mut buf[..], deadline)?;
    let header = MbapHeader::decode(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    buf.resize(header.frame_len(), 0);
    read_exact_by(stream, &mut buf[MBAP_HEADER_LEN..], deadline)
}

fn read_exact_by(stream: &mut TcpStream, buf: &mut [u8], deadline: Instant) -> io::Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        let left = deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return Err(io::ErrorKind::TimedOut.into());
        }
        stream.set_read_timeout(Some(left))?;
        match stream.read(&mut buf[filled..]) {
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PollOptions {
    pub interval: Duration,
    pub stop_on_error: bool,
    pub max_polls: Option<u64>,
}

impl Default for PollOptions {
    fn default() -> Self {
        PollOptions {
            interval: DEFAULT_POLL_INTERVAL,
            stop_on_error: false,
            max_polls: None,
        }
    }
}

#[derive(Debug)]
pub enum PollEvent {
    Record {
        index: u64,
        record: Record,
        duration: Duration,
    },
    Error {
        index: u64,
        error: ConnectorError,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PollSummary {
    pub records: u64,
    pub errors: u64,
    pub stopped_on_error: bool,
}
