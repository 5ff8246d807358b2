//! Threaded Modbus/TCP server backed by a [`RegisterStore`].
//!
//! Each connection gets its own thread and handles one request at a time.
//! The response delay is drawn from the profile's latency model when a
//! request arrives. The reply is then held back until that much time has
//! passed since arrival, so processing time is absorbed into the delay
//! rather than added on top of it.
//!
//! Exception mapping: unknown function code → 0x01, address range past
//! 65535 or an injected fault range → 0x02, bad quantity, byte count or
//! coil value → 0x03, write to a space the profile keeps read-only → 0x01.
//! Frames whose header cannot be trusted (nonzero protocol id, impossible
//! length) close the connection, since the stream cannot be resynchronized.

use std::io::{self, Read, Write};
use std::collections::HashMap;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, warn};
use modlink_core::latency::LatencySampler;
use modlink_core::protocol::{
    encode_response, ExceptionCode, FrameError, MbapHeader, RequestPdu, ResponsePdu,
    MBAP_HEADER_LEN,
};

use crate::profile::DeviceProfile;
use crate::store::RegisterStore;

/// Below this much remaining delay the server spins instead of sleeping.
/// Sleeps overshoot by tens of microseconds, and on virtual machines an idle
/// CPU can take milliseconds to wake up, so the window is wide.
const SPIN_WINDOW: Duration = Duration::from_millis(10);

struct Shared {
    profile: DeviceProfile,
    store: Arc<RegisterStore>,
    sampler: Mutex<LatencySampler>,
    stopping: AtomicBool,
    requests: AtomicU64,
    connections: Mutex<HashMap<u64, TcpStream>>,
    next_connection: AtomicU64,
}

/// A running emulator. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
    workers: Arc<Mutex<Vec<JoinHandle<()>>>>,
}

/// Binds `endpoint` and starts serving `profile`. Port 0 picks a free port;
/// see [`ServerHandle::local_addr`].
pub fn serve(endpoint: impl ToSocketAddrs, profile: DeviceProfile) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(endpoint)?;
    let addr = listener.local_addr()?;
    let store = Arc::new(RegisterStore::new());
    profile.seed(&store);
    let shared = Arc::new(Shared {
        sampler: Mutex::new(LatencySampler::new(profile.latency)),
        profile,
        store,
        stopping: AtomicBool::new(false),
        requests: AtomicU64::new(0),
        connections: Mutex::new(HashMap::new()),
        next_connection: AtomicU64::new(0),
    });
    let workers = Arc::new(Mutex::new(Vec::new()));
    let acceptor = {
        let shared = Arc::clone(&shared);
        let workers = Arc::clone(&workers);
        thread::Builder::new()
            .name("modlink-accept".into())
            .spawn(move || accept_loop(listener, shared, workers))?
    };
    Ok(ServerHandle {
        addr,
        shared,
        acceptor: Some(acceptor),
        workers,
    })
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn store(&self) -> &Arc<RegisterStore> {
        &self.shared.store
    }

    pub fn profile(&self) -> &DeviceProfile {
        &self.shared.profile
    }

    /// Requests answered so far, exceptions included.
    pub fn requests_served(&self) -> u64 {
        self.shared.requests.load(Ordering::Relaxed)
    }

    /// Closes every open client connection; the server keeps accepting.
    pub fn disconnect_all(&self) {
        for (_, stream) in lock(&self.shared.connections).drain() {
            let _ = stream.shutdown(Shutdown::Both);
        }
    }

    /// Stops accepting, closes all connections and waits for every thread.
    /// The port is released when this returns.
    pub fn stop(mut self) {
        self.shutdown();
    }

    /// Blocks until the server is stopped from another thread.
    pub fn wait(mut self) {
        if let Some(acceptor) = self.acceptor.take() {
            let _ = acceptor.join();
        }
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.shared.stopping.store(true, Ordering::SeqCst);
        if let Some(acceptor) = self.acceptor.take() {
            // wake the blocking accept
            let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(200));
            let _ = acceptor.join();
        }
        self.disconnect_all();
        let workers: Vec<_> = lock(&self.workers).drain(..).collect();
        for w in workers {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>, workers: Arc<Mutex<Vec<JoinHandle<()>>>>) {
    for stream in listener.incoming() {
        if shared.stopping.load(Ordering::SeqCst) {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        let peer = stream.peer_addr().ok();
        let id = shared.next_connection.fetch_add(1, Ordering::Relaxed);
        match stream.try_clone() {
            Ok(clone) => {
                lock(&shared.connections).insert(id, clone);
            }
            Err(e) => {
                warn!("dropping connection from {peer:?}: {e}");
                continue;
            }
        }
        let shared = Arc::clone(&shared);
        let spawned = thread::Builder::new()
            .name("modlink-conn".into())
            .spawn(move || {
                if let Err(e) = handle_connection(stream, &shared) {
                    debug!("connection {peer:?} ended: {e}");
                }
                lock(&shared.connections).remove(&id);
            });
        match spawned {
            Ok(handle) => {
                let mut w = lock(&workers);
                w.retain(|h| !h.is_finished());
                w.push(handle);
            }
            Err(e) => warn!("cannot spawn connection thread: {e}"),
        }
    }
}

fn handle_connection(mut stream: TcpStream, shared: &Shared) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut served = 0u64;
    let mut frame = Vec::with_capacity(MBAP_HEADER_LEN + 253);
    loop {
        frame.resize(MBAP_HEADER_LEN, 0);
        if !read_full(&mut stream, &mut frame[..])? {
            return Ok(());
        }
        let arrived = Instant::now();
        let header = match MbapHeader::decode(&frame) {
            Ok(h) => h,
            Err(e) => {
                debug!("closing after unusable header: {e}");
                return Ok(());
            }
        };
        frame.resize(header.frame_len(), 0);
        if !read_full(&mut stream, &mut frame[MBAP_HEADER_LEN..])? {
            return Ok(());
        }
        let delay = lock(&shared.sampler).next_delay();
        let response = respond(&frame, shared);
        let out = encode_response(header.transaction_id, header.unit_id, &response)
            .expect("server responses are always encodable");
        wait_until(arrived + delay);
        if shared.stopping.load(Ordering::SeqCst) {
            return Ok(());
        }
        stream.write_all(&out)?;
        shared.requests.fetch_add(1, Ordering::Relaxed);
        served += 1;
        if shared.profile.faults.close_after.is_some_and(|n| served >= n) {
            debug!("closing connection after {served} requests");
            let _ = stream.shutdown(Shutdown::Both);
            return Ok(());
        }
    }
}

/// Fills `buf`; `Ok(false)` on a clean end of stream before the first byte.
fn read_full(stream: &mut TcpStream, buf: &mut [u8]) -> io::Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match stream.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

fn wait_until(deadline: Instant) {
    loop {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        let left = deadline - now;
        if left > SPIN_WINDOW {
            thread::sleep(left - SPIN_WINDOW);
        } else {
            // lets other connections run on a busy core
            thread::yield_now();
        }
    }
}

/// Answers one complete frame whose header already decoded.
fn respond(frame: &[u8], shared: &Shared) -> ResponsePdu {
    let function = frame[MBAP_HEADER_LEN] & 0x7F;
    let request = match modlink_core::protocol::decode_request(frame) {
        Ok((_, r)) => r,
        Err(e) => {
            let code = e.exception_code().unwrap_or(ExceptionCode::ILLEGAL_DATA_VALUE);
            return ResponsePdu::exception(function, code);
        }
    };
    match check(&request, shared) {
        Ok(()) => shared.store.execute(&request),
        Err(code) => ResponsePdu::exception(request.function_code().as_u8(), code),
    }
}

fn check(request: &RequestPdu, shared: &Shared) -> Result<(), ExceptionCode> {
    let (space, address, count) = request.target();
    let is_write = !matches!(
        request,
        RequestPdu::ReadCoils { .. }
            | RequestPdu::ReadDiscreteInputs { .. }
            | RequestPdu::ReadHoldingRegisters { .. }
            | RequestPdu::ReadInputRegisters { .. }
    );
    if is_write && !shared.profile.writable.allows(space) {
        return Err(ExceptionCode::ILLEGAL_FUNCTION);
    }
    if let Some(rule) = shared
        .profile
        .faults
        .exceptions
        .iter()
        .find(|r| r.matches(space, address, count))
    {
        return Err(rule.code);
    }
    // decode already validated ranges; kept for requests built in-process
    request.validate().map_err(|e: FrameError| {
        e.exception_code().unwrap_or(ExceptionCode::ILLEGAL_DATA_VALUE)
    })
}
