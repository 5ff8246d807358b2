//! Random frame generation and the server/client fuzz drivers.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use modlink::connector::{Connector, ConnectorConfig};
use modlink_core::protocol::{
    decode_request, decode_response, encode_request, encode_response, MbapHeader, RequestPdu,
    ResponsePdu, MAX_PDU_LEN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CODES: [u8; 8] = [0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x0F, 0x10];

/// A PDU biased towards the interesting region: real function codes with
/// small addresses and quantities, mixed with plain noise.
fn random_pdu(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let len = match rng.random_range(0..4) {
        0 => rng.random_range(1..=MAX_PDU_LEN),
        _ => rng.random_range(1..=12),
    };
    let mut pdu: Vec<u8> = (0..len).map(|_| rng.random()).collect();
    if rng.random_bool(0.75) {
        pdu[0] = CODES[rng.random_range(0..CODES.len())];
    }
    if pdu.len() >= 5 && rng.random_bool(0.5) {
        pdu[1] = 0;
        pdu[3] = 0;
        pdu[4] = rng.random_range(0..=8);
    }
    pdu
}

/// A random frame. Most carry a plausible MBAP header so they reach the
/// PDU decoder; the rest are raw noise of at least header size.
pub fn random_frame(rng: &mut ChaCha8Rng) -> Vec<u8> {
    match rng.random_range(0..8) {
        0 | 1 => {
            let n = rng.random_range(7..=300);
            (0..n).map(|_| rng.random()).collect()
        }
        2 => {
            // a valid request with one byte flipped
            let req = RequestPdu::ReadHoldingRegisters {
                address: rng.random_range(0..100),
                quantity: rng.random_range(1..=125),
            };
            let mut f = encode_request(rng.random(), rng.random(), &req).unwrap();
            let i = rng.random_range(0..f.len());
            f[i] ^= 1 << rng.random_range(0..8);
            f
        }
        _ => {
            let pdu = random_pdu(rng);
            let mut f = Vec::with_capacity(7 + pdu.len());
            f.extend_from_slice(&rng.random::<u16>().to_be_bytes());
            let protocol: u16 = if rng.random_bool(0.9) { 0 } else { rng.random() };
            f.extend_from_slice(&protocol.to_be_bytes());
            let length: u16 = if rng.random_bool(0.95) { pdu.len() as u16 + 1 } else { rng.random() };
            f.extend_from_slice(&length.to_be_bytes());
            f.push(rng.random());
            f.extend_from_slice(&pdu);
            f
        }
    }
}

#[derive(Debug, Default)]
pub struct ServerFuzzReport {
    pub frames: usize,
    pub answered: usize,
    pub exceptions: usize,
    pub closed: usize,
    pub failures: Vec<String>,
}

fn open(addr: SocketAddr) -> TcpStream {
    let s = TcpStream::connect(addr).expect("server accepts");
    s.set_read_timeout(Some(Duration::from_secs(2))).unwrap();
    s.set_nodelay(true).unwrap();
    s
}

/// Sends `count` random frames to the server at `addr`. A frame whose header
/// is usable must get a decodable response echoing its transaction id; any
/// other frame must make the server close the connection. Frames whose
/// header decodes are cut or zero-padded to the length they announce, so
/// the server never waits for bytes that will not come. A read timeout
/// counts as a hang.
pub fn fuzz_server(addr: SocketAddr, count: usize, seed: u64) -> ServerFuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ServerFuzzReport::default();
    let mut stream = open(addr);
    for n in 0..count {
        let mut frame = random_frame(&mut rng);
        let header = MbapHeader::decode(&frame).ok();
        if let Some(h) = header {
            frame.resize(h.frame_len(), 0);
        }
        report.frames += 1;
        if let Err(e) = stream.write_all(&frame) {
            report.failures.push(format!("frame {n}: write failed: {e}"));
            stream = open(addr);
            continue;
        }
        match header {
            Some(h) => match read_frame(&mut stream) {
                Ok(Some(reply)) => match decode_response(&reply) {
                    Ok((rh, pdu)) if rh.transaction_id == h.transaction_id && rh.unit_id == h.unit_id => {
                        report.answered += 1;
                        let fc = frame[7] & 0x7F;
                        if pdu.wire_function() == fc | 0x80 {
                            report.exceptions += 1;
                        } else if pdu.wire_function() != fc {
                            report.failures.push(format!("frame {n}: answered function {:#04x} to {fc:#04x}", pdu.wire_function()));
                        }
                    }
                    Ok((rh, _)) => report.failures.push(format!("frame {n}: header {rh:?} does not echo {h:?}")),
                    Err(e) => report.failures.push(format!("frame {n}: undecodable reply {reply:02X?}: {e}")),
                },
                Ok(None) => {
                    report.failures.push(format!("frame {n}: closed without reply to {frame:02X?}"));
                    stream = open(addr);
                }
                Err(e) => {
                    report.failures.push(format!("frame {n}: {e} waiting for reply to {frame:02X?}"));
                    stream = open(addr);
                }
            },
            None => {
                let mut buf = [0u8; 1];
                match stream.read(&mut buf) {
                    Ok(0) => report.closed += 1,
                    Err(e) if e.kind() == ErrorKind::ConnectionReset => report.closed += 1,
                    Ok(_) => report.failures.push(format!("frame {n}: reply to unusable header {frame:02X?}")),
                    Err(e) => report.failures.push(format!("frame {n}: {e} waiting for close after {frame:02X?}")),
                }
                stream = open(addr);
            }
        }
    }
    report
}

/// Reads one ADU; `None` on a clean close before any byte.
fn read_frame(stream: &mut TcpStream) -> std::io::Result<Option<Vec<u8>>> {
    let mut head = [0u8; 7];
    match stream.read_exact(&mut head) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let h = MbapHeader::decode(&head).map_err(|e| std::io::Error::new(ErrorKind::InvalidData, e.to_string()))?;
    let mut frame = head.to_vec();
    frame.resize(h.frame_len(), 0);
    stream.read_exact(&mut frame[7..])?;
    Ok(Some(frame))
}

#[derive(Debug, Default)]
pub struct DecoderFuzzReport {
    pub frames: usize,
    pub parsed: usize,
    pub rejected: usize,
}

/// Feeds random frames to the response, request and header decoders. A
/// panic fails the caller.
pub fn fuzz_decoders(count: usize, seed: u64) -> DecoderFuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DecoderFuzzReport::default();
    for _ in 0..count {
        let mut frame = random_frame(&mut rng);
        if rng.random_bool(0.5) {
            // response-shaped: function, byte count, data
            if frame.len() > 8 && frame[7] & 0x80 == 0 {
                frame[8] = (frame.len() - 9) as u8;
            }
        }
        if rng.random_bool(0.1) {
            frame.truncate(rng.random_range(0..frame.len().max(1)));
        }
        report.frames += 1;
        let _ = MbapHeader::decode(&frame);
        let _ = decode_request(&frame);
        match decode_response(&frame) {
            Ok(_) => report.parsed += 1,
            Err(_) => report.rejected += 1,
        }
    }
    report
}

/// A fake device answering each request with random bytes framed under a
/// correct header most of the time, and
/// with a genuine four-register reply now and then. Returns its address.
pub fn noisy_device(seed: u64) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for conn in listener.incoming() {
            let Ok(mut s) = conn else { return };
            let mut head = [0u8; 7];
            while s.read_exact(&mut head).is_ok() {
                let Ok(h) = MbapHeader::decode(&head) else { break };
                let mut rest = vec![0u8; h.frame_len() - 7];
                if s.read_exact(&mut rest).is_err() {
                    break;
                }
                if rng.random_bool(0.2) {
                    let words = (0..4).map(|_| rng.random()).collect();
                    let reply = encode_response(h.transaction_id, h.unit_id, &ResponsePdu::ReadHoldingRegisters(words)).unwrap();
                    if s.write_all(&reply).is_err() {
                        break;
                    }
                    continue;
                }
                let mut reply = random_frame(&mut rng);
                if rng.random_bool(0.7) {
                    reply[0..2].copy_from_slice(&h.transaction_id.to_be_bytes());
                    reply[2..4].copy_from_slice(&[0, 0]);
                    reply[6] = h.unit_id;
                    if reply.len() > 7 && rng.random_bool(0.6) {
                        reply[7] = rest[0] | if rng.random_bool(0.2) { 0x80 } else { 0 };
                    }
                }
                let len = reply.len() as u16 - 6;
                reply[4..6].copy_from_slice(&len.to_be_bytes());
                if s.write_all(&reply).is_err() {
                    break;
                }
            }
        }
    });
    addr
}

/// Runs `count` transactions against a noisy device. Every call must finish
/// with `Ok` or a structured error; a broken connection is reopened.
pub fn fuzz_connector(addr: SocketAddr, count: usize) -> (usize, usize) {
    let mut config = ConnectorConfig::new(addr.to_string(), 1);
    config.response_timeout = Duration::from_millis(500);
    let mut c = Connector::connect(config).unwrap();
    let req = RequestPdu::ReadHoldingRegisters { address: 0, quantity: 4 };
    let (mut ok, mut err) = (0, 0);
    for _ in 0..count {
        if !c.is_connected() {
            c.reconnect().unwrap();
        }
        match c.transact(&req) {
            Ok(_) => ok += 1,
            Err(_) => err += 1,
        }
    }
    (ok, err)
}
