//! Round-trip, framing and reference-implementation checks for the MBAP codec.

use modlink_core::protocol::{
    decode_request, decode_response, encode_request, encode_response, ExceptionCode, FrameError,
    RequestPdu, ResponsePdu, MAX_READ_BITS, MAX_READ_REGISTERS, MAX_WRITE_BITS,
    MAX_WRITE_REGISTERS,
};
use proptest::prelude::*;
use rmodbus::client::ModbusRequest;

/// Address/quantity pairs that satisfy `address + quantity <= 65536`.
fn span(max: u16) -> impl Strategy<Value = (u16, u16)> {
    (1..=max).prop_flat_map(|q| (0..=(65536 - q as u32) as u16, Just(q)))
}

fn request() -> impl Strategy<Value = RequestPdu> {
    prop_oneof![
        span(MAX_READ_BITS).prop_map(|(address, quantity)| RequestPdu::ReadCoils { address, quantity }),
        span(MAX_READ_BITS)
            .prop_map(|(address, quantity)| RequestPdu::ReadDiscreteInputs { address, quantity }),
        span(MAX_READ_REGISTERS)
            .prop_map(|(address, quantity)| RequestPdu::ReadHoldingRegisters { address, quantity }),
        span(MAX_READ_REGISTERS)
            .prop_map(|(address, quantity)| RequestPdu::ReadInputRegisters { address, quantity }),
        (any::<u16>(), any::<bool>())
            .prop_map(|(address, value)| RequestPdu::WriteSingleCoil { address, value }),
        (any::<u16>(), any::<u16>())
            .prop_map(|(address, value)| RequestPdu::WriteSingleRegister { address, value }),
        span(MAX_WRITE_BITS).prop_flat_map(|(address, q)| {
            proptest::collection::vec(any::<bool>(), q as usize)
                .prop_map(move |values| RequestPdu::WriteMultipleCoils { address, values })
        }),
        span(MAX_WRITE_REGISTERS).prop_flat_map(|(address, q)| {
            proptest::collection::vec(any::<u16>(), q as usize)
                .prop_map(move |values| RequestPdu::WriteMultipleRegisters { address, values })
        }),
    ]
}

fn response() -> impl Strategy<Value = ResponsePdu> {
    let bits = proptest::collection::vec(any::<bool>(), 1..=MAX_READ_BITS as usize);
    let regs = proptest::collection::vec(any::<u16>(), 1..=MAX_READ_REGISTERS as usize);
    prop_oneof![
        bits.clone().prop_map(ResponsePdu::ReadCoils),
        bits.prop_map(ResponsePdu::ReadDiscreteInputs),
        regs.clone().prop_map(ResponsePdu::ReadHoldingRegisters),
        regs.prop_map(ResponsePdu::ReadInputRegisters),
        (any::<u16>(), any::<bool>())
            .prop_map(|(address, value)| ResponsePdu::WriteSingleCoil { address, value }),
        (any::<u16>(), any::<u16>())
            .prop_map(|(address, value)| ResponsePdu::WriteSingleRegister { address, value }),
        span(MAX_WRITE_BITS)
            .prop_map(|(address, quantity)| ResponsePdu::WriteMultipleCoils { address, quantity }),
        span(MAX_WRITE_REGISTERS).prop_map(|(address, quantity)| {
            ResponsePdu::WriteMultipleRegisters { address, quantity }
        }),
        (1u8..=0x7F, any::<u8>())
            .prop_map(|(f, c)| ResponsePdu::exception(f, ExceptionCode(c))),
    ]
}

/// Request whose answer is `resp`, used to trim bit payloads.
fn matching_request(resp: &ResponsePdu) -> Option<RequestPdu> {
    match resp {
        ResponsePdu::ReadCoils(b) => Some(RequestPdu::ReadCoils {
            address: 0,
            quantity: b.len() as u16,
        }),
        ResponsePdu::ReadDiscreteInputs(b) => Some(RequestPdu::ReadDiscreteInputs {
            address: 0,
            quantity: b.len() as u16,
        }),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn request_round_trip(tid: u16, unit: u8, req in request()) {
        let adu = encode_request(tid, unit, &req).unwrap();
        prop_assert_eq!(adu.len(), 6 + u16::from_be_bytes([adu[4], adu[5]]) as usize);
        let (header, back) = decode_request(&adu).unwrap();
        prop_assert_eq!(header.transaction_id, tid);
        prop_assert_eq!(header.unit_id, unit);
        prop_assert_eq!(header.protocol_id, 0);
        prop_assert_eq!(back, req);
    }

    #[test]
    fn response_round_trip(tid: u16, unit: u8, resp in response()) {
        let adu = encode_response(tid, unit, &resp).unwrap();
        prop_assert_eq!(adu.len(), 6 + u16::from_be_bytes([adu[4], adu[5]]) as usize);
        let (header, back) = decode_response(&adu).unwrap();
        prop_assert_eq!((header.transaction_id, header.unit_id), (tid, unit));
        let back = match matching_request(&resp) {
            Some(req) => back.answering(&req).unwrap(),
            None => back,
        };
        if let ResponsePdu::Exception { .. } = resp {
            prop_assert_eq!(adu[7], resp.wire_function());
            prop_assert!(adu[7] & 0x80 != 0);
        }
        prop_assert_eq!(back, resp);
    }

    #[test]
    fn decoding_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..300)) {
        let _ = decode_request(&bytes);
        let _ = decode_response(&bytes);
    }

    #[test]
    fn mutated_frames_decode_or_error(req in request(), at: prop::sample::Index, byte: u8) {
        let mut adu = encode_request(1, 1, &req).unwrap();
        let i = at.index(adu.len());
        adu[i] = byte;
        if let Ok((h, _)) = decode_request(&adu) {
            prop_assert_eq!(h.frame_len(), adu.len());
        }
    }
}

fn rmodbus_request(req: &RequestPdu, tid: u16, unit: u8) -> Vec<u8> {
    let mut m = ModbusRequest::new_tcp_udp(unit, tid);
    let mut out = Vec::new();
    match req {
        RequestPdu::ReadCoils { address, quantity } => m.generate_get_coils(*address, *quantity, &mut out),
        RequestPdu::ReadDiscreteInputs { address, quantity } => {
            m.generate_get_discretes(*address, *quantity, &mut out)
        }
        RequestPdu::ReadHoldingRegisters { address, quantity } => {
            m.generate_get_holdings(*address, *quantity, &mut out)
        }
        RequestPdu::ReadInputRegisters { address, quantity } => {
            m.generate_get_inputs(*address, *quantity, &mut out)
        }
        RequestPdu::WriteSingleCoil { address, value } => m.generate_set_coil(*address, *value, &mut out),
        RequestPdu::WriteSingleRegister { address, value } => {
            m.generate_set_holding(*address, *value, &mut out)
        }
        RequestPdu::WriteMultipleCoils { address, values } => {
            m.generate_set_coils_bulk(*address, values, &mut out)
        }
        RequestPdu::WriteMultipleRegisters { address, values } => {
            m.generate_set_holdings_bulk(*address, values, &mut out)
        }
    }
    .expect("reference encoder accepts valid request");
    out
}

#[test]
fn fixed_vectors_match_reference() {
    let read = RequestPdu::ReadHoldingRegisters { address: 0, quantity: 2 };
    let expected = [0x00, 0x01, 0x00, 0x00, 0x00, 0x06, 0x01, 0x03, 0x00, 0x00, 0x00, 0x02];
    assert_eq!(rmodbus_request(&read, 1, 1), expected);
    assert_eq!(encode_request(1, 1, &read).unwrap(), expected);

    let write = RequestPdu::WriteSingleRegister { address: 0, value: 0 };
    let expected = [0x00, 0x00, 0x00, 0x00, 0x00, 0x06, 0x00, 0x06, 0x00, 0x00, 0x00, 0x00];
    assert_eq!(rmodbus_request(&write, 0, 0), expected);
    assert_eq!(encode_request(0, 0, &write).unwrap(), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn requests_match_reference_encoder(tid: u16, unit: u8, req in request()) {
        // rmodbus caps bulk register writes at 125 and coils at 4000, both
        // above the protocol limits generated here
        prop_assert_eq!(encode_request(tid, unit, &req).unwrap(), rmodbus_request(&req, tid, unit));
    }

    #[test]
    fn reference_parses_our_register_responses(
        tid: u16,
        regs in proptest::collection::vec(any::<u16>(), 1..=125usize),
    ) {
        let mut m = ModbusRequest::new_tcp_udp(1, tid);
        let mut req = Vec::new();
        m.generate_get_holdings(0, regs.len() as u16, &mut req).unwrap();
        let adu = encode_response(tid, 1, &ResponsePdu::ReadHoldingRegisters(regs.clone())).unwrap();
        let mut parsed: Vec<u16> = Vec::new();
        m.parse_u16(&adu, &mut parsed).unwrap();
        prop_assert_eq!(parsed, regs);
    }

    #[test]
    fn reference_parses_our_bit_responses(
        tid: u16,
        bits in proptest::collection::vec(any::<bool>(), 1..=2000usize),
    ) {
        let mut m = ModbusRequest::new_tcp_udp(1, tid);
        let mut req = Vec::new();
        m.generate_get_coils(0, bits.len() as u16, &mut req).unwrap();
        let adu = encode_response(tid, 1, &ResponsePdu::ReadCoils(bits.clone())).unwrap();
        let mut parsed: Vec<bool> = Vec::new();
        m.parse_bool(&adu, &mut parsed).unwrap();
        prop_assert_eq!(parsed, bits);
    }
}

#[test]
fn reference_sees_our_exception() {
    let mut m = ModbusRequest::new_tcp_udp(1, 9);
    let mut req = Vec::new();
    m.generate_get_holdings(1000, 1, &mut req).unwrap();
    let adu = encode_response(9, 1, &ResponsePdu::exception(0x03, ExceptionCode::ILLEGAL_DATA_ADDRESS))
        .unwrap();
    assert_eq!(&adu[7..], [0x83, 0x02]);
    assert!(m.parse_ok(&adu).is_err());
}

#[test]
fn header_length_counts_unit_and_pdu() {
    let adu = encode_request(
        3,
        4,
        &RequestPdu::WriteMultipleRegisters { address: 10, values: vec![1, 2, 3] },
    )
    .unwrap();
    // unit + fc + addr(2) + qty(2) + count + 6 payload bytes
    assert_eq!(u16::from_be_bytes([adu[4], adu[5]]), 1 + 1 + 2 + 2 + 1 + 6);
    assert!(matches!(decode_request(&adu[..adu.len() - 1]), Err(FrameError::LengthMismatch { .. })));
}
