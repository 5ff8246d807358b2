//! Modbus/TCP application data units: the 7-byte MBAP header followed by a
//! function-code PDU.
//!
//! Only the eight public function codes a polling connector needs are
//! supported (0x01-0x06, 0x0F, 0x10). All multi-byte fields are big-endian on
//! the wire. Decoding never panics: any byte slice yields either a frame or a
//! [`FrameError`].

use alloc::vec::Vec;
use core::fmt;

/// Size of the MBAP header in bytes.
pub const MBAP_HEADER_LEN: usize = 7;
/// Largest PDU that fits a Modbus ADU.
pub const MAX_PDU_LEN: usize = 253;

pub const MAX_READ_REGISTERS: u16 = 125;
pub const MAX_READ_BITS: u16 = 2000;
pub const MAX_WRITE_REGISTERS: u16 = 123;
pub const MAX_WRITE_BITS: u16 = 1968;

const COIL_ON: u16 = 0xFF00;
const COIL_OFF: u16 = 0x0000;

/// One of the four Modbus data spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegisterSpace {
    Coils,
    DiscreteInputs,
    InputRegisters,
    HoldingRegisters,
}

impl RegisterSpace {
    pub const ALL: [RegisterSpace; 4] = [
        RegisterSpace::Coils,
        RegisterSpace::DiscreteInputs,
        RegisterSpace::InputRegisters,
        RegisterSpace::HoldingRegisters,
    ];

    /// Coils and holding registers accept writes.
    pub fn is_writable(self) -> bool {
        matches!(self, RegisterSpace::Coils | RegisterSpace::HoldingRegisters)
    }

    /// Coils and discrete inputs hold single bits.
    pub fn is_bit_space(self) -> bool {
        matches!(self, RegisterSpace::Coils | RegisterSpace::DiscreteInputs)
    }

    /// Maximum quantity of one read request in this space.
    pub fn read_limit(self) -> u16 {
        if self.is_bit_space() {
            MAX_READ_BITS
        } else {
            MAX_READ_REGISTERS
        }
    }

    pub fn read_function(self) -> FunctionCode {
        match self {
            RegisterSpace::Coils => FunctionCode::ReadCoils,
            RegisterSpace::DiscreteInputs => FunctionCode::ReadDiscreteInputs,
            RegisterSpace::InputRegisters => FunctionCode::ReadInputRegisters,
            RegisterSpace::HoldingRegisters => FunctionCode::ReadHoldingRegisters,
        }
    }

    /// Short keyword used in model documents.
    pub fn keyword(self) -> &'static str {
        match self {
            RegisterSpace::Coils => "coil",
            RegisterSpace::DiscreteInputs => "discrete",
            RegisterSpace::InputRegisters => "input",
            RegisterSpace::HoldingRegisters => "holding",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        let space = match s.to_ascii_lowercase().as_str() {
            "coil" | "coils" => RegisterSpace::Coils,
            "discrete" | "discrete_input" | "discrete_inputs" | "discrete-input"
            | "discrete-inputs" | "di" => RegisterSpace::DiscreteInputs,
            "input" | "input_register" | "input_registers" | "input-register"
            | "input-registers" | "ir" => RegisterSpace::InputRegisters,
            "holding" | "holding_register" | "holding_registers" | "holding-register"
            | "holding-registers" | "hr" => RegisterSpace::HoldingRegisters,
            _ => return None,
        };
        Some(space)
    }
}

impl fmt::Display for RegisterSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FunctionCode {
    ReadCoils = 0x01,
    ReadDiscreteInputs = 0x02,
    ReadHoldingRegisters = 0x03,
    ReadInputRegisters = 0x04,
    WriteSingleCoil = 0x05,
    WriteSingleRegister = 0x06,
    WriteMultipleCoils = 0x0F,
    WriteMultipleRegisters = 0x10,
}

impl FunctionCode {
    pub fn from_u8(code: u8) -> Option<Self> {
        Some(match code {
            0x01 => FunctionCode::ReadCoils,
            0x02 => FunctionCode::ReadDiscreteInputs,
            0x03 => FunctionCode::ReadHoldingRegisters,
            0x04 => FunctionCode::ReadInputRegisters,
            0x05 => FunctionCode::WriteSingleCoil,
            0x06 => FunctionCode::WriteSingleRegister,
            0x0F => FunctionCode::WriteMultipleCoils,
            0x10 => FunctionCode::WriteMultipleRegisters,
            _ => return None,
        })
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

/// Modbus exception code carried by an exception response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExceptionCode(pub u8);

impl ExceptionCode {
    pub const ILLEGAL_FUNCTION: ExceptionCode = ExceptionCode(0x01);
    pub const ILLEGAL_DATA_ADDRESS: ExceptionCode = ExceptionCode(0x02);
    pub const ILLEGAL_DATA_VALUE: ExceptionCode = ExceptionCode(0x03);
    pub const SERVER_DEVICE_FAILURE: ExceptionCode = ExceptionCode(0x04);

    pub fn description(self) -> &'static str {
        match self.0 {
            0x01 => "illegal function",
            0x02 => "illegal data address",
            0x03 => "illegal data value",
            0x04 => "server device failure",
            0x05 => "acknowledge",
            0x06 => "server device busy",
            0x08 => "memory parity error",
            0x0A => "gateway path unavailable",
            0x0B => "gateway target failed to respond",
            _ => "unknown exception",
        }
    }
}

impl fmt::Display for ExceptionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:02X} ({})", self.0, self.description())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("short frame: need at least {needed} bytes, got {actual}")]
    ShortFrame { needed: usize, actual: usize },
    #[error("length mismatch: header declares {declared} bytes after the length field, frame carries {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("nonzero protocol id {0}")]
    ProtocolId(u16),
    #[error("unknown function code 0x{0:02X}")]
    UnknownFunction(u8),
    #[error("function 0x{function:02X}: PDU length {actual}, expected {expected}")]
    PduLength {
        function: u8,
        expected: usize,
        actual: usize,
    },
    #[error("PDU of {0} bytes exceeds the 253-byte limit")]
    PduTooLong(usize),
    #[error("quantity {quantity} outside 1..={max}")]
    QuantityOutOfRange { quantity: usize, max: u16 },
    #[error("address {address} + quantity {quantity} exceeds the 65536-entry address space")]
    AddressOverflow { address: u16, quantity: usize },
    #[error("byte count {declared} does not match {actual} payload bytes")]
    ByteCountMismatch { declared: usize, actual: usize },
    #[error("invalid coil value 0x{0:04X} (expected 0xFF00 or 0x0000)")]
    InvalidCoilValue(u16),
    #[error("response function 0x{actual:02X} does not answer request function 0x{expected:02X}")]
    FunctionMismatch { expected: u8, actual: u8 },
    #[error("response does not match request: {0}")]
    UnexpectedResponse(&'static str),
}

impl FrameError {
    /// Exception code a server should answer with when a request fails to
    /// decode with this error. `None` means the frame itself is unusable and
    /// the connection cannot be resynchronised.
    pub fn exception_code(&self) -> Option<ExceptionCode> {
        match self {
            FrameError::UnknownFunction(_) => Some(ExceptionCode::ILLEGAL_FUNCTION),
            FrameError::AddressOverflow { .. } => Some(ExceptionCode::ILLEGAL_DATA_ADDRESS),
            FrameError::PduLength { .. }
            | FrameError::QuantityOutOfRange { .. }
            | FrameError::ByteCountMismatch { .. }
            | FrameError::InvalidCoilValue(_) => Some(ExceptionCode::ILLEGAL_DATA_VALUE),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MbapHeader {
    pub transaction_id: u16,
    pub protocol_id: u16,
    /// Bytes following the length field: unit id plus PDU.
    pub length: u16,
    pub unit_id: u8,
}

impl MbapHeader {
    pub fn new(transaction_id: u16, unit_id: u8, pdu_len: usize) -> Self {
        MbapHeader {
            transaction_id,
            protocol_id: 0,
            length: (pdu_len + 1) as u16,
            unit_id,
        }
    }

    /// Parses the first seven bytes of `bytes`. Does not look at the PDU.
    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < MBAP_HEADER_LEN {
            return Err(FrameError::ShortFrame {
                needed: MBAP_HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let header = MbapHeader {
            transaction_id: u16::from_be_bytes([bytes[0], bytes[1]]),
            protocol_id: u16::from_be_bytes([bytes[2], bytes[3]]),
            length: u16::from_be_bytes([bytes[4], bytes[5]]),
            unit_id: bytes[6],
        };
        if header.protocol_id != 0 {
            return Err(FrameError::ProtocolId(header.protocol_id));
        }
        if header.length < 2 {
            // unit id plus at least a function code
            return Err(FrameError::ShortFrame {
                needed: MBAP_HEADER_LEN + 1,
                actual: 6 + header.length as usize,
            });
        }
        if header.length as usize > MAX_PDU_LEN + 1 {
            return Err(FrameError::PduTooLong(header.length as usize - 1));
        }
        Ok(header)
    }

    /// Total ADU size announced by this header.
    pub fn frame_len(&self) -> usize {
        6 + self.length as usize
    }

    pub fn pdu_len(&self) -> usize {
        self.length as usize - 1
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.transaction_id.to_be_bytes());
        out.extend_from_slice(&self.protocol_id.to_be_bytes());
        out.extend_from_slice(&self.length.to_be_bytes());
        out.push(self.unit_id);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RequestPdu {
    ReadCoils { address: u16, quantity: u16 },
    ReadDiscreteInputs { address: u16, quantity: u16 },
    ReadHoldingRegisters { address: u16, quantity: u16 },
    ReadInputRegisters { address: u16, quantity: u16 },
    WriteSingleCoil { address: u16, value: bool },
    WriteSingleRegister { address: u16, value: u16 },
    WriteMultipleCoils { address: u16, values: Vec<bool> },
    WriteMultipleRegisters { address: u16, values: Vec<u16> },
}

impl RequestPdu {
    /// Read request for `quantity` entries of `space` starting at `address`.
    pub fn read(space: RegisterSpace, address: u16, quantity: u16) -> Self {
        match space {
            RegisterSpace::Coils => RequestPdu::ReadCoils { address, quantity },
            RegisterSpace::DiscreteInputs => RequestPdu::ReadDiscreteInputs { address, quantity },
            RegisterSpace::InputRegisters => RequestPdu::ReadInputRegisters { address, quantity },
            RegisterSpace::HoldingRegisters => {
                RequestPdu::ReadHoldingRegisters { address, quantity }
            }
        }
    }

    pub fn function_code(&self) -> FunctionCode {
        match self {
            RequestPdu::ReadCoils { .. } => FunctionCode::ReadCoils,
            RequestPdu::ReadDiscreteInputs { .. } => FunctionCode::ReadDiscreteInputs,
            RequestPdu::ReadHoldingRegisters { .. } => FunctionCode::ReadHoldingRegisters,
            RequestPdu::ReadInputRegisters { .. } => FunctionCode::ReadInputRegisters,
            RequestPdu::WriteSingleCoil { .. } => FunctionCode::WriteSingleCoil,
            RequestPdu::WriteSingleRegister { .. } => FunctionCode::WriteSingleRegister,
            RequestPdu::WriteMultipleCoils { .. } => FunctionCode::WriteMultipleCoils,
            RequestPdu::WriteMultipleRegisters { .. } => FunctionCode::WriteMultipleRegisters,
        }
    }

    /// Space a request addresses, with its start address and quantity.
    pub fn target(&self) -> (RegisterSpace, u16, usize) {
        match self {
            RequestPdu::ReadCoils { address, quantity } => {
                (RegisterSpace::Coils, *address, *quantity as usize)
            }
            RequestPdu::ReadDiscreteInputs { address, quantity } => {
                (RegisterSpace::DiscreteInputs, *address, *quantity as usize)
            }
            RequestPdu::ReadHoldingRegisters { address, quantity } => {
                (RegisterSpace::HoldingRegisters, *address, *quantity as usize)
            }
            RequestPdu::ReadInputRegisters { address, quantity } => {
                (RegisterSpace::InputRegisters, *address, *quantity as usize)
            }
            RequestPdu::WriteSingleCoil { address, .. } => (RegisterSpace::Coils, *address, 1),
            RequestPdu::WriteSingleRegister { address, .. } => {
                (RegisterSpace::HoldingRegisters, *address, 1)
            }
            RequestPdu::WriteMultipleCoils { address, values } => {
                (RegisterSpace::Coils, *address, values.len())
            }
            RequestPdu::WriteMultipleRegisters { address, values } => {
                (RegisterSpace::HoldingRegisters, *address, values.len())
            }
        }
    }

    /// Checks quantity limits and the address-space bound.
    pub fn validate(&self) -> Result<(), FrameError> {
        let max = match self {
            RequestPdu::ReadCoils { .. } | RequestPdu::ReadDiscreteInputs { .. } => MAX_READ_BITS,
            RequestPdu::ReadHoldingRegisters { .. } | RequestPdu::ReadInputRegisters { .. } => {
                MAX_READ_REGISTERS
            }
            RequestPdu::WriteMultipleCoils { .. } => MAX_WRITE_BITS,
            RequestPdu::WriteMultipleRegisters { .. } => MAX_WRITE_REGISTERS,
            RequestPdu::WriteSingleCoil { .. } | RequestPdu::WriteSingleRegister { .. } => {
                return Ok(())
            }
        };
        let (_, address, quantity) = self.target();
        check_range(address, quantity, max)
    }

    /// Appends the PDU bytes (function code onwards) to `out`.
    pub fn encode_pdu(&self, out: &mut Vec<u8>) -> Result<(), FrameError> {
        self.validate()?;
        out.push(self.function_code().as_u8());
        match self {
            RequestPdu::ReadCoils { address, quantity }
            | RequestPdu::ReadDiscreteInputs { address, quantity }
            | RequestPdu::ReadHoldingRegisters { address, quantity }
            | RequestPdu::ReadInputRegisters { address, quantity } => {
                put_u16(out, *address);
                put_u16(out, *quantity);
            }
            RequestPdu::WriteSingleCoil { address, value } => {
                put_u16(out, *address);
                put_u16(out, if *value { COIL_ON } else { COIL_OFF });
            }
            RequestPdu::WriteSingleRegister { address, value } => {
                put_u16(out, *address);
                put_u16(out, *value);
            }
            RequestPdu::WriteMultipleCoils { address, values } => {
                put_u16(out, *address);
                put_u16(out, values.len() as u16);
                out.push(values.len().div_ceil(8) as u8);
                pack_bits(values, out);
            }
            RequestPdu::WriteMultipleRegisters { address, values } => {
                put_u16(out, *address);
                put_u16(out, values.len() as u16);
                out.push((values.len() * 2) as u8);
                for v in values {
                    put_u16(out, *v);
                }
            }
        }
        Ok(())
    }

    /// Parses a request PDU (function code onwards).
    pub fn decode_pdu(pdu: &[u8]) -> Result<Self, FrameError> {
        let (&code, body) = pdu.split_first().ok_or(FrameError::ShortFrame {
            needed: 1,
            actual: 0,
        })?;
        let function = FunctionCode::from_u8(code).ok_or(FrameError::UnknownFunction(code))?;
        let req = match function {
            FunctionCode::ReadCoils
            | FunctionCode::ReadDiscreteInputs
            | FunctionCode::ReadHoldingRegisters
            | FunctionCode::ReadInputRegisters => {
                expect_len(code, body, 4)?;
                let address = be16(body, 0);
                let quantity = be16(body, 2);
                match function {
                    FunctionCode::ReadCoils => RequestPdu::ReadCoils { address, quantity },
                    FunctionCode::ReadDiscreteInputs => {
                        RequestPdu::ReadDiscreteInputs { address, quantity }
                    }
                    FunctionCode::ReadHoldingRegisters => {
                        RequestPdu::ReadHoldingRegisters { address, quantity }
                    }
                    _ => RequestPdu::ReadInputRegisters { address, quantity },
                }
            }
            FunctionCode::WriteSingleCoil => {
                expect_len(code, body, 4)?;
                RequestPdu::WriteSingleCoil {
                    address: be16(body, 0),
                    value: coil_value(be16(body, 2))?,
                }
            }
            FunctionCode::WriteSingleRegister => {
                expect_len(code, body, 4)?;
                RequestPdu::WriteSingleRegister {
                    address: be16(body, 0),
                    value: be16(body, 2),
                }
            }
            FunctionCode::WriteMultipleCoils => {
                let (address, quantity, payload) = multi_write_body(code, body)?;
                check_range(address, quantity as usize, MAX_WRITE_BITS)?;
                let expected = (quantity as usize).div_ceil(8);
                if payload.len() != expected {
                    return Err(FrameError::ByteCountMismatch {
                        declared: payload.len(),
                        actual: expected,
                    });
                }
                RequestPdu::WriteMultipleCoils {
                    address,
                    values: unpack_bits(payload, quantity as usize),
                }
            }
            FunctionCode::WriteMultipleRegisters => {
                let (address, quantity, payload) = multi_write_body(code, body)?;
                check_range(address, quantity as usize, MAX_WRITE_REGISTERS)?;
                if payload.len() != quantity as usize * 2 {
                    return Err(FrameError::ByteCountMismatch {
                        declared: payload.len(),
                        actual: quantity as usize * 2,
                    });
                }
                RequestPdu::WriteMultipleRegisters {
                    address,
                    values: payload.chunks_exact(2).map(|c| be16(c, 0)).collect(),
                }
            }
        };
        req.validate()?;
        Ok(req)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponsePdu {
    /// Bit payloads decode to whole bytes; use [`ResponsePdu::answering`] to
    /// trim them to the requested quantity.
    ReadCoils(Vec<bool>),
    ReadDiscreteInputs(Vec<bool>),
    ReadHoldingRegisters(Vec<u16>),
    ReadInputRegisters(Vec<u16>),
    WriteSingleCoil { address: u16, value: bool },
    WriteSingleRegister { address: u16, value: u16 },
    WriteMultipleCoils { address: u16, quantity: u16 },
    WriteMultipleRegisters { address: u16, quantity: u16 },
    /// `function` is the request's function code; the wire form sets bit 0x80.
    Exception { function: u8, code: ExceptionCode },
}

impl ResponsePdu {
    pub fn exception(function: u8, code: ExceptionCode) -> Self {
        ResponsePdu::Exception {
            function: function & 0x7F,
            code,
        }
    }

    /// Function code byte as it appears on the wire.
    pub fn wire_function(&self) -> u8 {
        match self {
            ResponsePdu::ReadCoils(_) => 0x01,
            ResponsePdu::ReadDiscreteInputs(_) => 0x02,
            ResponsePdu::ReadHoldingRegisters(_) => 0x03,
            ResponsePdu::ReadInputRegisters(_) => 0x04,
            ResponsePdu::WriteSingleCoil { .. } => 0x05,
            ResponsePdu::WriteSingleRegister { .. } => 0x06,
            ResponsePdu::WriteMultipleCoils { .. } => 0x0F,
            ResponsePdu::WriteMultipleRegisters { .. } => 0x10,
            ResponsePdu::Exception { function, .. } => function | 0x80,
        }
    }

    pub fn encode_pdu(&self, out: &mut Vec<u8>) -> Result<(), FrameError> {
        out.push(self.wire_function());
        match self {
            ResponsePdu::ReadCoils(bits) | ResponsePdu::ReadDiscreteInputs(bits) => {
                if bits.is_empty() || bits.len() > MAX_READ_BITS as usize {
                    return Err(FrameError::QuantityOutOfRange {
                        quantity: bits.len(),
                        max: MAX_READ_BITS,
                    });
                }
                out.push(bits.len().div_ceil(8) as u8);
                pack_bits(bits, out);
            }
            ResponsePdu::ReadHoldingRegisters(regs) | ResponsePdu::ReadInputRegisters(regs) => {
                if regs.is_empty() || regs.len() > MAX_READ_REGISTERS as usize {
                    return Err(FrameError::QuantityOutOfRange {
                        quantity: regs.len(),
                        max: MAX_READ_REGISTERS,
                    });
                }
                out.push((regs.len() * 2) as u8);
                for r in regs {
                    put_u16(out, *r);
                }
            }
            ResponsePdu::WriteSingleCoil { address, value } => {
                put_u16(out, *address);
                put_u16(out, if *value { COIL_ON } else { COIL_OFF });
            }
            ResponsePdu::WriteSingleRegister { address, value } => {
                put_u16(out, *address);
                put_u16(out, *value);
            }
            ResponsePdu::WriteMultipleCoils { address, quantity } => {
                check_range(*address, *quantity as usize, MAX_WRITE_BITS)?;
                put_u16(out, *address);
                put_u16(out, *quantity);
            }
            ResponsePdu::WriteMultipleRegisters { address, quantity } => {
                check_range(*address, *quantity as usize, MAX_WRITE_REGISTERS)?;
                put_u16(out, *address);
                put_u16(out, *quantity);
            }
            ResponsePdu::Exception { code, .. } => out.push(code.0),
        }
        Ok(())
    }

    pub fn decode_pdu(pdu: &[u8]) -> Result<Self, FrameError> {
        let (&code, body) = pdu.split_first().ok_or(FrameError::ShortFrame {
            needed: 1,
            actual: 0,
        })?;
        if code & 0x80 != 0 {
            expect_len(code, body, 1)?;
            return Ok(ResponsePdu::Exception {
                function: code & 0x7F,
                code: ExceptionCode(body[0]),
            });
        }
        let function = FunctionCode::from_u8(code).ok_or(FrameError::UnknownFunction(code))?;
        let resp = match function {
            FunctionCode::ReadCoils | FunctionCode::ReadDiscreteInputs => {
                let payload = counted_payload(code, body)?;
                if payload.is_empty() || payload.len() > (MAX_READ_BITS as usize).div_ceil(8) {
                    return Err(FrameError::QuantityOutOfRange {
                        quantity: payload.len() * 8,
                        max: MAX_READ_BITS,
                    });
                }
                let bits = unpack_bits(payload, payload.len() * 8);
                if function == FunctionCode::ReadCoils {
                    ResponsePdu::ReadCoils(bits)
                } else {
                    ResponsePdu::ReadDiscreteInputs(bits)
                }
            }
            FunctionCode::ReadHoldingRegisters | FunctionCode::ReadInputRegisters => {
                let payload = counted_payload(code, body)?;
                if payload.len() % 2 != 0 {
                    return Err(FrameError::ByteCountMismatch {
                        declared: payload.len(),
                        actual: payload.len() / 2 * 2,
                    });
                }
                let regs: Vec<u16> = payload.chunks_exact(2).map(|c| be16(c, 0)).collect();
                if regs.is_empty() || regs.len() > MAX_READ_REGISTERS as usize {
                    return Err(FrameError::QuantityOutOfRange {
                        quantity: regs.len(),
                        max: MAX_READ_REGISTERS,
                    });
                }
                if function == FunctionCode::ReadHoldingRegisters {
                    ResponsePdu::ReadHoldingRegisters(regs)
                } else {
                    ResponsePdu::ReadInputRegisters(regs)
                }
            }
            FunctionCode::WriteSingleCoil => {
                expect_len(code, body, 4)?;
                ResponsePdu::WriteSingleCoil {
                    address: be16(body, 0),
                    value: coil_value(be16(body, 2))?,
                }
            }
            FunctionCode::WriteSingleRegister => {
                expect_len(code, body, 4)?;
                ResponsePdu::WriteSingleRegister {
                    address: be16(body, 0),
                    value: be16(body, 2),
                }
            }
            FunctionCode::WriteMultipleCoils | FunctionCode::WriteMultipleRegisters => {
                expect_len(code, body, 4)?;
                let address = be16(body, 0);
                let quantity = be16(body, 2);
                if function == FunctionCode::WriteMultipleCoils {
                    check_range(address, quantity as usize, MAX_WRITE_BITS)?;
                    ResponsePdu::WriteMultipleCoils { address, quantity }
                } else {
                    check_range(address, quantity as usize, MAX_WRITE_REGISTERS)?;
                    ResponsePdu::WriteMultipleRegisters { address, quantity }
                }
            }
        };
        Ok(resp)
    }

    /// Checks that this response answers `request` and trims bit payloads to
    /// the requested quantity. Exceptions for the request's function pass
    /// through unchanged.
    pub fn answering(self, request: &RequestPdu) -> Result<Self, FrameError> {
        let expected = request.function_code().as_u8();
        let actual = self.wire_function() & 0x7F;
        if actual != expected {
            return Err(FrameError::FunctionMismatch { expected, actual });
        }
        let resp = match (self, request) {
            (exc @ ResponsePdu::Exception { .. }, _) => exc,
            (ResponsePdu::ReadCoils(bits), RequestPdu::ReadCoils { quantity, .. }) => {
                ResponsePdu::ReadCoils(trim_bits(bits, *quantity)?)
            }
            (
                ResponsePdu::ReadDiscreteInputs(bits),
                RequestPdu::ReadDiscreteInputs { quantity, .. },
            ) => ResponsePdu::ReadDiscreteInputs(trim_bits(bits, *quantity)?),
            (
                ResponsePdu::ReadHoldingRegisters(regs),
                RequestPdu::ReadHoldingRegisters { quantity, .. },
            )
            | (
                ResponsePdu::ReadInputRegisters(regs),
                RequestPdu::ReadInputRegisters { quantity, .. },
            ) => {
                if regs.len() != *quantity as usize {
                    return Err(FrameError::UnexpectedResponse("register count differs"));
                }
                if matches!(request, RequestPdu::ReadHoldingRegisters { .. }) {
                    ResponsePdu::ReadHoldingRegisters(regs)
                } else {
                    ResponsePdu::ReadInputRegisters(regs)
                }
            }
            (
                ResponsePdu::WriteSingleCoil { address, value },
                RequestPdu::WriteSingleCoil {
                    address: a,
                    value: v,
                },
            ) => {
                if address != *a || value != *v {
                    return Err(FrameError::UnexpectedResponse("coil write echo differs"));
                }
                ResponsePdu::WriteSingleCoil { address, value }
            }
            (
                ResponsePdu::WriteSingleRegister { address, value },
                RequestPdu::WriteSingleRegister {
                    address: a,
                    value: v,
                },
            ) => {
                if address != *a || value != *v {
                    return Err(FrameError::UnexpectedResponse("register write echo differs"));
                }
                ResponsePdu::WriteSingleRegister { address, value }
            }
            (
                ResponsePdu::WriteMultipleCoils { address, quantity },
                RequestPdu::WriteMultipleCoils { address: a, values },
            ) => {
                if address != *a || quantity as usize != values.len() {
                    return Err(FrameError::UnexpectedResponse("coil write echo differs"));
                }
                ResponsePdu::WriteMultipleCoils { address, quantity }
            }
            (
                ResponsePdu::WriteMultipleRegisters { address, quantity },
                RequestPdu::WriteMultipleRegisters { address: a, values },
            ) => {
                if address != *a || quantity as usize != values.len() {
                    return Err(FrameError::UnexpectedResponse("register write echo differs"));
                }
                ResponsePdu::WriteMultipleRegisters { address, quantity }
            }
            _ => return Err(FrameError::UnexpectedResponse("payload kind differs")),
        };
        Ok(resp)
    }
}

/// Encodes a complete request ADU.
pub fn encode_request(
    transaction_id: u16,
    unit_id: u8,
    request: &RequestPdu,
) -> Result<Vec<u8>, FrameError> {
    let mut out = Vec::with_capacity(MBAP_HEADER_LEN + 12);
    out.resize(MBAP_HEADER_LEN, 0);
    request.encode_pdu(&mut out)?;
    finish_adu(out, transaction_id, unit_id)
}

/// Decodes a complete request ADU. `bytes` must hold exactly one frame.
pub fn decode_request(bytes: &[u8]) -> Result<(MbapHeader, RequestPdu), FrameError> {
    let (header, pdu) = split_adu(bytes)?;
    Ok((header, RequestPdu::decode_pdu(pdu)?))
}

/// Encodes a complete response ADU.
pub fn encode_response(
    transaction_id: u16,
    unit_id: u8,
    response: &ResponsePdu,
) -> Result<Vec<u8>, FrameError> {
    let mut out = Vec::with_capacity(MBAP_HEADER_LEN + 8);
    out.resize(MBAP_HEADER_LEN, 0);
    response.encode_pdu(&mut out)?;
    finish_adu(out, transaction_id, unit_id)
}

/// Decodes a complete response ADU without request context.
pub fn decode_response(bytes: &[u8]) -> Result<(MbapHeader, ResponsePdu), FrameError> {
    let (header, pdu) = split_adu(bytes)?;
    Ok((header, ResponsePdu::decode_pdu(pdu)?))
}

/// Splits a frame into header and PDU after checking the declared length.
pub fn split_adu(bytes: &[u8]) -> Result<(MbapHeader, &[u8]), FrameError> {
    let header = MbapHeader::decode(bytes)?;
    let declared = header.length as usize;
    let actual = bytes.len() - 6;
    if declared != actual {
        return Err(FrameError::LengthMismatch { declared, actual });
    }
    Ok((header, &bytes[MBAP_HEADER_LEN..]))
}

fn finish_adu(mut out: Vec<u8>, transaction_id: u16, unit_id: u8) -> Result<Vec<u8>, FrameError> {
    let pdu_len = out.len() - MBAP_HEADER_LEN;
    if pdu_len > MAX_PDU_LEN {
        return Err(FrameError::PduTooLong(pdu_len));
    }
    let mut header = Vec::with_capacity(MBAP_HEADER_LEN);
    MbapHeader::new(transaction_id, unit_id, pdu_len).write(&mut header);
    out[..MBAP_HEADER_LEN].copy_from_slice(&header);
    Ok(out)
}

fn check_range(address: u16, quantity: usize, max: u16) -> Result<(), FrameError> {
    if quantity == 0 || quantity > max as usize {
        return Err(FrameError::QuantityOutOfRange { quantity, max });
    }
    if address as usize + quantity > 0x1_0000 {
        return Err(FrameError::AddressOverflow { address, quantity });
    }
    Ok(())
}

fn expect_len(function: u8, body: &[u8], expected: usize) -> Result<(), FrameError> {
    if body.len() != expected {
        return Err(FrameError::PduLength {
            function,
            expected: expected + 1,
            actual: body.len() + 1,
        });
    }
    Ok(())
}

fn counted_payload(function: u8, body: &[u8]) -> Result<&[u8], FrameError> {
    let (&count, payload) = body.split_first().ok_or(FrameError::PduLength {
        function,
        expected: 2,
        actual: 1,
    })?;
    if payload.len() != count as usize {
        return Err(FrameError::ByteCountMismatch {
            declared: count as usize,
            actual: payload.len(),
        });
    }
    Ok(payload)
}

fn multi_write_body(function: u8, body: &[u8]) -> Result<(u16, u16, &[u8]), FrameError> {
    if body.len() < 5 {
        return Err(FrameError::PduLength {
            function,
            expected: 6,
            actual: body.len() + 1,
        });
    }
    let payload = counted_payload(function, &body[4..])?;
    Ok((be16(body, 0), be16(body, 2), payload))
}

fn coil_value(raw: u16) -> Result<bool, FrameError> {
    match raw {
        COIL_ON => Ok(true),
        COIL_OFF => Ok(false),
        other => Err(FrameError::InvalidCoilValue(other)),
    }
}

fn trim_bits(mut bits: Vec<bool>, quantity: u16) -> Result<Vec<bool>, FrameError> {
    if bits.len() != (quantity as usize).div_ceil(8) * 8 {
        return Err(FrameError::UnexpectedResponse("bit byte count differs"));
    }
    bits.truncate(quantity as usize);
    Ok(bits)
}

fn be16(bytes: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([bytes[at], bytes[at + 1]])
}

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// Packs bits LSB-first, eight per byte, padding the last byte with zeros.
pub fn pack_bits(bits: &[bool], out: &mut Vec<u8>) {
    for chunk in bits.chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i));
        out.push(byte);
    }
}

pub fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    (0..count)
        .map(|i| bytes[i / 8] & (1 << (i % 8)) != 0)
        .collect()
}
