//! Typed values to and from 16-bit register sequences.
//!
//! Multi-register values are laid out from their big-endian byte image
//! `A B C D ...`, then rearranged according to [`ByteOrder`]:
//!
//! | order                      | 32-bit registers |
//! |----------------------------|------------------|
//! | `BigEndian`                | `AB CD`          |
//! | `LittleEndian`             | `DC BA`          |
//! | `BigEndianWordSwapped`     | `CD AB`          |
//! | `LittleEndianWordSwapped`  | `BA DC`          |
//!
//! Single-register integers are always transmitted as one big-endian Modbus
//! register, so all four orders encode them identically. Strings keep their
//! character order; the little-endian orders put the first character of each
//! pair in the low byte.
//!
//! Floats are converted through their raw bit patterns, so NaN payloads
//! survive a round trip unchanged.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DataType {
    Bit,
    UInt16,
    Int16,
    UInt32,
    Int32,
    UInt64,
    Int64,
    Float32,
    Float64,
    /// Fixed-width ASCII text occupying this many registers.
    AsciiString(u16),
}

impl DataType {
    /// Registers occupied in a register space. `Bit` lives in bit spaces and
    /// occupies none.
    pub fn register_count(self) -> usize {
        match self {
            DataType::Bit => 0,
            DataType::UInt16 | DataType::Int16 => 1,
            DataType::UInt32 | DataType::Int32 | DataType::Float32 => 2,
            DataType::UInt64 | DataType::Int64 | DataType::Float64 => 4,
            DataType::AsciiString(n) => n as usize,
        }
    }

    /// Addresses occupied in the field's space: one for a bit, otherwise the
    /// register count.
    pub fn width(self) -> usize {
        match self {
            DataType::Bit => 1,
            other => other.register_count(),
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(
            self,
            DataType::UInt16
                | DataType::Int16
                | DataType::UInt32
                | DataType::Int32
                | DataType::UInt64
                | DataType::Int64
        )
    }

    pub fn parse(s: &str) -> Option<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let ty = match lower.as_str() {
            "bit" | "bool" | "boolean" => DataType::Bit,
            "uint16" | "u16" => DataType::UInt16,
            "int16" | "i16" => DataType::Int16,
            "uint32" | "u32" => DataType::UInt32,
            "int32" | "i32" => DataType::Int32,
            "uint64" | "u64" => DataType::UInt64,
            "int64" | "i64" => DataType::Int64,
            "float32" | "f32" | "float" => DataType::Float32,
            "float64" | "f64" | "double" => DataType::Float64,
            other => {
                let inner = other
                    .strip_prefix("string(")
                    .or_else(|| other.strip_prefix("ascii("))?
                    .strip_suffix(')')?;
                DataType::AsciiString(inner.trim().parse().ok()?)
            }
        };
        Some(ty)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Bit => f.write_str("bit"),
            DataType::UInt16 => f.write_str("uint16"),
            DataType::Int16 => f.write_str("int16"),
            DataType::UInt32 => f.write_str("uint32"),
            DataType::Int32 => f.write_str("int32"),
            DataType::UInt64 => f.write_str("uint64"),
            DataType::Int64 => f.write_str("int64"),
            DataType::Float32 => f.write_str("float32"),
            DataType::Float64 => f.write_str("float64"),
            DataType::AsciiString(n) => write!(f, "string({n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ByteOrder {
    BigEndian,
    /// Full byte reversal of the big-endian image.
    LittleEndian,
    /// Big-endian registers, least significant register first.
    BigEndianWordSwapped,
    /// Bytes swapped inside each register, register order kept.
    LittleEndianWordSwapped,
}

impl ByteOrder {
    pub const ALL: [ByteOrder; 4] = [
        ByteOrder::BigEndian,
        ByteOrder::LittleEndian,
        ByteOrder::BigEndianWordSwapped,
        ByteOrder::LittleEndianWordSwapped,
    ];

    /// Accepts the canonical keywords plus the `sentron` (big-endian) and
    /// `eem` (little-endian) device aliases. The EEM alias assumes full byte
    /// reversal; the device documentation only says "little endian".
    pub fn parse(s: &str) -> Option<Self> {
        let order = match s.trim().to_ascii_lowercase().as_str() {
            "big" | "be" | "big-endian" | "big_endian" | "abcd" | "sentron" => {
                ByteOrder::BigEndian
            }
            "little" | "small" | "le" | "little-endian" | "little_endian" | "dcba" | "eem" => {
                ByteOrder::LittleEndian
            }
            "big-swap" | "big_swap" | "big-word-swapped" | "big_endian_word_swapped" | "cdab" => {
                ByteOrder::BigEndianWordSwapped
            }
            "little-swap"
            | "little_swap"
            | "little-word-swapped"
            | "little_endian_word_swapped"
            | "badc" => ByteOrder::LittleEndianWordSwapped,
            _ => return None,
        };
        Some(order)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ByteOrder::BigEndian => "big",
            ByteOrder::LittleEndian => "little",
            ByteOrder::BigEndianWordSwapped => "big-swap",
            ByteOrder::LittleEndianWordSwapped => "little-swap",
        }
    }
}

impl fmt::Display for ByteOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Value {
    Bool(bool),
    U16(u16),
    I16(i16),
    U32(u32),
    I32(i32),
    U64(u64),
    I64(i64),
    F32(f32),
    F64(f64),
    Text(String),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::U16(_) | Value::I16(_) | Value::U32(_) | Value::I32(_) | Value::U64(_)
            | Value::I64(_) => "integer",
            Value::F32(_) | Value::F64(_) => "float",
            Value::Text(_) => "text",
        }
    }

    fn as_i128(&self) -> Option<i128> {
        Some(match *self {
            Value::U16(v) => v as i128,
            Value::I16(v) => v as i128,
            Value::U32(v) => v as i128,
            Value::I32(v) => v as i128,
            Value::U64(v) => v as i128,
            Value::I64(v) => v as i128,
            _ => return None,
        })
    }

    /// Whether this value carries the tag `data_type` decodes to.
    pub fn matches_type(&self, data_type: DataType) -> bool {
        matches!(
            (self, data_type),
            (Value::Bool(_), DataType::Bit)
                | (Value::U16(_), DataType::UInt16)
                | (Value::I16(_), DataType::Int16)
                | (Value::U32(_), DataType::UInt32)
                | (Value::I32(_), DataType::Int32)
                | (Value::U64(_), DataType::UInt64)
                | (Value::I64(_), DataType::Int64)
                | (Value::F32(_), DataType::Float32)
                | (Value::F64(_), DataType::Float64)
                | (Value::Text(_), DataType::AsciiString(_))
        )
    }

    /// Parses user text as a value of `data_type`, range-checking integers.
    /// Integers accept a `0x` prefix.
    pub fn parse(text: &str, data_type: DataType) -> Result<Value, CodecError> {
        let t = text.trim();
        let bad = || CodecError::Unparsable {
            data_type,
            text: String::from(text),
        };
        match data_type {
            DataType::Bit => match t.to_ascii_lowercase().as_str() {
                "1" | "true" | "on" => Ok(Value::Bool(true)),
                "0" | "false" | "off" => Ok(Value::Bool(false)),
                _ => Err(bad()),
            },
            DataType::Float32 => t.parse::<f32>().map(Value::F32).map_err(|_| bad()),
            DataType::Float64 => t.parse::<f64>().map(Value::F64).map_err(|_| bad()),
            DataType::AsciiString(_) => Ok(Value::Text(String::from(text))),
            _ => {
                let (neg, digits) = match t.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, t.strip_prefix('+').unwrap_or(t)),
                };
                let magnitude = match digits
                    .strip_prefix("0x")
                    .or_else(|| digits.strip_prefix("0X"))
                {
                    Some(hex) => i128::from_str_radix(hex, 16),
                    None => digits.parse::<i128>(),
                }
                .map_err(|_| bad())?;
                let n = if neg { -magnitude } else { magnitude };
                integer_value(n, data_type)
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(v) => write!(f, "{v}"),
            Value::U16(v) => write!(f, "{v}"),
            Value::I16(v) => write!(f, "{v}"),
            Value::U32(v) => write!(f, "{v}"),
            Value::I32(v) => write!(f, "{v}"),
            Value::U64(v) => write!(f, "{v}"),
            Value::I64(v) => write!(f, "{v}"),
            // Debug keeps the fractional part: `1.0`, not `1`
            Value::F32(v) => write!(f, "{v:?}"),
            Value::F64(v) => write!(f, "{v:?}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("{data_type} needs {expected} registers, got {actual}")]
    LengthMismatch {
        data_type: DataType,
        expected: usize,
        actual: usize,
    },
    #[error("value {value} out of range for {data_type}")]
    OutOfRange { value: String, data_type: DataType },
    #[error("cannot store a {kind} value as {data_type}")]
    TypeMismatch {
        kind: &'static str,
        data_type: DataType,
    },
    #[error("text contains non-ASCII character {0:?}")]
    NonAscii(char),
    #[error("text of {len} bytes does not fit {capacity} bytes")]
    TextTooLong { len: usize, capacity: usize },
    #[error("bit values live in coil or discrete-input space, not in registers")]
    BitInRegisters,
    #[error("cannot parse {text:?} as {data_type}")]
    Unparsable { data_type: DataType, text: String },
}

fn integer_value(n: i128, data_type: DataType) -> Result<Value, CodecError> {
    let out_of_range = || CodecError::OutOfRange {
        value: alloc::format!("{n}"),
        data_type,
    };
    let v = match data_type {
        DataType::UInt16 => Value::U16(u16::try_from(n).map_err(|_| out_of_range())?),
        DataType::Int16 => Value::I16(i16::try_from(n).map_err(|_| out_of_range())?),
        DataType::UInt32 => Value::U32(u32::try_from(n).map_err(|_| out_of_range())?),
        DataType::Int32 => Value::I32(i32::try_from(n).map_err(|_| out_of_range())?),
        DataType::UInt64 => Value::U64(u64::try_from(n).map_err(|_| out_of_range())?),
        DataType::Int64 => Value::I64(i64::try_from(n).map_err(|_| out_of_range())?),
        _ => {
            return Err(CodecError::TypeMismatch {
                kind: "integer",
                data_type,
            })
        }
    };
    Ok(v)
}

/// Reverses register order in place. Applying it twice is the identity.
pub fn swap_words(registers: &mut [u16]) {
    registers.reverse();
}

/// Converts the big-endian byte image of a numeric value into registers.
fn bytes_to_registers(be: &[u8], order: ByteOrder) -> Vec<u16> {
    let mut regs: Vec<u16> = match order {
        ByteOrder::BigEndian | ByteOrder::BigEndianWordSwapped => be
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
        ByteOrder::LittleEndian | ByteOrder::LittleEndianWordSwapped => be
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect(),
    };
    if matches!(order, ByteOrder::LittleEndian | ByteOrder::BigEndianWordSwapped) {
        swap_words(&mut regs);
    }
    regs
}

/// Inverse of [`bytes_to_registers`]: recovers the big-endian byte image.
fn registers_to_bytes(registers: &[u16], order: ByteOrder) -> Vec<u8> {
    let mut regs = registers.to_vec();
    if matches!(order, ByteOrder::LittleEndian | ByteOrder::BigEndianWordSwapped) {
        swap_words(&mut regs);
    }
    let little = matches!(
        order,
        ByteOrder::LittleEndian | ByteOrder::LittleEndianWordSwapped
    );
    regs.iter()
        .flat_map(|r| if little { r.to_le_bytes() } else { r.to_be_bytes() })
        .collect()
}

fn array<const N: usize>(bytes: &[u8]) -> [u8; N] {
    let mut out = [0u8; N];
    out.copy_from_slice(bytes);
    out
}

/// Decodes `registers` as `data_type` under `order`.
pub fn decode_value(
    registers: &[u16],
    data_type: DataType,
    order: ByteOrder,
) -> Result<Value, CodecError> {
    if data_type == DataType::Bit {
        return Err(CodecError::BitInRegisters);
    }
    let expected = data_type.register_count();
    if registers.len() != expected {
        return Err(CodecError::LengthMismatch {
            data_type,
            expected,
            actual: registers.len(),
        });
    }
    let value = match data_type {
        DataType::UInt16 => Value::U16(registers[0]),
        DataType::Int16 => Value::I16(registers[0] as i16),
        DataType::AsciiString(_) => Value::Text(decode_text(registers, order)),
        _ => {
            let be = registers_to_bytes(registers, order);
            match data_type {
                DataType::UInt32 => Value::U32(u32::from_be_bytes(array(&be))),
                DataType::Int32 => Value::I32(i32::from_be_bytes(array(&be))),
                DataType::Float32 => Value::F32(f32::from_bits(u32::from_be_bytes(array(&be)))),
                DataType::UInt64 => Value::U64(u64::from_be_bytes(array(&be))),
                DataType::Int64 => Value::I64(i64::from_be_bytes(array(&be))),
                DataType::Float64 => Value::F64(f64::from_bits(u64::from_be_bytes(array(&be)))),
                _ => unreachable!("single-register and text types handled above"),
            }
        }
    };
    Ok(value)
}

/// Encodes `value` as `data_type` under `order`.
///
/// Integer values of any width are accepted if they fit the target type;
/// `F64` values are narrowed for `Float32` when finite and in range.
pub fn encode_value(
    value: &Value,
    data_type: DataType,
    order: ByteOrder,
) -> Result<Vec<u16>, CodecError> {
    let mismatch = || CodecError::TypeMismatch {
        kind: value.kind(),
        data_type,
    };
    match data_type {
        DataType::Bit => Err(CodecError::BitInRegisters),
        DataType::AsciiString(n) => match value {
            Value::Text(text) => encode_text(text, n as usize, order),
            _ => Err(mismatch()),
        },
        DataType::Float32 => {
            let v = match *value {
                Value::F32(v) => v,
                Value::F64(v) => {
                    if v.is_finite() && v.abs() > f32::MAX as f64 {
                        return Err(CodecError::OutOfRange {
                            value: alloc::format!("{v}"),
                            data_type,
                        });
                    }
                    v as f32
                }
                _ => return Err(mismatch()),
            };
            Ok(bytes_to_registers(&v.to_bits().to_be_bytes(), order))
        }
        DataType::Float64 => {
            let v = match *value {
                Value::F64(v) => v,
                Value::F32(v) => v as f64,
                _ => return Err(mismatch()),
            };
            Ok(bytes_to_registers(&v.to_bits().to_be_bytes(), order))
        }
        _ => {
            let n = value.as_i128().ok_or_else(mismatch)?;
            let regs = match integer_value(n, data_type)? {
                Value::U16(v) => alloc::vec![v],
                Value::I16(v) => alloc::vec![v as u16],
                Value::U32(v) => bytes_to_registers(&v.to_be_bytes(), order),
                Value::I32(v) => bytes_to_registers(&v.to_be_bytes(), order),
                Value::U64(v) => bytes_to_registers(&v.to_be_bytes(), order),
                Value::I64(v) => bytes_to_registers(&v.to_be_bytes(), order),
                _ => unreachable!("integer_value only yields integers"),
            };
            Ok(regs)
        }
    }
}

/// Extracts a boolean for a bit-typed field.
pub fn bit_value(value: &Value) -> Result<bool, CodecError> {
    match value {
        Value::Bool(b) => Ok(*b),
        other => Err(CodecError::TypeMismatch {
            kind: other.kind(),
            data_type: DataType::Bit,
        }),
    }
}

fn little_text(order: ByteOrder) -> bool {
    matches!(
        order,
        ByteOrder::LittleEndian | ByteOrder::LittleEndianWordSwapped
    )
}

fn encode_text(text: &str, registers: usize, order: ByteOrder) -> Result<Vec<u16>, CodecError> {
    if let Some(c) = text.chars().find(|c| !c.is_ascii()) {
        return Err(CodecError::NonAscii(c));
    }
    let capacity = registers * 2;
    if text.len() > capacity {
        return Err(CodecError::TextTooLong {
            len: text.len(),
            capacity,
        });
    }
    let mut bytes = Vec::with_capacity(capacity);
    bytes.extend_from_slice(text.as_bytes());
    bytes.resize(capacity, 0);
    let little = little_text(order);
    Ok(bytes
        .chunks_exact(2)
        .map(|c| {
            if little {
                u16::from_le_bytes([c[0], c[1]])
            } else {
                u16::from_be_bytes([c[0], c[1]])
            }
        })
        .collect())
}

/// Trailing NULs are padding and dropped. Bytes outside ASCII become U+FFFD.
fn decode_text(registers: &[u16], order: ByteOrder) -> String {
    let little = little_text(order);
    let mut bytes: Vec<u8> = registers
        .iter()
        .flat_map(|r| if little { r.to_le_bytes() } else { r.to_be_bytes() })
        .collect();
    while bytes.last() == Some(&0) {
        bytes.pop();
    }
    bytes
        .iter()
        .map(|&b| if b.is_ascii() { b as char } else { char::REPLACEMENT_CHARACTER })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn fixed_decode_examples() {
        assert_eq!(
            decode_value(&[0, 0], DataType::Float32, ByteOrder::BigEndian).unwrap(),
            Value::F32(0.0)
        );
        assert_eq!(
            decode_value(&[0x3F80, 0], DataType::Float32, ByteOrder::BigEndian).unwrap(),
            Value::F32(1.0)
        );
        assert_eq!(
            decode_value(&[0xFFFF], DataType::Int16, ByteOrder::BigEndian).unwrap(),
            Value::I16(-1)
        );
        assert_eq!(
            decode_value(&[0x0001, 0x0000], DataType::UInt32, ByteOrder::BigEndian).unwrap(),
            Value::U32(65536)
        );
        assert_eq!(
            decode_value(&[0x0000, 0x803F], DataType::Float32, ByteOrder::LittleEndian).unwrap(),
            Value::F32(1.0)
        );
    }

    #[test]
    fn layouts_of_0x11223344() {
        let v = Value::U32(0x1122_3344);
        let cases = [
            (ByteOrder::BigEndian, [0x1122, 0x3344]),
            (ByteOrder::LittleEndian, [0x4433, 0x2211]),
            (ByteOrder::BigEndianWordSwapped, [0x3344, 0x1122]),
            (ByteOrder::LittleEndianWordSwapped, [0x2211, 0x4433]),
        ];
        for (order, regs) in cases {
            assert_eq!(encode_value(&v, DataType::UInt32, order).unwrap(), regs, "{order}");
        }
    }

    #[test]
    fn sixty_four_bit_layouts() {
        let v = Value::U64(0x0102_0304_0506_0708);
        assert_eq!(
            encode_value(&v, DataType::UInt64, ByteOrder::BigEndian).unwrap(),
            [0x0102, 0x0304, 0x0506, 0x0708]
        );
        assert_eq!(
            encode_value(&v, DataType::UInt64, ByteOrder::LittleEndian).unwrap(),
            [0x0807, 0x0605, 0x0403, 0x0201]
        );
        assert_eq!(
            encode_value(&v, DataType::UInt64, ByteOrder::BigEndianWordSwapped).unwrap(),
            [0x0708, 0x0506, 0x0304, 0x0102]
        );
        assert_eq!(
            encode_value(&v, DataType::UInt64, ByteOrder::LittleEndianWordSwapped).unwrap(),
            [0x0201, 0x0403, 0x0605, 0x0807]
        );
    }

    #[test]
    fn one_register_types_ignore_order() {
        for order in ByteOrder::ALL {
            assert_eq!(
                encode_value(&Value::U16(0x1234), DataType::UInt16, order).unwrap(),
                [0x1234]
            );
            assert_eq!(encode_value(&Value::U16(0), DataType::UInt16, order).unwrap(), [0]);
        }
    }

    #[test]
    fn range_and_tag_errors() {
        assert!(matches!(
            encode_value(&Value::U32(70000), DataType::UInt16, ByteOrder::BigEndian),
            Err(CodecError::OutOfRange { .. })
        ));
        assert!(matches!(
            encode_value(&Value::I32(-1), DataType::UInt32, ByteOrder::BigEndian),
            Err(CodecError::OutOfRange { .. })
        ));
        assert!(matches!(
            encode_value(&Value::Bool(true), DataType::UInt16, ByteOrder::BigEndian),
            Err(CodecError::TypeMismatch { .. })
        ));
        assert!(matches!(
            encode_value(&Value::F32(1.0), DataType::Int32, ByteOrder::BigEndian),
            Err(CodecError::TypeMismatch { .. })
        ));
        assert!(matches!(
            encode_value(&Value::F64(1e300), DataType::Float32, ByteOrder::BigEndian),
            Err(CodecError::OutOfRange { .. })
        ));
        assert_eq!(
            decode_value(&[1], DataType::Float32, ByteOrder::BigEndian),
            Err(CodecError::LengthMismatch {
                data_type: DataType::Float32,
                expected: 2,
                actual: 1
            })
        );
        assert_eq!(
            decode_value(&[], DataType::Bit, ByteOrder::BigEndian),
            Err(CodecError::BitInRegisters)
        );
    }

    #[test]
    fn text_padding_and_order() {
        let regs =
            encode_value(&Value::Text("abc".into()), DataType::AsciiString(3), ByteOrder::BigEndian)
                .unwrap();
        assert_eq!(regs, [0x6162, 0x6300, 0x0000]);
        assert_eq!(
            decode_value(&regs, DataType::AsciiString(3), ByteOrder::BigEndian).unwrap(),
            Value::Text("abc".into())
        );
        let le = encode_value(
            &Value::Text("abc".into()),
            DataType::AsciiString(2),
            ByteOrder::LittleEndian,
        )
        .unwrap();
        assert_eq!(le, [0x6261, 0x0063]);
        assert!(matches!(
            encode_value(&Value::Text("é".into()), DataType::AsciiString(2), ByteOrder::BigEndian),
            Err(CodecError::NonAscii('é'))
        ));
        assert!(matches!(
            encode_value(&Value::Text("abcde".into()), DataType::AsciiString(2), ByteOrder::BigEndian),
            Err(CodecError::TextTooLong { len: 5, capacity: 4 })
        ));
    }

    #[test]
    fn nan_payload_survives() {
        let nan = f32::from_bits(0x7FC0_1234);
        let regs = encode_value(&Value::F32(nan), DataType::Float32, ByteOrder::LittleEndian).unwrap();
        match decode_value(&regs, DataType::Float32, ByteOrder::LittleEndian).unwrap() {
            Value::F32(back) => assert_eq!(back.to_bits(), 0x7FC0_1234),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Value::parse("1.0", DataType::Float32).unwrap().to_string(), "1.0");
        assert_eq!(Value::parse("0x10", DataType::UInt16).unwrap(), Value::U16(16));
        assert_eq!(Value::parse("-5", DataType::Int64).unwrap(), Value::I64(-5));
        assert!(matches!(
            Value::parse("70000", DataType::UInt16),
            Err(CodecError::OutOfRange { .. })
        ));
        assert_eq!(Value::parse("on", DataType::Bit).unwrap(), Value::Bool(true));
        assert!(Value::parse("maybe", DataType::Bit).is_err());
        assert_eq!(DataType::parse("string(8)"), Some(DataType::AsciiString(8)));
        assert_eq!(ByteOrder::parse("eem"), Some(ByteOrder::LittleEndian));
        assert_eq!(ByteOrder::parse("sentron"), Some(ByteOrder::BigEndian));
        let mut words = vec![1u16, 2, 3];
        swap_words(&mut words);
        assert_eq!(words, [3, 2, 1]);
    }
}
