//! Emulated device profiles: initial register contents, latency and faults.
//!
//! Profiles are TOML documents. Every key is optional; an empty document is
//! a zero-latency device with all cells zero and writable coils and holding
//! registers.
//!
//! ```toml
//! name = "meter"
//!
//! [latency]
//! fixed_us = 1300
//! jitter = "uniform(0,200)"     # none | uniform(a,b) | normal(mean,sd), µs
//! seed = 7
//! warmup_requests = 1500        # first N requests get extra delay
//! warmup_extra_us = 5000
//!
//! [writable]                    # which protocol writes are accepted
//! coils = true
//! holding = true
//!
//! [[registers]]                 # raw register words
//! space = "holding"
//! offset = 0
//! words = [0x3F80, 0x0000]
//!
//! [[registers]]                 # typed values, encoded back to back
//! space = "input"
//! offset = 10
//! type = "float32"
//! order = "little"              # defaults to big
//! values = [230.0, 231.5]
//!
//! [[registers]]                 # bit spaces
//! space = "discrete"
//! offset = 3
//! bits = [true, false, true]
//!
//! [faults]
//! close_after = 100             # drop each connection after N requests
//!
//! [[faults.exceptions]]         # answer requests touching a range with an exception
//! space = "holding"             # optional: any space
//! from = 1000
//! to = 65535
//! code = 2
//! ```

use modlink_core::codec::{encode_value, ByteOrder, CodecError, DataType, Value};
use modlink_core::latency::{Jitter, LatencyProfile, Warmup};
use modlink_core::protocol::{ExceptionCode, RegisterSpace};
use serde::Deserialize;

use crate::store::RegisterStore;

const SENTRON_LIKE: &str = include_str!("presets/sentron-like.toml");
const EEM_LIKE: &str = include_str!("presets/eem-like.toml");

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["sentron-like", "eem-like"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Bits(Vec<bool>),
    Registers(Vec<u16>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Bits(b) => b.len(),
            Cells::Registers(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialValue {
    pub space: RegisterSpace,
    pub offset: u16,
    pub cells: Cells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WritePolicy {
    pub coils: bool,
    pub holding: bool,
}

impl Default for WritePolicy {
    fn default() -> Self {
        WritePolicy {
            coils: true,
            holding: true,
        }
    }
}

impl WritePolicy {
    pub fn allows(&self, space: RegisterSpace) -> bool {
        match space {
            RegisterSpace::Coils => self.coils,
            RegisterSpace::HoldingRegisters => self.holding,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionRule {
    /// `None` matches every space.
    pub space: Option<RegisterSpace>,
    pub from: u16,
    pub to: u16,
    pub code: ExceptionCode,
}

impl ExceptionRule {
    /// Whether a request on `[address, address + count)` touches the rule's
    /// inclusive range.
    pub fn matches(&self, space: RegisterSpace, address: u16, count: usize) -> bool {
        let last = address as usize + count.max(1) - 1;
        self.space.is_none_or(|s| s == space)
            && address as usize <= self.to as usize
            && last >= self.from as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Faults {
    pub exceptions: Vec<ExceptionRule>,
    pub close_after: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    pub latency: LatencyProfile,
    pub writable: WritePolicy,
    pub registers: Vec<InitialValue>,
    pub faults: Faults,
}

impl DeviceProfile {
    /// Writes the initial values into `store`.
    pub fn seed(&self, store: &RegisterStore) {
        for init in &self.registers {
            match &init.cells {
                Cells::Bits(b) => store.set_bits(init.space, init.offset, b),
                Cells::Registers(r) => store.set_registers(init.space, init.offset, r),
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unknown register space `{0}`")]
    UnknownSpace(String),
    #[error("unknown data type `{0}`")]
    UnknownType(String),
    #[error("unknown byte order `{0}`")]
    UnknownOrder(String),
    #[error("registers entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("registers entry {index}: {source}")]
    Value {
        index: usize,
        #[source]
        source: CodecError,
    },
    #[error("{0}")]
    Latency(#[from] modlink_core::latency::JitterParseError),
    #[error("exception rule {index}: {message}")]
    Exception { index: usize, message: String },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[serde(default)]
    name: String,
    #[serde(default)]
    latency: LatencyDoc,
    writable: Option<WritableDoc>,
    #[serde(default)]
    registers: Vec<RegistersDoc>,
    #[serde(default)]
    faults: FaultsDoc,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct LatencyDoc {
    #[serde(default)]
    fixed_us: u64,
    jitter: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    warmup_requests: u64,
    #[serde(default)]
    warmup_extra_us: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WritableDoc {
    #[serde(default)]
    coils: bool,
    #[serde(default)]
    holding: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistersDoc {
    space: String,
    offset: u16,
    words: Option<Vec<u16>>,
    bits: Option<Vec<bool>>,
    #[serde(rename = "type")]
    data_type: Option<String>,
    order: Option<String>,
    values: Option<Vec<toml::Value>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FaultsDoc {
    close_after: Option<u64>,
    #[serde(default)]
    exceptions: Vec<ExceptionDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExceptionDoc {
    space: Option<String>,
    from: u16,
    #[serde(default = "max_address")]
    to: u16,
    code: u8,
}

fn max_address() -> u16 {
    u16::MAX
}

fn space(text: &str) -> Result<RegisterSpace, ProfileError> {
    RegisterSpace::from_keyword(text).ok_or_else(|| ProfileError::UnknownSpace(text.to_string()))
}

fn toml_value(v: &toml::Value, data_type: DataType) -> Option<Value> {
    Some(match v {
        toml::Value::Integer(i) => match data_type {
            DataType::Float32 | DataType::Float64 => Value::F64(*i as f64),
            _ => Value::I64(*i),
        },
        toml::Value::Float(f) => Value::F64(*f),
        toml::Value::String(s) => Value::Text(s.clone()),
        toml::Value::Boolean(b) => Value::Bool(*b),
        _ => return None,
    })
}

fn entry(index: usize, doc: RegistersDoc) -> Result<InitialValue, ProfileError> {
    let bad = |message: &str| ProfileError::Entry {
        index,
        message: message.to_string(),
    };
    let space = space(&doc.space)?;
    let cells = match (doc.words, doc.bits, doc.values) {
        (Some(words), None, None) => Cells::Registers(words),
        (None, Some(bits), None) => Cells::Bits(bits),
        (None, None, Some(values)) => {
            let type_name = doc.data_type.ok_or_else(|| bad("`values` needs a `type`"))?;
            let data_type = DataType::parse(&type_name)
                .ok_or_else(|| ProfileError::UnknownType(type_name.clone()))?;
            let order = match doc.order {
                Some(o) => ByteOrder::parse(&o).ok_or(ProfileError::UnknownOrder(o))?,
                None => ByteOrder::BigEndian,
            };
            if data_type == DataType::Bit {
                let bits = values
                    .iter()
                    .map(|v| v.as_bool().ok_or_else(|| bad("bit values must be booleans")))
                    .collect::<Result<_, _>>()?;
                Cells::Bits(bits)
            } else {
                let mut regs = Vec::new();
                for v in &values {
                    let value = toml_value(v, data_type).ok_or_else(|| bad("unsupported value"))?;
                    regs.extend(
                        encode_value(&value, data_type, order)
                            .map_err(|source| ProfileError::Value { index, source })?,
                    );
                }
                Cells::Registers(regs)
            }
        }
        _ => return Err(bad("exactly one of `words`, `bits` or `values` is required")),
    };
    match (&cells, space.is_bit_space()) {
        (Cells::Bits(_), false) => return Err(bad("bits given for a register space")),
        (Cells::Registers(_), true) => return Err(bad("registers given for a bit space")),
        _ => {}
    }
    if doc.offset as usize + cells.len() > 0x1_0000 {
        return Err(bad("values run past the end of the address space"));
    }
    Ok(InitialValue {
        space,
        offset: doc.offset,
        cells,
    })
}

/// Parses a profile document.
pub fn load_profile(document: &str) -> Result<DeviceProfile, ProfileError> {
    let doc: ProfileDoc = toml::from_str(document)?;
    let jitter = match &doc.latency.jitter {
        Some(j) => Jitter::parse(j)?,
        None => Jitter::None,
    };
    let latency = LatencyProfile {
        fixed_us: doc.latency.fixed_us,
        jitter,
        seed: doc.latency.seed,
        warmup: Warmup {
            requests: doc.latency.warmup_requests,
            extra_us: doc.latency.warmup_extra_us,
        },
    };
    let writable = doc
        .writable
        .map(|w| WritePolicy {
            coils: w.coils,
            holding: w.holding,
        })
        .unwrap_or_default();
    let registers = doc
        .registers
        .into_iter()
        .enumerate()
        .map(|(i, r)| entry(i, r))
        .collect::<Result<_, _>>()?;
    let mut exceptions = Vec::new();
    for (index, e) in doc.faults.exceptions.into_iter().enumerate() {
        if e.from > e.to {
            return Err(ProfileError::Exception {
                index,
                message: format!("empty range {}..={}", e.from, e.to),
            });
        }
        if e.code == 0 || e.code >= 0x80 {
            return Err(ProfileError::Exception {
                index,
                message: format!("exception code {} outside 1..=127", e.code),
            });
        }
        exceptions.push(ExceptionRule {
            space: e.space.as_deref().map(space).transpose()?,
            from: e.from,
            to: e.to,
            code: ExceptionCode(e.code),
        });
    }
    Ok(DeviceProfile {
        name: doc.name,
        latency,
        writable,
        registers,
        faults: Faults {
            exceptions,
            close_after: doc.faults.close_after,
        },
    })
}

/// A bundled profile by name.
pub fn preset(name: &str) -> Option<DeviceProfile> {
    let text = match name {
        "sentron-like" | "sentron" => SENTRON_LIKE,
        "eem-like" | "eem" => EEM_LIKE,
        _ => return None,
    };
    Some(load_profile(text).expect("bundled presets parse"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_documented_latency() {
        assert_eq!(preset("sentron-like").unwrap().latency.fixed_us, 700);
        assert_eq!(preset("eem-like").unwrap().latency.fixed_us, 1300);
        for name in PRESETS {
            assert_eq!(preset(name).unwrap().latency.jitter, Jitter::None);
        }
    }

    #[test]
    fn empty_document_is_default() {
        let p = load_profile("").unwrap();
        assert_eq!(p.latency, LatencyProfile::default());
        assert!(p.registers.is_empty());
        assert_eq!(p.writable, WritePolicy::default());
    }

    #[test]
    fn typed_values_encode() {
        let p = load_profile(
            "[[registers]]\nspace = \"input\"\noffset = 4\ntype = \"float32\"\norder = \"little\"\nvalues = [1.0]\n",
        )
        .unwrap();
        assert_eq!(p.registers[0].cells, Cells::Registers(vec![0x0000, 0x803F]));
    }

    #[test]
    fn rejects_out_of_bounds_and_unknown_keys() {
        assert!(load_profile("[[registers]]\nspace = \"holding\"\noffset = 65535\nwords = [1, 2]\n").is_err());
        assert!(load_profile("colour = \"red\"\n").is_err());
        assert!(load_profile("[[registers]]\nspace = \"coil\"\noffset = 0\nwords = [1]\n").is_err());
    }

    #[test]
    fn exception_rule_ranges() {
        let rule = ExceptionRule {
            space: Some(RegisterSpace::HoldingRegisters),
            from: 1000,
            to: u16::MAX,
            code: ExceptionCode::ILLEGAL_DATA_ADDRESS,
        };
        assert!(rule.matches(RegisterSpace::HoldingRegisters, 998, 4));
        assert!(!rule.matches(RegisterSpace::HoldingRegisters, 990, 10));
        assert!(!rule.matches(RegisterSpace::InputRegisters, 1000, 1));
    }
}
