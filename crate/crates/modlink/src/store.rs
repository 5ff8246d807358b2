//! The emulator's four data spaces.

use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use modlink_core::protocol::{RegisterSpace, RequestPdu, ResponsePdu};

const SPACE_SIZE: usize = 0x1_0000;

struct Spaces {
    coils: Vec<bool>,
    discrete_inputs: Vec<bool>,
    input_registers: Vec<u16>,
    holding_registers: Vec<u16>,
}

/// Coils, discrete inputs, input and holding registers, each 65536 entries
/// and zero-initialized.
///
/// One lock guards all four spaces, so every request executes atomically: a
/// multi-register read never observes half of a concurrent write.
pub struct RegisterStore {
    spaces: RwLock<Spaces>,
}

impl Default for RegisterStore {
    fn default() -> Self {
        Self::new()
    }
}

impl RegisterStore {
    pub fn new() -> Self {
        RegisterStore {
            spaces: RwLock::new(Spaces {
                coils: vec![false; SPACE_SIZE],
                discrete_inputs: vec![false; SPACE_SIZE],
                input_registers: vec![0; SPACE_SIZE],
                holding_registers: vec![0; SPACE_SIZE],
            }),
        }
    }

    fn read(&self) -> RwLockReadGuard<'_, Spaces> {
        // a panicking writer cannot leave a half-applied request behind, so
        // the data stays usable after poisoning
        self.spaces.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Spaces> {
        self.spaces.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Reads `count` bits. Panics if the range leaves the space or `space`
    /// holds registers.
    pub fn bits(&self, space: RegisterSpace, address: u16, count: usize) -> Vec<bool> {
        let s = self.read();
        let a = address as usize;
        match space {
            RegisterSpace::Coils => s.coils[a..a + count].to_vec(),
            RegisterSpace::DiscreteInputs => s.discrete_inputs[a..a + count].to_vec(),
            _ => panic!("{space} is not a bit space"),
        }
    }

    /// Reads `count` registers. Panics if the range leaves the space or
    /// `space` holds bits.
    pub fn registers(&self, space: RegisterSpace, address: u16, count: usize) -> Vec<u16> {
        let s = self.read();
        let a = address as usize;
        match space {
            RegisterSpace::InputRegisters => s.input_registers[a..a + count].to_vec(),
            RegisterSpace::HoldingRegisters => s.holding_registers[a..a + count].to_vec(),
            _ => panic!("{space} is not a register space"),
        }
    }

    /// Sets bits in either bit space, bypassing write permissions. Used to
    /// seed a device.
    pub fn set_bits(&self, space: RegisterSpace, address: u16, values: &[bool]) {
        let mut s = self.write();
        let a = address as usize;
        let target = match space {
            RegisterSpace::Coils => &mut s.coils,
            RegisterSpace::DiscreteInputs => &mut s.discrete_inputs,
            _ => panic!("{space} is not a bit space"),
        };
        target[a..a + values.len()].copy_from_slice(values);
    }

    /// Sets registers in either register space, bypassing write permissions.
    pub fn set_registers(&self, space: RegisterSpace, address: u16, values: &[u16]) {
        let mut s = self.write();
        let a = address as usize;
        let target = match space {
            RegisterSpace::InputRegisters => &mut s.input_registers,
            RegisterSpace::HoldingRegisters => &mut s.holding_registers,
            _ => panic!("{space} is not a register space"),
        };
        target[a..a + values.len()].copy_from_slice(values);
    }

    /// Executes a request that already passed [`RequestPdu::validate`].
    pub fn execute(&self, request: &RequestPdu) -> ResponsePdu {
        match request {
            RequestPdu::ReadCoils { address, quantity } => {
                ResponsePdu::ReadCoils(self.bits(RegisterSpace::Coils, *address, *quantity as usize))
            }
            RequestPdu::ReadDiscreteInputs { address, quantity } => ResponsePdu::ReadDiscreteInputs(
                self.bits(RegisterSpace::DiscreteInputs, *address, *quantity as usize),
            ),
            RequestPdu::ReadHoldingRegisters { address, quantity } => {
                ResponsePdu::ReadHoldingRegisters(self.registers(
                    RegisterSpace::HoldingRegisters,
                    *address,
                    *quantity as usize,
                ))
            }
            RequestPdu::ReadInputRegisters { address, quantity } => ResponsePdu::ReadInputRegisters(
                self.registers(RegisterSpace::InputRegisters, *address, *quantity as usize),
            ),
            RequestPdu::WriteSingleCoil { address, value } => {
                self.set_bits(RegisterSpace::Coils, *address, &[*value]);
                ResponsePdu::WriteSingleCoil {
                    address: *address,
                    value: *value,
                }
            }
            RequestPdu::WriteSingleRegister { address, value } => {
                self.set_registers(RegisterSpace::HoldingRegisters, *address, &[*value]);
                ResponsePdu::WriteSingleRegister {
                    address: *address,
                    value: *value,
                }
            }
            RequestPdu::WriteMultipleCoils { address, values } => {
                self.set_bits(RegisterSpace::Coils, *address, values);
                ResponsePdu::WriteMultipleCoils {
                    address: *address,
                    quantity: values.len() as u16,
                }
            }
            RequestPdu::WriteMultipleRegisters { address, values } => {
                self.set_registers(RegisterSpace::HoldingRegisters, *address, values);
                ResponsePdu::WriteMultipleRegisters {
                    address: *address,
                    quantity: values.len() as u16,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconfigured_cells_read_zero() {
        let store = RegisterStore::new();
        assert_eq!(store.registers(RegisterSpace::HoldingRegisters, 65534, 2), [0, 0]);
        assert_eq!(store.bits(RegisterSpace::DiscreteInputs, 0, 3), [false; 3]);
    }

    #[test]
    fn write_then_read() {
        let store = RegisterStore::new();
        store.execute(&RequestPdu::WriteMultipleRegisters {
            address: 10,
            values: vec![0x3F80, 0],
        });
        assert_eq!(
            store.execute(&RequestPdu::ReadHoldingRegisters {
                address: 10,
                quantity: 2
            }),
            ResponsePdu::ReadHoldingRegisters(vec![0x3F80, 0])
        );
    }
}
