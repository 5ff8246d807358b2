#![allow(dead_code)]

pub mod fuzz;

use modlink::connector::{Connector, ConnectorConfig};
use modlink::emulator::{serve, ServerHandle};
use modlink::profile::DeviceProfile;
use modlink_core::codec::{ByteOrder, DataType};
use modlink_core::model::{ConnectorModel, FieldSpec};
use modlink_core::protocol::RegisterSpace;

pub fn start(profile: DeviceProfile) -> ServerHandle {
    serve("127.0.0.1:0", profile).expect("bind loopback")
}

pub fn connect(server: &ServerHandle) -> Connector {
    Connector::connect(ConnectorConfig::new(server.local_addr().to_string(), 1)).expect("connect")
}

pub fn field(name: &str, space: RegisterSpace, offset: u16, data_type: DataType) -> FieldSpec {
    FieldSpec {
        name: name.into(),
        space,
        offset,
        data_type,
        order: None,
        writable: space.is_writable(),
    }
}

pub fn model(server: &ServerHandle, order: ByteOrder, fields: Vec<FieldSpec>) -> ConnectorModel {
    ConnectorModel {
        device_name: "test".into(),
        endpoint: server.local_addr().to_string(),
        unit_id: 1,
        default_order: order,
        fields,
    }
}

/// Ten float32 holding registers back to back, the usual benchmark batch.
pub fn ten_floats(server: &ServerHandle, order: ByteOrder) -> ConnectorModel {
    let fields = (0..10)
        .map(|i| field(&format!("v{i}"), RegisterSpace::HoldingRegisters, 2 * i, DataType::Float32))
        .collect();
    model(server, order, fields)
}
