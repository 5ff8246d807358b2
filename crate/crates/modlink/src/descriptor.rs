//! Connector instance descriptors: a model plus its resolved read plan.
//!
//! `gen` writes one as pretty-printed JSON; `read` and `bench` accept it in
//! place of a model and execute the stored plan unchanged.
//!
//! ```json
//! {
//!   "format": "modlink-instance",
//!   "version": 1,
//!   "gap_threshold": 8,
//!   "model": { "device_name": "...", "endpoint": "...", "unit_id": 1,
//!              "default_order": "big_endian", "fields": [ ... ] },
//!   "spans": [ { "space": "holding_registers", "start": 0, "count": 20,
//!                "fields": [ { "name": "p1", "offset": 0,
//!                              "data_type": "float32", "order": "big_endian" } ] } ],
//!   "decode_table": [ { "field": "p1", "span": 0, "space": "holding_registers",
//!                       "address": 0, "width": 2, "data_type": "float32",
//!                       "order": "big_endian" } ]
//! }
//! ```
//!
//! The decode table is derived from the spans and is checked against them
//! on load.

use modlink_core::codec::{ByteOrder, DataType};
use modlink_core::model::ConnectorModel;
use modlink_core::planner::{build_plan, BatchPlan, PlanError, ReadSpan};
use modlink_core::protocol::RegisterSpace;
use serde::{Deserialize, Serialize};

pub const DESCRIPTOR_FORMAT: &str = "modlink-instance";
pub const DESCRIPTOR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeRow {
    pub field: String,
    pub span: usize,
    pub space: RegisterSpace,
    pub address: u16,
    pub width: usize,
    pub data_type: DataType,
    pub order: ByteOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDescriptor {
    pub format: String,
    pub version: u32,
    pub gap_threshold: u16,
    pub model: ConnectorModel,
    pub spans: Vec<ReadSpan>,
    pub decode_table: Vec<DecodeRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum DescriptorError {
    #[error("malformed descriptor: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a connector instance descriptor (format `{0}`)")]
    Format(String),
    #[error("unsupported descriptor version {0}")]
    Version(u32),
    #[error("inconsistent plan: {0}")]
    Plan(#[from] PlanError),
    #[error("decode table does not match the plan")]
    DecodeTable,
}

fn decode_table(plan: &BatchPlan) -> Vec<DecodeRow> {
    plan.spans
        .iter()
        .enumerate()
        .flat_map(|(i, span)| {
            span.fields.iter().map(move |f| DecodeRow {
                field: f.name.clone(),
                span: i,
                space: span.space,
                address: span.start + f.offset,
                width: f.data_type.width(),
                data_type: f.data_type,
                order: f.order,
            })
        })
        .collect()
}

impl InstanceDescriptor {
    pub fn from_plan(plan: &BatchPlan) -> Self {
        InstanceDescriptor {
            format: DESCRIPTOR_FORMAT.to_string(),
            version: DESCRIPTOR_VERSION,
            gap_threshold: plan.gap_threshold,
            model: plan.model.clone(),
            spans: plan.spans.clone(),
            decode_table: decode_table(plan),
        }
    }

    pub fn generate(model: &ConnectorModel, gap_threshold: u16) -> Self {
        Self::from_plan(&build_plan(model, gap_threshold))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DescriptorError> {
        let d: InstanceDescriptor = serde_json::from_str(text)?;
        if d.format != DESCRIPTOR_FORMAT {
            return Err(DescriptorError::Format(d.format));
        }
        if d.version != DESCRIPTOR_VERSION {
            return Err(DescriptorError::Version(d.version));
        }
        let plan = d.plan();
        plan.check()?;
        if decode_table(&plan) != d.decode_table {
            return Err(DescriptorError::DecodeTable);
        }
        Ok(d)
    }

    /// The stored plan, exactly as generated.
    pub fn plan(&self) -> BatchPlan {
        BatchPlan {
            model: self.model.clone(),
            gap_threshold: self.gap_threshold,
            spans: self.spans.clone(),
        }
    }
}
