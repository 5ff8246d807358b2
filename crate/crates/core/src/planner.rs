//! Batch read planning.
//!
//! A plan covers every model field with read spans so that one batch costs as
//! few requests as possible. Within a space, fields sorted by offset may share
//! a span when every run of unused registers between them is at most
//! `gap_threshold` long and the span stays within the protocol read limit.
//! Unused registers fetched inside a span are discarded after decoding.
//!
//! Spans are computed by dynamic programming over the sorted field list, so
//! the request count is the true minimum under that rule, not a greedy
//! approximation. Spans in one space never overlap unless overlapping fields
//! leave no other choice.

use alloc::string::String;
use alloc::vec::Vec;

use crate::codec::{ByteOrder, DataType};
use crate::model::{ConnectorModel, FieldSpec};
use crate::protocol::{RegisterSpace, RequestPdu};

/// Dead registers a span may absorb before a second request is cheaper.
pub const DEFAULT_GAP_THRESHOLD: u16 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoveredField {
    pub name: String,
    /// Offset of the field's first entry relative to the span start.
    pub offset: u16,
    pub data_type: DataType,
    pub order: ByteOrder,
}

impl CoveredField {
    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset as usize..self.offset as usize + self.data_type.width()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadSpan {
    pub space: RegisterSpace,
    pub start: u16,
    pub count: u16,
    pub fields: Vec<CoveredField>,
}

impl ReadSpan {
    pub fn end(&self) -> usize {
        self.start as usize + self.count as usize
    }

    pub fn request(&self) -> RequestPdu {
        RequestPdu::read(self.space, self.start, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchPlan {
    pub model: ConnectorModel,
    pub gap_threshold: u16,
    pub spans: Vec<ReadSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("field `{0}` is not covered by any span")]
    Uncovered(String),
    #[error("field `{0}` is covered more than once")]
    CoveredTwice(String),
    #[error("span entry `{0}` is not a model field")]
    UnknownField(String),
    #[error("field `{0}` does not match its model definition")]
    FieldMismatch(String),
    #[error("span {index} ({space}@{start}+{count}) violates the read limit or address space")]
    SpanBounds {
        index: usize,
        space: RegisterSpace,
        start: u16,
        count: u16,
    },
    #[error("spans are not sorted by space and start")]
    Unsorted,
}

impl BatchPlan {
    pub fn span_count(&self) -> usize {
        self.spans.len()
    }

    /// Total number of fields the plan decodes per batch.
    pub fn field_count(&self) -> usize {
        self.spans.iter().map(|s| s.fields.len()).sum()
    }

    /// Verifies coverage, limits and ordering, e.g. for a plan loaded from a
    /// descriptor rather than built in-process.
    pub fn check(&self) -> Result<(), PlanError> {
        let mut seen: Vec<&str> = Vec::new();
        for (index, span) in self.spans.iter().enumerate() {
            if span.count == 0
                || span.count > span.space.read_limit()
                || span.end() > 0x1_0000
            {
                return Err(PlanError::SpanBounds {
                    index,
                    space: span.space,
                    start: span.start,
                    count: span.count,
                });
            }
            for cf in &span.fields {
                let field = self
                    .model
                    .field(&cf.name)
                    .ok_or_else(|| PlanError::UnknownField(cf.name.clone()))?;
                if field.space != span.space
                    || field.data_type != cf.data_type
                    || self.model.order_of(field) != cf.order
                    || span.start as usize + cf.offset as usize != field.offset as usize
                    || cf.range().end > span.count as usize
                {
                    return Err(PlanError::FieldMismatch(cf.name.clone()));
                }
                if seen.contains(&cf.name.as_str()) {
                    return Err(PlanError::CoveredTwice(cf.name.clone()));
                }
                seen.push(&cf.name);
            }
        }
        if let Some(missing) = self
            .model
            .fields
            .iter()
            .find(|f| !seen.contains(&f.name.as_str()))
        {
            return Err(PlanError::Uncovered(missing.name.clone()));
        }
        if self
            .spans
            .windows(2)
            .any(|w| (w[0].space, w[0].start) > (w[1].space, w[1].start))
        {
            return Err(PlanError::Unsorted);
        }
        Ok(())
    }
}

/// Builds the minimal-request plan for `model`.
///
/// The model should pass [`crate::model::validate`] without errors. Fields
/// wider than a single request are still emitted as their own span, which
/// [`BatchPlan::check`] then rejects.
pub fn build_plan(model: &ConnectorModel, gap_threshold: u16) -> BatchPlan {
    let mut spans = Vec::new();
    for space in RegisterSpace::ALL {
        let mut fields: Vec<&FieldSpec> = model.fields.iter().filter(|f| f.space == space).collect();
        if fields.is_empty() {
            continue;
        }
        fields.sort_by(|a, b| {
            a.offset
                .cmp(&b.offset)
                .then(b.data_type.width().cmp(&a.data_type.width()))
                .then(a.name.cmp(&b.name))
        });
        let groups = partition(&fields, gap_threshold as usize, space.read_limit() as usize, true)
            .unwrap_or_else(|| {
                partition(&fields, gap_threshold as usize, space.read_limit() as usize, false)
                    .expect("overlapping spans always admit a partition")
            });
        for (lo, hi) in groups {
            let group = &fields[lo..=hi];
            let start = group[0].offset as usize;
            let end = group.iter().map(|f| f.end()).max().unwrap_or(start);
            spans.push(ReadSpan {
                space,
                start: start as u16,
                count: (end - start).min(u16::MAX as usize) as u16,
                fields: group
                    .iter()
                    .map(|f| CoveredField {
                        name: f.name.clone(),
                        offset: (f.offset as usize - start) as u16,
                        data_type: f.data_type,
                        order: model.order_of(f),
                    })
                    .collect(),
            });
        }
    }
    BatchPlan {
        model: model.clone(),
        gap_threshold,
        spans,
    }
}

/// Splits sorted `fields` into the fewest contiguous groups `(first, last)`
/// whose internal gaps are at most `gap` and whose extent is at most `limit`.
/// With `disjoint`, a cut is only allowed where the next field starts at or
/// after everything before it has ended.
fn partition(
    fields: &[&FieldSpec],
    gap: usize,
    limit: usize,
    disjoint: bool,
) -> Option<Vec<(usize, usize)>> {
    const NONE: usize = usize::MAX;
    let n = fields.len();
    // best[i]: fewest groups covering fields[i..]; choice[i]: last index of
    // the first group in that optimum.
    let mut best = alloc::vec![NONE; n + 1];
    let mut choice = alloc::vec![0usize; n];
    best[n] = 0;
    for i in (0..n).rev() {
        let start = fields[i].offset as usize;
        let mut end = fields[i].end();
        let mut j = i;
        loop {
            let cut_ok = j + 1 == n || !disjoint || fields[j + 1].offset as usize >= end;
            // j == i keeps a lone oversized field plannable
            let fits = end - start <= limit || j == i;
            if fits && cut_ok && best[j + 1] != NONE && best[j + 1] < best[i] {
                best[i] = best[j + 1] + 1;
                choice[i] = j;
            }
            if !fits || j + 1 == n {
                break;
            }
            let next = fields[j + 1];
            let hole = (next.offset as usize).saturating_sub(end);
            let next_end = end.max(next.end());
            if hole > gap || next_end - start > limit {
                break;
            }
            end = next_end;
            j += 1;
        }
    }
    if best[0] == NONE {
        return None;
    }
    let mut groups = Vec::with_capacity(best[0]);
    let mut i = 0;
    while i < n {
        groups.push((i, choice[i]));
        i = choice[i] + 1;
    }
    Some(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    fn model(fields: &[(&str, u16, DataType)]) -> ConnectorModel {
        ConnectorModel {
            device_name: "t".into(),
            endpoint: "127.0.0.1:502".into(),
            unit_id: 1,
            default_order: ByteOrder::BigEndian,
            fields: fields
                .iter()
                .map(|(n, o, t)| FieldSpec {
                    name: n.to_string(),
                    space: RegisterSpace::HoldingRegisters,
                    offset: *o,
                    data_type: *t,
                    order: None,
                    writable: false,
                })
                .collect(),
        }
    }

    #[test]
    fn gap_threshold_examples() {
        let m = model(&[
            ("a", 100, DataType::Float32),
            ("b", 102, DataType::Float32),
            ("c", 110, DataType::UInt16),
        ]);
        let wide = build_plan(&m, 8);
        assert_eq!(wide.spans.len(), 1);
        assert_eq!((wide.spans[0].start, wide.spans[0].count), (100, 11));
        assert_eq!(wide.spans[0].fields[2].offset, 10);
        wide.check().unwrap();

        let narrow = build_plan(&m, 4);
        assert_eq!(narrow.spans.len(), 2);
        assert_eq!((narrow.spans[0].start, narrow.spans[0].count), (100, 4));
        assert_eq!((narrow.spans[1].start, narrow.spans[1].count), (110, 1));
        narrow.check().unwrap();
    }

    #[test]
    fn ten_contiguous_floats_one_span() {
        let names: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
        let fields: Vec<(&str, u16, DataType)> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), (i * 2) as u16, DataType::Float32))
            .collect();
        let plan = build_plan(&model(&fields), DEFAULT_GAP_THRESHOLD);
        assert_eq!(plan.spans.len(), 1);
        assert_eq!((plan.spans[0].start, plan.spans[0].count), (0, 20));
        assert_eq!(plan.field_count(), 10);
    }

    #[test]
    fn empty_model_empty_plan() {
        let plan = build_plan(&model(&[]), 8);
        assert!(plan.spans.is_empty());
        plan.check().unwrap();
    }

    #[test]
    fn read_limit_splits() {
        let m = model(&[("a", 0, DataType::Float64), ("b", 122, DataType::Float32)]);
        let plan = build_plan(&m, 200);
        // 0..124 would be 124 registers, fine
        assert_eq!(plan.spans.len(), 1);
        let m = model(&[("a", 0, DataType::Float64), ("b", 124, DataType::Float32)]);
        let plan = build_plan(&m, 200);
        assert_eq!(plan.spans.len(), 2);
        plan.check().unwrap();
    }

    #[test]
    fn overlapping_fields_share_a_span() {
        let m = model(&[("whole", 10, DataType::UInt32), ("hi", 10, DataType::UInt16)]);
        let plan = build_plan(&m, 0);
        assert_eq!(plan.spans.len(), 1);
        assert_eq!(plan.spans[0].count, 2);
    }

    #[test]
    fn unavoidable_overlap_falls_back() {
        let m = model(&[
            ("a", 0, DataType::AsciiString(100)),
            ("b", 90, DataType::AsciiString(100)),
        ]);
        let plan = build_plan(&m, 0);
        assert_eq!(plan.spans.len(), 2);
        plan.check().unwrap();
    }

    #[test]
    fn spaces_planned_separately_and_sorted() {
        let mut m = model(&[("h", 0, DataType::UInt16)]);
        m.fields.push(FieldSpec {
            name: "c".into(),
            space: RegisterSpace::Coils,
            offset: 0,
            data_type: DataType::Bit,
            order: None,
            writable: true,
        });
        let plan = build_plan(&m, 8);
        assert_eq!(plan.spans.len(), 2);
        assert_eq!(plan.spans[0].space, RegisterSpace::Coils);
        plan.check().unwrap();
    }

    #[test]
    fn check_catches_tampering() {
        let m = model(&[("a", 0, DataType::Float32), ("b", 40, DataType::Float32)]);
        let mut plan = build_plan(&m, 8);
        plan.spans.pop();
        assert_eq!(plan.check(), Err(PlanError::Uncovered("b".into())));
        let mut plan = build_plan(&m, 8);
        plan.spans[0].fields[0].offset = 1;
        assert!(matches!(plan.check(), Err(PlanError::FieldMismatch(_))));
        let mut plan = build_plan(&m, 8);
        plan.spans[0].count = 126;
        assert!(matches!(plan.check(), Err(PlanError::SpanBounds { .. })));
    }
}
