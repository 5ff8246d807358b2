//! Declarative connector models.
//!
//! A model names a device, how to reach it, the byte order its multi-register
//! values use, and a flat table of fields with their register offsets. The
//! document format (version 1) is line based:
//!
//! ```text
//! # comments start with '#'
//! version = 1
//!
//! [device]
//! name = "EEM-MA370"
//! endpoint = "192.168.1.20:502"
//! unit = 1                  # optional, defaults to 1
//! order = little            # big | little | big-swap | little-swap | sentron | eem
//!
//! [fields]
//! voltage_l1: input@0 float32
//! setpoint:   holding@100 float32 order=big rw
//! relay:      coil@3 bit rw
//! serial:     holding@200 string(8)
//! ```
//!
//! Field rows are `name: <space>@<offset> <type> [order=<order>] [rw|ro]`.
//! Spaces are `coil`, `discrete`, `input` and `holding`. Field values must be
//! scalar: braces, brackets, sub-tables and indented continuation lines are
//! rejected because models are flat.
//!
//! Applicability follows the register spaces: `bit` fields live in coil or
//! discrete-input space, every other type in input or holding registers, and
//! only coil and holding fields can be `rw`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::codec::{ByteOrder, DataType};
use crate::protocol::RegisterSpace;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const ADDRESS_SPACE: usize = 0x1_0000;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldSpec {
    pub name: String,
    pub space: RegisterSpace,
    pub offset: u16,
    pub data_type: DataType,
    /// Overrides the model's default order when set.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub order: Option<ByteOrder>,
    pub writable: bool,
}

impl FieldSpec {
    /// Addresses `[offset, end)` occupied in the field's space.
    pub fn end(&self) -> usize {
        self.offset as usize + self.data_type.width()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConnectorModel {
    pub device_name: String,
    /// `host:port`.
    pub endpoint: String,
    pub unit_id: u8,
    pub default_order: ByteOrder,
    pub fields: Vec<FieldSpec>,
}

impl ConnectorModel {
    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Order a field is encoded with once defaults are applied.
    pub fn order_of(&self, field: &FieldSpec) -> ByteOrder {
        field.order.unwrap_or(self.default_order)
    }
}

/// Renders the canonical version-1 document; parsing it yields `self`.
impl fmt::Display for ConnectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version = {MODEL_FORMAT_VERSION}")?;
        writeln!(f)?;
        writeln!(f, "[device]")?;
        writeln!(f, "name = {}", quote(&self.device_name))?;
        writeln!(f, "endpoint = {}", quote(&self.endpoint))?;
        writeln!(f, "unit = {}", self.unit_id)?;
        writeln!(f, "order = {}", self.default_order)?;
        writeln!(f)?;
        writeln!(f, "[fields]")?;
        for field in &self.fields {
            write!(
                f,
                "{}: {}@{} {}",
                field.name, field.space, field.offset, field.data_type
            )?;
            if let Some(order) = field.order {
                write!(f, " order={order}")?;
            }
            writeln!(f, " {}", if field.writable { "rw" } else { "ro" })?;
        }
        Ok(())
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ModelError {
    /// 1-based line number; 0 for document-level problems.
    pub line: usize,
    pub kind: ModelErrorKind,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            0 => write!(f, "{}", self.kind),
            n => write!(f, "line {n}: {}", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelErrorKind {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown section `[{0}]`")]
    UnknownSection(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing mandatory device key `{0}`")]
    MissingKey(&'static str),
    #[error("unsupported model version {0}")]
    UnsupportedVersion(String),
    #[error("malformed number `{text}` for `{key}`")]
    MalformedNumber { key: String, text: String },
    #[error("malformed endpoint `{0}` (expected host:port)")]
    MalformedEndpoint(String),
    #[error("unknown byte order `{0}`")]
    UnknownOrder(String),
    #[error("malformed line `{0}`")]
    Syntax(String),
    #[error("invalid field name `{0}`")]
    InvalidName(String),
    #[error("field `{field}`: nested types prohibited")]
    NestedType { field: String },
    #[error("field `{field}`: missing register space")]
    MissingSpace { field: String },
    #[error("field `{field}`: missing register offset")]
    MissingOffset { field: String },
    #[error("field `{field}`: missing data type")]
    MissingType { field: String },
    #[error("field `{field}`: unknown register space `{space}`")]
    UnknownSpace { field: String, space: String },
    #[error("field `{field}`: unknown data type `{data_type}`")]
    UnknownType { field: String, data_type: String },
    #[error("field `{field}`: malformed offset `{text}`")]
    MalformedOffset { field: String, text: String },
    #[error("field `{field}`: unexpected attribute `{attribute}`")]
    UnknownAttribute { field: String, attribute: String },
}

impl ModelError {
    /// Field the error refers to, when there is one.
    pub fn field(&self) -> Option<&str> {
        match &self.kind {
            ModelErrorKind::NestedType { field }
            | ModelErrorKind::MissingSpace { field }
            | ModelErrorKind::MissingOffset { field }
            | ModelErrorKind::MissingType { field }
            | ModelErrorKind::UnknownSpace { field, .. }
            | ModelErrorKind::UnknownType { field, .. }
            | ModelErrorKind::MalformedOffset { field, .. }
            | ModelErrorKind::UnknownAttribute { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(PartialEq)]
enum Section {
    Top,
    Device,
    Fields,
}

fn err(line: usize, kind: ModelErrorKind) -> ModelError {
    ModelError { line, kind }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_quotes && !escaped => {
                escaped = true;
                continue;
            }
            '"' if !escaped => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
        escaped = false;
    }
    line
}

fn unquote(raw: &str) -> String {
    let raw = raw.trim();
    match raw.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
        Some(inner) => {
            let mut out = String::with_capacity(inner.len());
            let mut chars = inner.chars();
            while let Some(c) = chars.next() {
                if c == '\\' {
                    if let Some(next) = chars.next() {
                        out.push(next);
                    }
                } else {
                    out.push(c);
                }
            }
            out
        }
        None => raw.to_string(),
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn parse_number(text: &str) -> Option<u64> {
    let t = text.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => t.parse().ok(),
    }
}

/// Checks an endpoint has the `host:port` shape with a numeric port.
pub fn is_valid_endpoint(endpoint: &str) -> bool {
    match endpoint.rsplit_once(':') {
        Some((host, port)) => !host.is_empty() && port.parse::<u16>().is_ok(),
        None => false,
    }
}

/// Parses a model document. Defaults (unit id, per-field order) are resolved
/// by [`ConnectorModel::order_of`]; semantic checks are left to [`validate`].
pub fn parse_model(document: &str) -> Result<ConnectorModel, ModelError> {
    let mut section = Section::Top;
    let mut device: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    let mut fields = Vec::new();
    let mut last_field_line = None;

    for (idx, raw_line) in document.lines().enumerate() {
        let lineno = idx + 1;
        let without_comment = strip_comment(raw_line);
        let line = without_comment.trim();
        if line.is_empty() {
            continue;
        }
        let indented = without_comment.starts_with([' ', '\t']);

        if let Some(header) = line.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .ok_or_else(|| err(lineno, ModelErrorKind::Syntax(line.to_string())))?
                .trim();
            section = match name {
                "device" => Section::Device,
                "fields" => Section::Fields,
                other => {
                    if let Some(field) = other.strip_prefix("fields.") {
                        return Err(err(
                            lineno,
                            ModelErrorKind::NestedType {
                                field: field.to_string(),
                            },
                        ));
                    }
                    return Err(err(lineno, ModelErrorKind::UnknownSection(other.to_string())));
                }
            };
            last_field_line = None;
            continue;
        }

        match section {
            Section::Top | Section::Device => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(lineno, ModelErrorKind::Syntax(line.to_string())))?;
                let key = key.trim();
                let value = unquote(value);
                let canonical: &'static str = match (&section, key) {
                    (Section::Top, "version") => "version",
                    (Section::Device, "name") => "name",
                    (Section::Device, "endpoint") => "endpoint",
                    (Section::Device, "unit") | (Section::Device, "unit_id") => "unit",
                    (Section::Device, "order") | (Section::Device, "byte_order") => "order",
                    _ => return Err(err(lineno, ModelErrorKind::UnknownKey(key.to_string()))),
                };
                if device.insert(canonical, (lineno, value)).is_some() {
                    return Err(err(lineno, ModelErrorKind::DuplicateKey(key.to_string())));
                }
            }
            Section::Fields => {
                if indented {
                    if let Some(owner) = last_field_line.as_ref() {
                        return Err(err(
                            lineno,
                            ModelErrorKind::NestedType {
                                field: String::clone(owner),
                            },
                        ));
                    }
                }
                let field = parse_field_row(lineno, line)?;
                last_field_line = Some(field.name.clone());
                fields.push(field);
            }
        }
    }

    if let Some((line, v)) = device.get("version") {
        if v.trim() != "1" {
            return Err(err(*line, ModelErrorKind::UnsupportedVersion(v.clone())));
        }
    }
    let take = |key: &'static str| device.get(key).ok_or(err(0, ModelErrorKind::MissingKey(key)));

    let (_, device_name) = take("name")?;
    let (endpoint_line, endpoint) = take("endpoint")?;
    if !is_valid_endpoint(endpoint) {
        return Err(err(
            *endpoint_line,
            ModelErrorKind::MalformedEndpoint(endpoint.clone()),
        ));
    }
    let (order_line, order_text) = take("order")?;
    let default_order = ByteOrder::parse(order_text)
        .ok_or_else(|| err(*order_line, ModelErrorKind::UnknownOrder(order_text.clone())))?;
    let unit_id = match device.get("unit") {
        Some((line, text)) => parse_number(text)
            .and_then(|u| u8::try_from(u).ok())
            .ok_or_else(|| {
                err(
                    *line,
                    ModelErrorKind::MalformedNumber {
                        key: "unit".to_string(),
                        text: text.clone(),
                    },
                )
            })?,
        None => 1,
    };

    Ok(ConnectorModel {
        device_name: device_name.clone(),
        endpoint: endpoint.clone(),
        unit_id,
        default_order,
        fields,
    })
}

fn parse_field_row(lineno: usize, line: &str) -> Result<FieldSpec, ModelError> {
    let (name, rest) = line
        .split_once(':')
        .or_else(|| line.split_once('='))
        .ok_or_else(|| err(lineno, ModelErrorKind::Syntax(line.to_string())))?;
    let name = name.trim();
    if !is_identifier(name) {
        return Err(err(lineno, ModelErrorKind::InvalidName(name.to_string())));
    }
    let field = || name.to_string();
    let rest = rest.trim();
    if rest.is_empty() || rest.contains(['{', '}', '[', ']']) {
        return Err(err(lineno, ModelErrorKind::NestedType { field: field() }));
    }

    let mut tokens = rest.split_whitespace();
    let location = tokens.next().unwrap_or_default();
    let (space_text, offset_text) = match location.split_once('@') {
        Some((s, o)) => (s, Some(o)),
        None => (location, None),
    };
    if space_text.is_empty() {
        return Err(err(lineno, ModelErrorKind::MissingSpace { field: field() }));
    }
    let space = match RegisterSpace::from_keyword(space_text) {
        Some(space) => space,
        None if offset_text.is_none() && DataType::parse(space_text).is_some() => {
            return Err(err(lineno, ModelErrorKind::MissingSpace { field: field() }))
        }
        None => {
            return Err(err(
                lineno,
                ModelErrorKind::UnknownSpace {
                    field: field(),
                    space: space_text.to_string(),
                },
            ))
        }
    };
    let offset_text = match offset_text {
        Some(o) if !o.is_empty() => o,
        _ => return Err(err(lineno, ModelErrorKind::MissingOffset { field: field() })),
    };
    let offset = parse_number(offset_text)
        .and_then(|o| u16::try_from(o).ok())
        .ok_or_else(|| {
            err(
                lineno,
                ModelErrorKind::MalformedOffset {
                    field: field(),
                    text: offset_text.to_string(),
                },
            )
        })?;

    let type_text = tokens
        .next()
        .ok_or_else(|| err(lineno, ModelErrorKind::MissingType { field: field() }))?;
    if matches!(
        type_text.to_ascii_lowercase().as_str(),
        "struct" | "record" | "object" | "array" | "list" | "map"
    ) {
        return Err(err(lineno, ModelErrorKind::NestedType { field: field() }));
    }
    let data_type = DataType::parse(type_text).ok_or_else(|| {
        err(
            lineno,
            ModelErrorKind::UnknownType {
                field: field(),
                data_type: type_text.to_string(),
            },
        )
    })?;

    let mut order = None;
    let mut writable = false;
    for attr in tokens {
        let lower = attr.to_ascii_lowercase();
        if lower == "rw" || lower == "writable" {
            writable = true;
        } else if lower == "ro" || lower == "readonly" {
            writable = false;
        } else if let Some(o) = lower.strip_prefix("order=") {
            order = Some(
                ByteOrder::parse(o)
                    .ok_or_else(|| err(lineno, ModelErrorKind::UnknownOrder(o.to_string())))?,
            );
        } else {
            return Err(err(
                lineno,
                ModelErrorKind::UnknownAttribute {
                    field: field(),
                    attribute: attr.to_string(),
                },
            ));
        }
    }

    Ok(FieldSpec {
        name: name.to_string(),
        space,
        offset,
        data_type,
        order,
        writable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    DuplicateName,
    TypeNotApplicable,
    ExceedsAddressSpace,
    ExceedsReadLimit,
    EmptyString,
    ReadOnlySpace,
    Overlap,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::DuplicateName => "duplicate field name",
            Rule::TypeNotApplicable => "type not applicable to space",
            Rule::ExceedsAddressSpace => "exceeds address space",
            Rule::ExceedsReadLimit => "exceeds single-request read limit",
            Rule::EmptyString => "string occupies no registers",
            Rule::ReadOnlySpace => "writable field in read-only space",
            Rule::Overlap => "overlaps another field",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::Overlap => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub severity: Severity,
    pub field: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{level}: field `{}`: {} ({})",
            self.field,
            self.rule.describe(),
            self.detail
        )
    }
}

fn violation(field: &FieldSpec, rule: Rule, detail: String) -> Violation {
    Violation {
        severity: rule.severity(),
        field: field.name.clone(),
        rule,
        detail,
    }
}

/// Checks every model constraint. The result is sorted, so it does not depend
/// on field declaration order. Overlaps are warnings; everything else is an
/// error.
pub fn validate(model: &ConnectorModel) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &model.fields {
        *seen.entry(f.name.as_str()).or_default() += 1;
    }
    for (name, count) in &seen {
        if *count > 1 {
            out.push(Violation {
                severity: Severity::Error,
                field: name.to_string(),
                rule: Rule::DuplicateName,
                detail: format!("declared {count} times"),
            });
        }
    }

    for f in &model.fields {
        let bit_type = f.data_type == DataType::Bit;
        if bit_type != f.space.is_bit_space() {
            out.push(violation(
                f,
                Rule::TypeNotApplicable,
                format!("{} in {} space", f.data_type, f.space),
            ));
        }
        if f.data_type == DataType::AsciiString(0) {
            out.push(violation(f, Rule::EmptyString, format!("{}", f.data_type)));
        }
        if f.end() > ADDRESS_SPACE {
            out.push(violation(
                f,
                Rule::ExceedsAddressSpace,
                format!(
                    "offset {} + {} > {ADDRESS_SPACE}",
                    f.offset,
                    f.data_type.width()
                ),
            ));
        }
        if f.data_type.width() > f.space.read_limit() as usize {
            out.push(violation(
                f,
                Rule::ExceedsReadLimit,
                format!("{} entries > {}", f.data_type.width(), f.space.read_limit()),
            ));
        }
        if f.writable && !f.space.is_writable() {
            out.push(violation(f, Rule::ReadOnlySpace, format!("{} space", f.space)));
        }
    }

    let mut by_space: Vec<&FieldSpec> = model.fields.iter().collect();
    by_space.sort_by(|a, b| (a.space, a.offset, &a.name).cmp(&(b.space, b.offset, &b.name)));
    for (i, a) in by_space.iter().enumerate() {
        for b in &by_space[i + 1..] {
            if b.space != a.space || b.offset as usize >= a.end() {
                break;
            }
            let (first, second) = if a.name <= b.name { (a, b) } else { (b, a) };
            out.push(violation(
                first,
                Rule::Overlap,
                format!(
                    "shares {} registers with `{}`",
                    a.end().min(b.end()) - b.offset as usize,
                    second.name
                ),
            ));
        }
    }

    out.sort();
    out
}

/// True when `validate` reports no error-class violations.
pub fn is_valid(model: &ConnectorModel) -> bool {
    validate(model).iter().all(|v| !v.is_error())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "[device]\nname = meter\nendpoint = 127.0.0.1:5020\norder = big\n[fields]\n";

    fn doc(rows: &str) -> String {
        format!("{HEADER}{rows}")
    }

    #[test]
    fn single_float_field() {
        let model = parse_model(&doc("voltage: holding@0 float32\n")).unwrap();
        assert_eq!(model.fields.len(), 1);
        let f = &model.fields[0];
        assert_eq!(f.offset, 0);
        assert_eq!(f.data_type, DataType::Float32);
        assert_eq!(f.space, RegisterSpace::HoldingRegisters);
        assert!(!f.writable);
        assert_eq!(model.order_of(f), ByteOrder::BigEndian);
        assert_eq!(model.unit_id, 1);
    }

    #[test]
    fn missing_offset_names_field() {
        for row in ["voltage: holding float32\n", "voltage: holding@ float32\n"] {
            let e = parse_model(&doc(row)).unwrap_err();
            assert_eq!(
                e.kind,
                ModelErrorKind::MissingOffset {
                    field: "voltage".into()
                }
            );
            assert_eq!(e.line, 6);
            assert!(e.to_string().contains("voltage"));
        }
    }

    #[test]
    fn nested_values_rejected() {
        let cases = [
            "phase: { voltage: holding@0 float32 }\n",
            "phase: [holding@0 float32, holding@2 float32]\n",
            "phase: holding@0 struct\n",
            "phase: holding@0 float32\n  voltage: holding@0 float32\n",
        ];
        for row in cases {
            let e = parse_model(&doc(row)).unwrap_err();
            assert!(
                matches!(e.kind, ModelErrorKind::NestedType { .. }),
                "{row:?} -> {e}"
            );
            assert!(e.to_string().contains("nested types prohibited"));
        }
        let sub_table = format!("{HEADER}[fields.phase]\nvoltage: holding@0 float32\n");
        assert!(matches!(
            parse_model(&sub_table).unwrap_err().kind,
            ModelErrorKind::NestedType { .. }
        ));
    }

    #[test]
    fn header_errors() {
        let unknown = "[device]\nname = m\nendpoint = h:1\norder = big\ncolour = red\n";
        assert_eq!(
            parse_model(unknown).unwrap_err().kind,
            ModelErrorKind::UnknownKey("colour".into())
        );
        let no_order = "[device]\nname = m\nendpoint = h:1\n";
        assert_eq!(
            parse_model(no_order).unwrap_err().kind,
            ModelErrorKind::MissingKey("order")
        );
        let bad_unit = "[device]\nname = m\nendpoint = h:1\norder = big\nunit = 300\n";
        assert!(matches!(
            parse_model(bad_unit).unwrap_err().kind,
            ModelErrorKind::MalformedNumber { .. }
        ));
        let bad_endpoint = "[device]\nname = m\nendpoint = nowhere\norder = big\n";
        assert!(matches!(
            parse_model(bad_endpoint).unwrap_err().kind,
            ModelErrorKind::MalformedEndpoint(_)
        ));
        let bad_offset = doc("v: holding@12x float32\n");
        assert!(matches!(
            parse_model(&bad_offset).unwrap_err().kind,
            ModelErrorKind::MalformedOffset { .. }
        ));
        let v2 = format!("version = 2\n{HEADER}");
        assert!(matches!(
            parse_model(&v2).unwrap_err().kind,
            ModelErrorKind::UnsupportedVersion(_)
        ));
    }

    #[test]
    fn bit_in_holding_not_applicable() {
        let model = parse_model(&doc("flag: holding@0 bit\n")).unwrap();
        let v = validate(&model);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::TypeNotApplicable);
        assert!(v[0].to_string().contains("type not applicable to space"));
    }

    #[test]
    fn float_at_last_register_exceeds_space() {
        let model = parse_model(&doc("v: holding@65535 float32\n")).unwrap();
        let v = validate(&model);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::ExceedsAddressSpace);
        assert!(v[0].to_string().contains("exceeds address space"));
    }

    #[test]
    fn high_device_offset_is_fine() {
        let model = parse_model(&doc("energy: holding@57723 uint16\n")).unwrap();
        assert!(validate(&model).is_empty());
        let model = parse_model(&doc("energy: input@57722 float32\n")).unwrap();
        assert!(validate(&model).is_empty());
    }

    #[test]
    fn writable_read_only_space() {
        let model = parse_model(&doc("x: discrete@0 bit rw\ny: input@0 uint16 rw\n")).unwrap();
        let v = validate(&model);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.rule == Rule::ReadOnlySpace));
    }

    #[test]
    fn overlap_is_warning_and_duplicates_error() {
        let model =
            parse_model(&doc("a: holding@0 float32\nb: holding@1 uint16\na: input@0 uint16\n"))
                .unwrap();
        let v = validate(&model);
        assert!(v
            .iter()
            .any(|v| v.rule == Rule::Overlap && v.severity == Severity::Warning));
        assert!(v.iter().any(|v| v.rule == Rule::DuplicateName && v.is_error()));
        let only_overlap = parse_model(&doc("a: holding@0 float32\nb: holding@1 uint16\n")).unwrap();
        assert!(is_valid(&only_overlap));
    }

    #[test]
    fn display_round_trips() {
        let text = doc(
            "a: holding@0 float32 order=little rw\nb: coil@3 bit rw\nc: input@9 string(4)\nd: discrete@1 bool\n",
        );
        let model = parse_model(&text).unwrap();
        assert_eq!(parse_model(&model.to_string()).unwrap(), model);
    }

    #[test]
    fn comments_and_quotes() {
        let text = "# meter\n[device]\nname = \"Meter # 1\" # trailing\nendpoint = \"10.0.0.1:502\"\norder = eem\nunit = 0x11\n";
        let model = parse_model(text).unwrap();
        assert_eq!(model.device_name, "Meter # 1");
        assert_eq!(model.unit_id, 0x11);
        assert_eq!(model.default_order, ByteOrder::LittleEndian);
        assert!(model.fields.is_empty());
    }
}
