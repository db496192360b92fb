use std::io::Write;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Column layout of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub table: String,
    pub columns: Vec<String>,
}

impl Schema {
    pub fn new(table: &str, columns: &[&str]) -> Self {
        Self { table: table.into(), columns: columns.iter().map(|c| c.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub schema: Schema,
    pub rows: Vec<Vec<f64>>,
}

fn check(rows: &[Vec<f64>], schema: &Schema) -> CliResult<()> {
    if schema.columns.is_empty() {
        return Err(CliError::Validation(format!("table '{}' has no columns", schema.table)));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != schema.columns.len() {
            return Err(CliError::Validation(format!(
                "row {i} has {} values, table '{}' has {} columns",
                r.len(),
                schema.table,
                schema.columns.len()
            )));
        }
    }
    Ok(())
}

/// 17 significant digits; non-finite values are spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct JsonRow<'a> {
    columns: &'a [String],
    values: &'a [f64],
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.values) {
            // serde_json writes the shortest exact decimal; non-finite becomes null
            map.serialize_entry(c, &v.is_finite().then_some(*v))?;
        }
        map.end()
    }
}

struct JsonReport<'a> {
    schema: &'a Schema,
    rows: &'a [Vec<f64>],
}

impl Serialize for JsonReport<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<JsonRow> = self.rows.iter().map(|r| JsonRow { columns: &self.schema.columns, values: r }).collect();
        let mut st = s.serialize_struct("Report", 4)?;
        st.serialize_field("schema_version", &SCHEMA_VERSION)?;
        st.serialize_field("table", &self.schema.table)?;
        st.serialize_field("columns", &self.schema.columns)?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

/// Writes a table as CSV (header first) or as a versioned JSON document.
pub fn emit_report<W: Write>(rows: &[Vec<f64>], schema: &Schema, format: Format, out: W) -> CliResult<()> {
    check(rows, schema)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&schema.columns)?;
            for r in rows {
                w.write_record(r.iter().map(|&x| format_float(x)))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &JsonReport { schema, rows })
                .map_err(|e| CliError::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads back a JSON report, checking the schema version and row shapes.
pub fn parse_json_report(text: &str) -> CliResult<Report> {
    let bad = |why: String| CliError::Validation(format!("report: {why}"));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let version = v.get("schema_version").and_then(Value::as_u64).ok_or_else(|| bad("missing schema_version".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(bad(format!("schema_version {version}, expected {SCHEMA_VERSION}")));
    }
    let table = v.get("table").and_then(Value::as_str).ok_or_else(|| bad("missing table".into()))?;
    let columns: Vec<String> = v
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing columns".into()))?
        .iter()
        .map(|c| c.as_str().map(String::from).ok_or_else(|| bad("column names must be strings".into())))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for (i, r) in v.get("rows").and_then(Value::as_array).ok_or_else(|| bad("missing rows".into()))?.iter().enumerate() {
        let obj = r.as_object().ok_or_else(|| bad(format!("row {i} is not an object")))?;
        if obj.len() != columns.len() {
            return Err(bad(format!("row {i} has {} fields, expected {}", obj.len(), columns.len())));
        }
        let row = columns
            .iter()
            .map(|c| match obj.get(c) {
                Some(Value::Null) => Ok(f64::NAN),
                Some(x) => x.as_f64().ok_or_else(|| bad(format!("row {i} field '{c}' is not a number"))),
                None => Err(bad(format!("row {i} lacks column '{c}'"))),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Report { schema: Schema { table: table.into(), columns }, rows })
}
