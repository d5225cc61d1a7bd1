//! Strict numeric CSV ingestion and emission.
//!
//! Datasets are plain CSV with a mandatory header row; the first column is
//! the response and every remaining column is a feature. Fields must be
//! finite decimal numbers with `.` as the separator and no digit grouping.
//! Values are written in shortest round-trip form, so emitted files
//! re-ingest bit-exactly.

use ndarray::{Array1, Array2};

use crate::design::GroupedDesign;
use crate::error::{Error, Result};
use crate::io::group_spec::GroupAssignment;

/// Parsed CSV: header names plus a dense numeric body.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn num_columns(&self) -> usize {
        self.header.len()
    }
}

/// Parses CSV bytes into a numeric table.
pub fn parse_csv_bytes(bytes: &[u8]) -> Result<NumericTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("bad CSV header: {e}")))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if header.len() < 2 {
        return Err(Error::Parse(
            "CSV needs a response column and at least one feature column".into(),
        ));
    }
    if header.iter().any(|h| h.is_empty()) {
        return Err(Error::Parse("CSV header has an empty column name".into()));
    }
    {
        let mut sorted = header.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != header.len() {
            return Err(Error::Parse("CSV header has duplicate column names".into()));
        }
    }

    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("bad CSV record: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                header.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len());
        for (field, name) in record.iter().zip(header.iter()) {
            let value: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column '{}': '{}' is not a number",
                    line + 2,
                    name,
                    field
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Parse(format!(
                    "row {}, column '{}': value must be finite",
                    line + 2,
                    name
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has a header but no data rows".into()));
    }
    Ok(NumericTable { header, rows })
}

/// Serializes response + features back to CSV, shortest round-trip floats.
pub fn write_csv(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

/// Shortest representation that parses back to the identical f64.
pub fn format_float(v: f64) -> String {
    // Display already gives the minimal round-trip decimal; integers get a
    // trailing `.0` so every field visibly reads as a real number.
    let mut s = format!("{v}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

/// Assembles a grouped design from a parsed table and a group assignment.
///
/// Feature columns are reordered into contiguous ascending group blocks
/// (stable within each group), since fusion adjacency follows group ids.
/// Returns the design together with the feature names in design order.
pub fn design_from_table(
    table: &NumericTable,
    groups: &GroupAssignment,
) -> Result<(GroupedDesign, Vec<String>)> {
    let feature_names = &table.header[1..];
    let order = groups.design_order(feature_names)?;
    let group_sizes = groups.contiguous_sizes()?;

    let n = table.rows.len();
    let r = order.len();
    let mut y = Array1::<f64>::zeros(n);
    let mut x = Array2::<f64>::zeros((n, r));
    for (i, row) in table.rows.iter().enumerate() {
        y[i] = row[0];
        for (k, &src) in order.iter().enumerate() {
            x[[i, k]] = row[1 + src];
        }
    }
    let names = order
        .iter()
        .map(|&src| feature_names[src].clone())
        .collect();
    Ok((GroupedDesign::new(y, x, group_sizes)?, names))
}
