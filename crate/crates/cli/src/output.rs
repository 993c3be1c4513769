//! Row sinks: JSON lines or CSV with a header row.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::config::Format;
use crate::error::CliError;

#[allow(clippy::large_enum_variant)] // one writer per run; boxing buys nothing
pub enum RowWriter<'a> {
    Json(&'a mut (dyn Write + Send)),
    Csv(csv::Writer<&'a mut (dyn Write + Send)>),
}

impl<'a> RowWriter<'a> {
    pub fn new(format: Format, out: &'a mut (dyn Write + Send)) -> Self {
        match format {
            Format::Json => RowWriter::Json(out),
            Format::Csv => RowWriter::Csv(csv::Writer::from_writer(out)),
        }
    }

    pub fn write<R: Serialize>(&mut self, row: &R) -> Result<(), CliError> {
        match self {
            RowWriter::Json(w) => {
                serde_json::to_writer(&mut **w, row)?;
                w.write_all(b"\n")?;
            }
            RowWriter::Csv(w) => w.serialize(row)?,
        }
        Ok(())
    }

    /// Header of a numeric table (CSV only; JSON rows are self-describing).
    pub fn begin_table(&mut self, header: &[String]) -> Result<(), CliError> {
        if let RowWriter::Csv(w) = self {
            w.write_record(header)?;
        }
        Ok(())
    }

    /// One numeric row; an `n` column is written as an integer and
    /// non-finite cells as null or empty.
    pub fn table_row(&mut self, header: &[String], cells: &[f64]) -> Result<(), CliError> {
        let text: Vec<Option<String>> = header
            .iter()
            .zip(cells)
            .map(|(h, &x)| match (h.as_str(), x.is_finite()) {
                (_, false) => None,
                ("n", true) => Some(format!("{}", x as u64)),
                (_, true) => Some(serde_json::Number::from_f64(x).expect("finite").to_string()),
            })
            .collect();
        match self {
            RowWriter::Json(w) => {
                let fields: Vec<String> = header
                    .iter()
                    .zip(&text)
                    .map(|(h, t)| format!("{}:{}", serde_json::Value::from(h.as_str()), t.as_deref().unwrap_or("null")))
                    .collect();
                writeln!(w, "{{{}}}", fields.join(","))?;
            }
            RowWriter::Csv(w) => w.write_record(text.iter().map(|t| t.as_deref().unwrap_or("")))?,
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self {
            RowWriter::Json(w) => w.flush()?,
            RowWriter::Csv(mut w) => w.flush()?,
        }
        Ok(())
    }
}

/// Lossless decimal string for counts that can outgrow 64 bits.
pub fn decimal<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Non-finite values become `null` (JSON) or an empty field (CSV).
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}
