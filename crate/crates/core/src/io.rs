//! Serialization helpers. All floats are written with 17 significant digits
//! so decimal output round-trips bit-exactly back to `f64`.

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::boxes::NsBox;
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits (`d.dddddddddddddddde±dd`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// JSON formatter that writes every float with 17 significant digits.
struct SigFigFormatter;

impl Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serializes any value to JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

impl NsBox {
    /// `{"p": [16 floats in canonical (x, y, a, b) order]}`.
    pub fn to_json(&self) -> String {
        to_json(self).expect("box serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One CSV line of the 16 table entries in canonical order.
    pub fn to_csv_line(&self) -> String {
        self.table()
            .iter()
            .map(|&x| fmt_f64(x))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let values: Vec<f64> = line
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad float {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let table: [f64; 16] = values
            .try_into()
            .map_err(|v: Vec<f64>| Error::Parse(format!("expected 16 entries, got {}", v.len())))?;
        Ok(Self::from_table(table))
    }
}
