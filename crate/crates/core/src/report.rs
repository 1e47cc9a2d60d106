//! Deterministic JSON and CSV output.

use std::str::FromStr;

use serde_json::{Number, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("this report has no {0} form")]
    NoTabularForm(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Anything the CLI can print.
pub trait Report {
    fn to_json(&self) -> Value;

    /// Tabular form, for grids and degree tables.
    fn to_csv(&self) -> Option<String> {
        None
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}

/// A JSON number carrying exactly the [`format_float`] text; `null` when not finite.
pub fn float_value(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format_float(x)).expect("formatted float is valid JSON"))
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: Format) -> Result<Vec<u8>, ReportError> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report.to_json()).expect("JSON values always serialize");
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => report.to_csv().map(String::into_bytes).ok_or(ReportError::NoTabularForm("csv")),
    }
}

impl Report for Value {
    fn to_json(&self) -> Value {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(float_value(1.0 / 3.0).to_string(), "3.3333333333333331e-1");
        assert_eq!(float_value(f64::NAN), Value::Null);
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn formats() {
        assert_eq!("json".parse::<Format>(), Ok(Format::Json));
        assert_eq!("xml".parse::<Format>(), Err(ReportError::UnsupportedFormat("xml".into())));
        let v = serde_json::json!({"b": 1, "a": float_value(2.5)});
        let bytes = emit_report(&v, Format::Json).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "{\n  \"b\": 1,\n  \"a\": 2.5000000000000000e+0\n}\n");
        assert_eq!(emit_report(&v, Format::Csv), Err(ReportError::NoTabularForm("csv")));
    }
}
