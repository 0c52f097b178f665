use std::io::Write;

use ptlab_core::rational::{self, Rational};
use serde_json::{Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A float with 17 significant digits, or `null` when not finite.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::from_str::<Number>(&float_text(x)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

pub fn float_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn exact(x: &Rational) -> Value {
    Value::String(rational::format(x))
}

/// A command result: the JSON document and its flat table form.
pub struct Report {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, String> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json).map_err(|e| e.to_string())?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(|e| e.to_string())?;
                for row in &self.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                w.into_inner().map_err(|e| e.to_string())
            }
        }
    }
}

pub fn write_to(path: Option<&std::path::Path>, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_precision() {
        assert_eq!(float_text(0.1), "1.0000000000000001e-1");
        assert_eq!(float(1.0).to_string(), "1.0000000000000000e+0");
        assert_eq!(float(f64::NAN), Value::Null);
        let back: f64 = float_text(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_quoting() {
        let r = Report { json: Value::Null, header: vec!["word", "x"], rows: vec![vec!["G(2,4),I".into(), "1".into()]] };
        assert_eq!(String::from_utf8(r.render(Format::Csv).unwrap()).unwrap(), "word,x\n\"G(2,4),I\",1\n");
    }
}
