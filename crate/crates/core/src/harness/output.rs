use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 11] = [
    "sweep_value",
    "n",
    "n_f",
    "interference_pa",
    "interference_au",
    "ibits_pa",
    "ibits_au",
    "success",
    "success_stderr",
    "n_samples",
    "seed",
];

/// One aggregated sweep point. Measures that were not requested are `None`
/// and written as empty fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub n: usize,
    pub n_f: Option<usize>,
    pub interference_pa: Option<f64>,
    pub interference_au: Option<f64>,
    pub ibits_pa: Option<f64>,
    pub ibits_au: Option<f64>,
    pub success: f64,
    pub success_stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::argument(format!(
                "unknown format '{s}' (csv or json)"
            ))),
        }
    }
}

/// Twelve significant digits, trailing zeros dropped; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.into()
        }
    } else {
        s
    }
}

fn parse_real_field(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s
            .parse()
            .map_err(|_| Error::argument(format!("'{s}' is not a number"))),
    }
}

impl ResultRow {
    fn fields(&self) -> [String; 11] {
        let opt_real = |v: Option<f64>| v.map(format_real).unwrap_or_default();
        [
            format_real(self.sweep_value),
            self.n.to_string(),
            self.n_f.map(|v| v.to_string()).unwrap_or_default(),
            opt_real(self.interference_pa),
            opt_real(self.interference_au),
            opt_real(self.ibits_pa),
            opt_real(self.ibits_au),
            format_real(self.success),
            format_real(self.success_stderr),
            self.n_samples.to_string(),
            self.seed.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        if f.len() != COLUMNS.len() {
            return Err(Error::argument(format!(
                "expected {} fields, got {}",
                COLUMNS.len(),
                f.len()
            )));
        }
        let opt_real = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_real_field(s).map(Some)
            }
        };
        let int = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::argument(format!("'{s}' is not an integer")))
        };
        Ok(Self {
            sweep_value: parse_real_field(f[0])?,
            n: int(f[1])? as usize,
            n_f: if f[2].is_empty() {
                None
            } else {
                Some(int(f[2])? as usize)
            },
            interference_pa: opt_real(f[3])?,
            interference_au: opt_real(f[4])?,
            ibits_pa: opt_real(f[5])?,
            ibits_au: opt_real(f[6])?,
            success: parse_real_field(f[7])?,
            success_stderr: parse_real_field(f[8])?,
            n_samples: int(f[9])? as usize,
            seed: int(f[10])?,
        })
    }

    /// JSON record with the CSV keys; reals carry the same twelve digits,
    /// non-finite values and absent fields are `null`.
    fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (key, text) in COLUMNS.iter().zip(self.fields()) {
            let value = if text.is_empty() {
                Value::Null
            } else if matches!(*key, "n" | "n_f" | "n_samples" | "seed") {
                Value::from(text.parse::<u64>().expect("integer field"))
            } else {
                text.parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            };
            map.insert((*key).to_string(), value);
        }
        Value::Object(map)
    }
}

/// Renders rows as CSV (header always present).
pub fn render_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::validation(format!("csv encoding failed: {e}"));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.fields()).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::validation(format!("csv encoding failed: {e}")))
}

pub fn render_json(rows: &[ResultRow]) -> Vec<u8> {
    let records: Vec<Value> = rows.iter().map(ResultRow::to_json).collect();
    let mut out = serde_json::to_vec_pretty(&records).expect("JSON values always serialise");
    out.push(b'\n');
    out
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => Ok(render_json(rows)),
    }
}

pub fn write_results(rows: &[ResultRow], path: &Path, format: OutputFormat) -> Result<()> {
    let bytes = render(rows, format)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = r
        .headers()
        .map_err(|e| Error::argument(format!("bad CSV header: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(Error::argument(
            "CSV header does not match the result columns",
        ));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::argument(format!("bad CSV record: {e}")))?;
            ResultRow::from_fields(&rec.iter().collect::<Vec<_>>())
        })
        .collect()
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            sweep_value: std::f64::consts::FRAC_PI_4,
            n: 4,
            n_f: None,
            interference_pa: Some(11.234_567_890_123_4),
            interference_au: Some(4.0),
            ibits_pa: Some(3.49),
            ibits_au: Some(f64::NEG_INFINITY),
            success: 0.961_319_160_461_425_8,
            success_stderr: 0.0,
            n_samples: 16,
            seed: u64::MAX,
        }
    }

    #[test]
    fn formats_twelve_digits() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_real(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(format_real(1.0e-9), "1e-9");
        assert_eq!(format_real(123_456_789_012_345.0), "1.23456789012e14");
        assert_eq!(format_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_real(-1e-300), "-1e-300");
    }

    #[test]
    fn empty_rows_give_header_only() {
        let text = String::from_utf8(render_csv(&[]).unwrap()).unwrap();
        assert_eq!(text, COLUMNS.join(",") + "\n");
    }

    #[test]
    fn csv_round_trip() {
        let r = row();
        let back = parse_csv(&render_csv(std::slice::from_ref(&r)).unwrap()).unwrap();
        assert_eq!(back.len(), 1);
        let b = &back[0];
        assert!((b.sweep_value - r.sweep_value).abs() < 1e-12);
        assert!((b.success - r.success).abs() < 1e-12);
        assert_eq!(b.n_f, None);
        assert_eq!(b.ibits_au, Some(f64::NEG_INFINITY));
        assert_eq!(b.seed, u64::MAX);
        // Re-rendering the parsed row reproduces the text exactly.
        assert_eq!(render_csv(&back).unwrap(), render_csv(&[r]).unwrap());
    }

    #[test]
    fn json_records_share_keys() {
        let mut other = row();
        other.n_f = Some(2);
        let v: Value = serde_json::from_slice(&render_json(&[row(), other])).unwrap();
        let arr = v.as_array().unwrap();
        for rec in arr {
            let keys: Vec<&String> = rec.as_object().unwrap().keys().collect();
            assert_eq!(keys.len(), COLUMNS.len());
            for c in COLUMNS {
                assert!(rec.get(c).is_some());
            }
        }
        assert_eq!(arr[0]["n_f"], Value::Null);
        assert_eq!(arr[1]["n_f"], Value::from(2u64));
    }
}
