//! Deterministic text output: floats at 17 significant digits, CSV with a
//! single header line and JSON whose non-finite values become strings.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use biharmonic_core::ExtReal;
use serde::Serializer;
use serde_json::value::RawValue;

use crate::error::{CliError, CliResult};

/// `x` with 17 significant digits, or `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Serializes a float as a JSON number with 17 significant digits, or as a
/// string when it is not finite.
pub fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(fmt_f64(*x)).map_err(serde::ser::Error::custom)?;
        serde::Serialize::serialize(&raw, s)
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}

pub fn fixed_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed(v, s),
        None => s.serialize_none(),
    }
}

pub fn fixed_pair<S: Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&Fixed(x.0))?;
    seq.serialize_element(&Fixed(x.1))?;
    seq.end()
}

pub fn ext_real<S: Serializer>(x: &ExtReal, s: S) -> Result<S::Ok, S::Error> {
    fixed(&x.to_f64(), s)
}

/// A float that serializes through [`fixed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed(pub f64);

impl serde::Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        fixed(&self.0, s)
    }
}

/// Where a command writes its artifact.
#[derive(Debug, Clone, Default)]
pub enum Sink {
    #[default]
    Stdout,
    File(std::path::PathBuf),
}

impl Sink {
    pub fn write_all(&self, text: &str) -> CliResult<()> {
        match self {
            Sink::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
            Sink::File(path) => write_file(path, text),
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = File::create(path).map_err(io_err)?;
    f.write_all(text.as_bytes()).map_err(io_err)
}

/// CSV text with `header` and float rows.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::Output(format!(
                "row has {} columns, header {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Pretty JSON followed by a newline.
pub fn json_text<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 5e-324, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn json_numbers_stay_numbers() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "fixed")]
            a: f64,
            #[serde(serialize_with = "fixed")]
            b: f64,
        }
        let s = serde_json::to_string(&T {
            a: 0.5,
            b: f64::INFINITY,
        })
        .unwrap();
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":"inf"}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_has_one_header_line() {
        let t = csv_table(&["x", "y"], vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(t, "x,y\n1.0000000000000000e0,2.0000000000000000e0\n");
        assert!(csv_table(&["x"], vec![vec![1.0, 2.0]]).is_err());
    }
}
